//! Weierstrass models, invariants, reduction types, point counting, and the
//! Hecke-generated newform coefficients a_n of f_E.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::scalar::Rat;
use crate::error::CurveError;

/// Rational elliptic curve in general Weierstrass form with cached
/// invariants. Construct through [`EllipticCurve::new`]; the supplied model
/// is trusted to be minimal (no Tate's algorithm here).
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticCurve {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
    pub conductor: u64,
    pub manin: u32,
    pub label: Option<String>,
}

impl EllipticCurve {
    pub fn new(a: [i64; 5], conductor: u64, label: Option<&str>) -> Result<Self, CurveError> {
        Self::new_big(a.map(BigInt::from), conductor, label)
    }

    pub fn new_big(a: [BigInt; 5], conductor: u64, label: Option<&str>) -> Result<Self, CurveError> {
        let [a1, a2, a3, a4, a6] = a;
        let b2 = &a1 * &a1 + 4 * &a2;
        let b4 = 2 * &a4 + &a1 * &a3;
        let b6 = &a3 * &a3 + 4 * &a6;
        let b8 = &a1 * &a1 * &a6 + 4 * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3
            - &a4 * &a4;
        let c4 = &b2 * &b2 - 24 * &b4;
        let c6 = -&b2 * &b2 * &b2 + 36 * &b2 * &b4 - 216 * &b6;
        let b2b8: BigInt = &b2 * &b2 * &b8;
        let disc: BigInt =
            -b2b8 - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6;
        if disc.is_zero() {
            return Err(CurveError::SingularCurve);
        }
        debug_assert_eq!(BigInt::from(4) * &b8, &b2 * &b6 - &b4 * &b4);
        debug_assert_eq!(&c4 * &c4 * &c4 - &c6 * &c6, BigInt::from(1728) * &disc);
        let e = EllipticCurve {
            a1,
            a2,
            a3,
            a4,
            a6,
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
            conductor,
            manin: 1,
            label: label.map(String::from),
        };
        e.validate_conductor()?;
        Ok(e)
    }

    pub fn with_manin(mut self, m: u32) -> Self {
        self.manin = m;
        self
    }

    /// The supplied conductor must be consistent with the reduction data of
    /// the (trusted-minimal) model.
    fn validate_conductor(&self) -> Result<(), CurveError> {
        let n = self.conductor;
        if n == 0 {
            return Err(CurveError::ConductorMismatch {
                n,
                p: 0,
                reason: "conductor must be positive".into(),
            });
        }
        let mut m = n;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                self.check_prime(n, p, e)?;
            }
            p += 1;
        }
        if m > 1 {
            self.check_prime(n, m, 1)?;
        }
        Ok(())
    }

    fn check_prime(&self, n: u64, p: u64, e: u32) -> Result<(), CurveError> {
        let pb = BigInt::from(p);
        if (&self.disc % &pb).is_zero() {
            let red = self.reduction_type(p);
            let mult = matches!(
                red,
                ReductionType::SplitMultiplicative | ReductionType::NonsplitMultiplicative
            );
            if e == 1 && !mult {
                return Err(CurveError::ConductorMismatch {
                    n,
                    p,
                    reason: "ord_p(N) = 1 but reduction is not multiplicative".into(),
                });
            }
            if e > 1 && mult {
                return Err(CurveError::ConductorMismatch {
                    n,
                    p,
                    reason: "ord_p(N) > 1 but reduction is multiplicative".into(),
                });
            }
            Ok(())
        } else {
            Err(CurveError::ConductorMismatch {
                n,
                p,
                reason: "p divides N but not the discriminant".into(),
            })
        }
    }

    /// j-invariant c4^3 / disc.
    pub fn j_invariant(&self) -> Rat {
        Rat::new(&self.c4 * &self.c4 * &self.c4, self.disc.clone())
    }

    /// Exact shadows of the lattice invariants: g2 = c4/12, g3 = c6/216.
    pub fn g2_exact(&self) -> Rat {
        Rat::new(self.c4.clone(), BigInt::from(12))
    }

    pub fn g3_exact(&self) -> Rat {
        Rat::new(self.c6.clone(), BigInt::from(216))
    }

    pub fn reduction_type(&self, p: u64) -> ReductionType {
        let pb = BigInt::from(p);
        if !(&self.disc % &pb).is_zero() {
            return ReductionType::Good;
        }
        if (&self.c4 % &pb).is_zero() {
            return ReductionType::Additive;
        }
        // multiplicative: find the node over F_p and test whether the
        // tangent directions split, i.e. t^2 + a1 t - (3x0 + a2) has a root
        let (x0, y0) = self
            .singular_point_mod_p(p)
            .expect("multiplicative reduction must have a node");
        let a1 = self.a1.mod_floor(&pb).to_u64().unwrap();
        let a2 = self.a2.mod_floor(&pb).to_u64().unwrap();
        let c = (3 * x0 % p + a2) % p;
        let _ = y0;
        let mut split = false;
        for t in 0..p {
            // t^2 + a1 t - c = 0 mod p
            if (t * t % p + a1 * t % p + (p - c) % p) % p == 0 {
                split = true;
                break;
            }
        }
        if split {
            ReductionType::SplitMultiplicative
        } else {
            ReductionType::NonsplitMultiplicative
        }
    }

    fn singular_point_mod_p(&self, p: u64) -> Option<(u64, u64)> {
        let pb = BigInt::from(p);
        let a1 = self.a1.mod_floor(&pb).to_u64().unwrap();
        let a2 = self.a2.mod_floor(&pb).to_u64().unwrap();
        let a3 = self.a3.mod_floor(&pb).to_u64().unwrap();
        let a4 = self.a4.mod_floor(&pb).to_u64().unwrap();
        let a6 = self.a6.mod_floor(&pb).to_u64().unwrap();
        let f = |x: u64, y: u64| -> u64 {
            let lhs = (y * y % p + a1 * x % p * y % p + a3 * y) % p;
            let rhs = (((x * x % p * x) % p + a2 * x % p * x) % p + (a4 * x + a6) % p) % p;
            (lhs + p - rhs % p) % p
        };
        // partial derivatives vanish at the singular point
        let fx = |x: u64, y: u64| -> u64 {
            let lhs = a1 * y % p;
            let rhs = ((3 * x % p * x) % p + 2 * a2 * x % p + a4) % p;
            (lhs + p - rhs) % p
        };
        let fy = |x: u64, y: u64| -> u64 { (2 * y % p + a1 * x % p + a3) % p };
        for x in 0..p {
            for y in 0..p {
                if f(x, y) == 0 && fx(x, y) == 0 && fy(x, y) == 0 {
                    return Some((x, y));
                }
            }
        }
        None
    }

    /// Count points over F_p on the general model via the quadratic in y.
    fn count_points(&self, p: u64) -> u64 {
        if p == 2 {
            let pb = BigInt::from(2);
            let vals: Vec<u64> = [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
                .iter()
                .map(|a| a.mod_floor(&pb).to_u64().unwrap())
                .collect();
            let (a1, a2, a3, a4, a6) = (vals[0], vals[1], vals[2], vals[3], vals[4]);
            let mut count = 1; // infinity
            for x in 0..2u64 {
                for y in 0..2u64 {
                    let lhs = (y * y + a1 * x * y + a3 * y) % 2;
                    let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % 2;
                    if lhs == rhs {
                        count += 1;
                    }
                }
            }
            return count;
        }
        let pb = BigInt::from(p);
        let vals: Vec<i128> = [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
            .iter()
            .map(|a| a.mod_floor(&pb).to_i128().unwrap())
            .collect();
        let (a1, a2, a3, a4, a6) = (vals[0], vals[1], vals[2], vals[3], vals[4]);
        let p128 = p as i128;
        // quadratic residue table
        let mut is_qr = vec![false; p as usize];
        for t in 0..p128 {
            is_qr[((t * t) % p128) as usize] = true;
        }
        // complete the square: count solutions of
        // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 mod p
        let b2 = (a1 * a1 + 4 * a2).rem_euclid(p128);
        let b4 = (2 * a4 + a1 * a3).rem_euclid(p128);
        let b6 = (a3 * a3 + 4 * a6).rem_euclid(p128);
        let mut count = 1u64; // infinity
        for x in 0..p128 {
            let x2 = x * x % p128;
            let rhs = (4 * x2 % p128 * x + b2 * x2 + 2 * b4 * x + b6).rem_euclid(p128);
            if rhs == 0 {
                count += 1;
            } else if is_qr[rhs as usize] {
                count += 2;
            }
        }
        count
    }

    /// a_p. Good primes count points; multiplicative primes give +-1;
    /// additive primes give 0.
    pub fn ap(&self, p: u64, budget: u64) -> Result<i64, CurveError> {
        match self.reduction_type(p) {
            ReductionType::Good => {
                if p > budget {
                    return Err(CurveError::PrimeTooLarge(p, budget));
                }
                Ok(p as i64 + 1 - self.count_points(p) as i64)
            }
            ReductionType::SplitMultiplicative => Ok(1),
            ReductionType::NonsplitMultiplicative => Ok(-1),
            ReductionType::Additive => Ok(0),
        }
    }

    /// Full coefficient table a_1..a_nmax by Hecke recursion.
    pub fn newform(&self, n_max: usize, budget: u64) -> Result<NewformCoefficients, CurveError> {
        let mut a = vec![0i64; n_max + 1];
        if n_max >= 1 {
            a[1] = 1;
        }
        let mut p = 2u64;
        while (p as usize) <= n_max {
            if is_prime(p) {
                let ap = self.ap(p, budget)?;
                let good = !(self.conductor % p == 0);
                // prime powers
                let mut powers = vec![1i64, ap];
                let mut pk = p as u128 * p as u128;
                while pk <= n_max as u128 {
                    let k = powers.len();
                    let next = if good {
                        ap * powers[k - 1] - (p as i64) * powers[k - 2]
                    } else {
                        ap * powers[k - 1]
                    };
                    powers.push(next);
                    pk *= p as u128;
                }
                let mut q = p as usize;
                let mut k = 1;
                while q <= n_max {
                    // multiplicativity across coprime parts
                    let mut m = 1;
                    while m * q <= n_max {
                        if m % (p as usize) != 0 && a[m] != 0 || m == 1 {
                            a[m * q] = a[m] * powers[k];
                        } else if m % (p as usize) != 0 {
                            a[m * q] = 0;
                        }
                        m += 1;
                    }
                    q *= p as usize;
                    k += 1;
                }
            }
            p += 1;
        }
        Ok(NewformCoefficients {
            level: self.conductor,
            manin: self.manin,
            a,
        })
    }

    /// Evaluate the Weierstrass polynomial at an exact rational point.
    pub fn equation_residual(&self, x: &Rat, y: &Rat) -> Rat {
        let a1 = Rat::from_integer(self.a1.clone());
        let a2 = Rat::from_integer(self.a2.clone());
        let a3 = Rat::from_integer(self.a3.clone());
        let a4 = Rat::from_integer(self.a4.clone());
        let a6 = Rat::from_integer(self.a6.clone());
        y * y + &a1 * x * y + &a3 * y - x * x * x - &a2 * x * x - &a4 * x - &a6
    }

    pub fn is_on_curve(&self, p: &AffinePoint) -> bool {
        match p {
            AffinePoint::Infinity => true,
            AffinePoint::Finite { x, y } => self.equation_residual(x, y).is_zero(),
        }
    }

    /// Group law on exact rational points.
    pub fn add_points(&self, p: &AffinePoint, q: &AffinePoint) -> AffinePoint {
        use AffinePoint::*;
        let (x1, y1) = match p {
            Infinity => return q.clone(),
            Finite { x, y } => (x.clone(), y.clone()),
        };
        let (x2, y2) = match q {
            Infinity => return p.clone(),
            Finite { x, y } => (x.clone(), y.clone()),
        };
        let a1 = Rat::from_integer(self.a1.clone());
        let a2 = Rat::from_integer(self.a2.clone());
        let a3 = Rat::from_integer(self.a3.clone());
        let a4 = Rat::from_integer(self.a4.clone());
        if x1 == x2 {
            // inverse of (x, y) is (x, -y - a1 x - a3)
            let y2_inv = -&y2 - &a1 * &x2 - &a3;
            if y1 == y2_inv {
                return Infinity;
            }
        }
        let lambda;
        let nu;
        if x1 != x2 {
            lambda = (&y2 - &y1) / (&x2 - &x1);
            nu = (&y1 * &x2 - &y2 * &x1) / (&x2 - &x1);
        } else {
            let denom = Rat::from_integer(BigInt::from(2)) * &y1 + &a1 * &x1 + &a3;
            lambda = (Rat::from_integer(BigInt::from(3)) * &x1 * &x1
                + Rat::from_integer(BigInt::from(2)) * &a2 * &x1
                + &a4
                - &a1 * &y1)
                / denom.clone();
            nu = (-&x1 * &x1 * &x1 + &a4 * &x1 + Rat::from_integer(BigInt::from(2)) * self.a6_rat()
                - &a3 * &y1)
                / denom;
        }
        let x3 = &lambda * &lambda + &a1 * &lambda - &a2 - &x1 - &x2;
        let y3 = -(&lambda + &a1) * &x3 - &nu - &a3;
        Finite { x: x3, y: y3 }
    }

    fn a6_rat(&self) -> Rat {
        Rat::from_integer(self.a6.clone())
    }

    pub fn negate_point(&self, p: &AffinePoint) -> AffinePoint {
        match p {
            AffinePoint::Infinity => AffinePoint::Infinity,
            AffinePoint::Finite { x, y } => AffinePoint::Finite {
                x: x.clone(),
                y: -y - Rat::from_integer(self.a1.clone()) * x
                    - Rat::from_integer(self.a3.clone()),
            },
        }
    }

    pub fn mul_point(&self, p: &AffinePoint, k: u32) -> AffinePoint {
        let mut acc = AffinePoint::Infinity;
        for _ in 0..k {
            acc = self.add_points(&acc, p);
        }
        acc
    }

    /// Order of a torsion point (caps at `max`, returning None past it).
    pub fn point_order(&self, p: &AffinePoint, max: u32) -> Option<u32> {
        let mut acc = p.clone();
        for k in 1..=max {
            if acc == AffinePoint::Infinity {
                return Some(k);
            }
            acc = self.add_points(&acc, p);
        }
        if acc == AffinePoint::Infinity {
            Some(max + 1)
        } else {
            None
        }
    }

    /// Brute-force search for rational torsion with small integral
    /// coordinates (Nagell-Lutz style bound from the discriminant).
    pub fn torsion_points(&self) -> Vec<AffinePoint> {
        let mut out = vec![AffinePoint::Infinity];
        let bound = 4 * self.disc.abs().nth_root(4).to_i64().unwrap_or(20).max(20);
        for x in -bound..=bound {
            let xr = Rat::from_integer(BigInt::from(x));
            // solve the quadratic in y exactly
            let a1 = Rat::from_integer(self.a1.clone());
            let a3 = Rat::from_integer(self.a3.clone());
            let b = &a1 * &xr + &a3;
            let rhs = xr.pow(3)
                + Rat::from_integer(self.a2.clone()) * &xr * &xr
                + Rat::from_integer(self.a4.clone()) * &xr
                + self.a6_rat();
            // y^2 + b y - rhs = 0 -> y = (-b +- sqrt(b^2 + 4 rhs))/2
            let disc = &b * &b + Rat::from_integer(BigInt::from(4)) * &rhs;
            if disc.is_negative() {
                continue;
            }
            let num = disc.numer().sqrt();
            if &num * &num != *disc.numer() {
                continue;
            }
            let den = disc.denom().sqrt();
            if &den * &den != *disc.denom() {
                continue;
            }
            let sq = Rat::new(num, den);
            for sgn in [1i64, -1] {
                let y = (-&b + Rat::from_integer(BigInt::from(sgn)) * &sq)
                    / Rat::from_integer(BigInt::from(2));
                let pt = AffinePoint::Finite { x: xr.clone(), y };
                if self.is_on_curve(&pt) && self.point_order(&pt, 16).is_some() && !out.contains(&pt)
                {
                    out.push(pt);
                }
            }
        }
        out
    }

    /// Division polynomial in x for torsion of order dividing n (n >= 2):
    /// roots are x-coordinates of the nonzero n-torsion points.
    pub fn division_polynomial_x(&self, n: u32) -> Vec<Rat> {
        // psi_n as polynomials in x, with psi_even = psi2 * (poly in x) and
        // psi2^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 substituted.
        let b2 = Rat::from_integer(self.b2.clone());
        let b4 = Rat::from_integer(self.b4.clone());
        let b6 = Rat::from_integer(self.b6.clone());
        let b8 = Rat::from_integer(self.b8.clone());
        let psi2_sq: Vec<Rat> = vec![
            b6.clone(),
            Rat::from_integer(BigInt::from(2)) * &b4,
            b2.clone(),
            Rat::from_integer(BigInt::from(4)),
        ];
        let pmul = |a: &[Rat], b: &[Rat]| -> Vec<Rat> {
            let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] = &out[i + j] + x * y;
                }
            }
            out
        };
        let padd = |a: &[Rat], b: &[Rat]| -> Vec<Rat> {
            let mut out = vec![Rat::zero(); a.len().max(b.len())];
            for (i, x) in a.iter().enumerate() {
                out[i] = &out[i] + x;
            }
            for (i, y) in b.iter().enumerate() {
                out[i] = &out[i] + y;
            }
            while out.len() > 1 && out.last().unwrap().is_zero() {
                out.pop();
            }
            out
        };
        let pneg = |a: &[Rat]| -> Vec<Rat> { a.iter().map(|x| -x).collect() };
        // f_n: psi_n for odd n; psi_n / psi_2 for even n. Both in Q[x].
        // Track parity: psi_n = f_n * psi2^(n even).
        let one = vec![Rat::one()];
        let f1 = one.clone();
        let f2 = one.clone();
        let f3: Vec<Rat> = vec![
            b8.clone(),
            Rat::from_integer(BigInt::from(3)) * &b6,
            Rat::from_integer(BigInt::from(3)) * &b4,
            b2.clone(),
            Rat::from_integer(BigInt::from(3)),
        ];
        let f4: Vec<Rat> = {
            // psi4/psi2 = 2x^6 + b2 x^5 + 5 b4 x^4 + 10 b6 x^3 + 10 b8 x^2
            //            + (b2 b8 - b4 b6) x + (b4 b8 - b6^2)
            vec![
                &b4 * &b8 - &b6 * &b6,
                &b2 * &b8 - &b4 * &b6,
                Rat::from_integer(BigInt::from(10)) * &b8,
                Rat::from_integer(BigInt::from(10)) * &b6,
                Rat::from_integer(BigInt::from(5)) * &b4,
                b2.clone(),
                Rat::from_integer(BigInt::from(2)),
            ]
        };
        let mut f: Vec<Vec<Rat>> = vec![vec![Rat::zero()], f1, f2, f3, f4];
        let even = |k: usize| k % 2 == 0;
        for m in 5..=(n as usize) {
            let k = m / 2;
            let val = if m % 2 == 1 {
                // psi_{2k+1} = psi_{k+2} psi_k^3 - psi_{k-1} psi_{k+1}^3
                let t1 = pmul(&f[k + 2], &pmul(&f[k], &pmul(&f[k], &f[k])));
                let t2 = pmul(&f[k - 1], &pmul(&f[k + 1], &pmul(&f[k + 1], &f[k + 1])));
                // attach psi2^2 for whichever side carries even factors
                let (t1full, t2full) = if even(k) {
                    // k+2 even too: psi2^4 on t1; k-1, k+1 odd: none on t2
                    (pmul(&pmul(&t1, &psi2_sq), &psi2_sq), t2)
                } else {
                    (t1, pmul(&pmul(&t2, &psi2_sq), &psi2_sq))
                };
                padd(&t1full, &pneg(&t2full))
            } else {
                // psi_{2k} = psi_k (psi_{k+2} psi_{k-1}^2 - psi_{k-2} psi_{k+1}^2) / psi2
                let t1 = pmul(&f[k + 2], &pmul(&f[k - 1], &f[k - 1]));
                let t2 = pmul(&f[k - 2], &pmul(&f[k + 1], &f[k + 1]));
                // count psi2-powers: even(k+2) + 2*even(k-1) vs even(k-2) + 2*even(k+1)
                let e1 = even(k + 2) as usize + 2 * (even(k - 1) as usize);
                let e2 = even(k - 2) as usize + 2 * (even(k + 1) as usize);
                let e_min = e1.min(e2);
                let mut t1full = t1;
                for _ in 0..(e1 - e_min) {
                    t1full = pmul(&t1full, &psi2_sq);
                }
                let mut t2full = t2;
                for _ in 0..(e2 - e_min) {
                    t2full = pmul(&t2full, &psi2_sq);
                }
                let diff = padd(&t1full, &pneg(&t2full));
                // total factor: psi_k * psi2^(e_min) * diff / psi2; with m even,
                // f_m = psi_m / psi2, so we need e_min + even(k) powers minus one
                let mut out = pmul(&f[k], &diff);
                let total = e_min + even(k) as usize;
                assert!(total >= 1, "even division polynomial lost its psi2 factor");
                for _ in 0..(total - 1) {
                    out = pmul(&out, &psi2_sq);
                }
                out
            };
            f.push(val);
        }
        // x-coordinates of points of order dividing n: roots of
        // f_n (odd part) times psi2^2 (the 2-torsion part) when n is even.
        if n % 2 == 0 {
            pmul(&f[n as usize], &psi2_sq)
        } else {
            f[n as usize].clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionType {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AffinePoint {
    Infinity,
    Finite { x: Rat, y: Rat },
}

impl AffinePoint {
    pub fn finite(x: Rat, y: Rat) -> Self {
        AffinePoint::Finite { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        AffinePoint::Finite {
            x: Rat::from_integer(BigInt::from(x)),
            y: Rat::from_integer(BigInt::from(y)),
        }
    }

    pub fn xy(&self) -> Option<(&Rat, &Rat)> {
        match self {
            AffinePoint::Infinity => None,
            AffinePoint::Finite { x, y } => Some((x, y)),
        }
    }
}

/// Integer Fourier coefficients of the newform attached to a curve, indexed
/// so that `a[n]` is a_n (a[0] unused).
#[derive(Clone, Debug)]
pub struct NewformCoefficients {
    pub level: u64,
    pub manin: u32,
    a: Vec<i64>,
}

impl NewformCoefficients {
    pub fn a(&self, n: usize) -> i64 {
        self.a[n]
    }

    pub fn len(&self) -> usize {
        self.a.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.a[1..]
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Count points over F_{p^2} by brute force in a quadratic extension;
/// independent oracle used by tests for the a_{p^2} Hecke identity.
pub fn count_points_fp2(e: &EllipticCurve, p: u64) -> u64 {
    assert!(p >= 3 && is_prime(p));
    let pb = BigInt::from(p);
    let vals: Vec<i128> = [&e.a1, &e.a2, &e.a3, &e.a4, &e.a6]
        .iter()
        .map(|a| a.mod_floor(&pb).to_i128().unwrap())
        .collect();
    let p = p as i128;
    // F_{p^2} = F_p[t]/(t^2 - s) for a nonresidue s
    let mut s = 0;
    for cand in 2..p {
        let mut residue = false;
        for t in 0..p {
            if t * t % p == cand {
                residue = true;
                break;
            }
        }
        if !residue {
            s = cand;
            break;
        }
    }
    assert!(s != 0, "no quadratic nonresidue found");
    let mul = |a: (i128, i128), b: (i128, i128)| -> (i128, i128) {
        (
            (a.0 * b.0 + a.1 * b.1 % p * s).rem_euclid(p),
            (a.0 * b.1 + a.1 * b.0).rem_euclid(p),
        )
    };
    let add = |a: (i128, i128), b: (i128, i128)| -> (i128, i128) {
        ((a.0 + b.0).rem_euclid(p), (a.1 + b.1).rem_euclid(p))
    };
    let scal = |k: i128, a: (i128, i128)| -> (i128, i128) {
        ((k * a.0).rem_euclid(p), (k * a.1).rem_euclid(p))
    };
    let (a1, a2, a3, a4, a6) = (vals[0], vals[1], vals[2], vals[3], vals[4]);
    let mut count = 1u64;
    for x0 in 0..p {
        for x1 in 0..p {
            let x = (x0, x1);
            for y0 in 0..p {
                for y1 in 0..p {
                    let y = (y0, y1);
                    let lhs = add(add(mul(y, y), mul(scal(a1, x), y)), scal(a3, y));
                    let rhs = add(
                        add(mul(mul(x, x), x), scal(a2, mul(x, x))),
                        add(scal(a4, x), (a6, 0)),
                    );
                    if lhs == rhs {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e11a1() -> EllipticCurve {
        EllipticCurve::new([0, -1, 1, -10, -20], 11, Some("11a1")).unwrap()
    }

    #[test]
    fn invariant_identities() {
        let e = e11a1();
        assert_eq!(4 * &e.b8, &e.b2 * &e.b6 - &e.b4 * &e.b4);
        assert_eq!(
            &e.c4 * &e.c4 * &e.c4 - &e.c6 * &e.c6,
            1728 * &e.disc
        );
        assert_eq!(e.j_invariant(), Rat::new((-122023936i64).into(), 161051.into()));
    }

    #[test]
    fn c6_zero_forces_j_1728() {
        // y^2 = x^3 + x
        let e = EllipticCurve::new([0, 0, 0, 1, 0], 64, None);
        // conductor validation would reject 64 at p=2? disc = -64, additive at 2, 2^6 | N fine
        let e = e.unwrap();
        assert!(e.c6.is_zero());
        assert_eq!(e.j_invariant(), Rat::from_integer(1728.into()));
    }

    #[test]
    fn singular_curve_rejected() {
        assert_eq!(
            EllipticCurve::new([0, 0, 0, 0, 0], 1, None).unwrap_err(),
            CurveError::SingularCurve
        );
    }

    #[test]
    fn reduction_types() {
        let e = e11a1();
        assert!(matches!(
            e.reduction_type(11),
            ReductionType::SplitMultiplicative | ReductionType::NonsplitMultiplicative
        ));
        assert_eq!(e.reduction_type(2), ReductionType::Good);
        // y^2 = x^3 + p^2 x at p: additive by construction
        let e2 = EllipticCurve::new_big(
            [0.into(), 0.into(), 0.into(), 25.into(), 0.into()],
            0,
            None,
        );
        // skip conductor validation by calling reduction on a manual instance
        assert!(e2.is_err()); // conductor 0 rejected
        let e3 = EllipticCurve {
            conductor: 1,
            ..e11a1()
        };
        let _ = e3; // reduction_type itself needs no conductor
        let raw = EllipticCurve::new([0, 0, 0, 25, 0], 1600, None);
        if let Ok(c) = raw {
            assert_eq!(c.reduction_type(5), ReductionType::Additive);
        }
    }

    #[test]
    fn newform_11a1_first_coefficients() {
        let e = e11a1();
        let f = e.newform(12, 10_000).unwrap();
        // f = q - 2q^2 - q^3 + 2q^4 + q^5 + 2q^6 - 2q^7 ... a_11 = 1
        assert_eq!(f.a(1), 1);
        assert_eq!(f.a(2), -2);
        assert_eq!(f.a(3), -1);
        assert_eq!(f.a(4), 2);
        assert_eq!(f.a(6), 2); // multiplicativity a_2 a_3
        assert_eq!(f.a(11), 1);
    }

    #[test]
    fn hasse_bound() {
        let e = e11a1();
        for p in [2u64, 3, 5, 7, 13, 17, 97] {
            let ap = e.ap(p, 10_000).unwrap();
            assert!((ap * ap) as f64 <= 4.0 * p as f64);
        }
    }

    #[test]
    fn prime_budget_enforced() {
        let e = e11a1();
        assert!(matches!(
            e.ap(101, 50),
            Err(CurveError::PrimeTooLarge(101, 50))
        ));
    }

    #[test]
    fn coefficients_14a_pair_congruent_mod_8() {
        let e1 = EllipticCurve::new([1, 0, 1, 4, -6], 14, Some("14a1")).unwrap();
        let e2 = EllipticCurve::new([1, 0, 1, -36, -70], 14, Some("14a2")).unwrap();
        let m = BigInt::from(8);
        for (x, y) in [
            (&e1.a1, &e2.a1),
            (&e1.a2, &e2.a2),
            (&e1.a3, &e2.a3),
            (&e1.a4, &e2.a4),
            (&e1.a6, &e2.a6),
        ] {
            assert_eq!(x.mod_floor(&m), y.mod_floor(&m));
        }
    }

    #[test]
    fn group_law_and_torsion_11a1() {
        let e = e11a1();
        let p = AffinePoint::from_ints(5, 5);
        assert!(e.is_on_curve(&p));
        assert_eq!(e.point_order(&p, 10), Some(5));
        let q = AffinePoint::from_ints(5, -6);
        assert_eq!(e.negate_point(&p), q);
        let tors = e.torsion_points();
        assert_eq!(tors.len(), 5);
        assert!(tors.contains(&p) && tors.contains(&q));
    }

    #[test]
    fn division_polynomial_matches_torsion() {
        let e = e11a1();
        // 5-torsion x-coordinates 5 and 16 must be roots of psi_5
        let f5 = e.division_polynomial_x(5);
        let eval = |poly: &[Rat], x: i64| -> Rat {
            let xr = Rat::from_integer(BigInt::from(x));
            let mut acc = Rat::zero();
            for c in poly.iter().rev() {
                acc = acc * &xr + c;
            }
            acc
        };
        assert!(eval(&f5, 5).is_zero());
        assert!(eval(&f5, 16).is_zero());
        assert!(!eval(&f5, 7).is_zero());
        // 2-torsion of 14a1 at x = 1
        let e14 = EllipticCurve::new([1, 0, 1, 4, -6], 14, None).unwrap();
        let f2 = e14.division_polynomial_x(2);
        assert!(eval(&f2, 1).is_zero());
    }

    #[test]
    fn ap_squared_hecke_identity_vs_fp2_count() {
        // Hecke: a_{p^2} = a_p^2 - p. The Frobenius trace over F_{p^2} is
        // alpha^2 + beta^2 = a_p^2 - 2p = a_{p^2} - p, so the independent
        // count satisfies #E(F_{p^2}) = p^2 + 1 - (a_{p^2} - p).
        let e = e11a1();
        for p in [3u64, 7, 13] {
            let f = e.newform((p * p) as usize, 10_000).unwrap();
            let count = count_points_fp2(&e, p);
            let ap = f.a(p as usize);
            let ap2 = f.a((p * p) as usize);
            assert_eq!(ap2, ap * ap - p as i64, "p = {}", p);
            assert_eq!(
                count as i64,
                (p * p) as i64 + 1 - (ap2 - p as i64),
                "p = {}",
                p
            );
        }
    }

    #[test]
    fn conductor_mismatch_detected() {
        // 11a1 with wrong conductor 22: 2 | N but 2 does not divide disc
        let err = EllipticCurve::new([0, -1, 1, -10, -20], 22, None).unwrap_err();
        assert!(matches!(err, CurveError::ConductorMismatch { p: 2, .. }));
    }
}
