//! Exact coefficient rings: big rationals, cyclotomic fields Q(zeta_w), and
//! residue rings Z/m.
//!
//! Every q-expansion in this crate carries its coefficients as [`Scalar`]
//! values. Rationals embed into any Q(zeta_w); residues never mix with the
//! other variants implicitly.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::sync::Mutex;

use crate::error::ArithError;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Euler phi.
pub fn euler_phi(w: u32) -> u32 {
    let mut n = w;
    let mut result = w;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Monic integer polynomial, dense from degree 0.
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // den is monic; division is exact by construction
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - dd] = c.clone();
        for (j, dc) in den.iter().enumerate() {
            let idx = i - dd + j;
            rem[idx] = &rem[idx] - &c * dc;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
    quot
}

/// w-th cyclotomic polynomial as integer coefficients (degree phi(w)).
pub fn cyclotomic_polynomial(w: u32) -> Vec<BigInt> {
    static CACHE: Mutex<Vec<(u32, Vec<BigInt>)>> = Mutex::new(Vec::new());
    if let Some((_, p)) = CACHE.lock().unwrap().iter().find(|(k, _)| *k == w) {
        return p.clone();
    }
    let mut num = vec![BigInt::zero(); w as usize + 1];
    num[0] = BigInt::from(-1);
    num[w as usize] = BigInt::one();
    let mut result = num;
    for d in 1..w {
        if w % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            result = poly_div_exact(&result, &phi_d);
        }
    }
    CACHE.lock().unwrap().push((w, result.clone()));
    result
}

/// Element of Q(zeta_w) in the power basis 1, zeta, ..., zeta^(phi(w)-1).
#[derive(Clone, PartialEq, Eq)]
pub struct Cyclotomic {
    pub w: u32,
    pub coords: Vec<Rat>,
}

impl Cyclotomic {
    pub fn zero(w: u32) -> Self {
        Cyclotomic {
            w,
            coords: vec![Rat::zero(); euler_phi(w) as usize],
        }
    }

    pub fn from_rat(w: u32, r: Rat) -> Self {
        let mut c = Self::zero(w);
        c.coords[0] = r;
        c
    }

    /// zeta_w^k reduced into the power basis.
    pub fn root_of_unity(w: u32, k: i64) -> Self {
        let k = k.rem_euclid(w as i64) as usize;
        let phi = euler_phi(w) as usize;
        if k < phi {
            let mut c = Self::zero(w);
            c.coords[k] = Rat::one();
            return c;
        }
        let mut dense = vec![Rat::zero(); k + 1];
        dense[k] = Rat::one();
        Self::reduce(w, dense)
    }

    /// Reduce a dense polynomial in zeta against Phi_w.
    fn reduce(w: u32, mut dense: Vec<Rat>) -> Self {
        let phi_w = cyclotomic_polynomial(w);
        let deg = phi_w.len() - 1;
        for i in (deg..dense.len()).rev() {
            let c = std::mem::replace(&mut dense[i], Rat::zero());
            if c.is_zero() {
                continue;
            }
            // zeta^i = -c * (lower terms of Phi_w) * zeta^(i-deg)
            for (j, pc) in phi_w.iter().enumerate().take(deg) {
                let idx = i - deg + j;
                dense[idx] = &dense[idx] - &c * Rat::from_integer(pc.clone());
            }
        }
        dense.truncate(deg);
        dense.resize(deg, Rat::zero());
        Cyclotomic { w, coords: dense }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<Rat> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.w, other.w, "cyclotomic width mismatch");
        Cyclotomic {
            w: self.w,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Cyclotomic {
            w: self.w,
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.w, other.w, "cyclotomic width mismatch");
        let n = self.coords.len();
        let mut dense = vec![Rat::zero(); 2 * n];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                dense[i + j] = &dense[i + j] + a * b;
            }
        }
        Self::reduce(self.w, dense)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x].
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.as_rational() {
            return Some(Self::from_rat(self.w, r.recip()));
        }
        let phi_w: Vec<Rat> = cyclotomic_polynomial(self.w)
            .into_iter()
            .map(Rat::from_integer)
            .collect();
        // Bezout: s * self + t * Phi_w = gcd (a nonzero constant)
        let trim = |v: &mut Vec<Rat>| {
            while v.len() > 1 && v.last().unwrap().is_zero() {
                v.pop();
            }
        };
        let mut r0 = phi_w;
        let mut r1 = self.coords.clone();
        trim(&mut r1);
        let mut s0: Vec<Rat> = vec![Rat::zero()];
        let mut s1: Vec<Rat> = vec![Rat::one()];
        while !(r1.len() == 1 && r1[0].is_zero()) {
            if r1.len() == 1 {
                break;
            }
            // divide r0 by r1
            let mut rem = r0.clone();
            let mut q = vec![Rat::zero(); rem.len().saturating_sub(r1.len()) + 1];
            let lead = r1.last().unwrap().clone();
            for i in (r1.len() - 1..rem.len()).rev() {
                let c = &rem[i] / &lead;
                if c.is_zero() {
                    continue;
                }
                q[i - (r1.len() - 1)] = c.clone();
                for (j, rc) in r1.iter().enumerate() {
                    let idx = i - (r1.len() - 1) + j;
                    rem[idx] = &rem[idx] - &c * rc;
                }
            }
            trim(&mut rem);
            // s2 = s0 - q * s1
            let mut s2 = s0.clone();
            s2.resize(s2.len().max(q.len() + s1.len() - 1), Rat::zero());
            for (i, qc) in q.iter().enumerate() {
                if qc.is_zero() {
                    continue;
                }
                for (j, sc) in s1.iter().enumerate() {
                    s2[i + j] = &s2[i + j] - qc * sc;
                }
            }
            trim(&mut s2);
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        // r1 is a nonzero constant; inverse = s1 / r1
        let c = r1[0].clone();
        if c.is_zero() {
            return None;
        }
        let coords: Vec<Rat> = s1.iter().map(|x| x / &c).collect();
        let mut out = Self::reduce(self.w, coords);
        out.w = self.w;
        Some(out)
    }

    /// Galois conjugate zeta -> zeta^u for gcd(u, w) = 1.
    pub fn galois(&self, u: u32) -> Self {
        assert_eq!(
            BigUint::from(u).gcd(&BigUint::from(self.w)),
            BigUint::one(),
            "galois exponent not coprime to width"
        );
        let mut dense = vec![Rat::zero(); ((self.w as usize) * self.coords.len()).max(1)];
        for (k, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (k as u64 * u as u64 % self.w as u64) as usize;
            dense[e] = &dense[e] + c;
        }
        Self::reduce(self.w, dense)
    }

    /// Sum over all Galois conjugates; lands in Q.
    pub fn galois_sum(&self) -> Rat {
        let mut acc = Self::zero(self.w);
        for u in 1..=self.w {
            if BigUint::from(u).gcd(&BigUint::from(self.w)) == BigUint::one() {
                acc = acc.add(&self.galois(u));
            }
        }
        acc.as_rational().expect("galois sum must be rational")
    }

    /// Re-express in Q(zeta_{w'}) for w | w'.
    pub fn promote(&self, w2: u32) -> Self {
        assert!(w2 % self.w == 0, "cannot promote to non-multiple width");
        if w2 == self.w {
            return self.clone();
        }
        let t = (w2 / self.w) as i64;
        let mut acc = Cyclotomic::zero(w2);
        for (k, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut term = Cyclotomic::root_of_unity(w2, t * k as i64);
            for x in term.coords.iter_mut() {
                *x = &*x * c;
            }
            acc = acc.add(&term);
        }
        acc
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyc(w={}, {:?})", self.w, self.coords)
    }
}

/// Element of Z/m, canonical representative in [0, m).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Residue {
    pub modulus: BigUint,
    pub value: BigUint,
}

impl Residue {
    pub fn new(modulus: BigUint, value: BigInt) -> Self {
        let m = BigInt::from(modulus.clone());
        let v = value.mod_floor(&m);
        Residue {
            modulus,
            value: v.to_biguint().unwrap(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.modulus, other.modulus, "residue modulus mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        Residue {
            modulus: self.modulus.clone(),
            value: (&self.value + &other.value) % &self.modulus,
        }
    }

    pub fn neg(&self) -> Self {
        let v = if self.value.is_zero() {
            BigUint::zero()
        } else {
            &self.modulus - &self.value
        };
        Residue {
            modulus: self.modulus.clone(),
            value: v,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        Residue {
            modulus: self.modulus.clone(),
            value: (&self.value * &other.value) % &self.modulus,
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let m = BigInt::from(self.modulus.clone());
        let v = BigInt::from(self.value.clone());
        let e = v.extended_gcd(&m);
        if !e.gcd.is_one() {
            return None;
        }
        Some(Residue::new(self.modulus.clone(), e.x))
    }
}

/// Exact series coefficient: rational, cyclotomic, or residue.
#[derive(Clone, PartialEq, Debug)]
pub enum Scalar {
    Rational(Rat),
    Cyclotomic(Cyclotomic),
    Residue(Residue),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(Rat::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(Rat::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Rational(rat_int(n))
    }

    pub fn from_rat(r: Rat) -> Self {
        Scalar::Rational(r)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Cyclotomic(c) => c.is_zero(),
            Scalar::Residue(r) => r.is_zero(),
        }
    }

    pub fn as_rational(&self) -> Option<Rat> {
        match self {
            Scalar::Rational(r) => Some(r.clone()),
            Scalar::Cyclotomic(c) => c.as_rational(),
            Scalar::Residue(_) => None,
        }
    }

    /// Demote rational-valued cyclotomics and zero residues to the rational
    /// variant so that equality is structural.
    fn simplified(self) -> Scalar {
        match self {
            Scalar::Cyclotomic(c) => match c.as_rational() {
                Some(r) => Scalar::Rational(r),
                None => Scalar::Cyclotomic(c),
            },
            Scalar::Residue(r) if r.is_zero() => Scalar::Rational(Rat::zero()),
            s => s,
        }
    }

    /// Promote a pair to a common ring. Rationals embed into cyclotomic
    /// fields and reduce into residue rings (denominator must be a unit).
    fn promote_pair(a: &Scalar, b: &Scalar) -> (Scalar, Scalar) {
        match (a, b) {
            (Scalar::Rational(_), Scalar::Rational(_)) => (a.clone(), b.clone()),
            (Scalar::Residue(_), Scalar::Residue(_)) => (a.clone(), b.clone()),
            (Scalar::Rational(r), Scalar::Cyclotomic(c)) => (
                Scalar::Cyclotomic(Cyclotomic::from_rat(c.w, r.clone())),
                b.clone(),
            ),
            (Scalar::Cyclotomic(c), Scalar::Rational(r)) => (
                a.clone(),
                Scalar::Cyclotomic(Cyclotomic::from_rat(c.w, r.clone())),
            ),
            (Scalar::Cyclotomic(c1), Scalar::Cyclotomic(c2)) => {
                let w = lcm_u32(c1.w, c2.w);
                (
                    Scalar::Cyclotomic(c1.promote(w)),
                    Scalar::Cyclotomic(c2.promote(w)),
                )
            }
            (Scalar::Rational(r), Scalar::Residue(x)) => (
                Scalar::Residue(Self::rat_to_residue(r, x)),
                b.clone(),
            ),
            (Scalar::Residue(x), Scalar::Rational(r)) => (
                a.clone(),
                Scalar::Residue(Self::rat_to_residue(r, x)),
            ),
            _ => panic!("cannot mix cyclotomic scalars with residue scalars"),
        }
    }

    fn rat_to_residue(r: &Rat, like: &Residue) -> Residue {
        let m = like.modulus.clone();
        let den = Residue::new(m.clone(), r.denom().clone());
        let inv = den
            .inverse()
            .expect("rational denominator not a unit in the residue ring");
        Residue::new(m, r.numer().clone()).mul(&inv)
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        let (a, b) = Scalar::promote_pair(self, other);
        match (a, b) {
            (Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x + y),
            (Scalar::Cyclotomic(x), Scalar::Cyclotomic(y)) => {
                Scalar::Cyclotomic(x.add(&y)).simplified()
            }
            (Scalar::Residue(x), Scalar::Residue(y)) => Scalar::Residue(x.add(&y)).simplified(),
            _ => unreachable!(),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Cyclotomic(c) => Scalar::Cyclotomic(c.neg()),
            Scalar::Residue(r) => Scalar::Residue(r.neg()),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let (a, b) = Scalar::promote_pair(self, other);
        match (a, b) {
            (Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x * y),
            (Scalar::Cyclotomic(x), Scalar::Cyclotomic(y)) => {
                Scalar::Cyclotomic(x.mul(&y)).simplified()
            }
            (Scalar::Residue(x), Scalar::Residue(y)) => Scalar::Residue(x.mul(&y)).simplified(),
            _ => unreachable!(),
        }
    }

    pub fn inverse(&self) -> Result<Scalar, ArithError> {
        match self {
            Scalar::Rational(r) => {
                if r.is_zero() {
                    Err(ArithError::NonUnitLeadingCoefficient)
                } else {
                    Ok(Scalar::Rational(r.recip()))
                }
            }
            Scalar::Cyclotomic(c) => c
                .inverse()
                .map(|x| Scalar::Cyclotomic(x).simplified())
                .ok_or(ArithError::NonUnitLeadingCoefficient),
            Scalar::Residue(r) => r
                .inverse()
                .map(Scalar::Residue)
                .ok_or(ArithError::NonUnitLeadingCoefficient),
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> Scalar {
        self.mul(&Scalar::Rational(r.clone()))
    }

    /// Reduce an exact scalar mod m; denominators must be units mod m.
    pub fn reduce_mod(&self, m: &BigUint) -> Result<Scalar, ArithError> {
        match self {
            Scalar::Rational(r) => {
                let den = Residue::new(m.clone(), r.denom().clone());
                let inv = den.inverse().ok_or_else(|| ArithError::DenominatorNotCoprime {
                    denom: r.denom().to_string(),
                    modulus: m.to_string(),
                })?;
                let num = Residue::new(m.clone(), r.numer().clone());
                Ok(Scalar::Residue(num.mul(&inv)).simplified())
            }
            Scalar::Residue(r) => {
                if &r.modulus % m == BigUint::zero() {
                    Ok(Scalar::Residue(Residue {
                        modulus: m.clone(),
                        value: &r.value % m,
                    })
                    .simplified())
                } else {
                    Err(ArithError::DenominatorNotCoprime {
                        denom: format!("Z/{}", r.modulus),
                        modulus: m.to_string(),
                    })
                }
            }
            Scalar::Cyclotomic(_) => Err(ArithError::DenominatorNotCoprime {
                denom: "cyclotomic".into(),
                modulus: m.to_string(),
            }),
        }
    }

    /// Display form used by the CLI: "p/q" or a coordinate vector.
    pub fn to_display_string(&self) -> String {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Cyclotomic(c) => {
                let coords: Vec<String> = c
                    .coords
                    .iter()
                    .map(|x| {
                        if x.denom().is_one() {
                            x.numer().to_string()
                        } else {
                            format!("{}/{}", x.numer(), x.denom())
                        }
                    })
                    .collect();
                format!("zeta{}[{}]", c.w, coords.join(","))
            }
            Scalar::Residue(r) => format!("{} mod {}", r.value, r.modulus),
        }
    }
}

pub fn lcm_u32(a: u32, b: u32) -> u32 {
    a / gcd_u32(a, b) * b
}

pub fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(
            cyclotomic_polynomial(1),
            vec![BigInt::from(-1), BigInt::from(1)]
        );
        assert_eq!(
            cyclotomic_polynomial(4),
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]
        );
        // Phi_6 = x^2 - x + 1
        assert_eq!(
            cyclotomic_polynomial(6),
            vec![BigInt::from(1), BigInt::from(-1), BigInt::from(1)]
        );
        assert_eq!(cyclotomic_polynomial(11).len(), 11);
    }

    #[test]
    fn root_of_unity_power_w_is_one() {
        for w in [3u32, 4, 5, 6, 8, 11, 12, 26] {
            let z = Cyclotomic::root_of_unity(w, 1);
            let mut p = Cyclotomic::from_rat(w, Rat::one());
            for _ in 0..w {
                p = p.mul(&z);
            }
            assert_eq!(p.as_rational(), Some(Rat::one()), "zeta_{}^{} != 1", w, w);
        }
    }

    #[test]
    fn cyclotomic_inverse() {
        let w = 5;
        let z = Cyclotomic::root_of_unity(w, 1);
        let one = Cyclotomic::from_rat(w, Rat::one());
        let a = z.add(&one).add(&Cyclotomic::root_of_unity(w, 3));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).as_rational(), Some(Rat::one()));
    }

    #[test]
    fn galois_sum_is_rational_trace() {
        let w = 7;
        let z = Cyclotomic::root_of_unity(w, 1);
        // trace of zeta_7 over Q is mu(7) = -1
        assert_eq!(z.galois_sum(), rat_int(-1));
        let one = Cyclotomic::from_rat(w, rat_int(3));
        assert_eq!(one.galois_sum(), rat_int(18)); // 3 * phi(7)
    }

    #[test]
    fn residue_arithmetic() {
        let m = BigUint::from(13u32);
        let a = Residue::new(m.clone(), BigInt::from(-5));
        assert_eq!(a.value, BigUint::from(8u32));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).value, BigUint::from(1u32));
        let even = Residue::new(BigUint::from(4u32), BigInt::from(2));
        assert!(even.inverse().is_none());
    }

    #[test]
    fn scalar_promotion() {
        let r = Scalar::from_rat(rat(1, 2));
        let z = Scalar::Cyclotomic(Cyclotomic::root_of_unity(4, 1));
        let s = r.add(&z);
        match s {
            Scalar::Cyclotomic(c) => {
                assert_eq!(c.coords[0], rat(1, 2));
                assert_eq!(c.coords[1], Rat::one());
            }
            _ => panic!("expected cyclotomic"),
        }
    }

    #[test]
    fn scalar_reduce_mod() {
        let m = BigUint::from(13u32);
        let half = Scalar::from_rat(rat(1, 2));
        // 1/2 = 7 mod 13
        match half.reduce_mod(&m).unwrap() {
            Scalar::Residue(r) => assert_eq!(r.value, BigUint::from(7u32)),
            _ => panic!(),
        }
        let bad = Scalar::from_rat(rat(1, 13));
        assert!(bad.reduce_mod(&m).is_err());
    }

    #[test]
    fn promote_widths() {
        // zeta_3 inside Q(zeta_6): zeta_6^2 = zeta_3
        let z3 = Cyclotomic::root_of_unity(3, 1);
        let p = z3.promote(6);
        let z6sq = Cyclotomic::root_of_unity(6, 2);
        assert_eq!(p, z6sq);
    }
}
