//! Numeric period lattices via the AGM, Weierstrass p-function evaluation,
//! the Eichler integral and its period homomorphism C(gamma), lattice
//! comparison, and the exact Laurent coefficients of p.
//!
//! Conventions: the Eichler integral is the 2-pi-i-folded series
//! eps(z) = sum (m a_n / n) q^n, the lattice is the period lattice of the
//! invariant differential computed by AGM, and the exact shadows are
//! g2 = c4/12, g3 = c6/216. With these, X(z) = m^2 p(eps(z)) - b2/12 has the
//! leading term q^-2.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::arith::float::{pi, q_parameter, Complex, Real};
use crate::arith::scalar::Rat;
use crate::curve::{EllipticCurve, NewformCoefficients};
use crate::error::PeriodsError;

/// Period lattice with a Gauss-reduced working basis and exact g2, g3
/// shadows. Immutable after construction.
#[derive(Clone, Debug)]
pub struct PeriodLattice {
    /// Curve-convention generators: omega1 real (or first), Im(w2/w1) > 0.
    pub omega1: Complex,
    pub omega2: Complex,
    /// Gauss-reduced basis of the same lattice used for argument reduction.
    red1: Complex,
    red2: Complex,
    /// tau = red2/red1, in (or near) the standard fundamental domain.
    tau: Complex,
    pub bits: u32,
    pub g2: Rat,
    pub g3: Rat,
}

fn agm_optimal(mut a: Complex, mut b: Complex, prec: u32) -> Complex {
    let eps = Real::pow2(prec as i64 - 12, prec);
    for _ in 0..(prec as usize) {
        let a1 = a.add(&b).div_i64(2);
        let mut b1 = a.mul(&b).sqrt();
        // optimal branch: |a1 - b1| <= |a1 + b1|
        if a1.sub(&b1).norm_sqr().cmp(&a1.add(&b1).norm_sqr()) == Ordering::Greater {
            b1 = b1.neg();
        }
        let done = a1.sub(&b1).abs().cmp(&eps) == Ordering::Less;
        a = a1;
        b = b1;
        if done {
            break;
        }
    }
    a
}

/// Roots of 4x^3 - g2 x - g3 by float seeding plus high-precision Newton.
fn cubic_roots(g2: &Rat, g3: &Rat, prec: u32) -> Vec<Complex> {
    let g2f = rat_f64(g2);
    let g3f = rat_f64(g3);
    // Durand-Kerner at f64
    let mut r = [
        num_complex_f64(0.4, 0.9),
        num_complex_f64(-0.8, 0.6),
        num_complex_f64(0.3, -1.1),
    ];
    let scale = (1.0 + g2f.abs().max(g3f.abs())).powf(0.5);
    for x in r.iter_mut() {
        *x = (x.0 * scale, x.1 * scale);
    }
    let eval = |z: (f64, f64)| -> (f64, f64) {
        // 4z^3 - g2 z - g3
        let z2 = cmulf(z, z);
        let z3 = cmulf(z2, z);
        (4.0 * z3.0 - g2f * z.0 - g3f, 4.0 * z3.1 - g2f * z.1)
    };
    for _ in 0..200 {
        let old = r;
        for i in 0..3 {
            let mut den = (4.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den = cmulf(den, csubf(old[i], old[j]));
                }
            }
            let delta = cdivf(eval(old[i]), den);
            r[i] = csubf(r[i], delta);
        }
    }
    // Newton refinement at full precision
    let g2r = Real::from_rat(g2, prec);
    let g3r = Real::from_rat(g3, prec);
    r.iter()
        .map(|&(x, y)| {
            let mut z = Complex::from_f64s(x, y, prec);
            for _ in 0..(prec.ilog2() + 4) {
                let z2 = z.mul(&z);
                let f = z2
                    .mul(&z)
                    .mul_i64(4)
                    .sub(&z.mul_real(&g2r))
                    .sub(&Complex::from_real(g3r.clone()));
                let fp = z2.mul_i64(12).sub(&Complex::from_real(g2r.clone()));
                z = z.sub(&f.div(&fp));
            }
            z
        })
        .collect()
}

fn rat_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(0.0) / r.denom().to_f64().unwrap_or(1.0)
}

fn num_complex_f64(a: f64, b: f64) -> (f64, f64) {
    (a, b)
}
fn cmulf(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}
fn csubf(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}
fn cdivf(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}

/// Gauss (Lagrange) reduction of a lattice basis, preserving the lattice.
fn gauss_reduce(mut v1: Complex, mut v2: Complex, prec: u32) -> (Complex, Complex) {
    for _ in 0..256 {
        if v2.norm_sqr().cmp(&v1.norm_sqr()) == Ordering::Less {
            std::mem::swap(&mut v1, &mut v2);
        }
        // mu = round(<v2, v1> / |v1|^2)
        let mu = v2
            .mul(&v1.conj())
            .re
            .div(&v1.norm_sqr())
            .round();
        if mu.is_zero() {
            break;
        }
        let shift = v1.mul_real(&Real::from_bigint(&mu, prec));
        v2 = v2.sub(&shift);
    }
    (v1, v2)
}

impl PeriodLattice {
    /// Compute the period lattice of a curve by AGM, verified against the
    /// exact g2, g3 shadows through the Eisenstein series at tau.
    pub fn of_curve(e: &EllipticCurve, bits: u32) -> Result<Self, PeriodsError> {
        let prec = bits + 64;
        let g2 = e.g2_exact();
        let g3 = e.g3_exact();
        let roots = cubic_roots(&g2, &g3, prec);
        let tiny = Real::pow2(prec as i64 / 2, prec);
        let (omega1, omega2) = if e.disc.is_positive() {
            // three real roots e1 > e2 > e3
            let mut es: Vec<Real> = roots.into_iter().map(|r| r.re).collect();
            es.sort_by(|a, b| b.cmp(a));
            let (e1, e2, e3) = (es[0].clone(), es[1].clone(), es[2].clone());
            let s13 = Complex::from_real(e1.sub(&e3)).sqrt();
            let s12 = Complex::from_real(e1.sub(&e2)).sqrt();
            let s23 = Complex::from_real(e2.sub(&e3)).sqrt();
            let pi_c = Complex::from_real(pi(prec));
            let w1 = pi_c.div(&agm_optimal(s13.clone(), s12, prec));
            let w2 = pi_c
                .div(&agm_optimal(s13, s23, prec))
                .mul(&Complex::i(prec));
            (w1, w2)
        } else {
            // one real root e1, complex pair e2 = conj(e3), Im e2 > 0
            let mut e1 = None;
            let mut e2 = None;
            for r in roots {
                if r.im.abs().cmp(&tiny) == Ordering::Less {
                    e1 = Some(Complex::from_real(r.re));
                } else if !r.im.is_negative() {
                    e2 = Some(r);
                }
            }
            let e1 = e1.ok_or(PeriodsError::PrecisionUnreachable(bits))?;
            let e2 = e2.ok_or(PeriodsError::PrecisionUnreachable(bits))?;
            let e3 = e2.conj();
            let s13 = e1.sub(&e3).sqrt();
            let s12 = e1.sub(&e2).sqrt();
            let pi_c = Complex::from_real(pi(prec));
            let w1 = pi_c.div(&agm_optimal(s13.clone(), s12.clone(), prec));
            let w_minus = pi_c.div(&agm_optimal(s13, s12.neg(), prec));
            // w1 is real, w_minus purely imaginary with negative Im
            let w2 = w1.sub(&w_minus).div_i64(2);
            (w1, w2)
        };
        Self::from_generators(omega1, omega2, g2, g3, bits)
    }

    /// Generators without shadow verification; used transiently when the
    /// exact invariants are still being reconstructed.
    pub fn from_generators_unchecked(omega1: Complex, mut omega2: Complex, bits: u32) -> Self {
        let prec = omega1.prec();
        if omega2.div(&omega1).im.is_negative() {
            omega2 = omega2.neg();
        }
        let (red1, mut red2) = gauss_reduce(omega1.clone(), omega2.clone(), prec);
        if red2.div(&red1).im.is_negative() {
            red2 = red2.neg();
        }
        let tau = red2.div(&red1);
        PeriodLattice {
            omega1,
            omega2,
            red1,
            red2,
            tau,
            bits,
            g2: Rat::zero(),
            g3: Rat::zero(),
        }
    }

    /// Build a lattice from explicit generators and exact shadows,
    /// normalizing orientation and verifying the Eisenstein identities.
    pub fn from_generators(
        omega1: Complex,
        mut omega2: Complex,
        g2: Rat,
        g3: Rat,
        bits: u32,
    ) -> Result<Self, PeriodsError> {
        let prec = omega1.prec();
        // orientation Im(w2/w1) > 0
        if omega2.div(&omega1).im.is_negative() {
            omega2 = omega2.neg();
        }
        let (red1, mut red2) = gauss_reduce(omega1.clone(), omega2.clone(), prec);
        if red2.div(&red1).im.is_negative() {
            red2 = red2.neg();
        }
        let tau = red2.div(&red1);
        let lat = PeriodLattice {
            omega1,
            omega2,
            red1,
            red2,
            tau,
            bits,
            g2,
            g3,
        };
        // Eisenstein verification: g2(lattice) must equal c4/12 numerically
        let g2n = lat.eisenstein_g2();
        let g3n = lat.eisenstein_g3();
        let tol = Real::pow2(bits as i64 - 12, prec);
        let d2 = g2n.sub(&Complex::from_real(Real::from_rat(&lat.g2, prec))).abs();
        let d3 = g3n.sub(&Complex::from_real(Real::from_rat(&lat.g3, prec))).abs();
        if d2.cmp(&tol) == Ordering::Greater || d3.cmp(&tol) == Ordering::Greater {
            return Err(PeriodsError::PrecisionUnreachable(bits));
        }
        Ok(lat)
    }

    pub fn prec(&self) -> u32 {
        self.omega1.prec()
    }

    fn q_tau(&self) -> Complex {
        q_parameter(&self.tau, 1)
    }

    /// Number of q-series terms for the working precision.
    fn series_terms(&self) -> usize {
        // |q| <= e^(-pi sqrt(3)/2) after reduction; be generous
        (self.prec() as usize) / 3 + 24
    }

    /// g2 of the lattice from the weight-4 Eisenstein sum (computed through
    /// its E4 q-expansion): (4 pi^4 / 3) E4(tau) / red1^4.
    pub fn eisenstein_g2(&self) -> Complex {
        let prec = self.prec();
        let q = self.q_tau();
        let n = self.series_terms();
        let mut e4 = Complex::one(prec);
        let mut qn = Complex::one(prec);
        for k in 1..=n {
            qn = qn.mul(&q);
            e4 = e4.add(&qn.mul_i64(240 * sigma(k as u64, 3)));
        }
        let pi4 = pi(prec).mul(&pi(prec));
        let pi4 = pi4.mul(&pi4);
        let c = Complex::from_real(pi4.mul_i64(4).div_i64(3));
        let w4 = self.red1.mul(&self.red1);
        let w4 = w4.mul(&w4);
        c.mul(&e4).div(&w4)
    }

    pub fn eisenstein_g3(&self) -> Complex {
        let prec = self.prec();
        let q = self.q_tau();
        let n = self.series_terms();
        let mut e6 = Complex::one(prec);
        let mut qn = Complex::one(prec);
        for k in 1..=n {
            qn = qn.mul(&q);
            e6 = e6.sub(&qn.mul_i64(504 * sigma(k as u64, 5)));
        }
        let p = pi(prec);
        let pi6 = p.mul(&p).mul(&p);
        let pi6 = pi6.mul(&pi6);
        let c = Complex::from_real(pi6.mul_i64(8).div_i64(27));
        let w2 = self.red1.mul(&self.red1);
        let w6 = w2.mul(&w2).mul(&w2);
        c.mul(&e6).div(&w6)
    }

    /// Real coordinates of z in the curve-convention basis.
    pub fn coordinates(&self, z: &Complex) -> (Real, Real) {
        Self::coords_in(&self.omega1, &self.omega2, z)
    }

    fn coords_in(w1: &Complex, w2: &Complex, z: &Complex) -> (Real, Real) {
        // solve x w1 + y w2 = z over R via 2x2 system
        let det = w1.re.mul(&w2.im).sub(&w1.im.mul(&w2.re));
        let x = z.re.mul(&w2.im).sub(&z.im.mul(&w2.re)).div(&det);
        let y = w1.re.mul(&z.im).sub(&w1.im.mul(&z.re)).div(&det);
        (x, y)
    }

    /// Reduce z modulo the lattice into the centered cell of the reduced
    /// basis; returns the reduced point.
    pub fn reduce(&self, z: &Complex) -> Complex {
        let (x, y) = Self::coords_in(&self.red1, &self.red2, z);
        let m = x.round();
        let n = y.round();
        let prec = self.prec();
        z.sub(&self.red1.mul_real(&Real::from_bigint(&m, prec)))
            .sub(&self.red2.mul_real(&Real::from_bigint(&n, prec)))
    }

    /// Snap z to the nearest lattice element; errors when the distance
    /// exceeds 2^(-bits/2).
    pub fn snap(&self, z: &Complex) -> Result<(BigInt, BigInt), PeriodsError> {
        let (x, y) = self.coordinates(z);
        let m = x.round();
        let n = y.round();
        let prec = self.prec();
        let dz = z
            .sub(&self.omega1.mul_real(&Real::from_bigint(&m, prec)))
            .sub(&self.omega2.mul_real(&Real::from_bigint(&n, prec)));
        let dist = dz.abs();
        let tol = Real::pow2(self.bits as i64 / 2, prec);
        if dist.cmp(&tol) == Ordering::Greater {
            return Err(PeriodsError::LatticeSnapFailed {
                dist: format!("{:e}", dist.to_f64()),
                tol: format!("2^-{}", self.bits / 2),
            });
        }
        Ok((m, n))
    }

    /// Classify z modulo the lattice: lattice point, 2-torsion, or generic.
    pub fn classify(&self, z: &Complex) -> LatticeClass {
        let (x, y) = self.coordinates(z);
        let prec = self.prec();
        let two = |r: &Real| r.scale2(1);
        let dx = two(&x).dist_to_integer();
        let dy = two(&y).dist_to_integer();
        let tol = Real::pow2(self.bits as i64 / 2, prec).scale2(1);
        if dx.cmp(&tol) == Ordering::Greater || dy.cmp(&tol) == Ordering::Greater {
            return LatticeClass::Generic;
        }
        let hx = two(&x).round();
        let hy = two(&y).round();
        let ex = (&hx % BigInt::from(2)).is_zero();
        let ey = (&hy % BigInt::from(2)).is_zero();
        if ex && ey {
            LatticeClass::LatticePoint
        } else {
            LatticeClass::TwoTorsion
        }
    }

    /// Weierstrass p at z (z not a lattice point) via the Fourier expansion
    /// in the reduced basis.
    pub fn wp(&self, z: &Complex) -> Complex {
        self.wp_pair(z).0
    }

    pub fn wp_prime(&self, z: &Complex) -> Complex {
        self.wp_pair(z).1
    }

    /// (p(z), p'(z)) together, sharing the series work.
    pub fn wp_pair(&self, z: &Complex) -> (Complex, Complex) {
        let prec = self.prec();
        let z = self.reduce(z);
        let q = self.q_tau();
        // v = e^(2 pi i z / red1)
        let u = z.div(&self.red1);
        let two_pi = pi(prec).scale2(1);
        let arg_re = two_pi.mul(&u.im).neg();
        let arg_im = two_pi.mul(&u.re);
        let v = Complex {
            re: arg_re,
            im: arg_im,
        }
        .exp();
        let one = Complex::one(prec);
        let term_p = |x: &Complex| -> Complex {
            // x / (1-x)^2
            let d = one.sub(x);
            x.div(&d.mul(&d))
        };
        let term_pp = |x: &Complex| -> Complex {
            // x (1+x) / (1-x)^3
            let d = one.sub(x);
            x.mul(&one.add(x)).div(&d.mul(&d).mul(&d))
        };
        let twelfth = Complex::from_real(Real::one(prec).div_i64(12));
        let mut p_acc = twelfth.add(&term_p(&v));
        let mut pp_acc = term_pp(&v);
        let mut qn = Complex::one(prec);
        let n_terms = self.series_terms();
        for _ in 1..=n_terms {
            qn = qn.mul(&q);
            let qv = qn.mul(&v);
            let qiv = qn.div(&v);
            p_acc = p_acc.add(&term_p(&qv)).add(&term_p(&qiv));
            // -2 q^n/(1-q^n)^2
            p_acc = p_acc.sub(&term_p(&qn).mul_i64(2));
            pp_acc = pp_acc.add(&term_pp(&qv)).sub(&term_pp(&qiv));
        }
        // scale: p = (2 pi i / red1)^2 [..], p' = (2 pi i / red1)^3 [..]
        let two_pi_i = Complex {
            re: Real::zero(prec),
            im: two_pi,
        };
        let s = two_pi_i.div(&self.red1);
        let s2 = s.mul(&s);
        let s3 = s2.mul(&s);
        (s2.mul(&p_acc), s3.mul(&pp_acc))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeClass {
    LatticePoint,
    TwoTorsion,
    Generic,
}

fn sigma(n: u64, k: u32) -> i64 {
    let mut s = 0i64;
    for d in 1..=n {
        if n % d == 0 {
            s += (d as i64).pow(k);
        }
    }
    s
}

/// Exact Laurent coefficients of p(z) = z^-2 + sum_{k>=2} c_k z^(2k-2).
#[derive(Clone, Debug)]
pub struct WpLaurent {
    pub g2: Rat,
    pub g3: Rat,
    /// c[k] for k = 2..=kmax; c[0], c[1] unused placeholders.
    c: Vec<Rat>,
}

impl WpLaurent {
    /// c_2 = g2/20, c_3 = g3/28, and for k >= 4
    /// c_k = 3 (sum_{m=2}^{k-2} c_m c_{k-m}) / ((2k+1)(k-3)).
    pub fn new(g2: Rat, g3: Rat, kmax: usize) -> Self {
        assert!(kmax >= 2);
        let mut c = vec![Rat::zero(); kmax + 1];
        c[2] = &g2 / Rat::from_integer(BigInt::from(20));
        if kmax >= 3 {
            c[3] = &g3 / Rat::from_integer(BigInt::from(28));
        }
        for k in 4..=kmax {
            let mut s = Rat::zero();
            for m in 2..=(k - 2) {
                s += &c[m] * &c[k - m];
            }
            let denom = Rat::from_integer(BigInt::from((2 * k as i64 + 1) * (k as i64 - 3)));
            c[k] = Rat::from_integer(BigInt::from(3)) * s / denom;
        }
        WpLaurent { g2, g3, c }
    }

    pub fn kmax(&self) -> usize {
        self.c.len() - 1
    }

    /// Coefficient of z^(2k-2), k >= 2.
    pub fn coeff(&self, k: usize) -> &Rat {
        &self.c[k]
    }
}

/// Eichler integral eps(z) = sum_{n>=1} (m a_n / n) q^n evaluated at a point
/// of the upper half plane. The coefficient table bounds the accuracy; an
/// insufficient table is an error rather than a silent truncation.
pub fn eichler_integral(
    f: &NewformCoefficients,
    z: &Complex,
    bits: u32,
) -> Result<Complex, PeriodsError> {
    let prec = z.prec();
    assert!(!z.im.is_negative() && !z.im.is_zero(), "need Im z > 0");
    let q = q_parameter(z, 1);
    let qa = q.abs();
    // tail bound: sum_{n>M} |q|^n <= |q|^(M+1)/(1-|q|); |a_n| <= n
    let one = Real::one(prec);
    let target = Real::pow2(bits as i64 + 8, prec);
    let mut qn = Complex::one(prec);
    let mut acc = Complex::zero(prec);
    let gap = one.sub(&qa);
    for n in 1..=f.len() {
        qn = qn.mul(&q);
        let an = f.a(n);
        if an != 0 {
            acc = acc.add(&qn.mul_i64(an * f.manin as i64).div_i64(n as i64));
        }
        // |q|^n * n / gap as the remaining-tail overestimate
        if n % 16 == 0 {
            let bound = qa
                .clone()
                .mul(&qn.abs())
                .mul_i64(2 * n as i64)
                .div(&gap);
            if bound.cmp(&target) == Ordering::Less {
                return Ok(acc);
            }
        }
    }
    let bound = qn.abs().mul_i64(2 * f.len() as i64).div(&gap);
    if bound.cmp(&target) == Ordering::Less {
        Ok(acc)
    } else {
        Err(PeriodsError::ConvergenceBudgetExceeded(f.len()))
    }
}

/// C(gamma) = eps(gamma z) - eps(z) for gamma in Gamma_0(N), evaluated at a
/// point where both sides converge well, then snapped to the lattice.
pub fn period_map(
    lattice: &PeriodLattice,
    f: &NewformCoefficients,
    gamma: [i64; 4],
    bits: u32,
) -> Result<(BigInt, BigInt, Complex), PeriodsError> {
    let [a, b, c, d] = gamma;
    assert_eq!(a * d - b * c, 1, "gamma must have determinant 1");
    assert_eq!(
        c.rem_euclid(f.level as i64),
        0,
        "gamma must lie in Gamma_0(N)"
    );
    let prec = lattice.prec();
    if c == 0 {
        // translation: eps is 1-periodic
        return Ok((BigInt::zero(), BigInt::zero(), Complex::zero(prec)));
    }
    // z0 = (i - d)/c puts both z0 and gamma z0 at height 1/|c|
    let ci = Real::from_int(c, prec);
    let z0 = Complex {
        re: Real::from_int(-d, prec).div(&ci),
        im: Real::one(prec).div(&ci).abs(),
    };
    let gz0 = moebius(&z0, gamma);
    let e1 = eichler_integral(f, &gz0, bits)?;
    let e0 = eichler_integral(f, &z0, bits)?;
    let val = e1.sub(&e0);
    let (m, n) = lattice.snap(&val)?;
    Ok((m, n, val))
}

pub fn moebius(z: &Complex, gamma: [i64; 4]) -> Complex {
    let prec = z.prec();
    let [a, b, c, d] = gamma;
    let num = z.mul_i64(a).add(&Complex::from_real(Real::from_int(b, prec)));
    let den = z.mul_i64(c).add(&Complex::from_real(Real::from_int(d, prec)));
    num.div(&den)
}

/// Relation between two period lattices, recovered by rational
/// reconstruction of the change-of-basis matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum LatticeRelation {
    Equal,
    /// L1 is a sublattice of L2 with the given index.
    Sublattice(u64),
    /// L1 is a superlattice of L2 with the given index.
    Superlattice(u64),
    /// Neither contains the other; indices of the common sublattice
    /// L3 = L1 meet L2 inside L1 and L2 respectively.
    CommonSublattice {
        in_l1: u64,
        in_l2: u64,
        /// Basis of L3 in integer coordinates over (w1, w2) of L1.
        basis_in_l1: [[BigInt; 2]; 2],
    },
    Unrelated,
}

/// Decide how L1 and L2 sit inside each other. Denominators of the
/// change-of-basis matrix are searched up to `denom_bound`.
pub fn lattice_relation(
    l1: &PeriodLattice,
    l2: &PeriodLattice,
    denom_bound: u64,
) -> LatticeRelation {
    assert_eq!(l1.prec(), l2.prec(), "lattices must share a precision");
    let bound = BigInt::from(denom_bound);
    let err_bits = l1.bits / 2;
    // express generators of L2 in the basis of L1
    let mut m = [[Rat::zero(), Rat::zero()], [Rat::zero(), Rat::zero()]];
    for (i, w) in [&l2.omega1, &l2.omega2].into_iter().enumerate() {
        let (x, y) = l1.coordinates(w);
        let rx = crate::arith::reconstruct::rational_reconstruct(&x, &bound, err_bits);
        let ry = crate::arith::reconstruct::rational_reconstruct(&y, &bound, err_bits);
        match (rx, ry) {
            (Ok(a), Ok(b)) => {
                m[i][0] = a;
                m[i][1] = b;
            }
            _ => return LatticeRelation::Unrelated,
        }
    }
    let is_int = |r: &Rat| r.denom().abs() == BigInt::from(1);
    let all_int = m.iter().flatten().all(is_int);
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    if det.is_zero() {
        return LatticeRelation::Unrelated;
    }
    if all_int {
        let idx = det.to_integer().abs().to_u64().unwrap();
        return if idx == 1 {
            LatticeRelation::Equal
        } else {
            // L2 = M L1-basis with integer M: L2 inside L1
            LatticeRelation::Superlattice(idx)
        };
    }
    // inverse integral? then L1 inside L2
    let inv = [
        [&m[1][1] / &det, -(&m[0][1] / &det)],
        [-(&m[1][0] / &det), &m[0][0] / &det],
    ];
    if inv.iter().flatten().all(is_int) {
        let idet = (Rat::from_integer(BigInt::from(1)) / &det).to_integer().abs();
        return LatticeRelation::Sublattice(idet.to_u64().unwrap());
    }
    // general commensurable case: L3 = L1 meet L2.
    // v = (x, y) in Z^2 (coords over L1) lies in L2 iff M^-1 v is integral.
    let denom_lcm = m
        .iter()
        .flatten()
        .fold(BigInt::from(1), |acc, r| num_integer::lcm(acc, r.denom().clone()));
    let a: Vec<BigInt> = m
        .iter()
        .flatten()
        .map(|r| r.numer() * &denom_lcm / r.denom())
        .collect();
    // integer matrix A = lcm * M, detA = lcm^2 det
    let det_a = &a[0] * &a[3] - &a[1] * &a[2];
    // v in L2 iff adj(A) * lcm * v = 0 mod detA (adj(A) v = detA M^-1 v / lcm)
    let adj = [a[3].clone(), -a[1].clone(), -a[2].clone(), a[0].clone()];
    let modn = det_a.abs();
    let n = modn.to_i64().unwrap_or(0);
    if n == 0 || n > 4096 {
        return LatticeRelation::Unrelated;
    }
    // collect the sublattice of Z^2 satisfying the congruences
    let mut members = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let c1 = (&adj[0] * x + &adj[1] * y) * &denom_lcm;
            let c2 = (&adj[2] * x + &adj[3] * y) * &denom_lcm;
            if (c1 % &modn).is_zero() && (c2 % &modn).is_zero() {
                members.push((x, y));
            }
        }
    }
    // basis by HNF-like selection: minimal positive x with y = 0 pattern
    // plus the minimal vector with minimal positive second coordinate
    let e1 = members
        .iter()
        .filter(|(x, y)| *y == 0 && *x > 0)
        .min_by_key(|(x, _)| *x)
        .copied();
    let e2 = members
        .iter()
        .filter(|(_, y)| *y > 0)
        .min_by_key(|(x, y)| (*y, *x))
        .copied();
    match (e1, e2) {
        (Some((x1, _)), Some((x2, y2))) => {
            let idx1 = (x1 * y2) as u64; // index in Z^2 = L1 coords
            let in_l2 = {
                // index of L3 in L2 = covol ratio: idx1 / |det M|
                let d = det.clone();
                let r = Rat::from_integer(BigInt::from(idx1 as i64)) / d.abs();
                r.to_integer().to_u64().unwrap_or(0)
            };
            LatticeRelation::CommonSublattice {
                in_l1: idx1,
                in_l2,
                basis_in_l1: [
                    [BigInt::from(x1), BigInt::zero()],
                    [BigInt::from(x2), BigInt::from(y2)],
                ],
            }
        }
        _ => LatticeRelation::Unrelated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::scalar::{rat, rat_int};
    use crate::curve::EllipticCurve;

    const BITS: u32 = 192;

    fn lat(a: [i64; 5], n: u64) -> (EllipticCurve, PeriodLattice) {
        let e = EllipticCurve::new(a, n, None).unwrap();
        let l = PeriodLattice::of_curve(&e, BITS).unwrap();
        (e, l)
    }

    #[test]
    fn paper_periods_14a() {
        let (_, l1) = lat([1, 0, 1, 4, -6], 14);
        let (w1, w2) = (l1.omega1.to_f64s(), l1.omega2.to_f64s());
        assert!((w1.0 - 1.981341956).abs() < 1e-6 && w1.1.abs() < 1e-12);
        assert!((w2.0 - 0.990670978).abs() < 1e-6 && (w2.1 - 1.325491239).abs() < 1e-6);
        let (_, l2) = lat([1, 0, 1, -36, -70], 14);
        let (v1, v2) = (l2.omega1.to_f64s(), l2.omega2.to_f64s());
        assert!((v1.0 - 0.990670978).abs() < 1e-6);
        assert!(v2.0.abs() < 1e-12 && (v2.1 - 1.325491239).abs() < 1e-6);
    }

    #[test]
    fn rescaled_curve_periods_scale() {
        // (x, y) -> (u^2 x, u^3 y) divides periods by u; compare u = 2
        // with model [0, -1, 1, -10, -20] vs scaled a-invariants
        let (_, l) = lat([0, -1, 1, -10, -20], 11);
        // u = 2: a1' = 2a1, a2' = 4a2, a3' = 8a3, a4' = 16a4, a6' = 64a6
        let e2 = EllipticCurve::new([0, -4, 8, -160, -1280], 11, None).unwrap();
        let l2 = PeriodLattice::of_curve(&e2, BITS).unwrap();
        let ratio = l.omega1.div(&l2.omega1).to_f64s();
        assert!((ratio.0 - 2.0).abs() < 1e-12 && ratio.1.abs() < 1e-12);
    }

    #[test]
    fn eisenstein_identity_tight() {
        let (e, l) = lat([0, -1, 1, -10, -20], 11);
        let g2n = l.eisenstein_g2();
        let exact = Real::from_rat(&e.g2_exact(), l.prec());
        let d = g2n.sub(&Complex::from_real(exact)).abs();
        // spec tolerance: 2^-(bits-8)
        assert!(d.cmp(&Real::pow2(BITS as i64 - 8, l.prec())) == Ordering::Less);
    }

    #[test]
    fn wp_laurent_coefficients() {
        let w = WpLaurent::new(rat_int(7), rat_int(11), 6);
        assert_eq!(*w.coeff(2), rat(7, 20));
        assert_eq!(*w.coeff(3), rat(11, 28));
        // c4 = c2^2 / 3
        assert_eq!(*w.coeff(4), rat(7, 20) * rat(7, 20) / rat_int(3));
        // degenerate: g2 = g3 = 0 kills every coefficient
        let z = WpLaurent::new(Rat::zero(), Rat::zero(), 8);
        for k in 2..=8 {
            assert!(z.coeff(k).is_zero());
        }
    }

    #[test]
    fn wp_satisfies_differential_equation() {
        let (e, l) = lat([0, -1, 1, -10, -20], 11);
        let prec = l.prec();
        for (zx, zy) in [(0.31, 0.12), (-0.2, 0.4), (0.05, 0.63)] {
            let z = Complex::from_f64s(zx, zy, prec);
            let (p, pp) = l.wp_pair(&z);
            let lhs = pp.mul(&pp);
            let rhs = p
                .mul(&p)
                .mul(&p)
                .mul_i64(4)
                .sub(&p.mul_real(&Real::from_rat(&e.g2_exact(), prec)))
                .sub(&Complex::from_real(Real::from_rat(&e.g3_exact(), prec)));
            let d = lhs.sub(&rhs).abs();
            assert!(
                d.cmp(&Real::pow2(BITS as i64 - 40, prec)) == Ordering::Less,
                "ODE residual {} at z = ({}, {})",
                d.to_f64(),
                zx,
                zy
            );
        }
    }

    #[test]
    fn wp_is_even_and_periodic() {
        let (_, l) = lat([1, 0, 1, 4, -6], 14);
        let prec = l.prec();
        let z = Complex::from_f64s(0.17, 0.29, prec);
        let p1 = l.wp(&z);
        let p2 = l.wp(&z.neg());
        assert!(p1.sub(&p2).abs().cmp(&Real::pow2(BITS as i64 - 24, prec)) == Ordering::Less);
        let zs = z.add(&l.omega1).add(&l.omega2);
        let p3 = l.wp(&zs);
        assert!(p1.sub(&p3).abs().cmp(&Real::pow2(BITS as i64 - 24, prec)) == Ordering::Less);
    }

    #[test]
    fn wp_matches_laurent_near_zero() {
        let (e, l) = lat([0, -1, 1, -10, -20], 11);
        let prec = l.prec();
        let z = Complex::from_f64s(0.05, 0.02, prec);
        let wl = WpLaurent::new(e.g2_exact(), e.g3_exact(), 12);
        let mut expect = z.mul(&z).inv();
        let z2 = z.mul(&z);
        let mut zp = Complex::one(prec);
        for k in 2..=12usize {
            zp = zp.mul(&z2);
            expect = expect.add(&zp.mul_real(&Real::from_rat(wl.coeff(k), prec)));
        }
        let got = l.wp(&z);
        let d = got.sub(&expect).abs();
        assert!(d.to_f64() < 1e-30, "difference {}", d.to_f64());
    }

    #[test]
    fn eichler_vanishes_at_infinity() {
        let e = EllipticCurve::new([0, -1, 1, -10, -20], 11, None).unwrap();
        let f = e.newform(200, 10_000).unwrap();
        let z = Complex::from_f64s(0.0, 40.0, 256);
        let v = eichler_integral(&f, &z, 128).unwrap();
        assert!(v.abs().to_f64() < 1e-30);
    }

    #[test]
    fn period_map_homomorphism_and_lattice() {
        let e = EllipticCurve::new([0, -1, 1, -10, -20], 11, None).unwrap();
        let l = PeriodLattice::of_curve(&e, BITS).unwrap();
        let f = e.newform(4000, 100_000).unwrap();
        let g1 = [4, -1, 33, -8]; // det 1, c = 33 = 3*11
        let g2m = [1, 0, 11, 1];
        assert_eq!(g1[0] * g1[3] - g1[1] * g1[2], 1);
        let (m1, n1, v1) = period_map(&l, &f, g1, BITS / 2).unwrap();
        let (m2, n2, v2) = period_map(&l, &f, g2m, BITS / 2).unwrap();
        // product
        let prod = [
            g1[0] * g2m[0] + g1[1] * g2m[2],
            g1[0] * g2m[1] + g1[1] * g2m[3],
            g1[2] * g2m[0] + g1[3] * g2m[2],
            g1[2] * g2m[1] + g1[3] * g2m[3],
        ];
        let (mp, np, vp) = period_map(&l, &f, prod, BITS / 2).unwrap();
        assert_eq!(mp, m1 + m2);
        assert_eq!(np, n1 + n2);
        let d = vp.sub(&v1.add(&v2)).abs();
        assert!(d.to_f64() < 1e-25);
        // identity
        let (mi, ni, _) = period_map(&l, &f, [1, 0, 0, 1], BITS / 2).unwrap();
        assert!(mi.is_zero() && ni.is_zero());
    }

    #[test]
    fn lattice_relation_14a_pair() {
        let (_, l1) = lat([1, 0, 1, 4, -6], 14);
        let (_, l2) = lat([1, 0, 1, -36, -70], 14);
        // Lambda(14a1) inside Lambda(14a2) with index 2
        assert_eq!(lattice_relation(&l1, &l2, 1000), LatticeRelation::Sublattice(2));
        assert_eq!(lattice_relation(&l2, &l1, 1000), LatticeRelation::Superlattice(2));
        assert_eq!(lattice_relation(&l1, &l1, 1000), LatticeRelation::Equal);
    }

    #[test]
    fn unrelated_lattices() {
        let (_, l1) = lat([0, -1, 1, -10, -20], 11);
        let (_, l2) = lat([1, 0, 1, 4, -6], 14);
        assert_eq!(lattice_relation(&l1, &l2, 1000), LatticeRelation::Unrelated);
    }
}

/// Compose the Weierstrass p-expansion at the origin with a series u of
/// positive valuation: p(u(q)) = u^-2 + sum c_k u^(2k-2), in the
/// p-coordinate (no b2 shift). Also returns p'(u(q)).
pub fn wp_compose(
    g2: &Rat,
    g3: &Rat,
    u: &crate::arith::series::LaurentSeries,
    trunc: i64,
) -> (
    crate::arith::series::LaurentSeries,
    crate::arith::series::LaurentSeries,
) {
    use crate::arith::scalar::Scalar;
    use crate::arith::series::LaurentSeries;
    let ell = u.valuation();
    assert!(ell >= 1, "argument series must vanish at the cusp");
    let w = u.width();
    let kmax = ((trunc + 4 * ell) / (2 * ell) + 3).max(3) as usize;
    let wl = WpLaurent::new(g2.clone(), g3.clone(), kmax);
    let u2 = u.mul(u).truncate_to(trunc + 4 * ell + 1);
    let inv_u2 = u2.invert().expect("u has a unit leading coefficient");
    let mut tail = LaurentSeries::zero(w, trunc + ell);
    let mut tailp = LaurentSeries::zero(w, trunc + ell);
    for k in (2..=kmax).rev() {
        tail = tail.mul(&u2).truncate_to(trunc + 2 * ell);
        tail = tail.add(&LaurentSeries::constant(
            w,
            Scalar::from_rat(wl.coeff(k).clone()),
            trunc + 2 * ell,
        ));
        tailp = tailp.mul(&u2).truncate_to(trunc + 2 * ell);
        tailp = tailp.add(&LaurentSeries::constant(
            w,
            Scalar::from_rat(wl.coeff(k) * Rat::from_integer(BigInt::from(2 * k as i64 - 2))),
            trunc + 2 * ell,
        ));
    }
    let wp = inv_u2.add(&u2.mul(&tail)).truncate_to(trunc);
    let inv_u3 = inv_u2
        .mul(&u.invert().expect("u leading unit"))
        .truncate_to(trunc + ell);
    let wpp = inv_u3
        .mul_scalar(&Scalar::from_int(-2))
        .add(&u.mul(&tailp))
        .truncate_to(trunc);
    (wp, wpp)
}
