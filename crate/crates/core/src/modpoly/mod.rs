//! Coset machinery for the modular polynomial Phi_F(x) = prod (x - F(gamma z)),
//! recognition of its coefficients as rational functions of j, divisors,
//! rational-point preimages, Atkin-Lehner twists, the CM criterion of the
//! fixed-point dichotomy, and the modular degree.

pub mod expr;
pub mod jtools;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use std::cmp::Ordering;

use crate::arith::float::{Complex, Real};
use crate::arith::scalar::{Rat, Scalar};
use crate::arith::series::LaurentSeries;
use crate::curve::{AffinePoint, EllipticCurve, NewformCoefficients};
use crate::error::{ModpolyError, ParamError};
use crate::gamma0::{self, cusp_width, Cusp, Mat};
use crate::param::{
    self, expand_cusp, gamma0_reduce, CuspExpansion, RecursionCase,
};
use crate::periods::{eichler_integral, moebius, PeriodLattice};
use crate::surd::QuadSurd;
use expr::CurveFunction;
use jtools::{factor_poly, j_recognize, JRational};

pub use gamma0::coset_reps;

/// A curve with its newform, period lattice, and exact expansions at every
/// cusp class, plus the coset decomposition against those expansions.
pub struct CurveSystem {
    pub e: EllipticCurve,
    pub f: NewformCoefficients,
    pub lattice: PeriodLattice,
    pub expansions: Vec<CuspExpansion>,
    pub reps: Vec<Mat>,
    /// (expansion index, T-offset) per coset representative.
    pub cosets: Vec<(usize, i64)>,
    pub bits: u32,
    /// expansion order in width-1 units.
    pub order_q: i64,
    /// Lazily extended coefficient table for evaluation points whose orbit
    /// stays close to a non-infinity cusp.
    f_big: std::sync::RwLock<Option<NewformCoefficients>>,
}

impl CurveSystem {
    /// Build the full system: expansions at each cusp run to order_q * width
    /// in the local parameter.
    pub fn new(e: &EllipticCurve, order_q: i64, bits: u32) -> Result<Self, ModpolyError> {
        let n = e.conductor;
        let f = e.newform(newform_len(n, bits, order_q), 2_000_000)
            .map_err(ParamError::from)?;
        let lattice = PeriodLattice::of_curve(e, bits).map_err(ParamError::from)?;
        let mut expansions = Vec::new();
        for cusp in gamma0::cusps(n) {
            let w = cusp_width(n, cusp) as i64;
            let exp = expand_cusp(e, &f, &lattice, cusp, order_q * w + 8, bits, 1)?;
            expansions.push(exp);
        }
        let reps = gamma0::coset_reps(n);
        let cosets = param::cosets_by_cusp(n, &reps, &expansions)?;
        Ok(CurveSystem {
            e: e.clone(),
            f,
            lattice,
            expansions,
            reps,
            cosets,
            bits,
            order_q,
            f_big: std::sync::RwLock::new(None),
        })
    }

    /// A system without cusp expansions, enough for the numeric sampling
    /// paths (modular degree, preimage search). Avoids slash reconstruction
    /// at cusps whose coefficient field is out of reach.
    pub fn new_numeric(e: &EllipticCurve, bits: u32) -> Result<Self, ModpolyError> {
        let n = e.conductor;
        let f = e
            .newform(newform_len(n, bits, 4), 2_000_000)
            .map_err(ParamError::from)?;
        let lattice = PeriodLattice::of_curve(e, bits).map_err(ParamError::from)?;
        let reps = gamma0::coset_reps(n);
        Ok(CurveSystem {
            e: e.clone(),
            f,
            lattice,
            expansions: Vec::new(),
            reps,
            cosets: Vec::new(),
            bits,
            order_q: 0,
            f_big: std::sync::RwLock::new(None),
        })
    }

    pub fn index(&self) -> usize {
        self.reps.len()
    }

    /// Numeric (X(z), Y(z)) through the reduction, Eichler integral, and
    /// Weierstrass pipeline. Gamma_0(N)-invariant by construction.
    pub fn eval_xy(&self, z: &Complex) -> Result<(Complex, Complex), ModpolyError> {
        let (zr, _) = gamma0_reduce(self.e.conductor, z);
        let eps = match eichler_integral(&self.f, &zr, self.bits) {
            Ok(v) => v,
            Err(crate::error::PeriodsError::ConvergenceBudgetExceeded(_)) => {
                // the orbit of z tops out near a non-infinity cusp; extend
                // the coefficient table far enough for this height
                let im = zr.im.to_f64();
                let needed = (1.4 * (self.bits as f64 + 48.0) * (2f64).ln()
                    / (2.0 * std::f64::consts::PI * im))
                    .ceil() as usize
                    + 64;
                if needed > 400_000 {
                    return Err(ParamError::from(
                        crate::error::PeriodsError::ConvergenceBudgetExceeded(needed),
                    )
                    .into());
                }
                {
                    let have = self.f_big.read().unwrap();
                    if have.as_ref().map_or(0, |f| f.len()) < needed {
                        drop(have);
                        let bigger = self
                            .e
                            .newform(needed, 2_000_000)
                            .map_err(ParamError::from)?;
                        let mut slot = self.f_big.write().unwrap();
                        if slot.as_ref().map_or(0, |f| f.len()) < needed {
                            *slot = Some(bigger);
                        }
                    }
                }
                let guard = self.f_big.read().unwrap();
                eichler_integral(guard.as_ref().unwrap(), &zr, self.bits)
                    .map_err(ParamError::from)?
            }
            Err(e) => return Err(ParamError::from(e).into()),
        };
        let (p, pp) = self.lattice.wp_pair(&eps);
        let prec = p.prec();
        let m = self.e.manin as i64;
        let b2_12 = Rat::from_integer(self.e.b2.clone()) / crate::arith::scalar::rat_int(12);
        let x = p
            .mul_i64(m * m)
            .sub(&Complex::from_real(Real::from_rat(&b2_12, prec)));
        let a1 = Rat::from_integer(self.e.a1.clone());
        let a2 = Rat::from_integer(self.e.a2.clone());
        let a3 = Rat::from_integer(self.e.a3.clone());
        let ycst = (&a1 * &a1 * &a1 + crate::arith::scalar::rat_int(4) * &a1 * &a2
            - crate::arith::scalar::rat_int(12) * &a3)
            / crate::arith::scalar::rat_int(24);
        let y = pp
            .mul_i64(m * m * m)
            .div_i64(2)
            .sub(&p.mul_i64(m * m).mul_real(&Real::from_rat(
                &(&a1 / crate::arith::scalar::rat_int(2)),
                prec,
            )))
            .add(&Complex::from_real(Real::from_rat(&ycst, prec)));
        Ok((x, y))
    }
}

fn newform_len(n: u64, bits: u32, order_q: i64) -> usize {
    // enough a_k for Eichler sums down to the reduced-height floor, and for
    // the slash series at every cusp
    let im_min = 3f64.sqrt() / (2.0 * n as f64);
    let eich = (1.4 * (bits as f64 + 48.0) * (2f64).ln()
        / (2.0 * std::f64::consts::PI * im_min))
        .ceil() as usize
        + 64;
    let series = (order_q as usize + 16) * n as usize;
    eich.max(series).max(256)
}

/// A rational expression in (X, Y) carried with its expansion at every cusp.
pub struct ModularFunction<'a> {
    pub system: &'a CurveSystem,
    pub expr: CurveFunction,
    pub cusp_series: Vec<LaurentSeries>,
}

pub fn build_modular_function<'a>(
    system: &'a CurveSystem,
    expr: &CurveFunction,
) -> Result<ModularFunction<'a>, ModpolyError> {
    let mut cusp_series = Vec::with_capacity(system.expansions.len());
    for (i, exp) in system.expansions.iter().enumerate() {
        let s = expr
            .eval_series(&exp.x, &exp.y)
            .map_err(|e| ModpolyError::ExpansionUndefined { coset: i, source: e })?;
        cusp_series.push(s);
    }
    Ok(ModularFunction {
        system,
        expr: expr.clone(),
        cusp_series,
    })
}

impl<'a> ModularFunction<'a> {
    /// Power sum p_s(z) = sum over cosets of F(gamma z)^s as a width-1
    /// rational series, assembled from per-cusp filtered traces.
    pub fn power_sum(&self, s: u32) -> Result<LaurentSeries, ModpolyError> {
        let mut total: Option<LaurentSeries> = None;
        for (i, g) in self.cusp_series.iter().enumerate() {
            let w = self.system.expansions[i].data.width;
            let pw = g.pow(s);
            let filtered = pw.filter_width_multiples().mul_scalar(&Scalar::from_int(w as i64));
            total = Some(match total {
                None => filtered,
                Some(t) => t.add(&filtered),
            });
        }
        let total = total.expect("at least one cusp");
        if total.try_rational().is_none() {
            let idx = total
                .iter()
                .find(|(_, c)| c.as_rational().is_none())
                .map(|(n, _)| n)
                .unwrap_or_default();
            return Err(ModpolyError::GaloisResidue { index: idx });
        }
        Ok(total)
    }

    /// Trace of Phi_F: sum of F over the cosets.
    pub fn trace(&self) -> Result<LaurentSeries, ModpolyError> {
        self.power_sum(1)
    }

    /// Elementary symmetric functions e_1..e_k of the coset values via
    /// Newton's identities; A_(mu - i) = (-1)^i e_i.
    pub fn elementary_symmetric(&self, k: usize) -> Result<Vec<LaurentSeries>, ModpolyError> {
        let p: Vec<LaurentSeries> = (1..=k)
            .map(|s| self.power_sum(s as u32))
            .collect::<Result<_, _>>()?;
        let mut e: Vec<LaurentSeries> = Vec::with_capacity(k + 1);
        // e_0 = 1 with a generous truncation
        let trunc = p[0].truncation();
        e.push(LaurentSeries::constant(1, Scalar::one(), trunc));
        for i in 1..=k {
            let mut acc = LaurentSeries::zero(1, trunc);
            for j in 1..=i {
                let term = e[i - j].mul(&p[j - 1]);
                acc = if j % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
            }
            e.push(acc.mul_rat(&Rat::new(BigInt::from(1), BigInt::from(i as i64))));
        }
        Ok(e.split_off(1))
    }

    /// Coefficients A_i of Phi_F for i = mu-1 down to mu-top_k, as
    /// (index, series) pairs.
    pub fn modular_polynomial(&self, top_k: usize) -> Result<Vec<(usize, LaurentSeries)>, ModpolyError> {
        let mu = self.system.index();
        let es = self.elementary_symmetric(top_k.min(mu))?;
        Ok(es
            .into_iter()
            .enumerate()
            .map(|(i0, s)| {
                let i = i0 + 1;
                let signed = if i % 2 == 1 { s.neg() } else { s };
                (mu - i, signed)
            })
            .collect())
    }

    pub fn default_degree_bound(&self) -> usize {
        self.system.index() / 6 + 2
    }
}

/// A place of the divisor of a modular function on X_0(N).
#[derive(Clone, Debug, PartialEq)]
pub enum Place {
    /// Interior points grouped over a rational-irreducible j-value.
    Interior { minpoly: Vec<BigInt>, mult: i64 },
    /// A cusp class with the order in the local parameter q_w.
    Cusp { cusp: Cusp, mult: i64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Divisor {
    pub places: Vec<Place>,
}

impl Divisor {
    /// Total degree; zero for the divisor of a function.
    pub fn degree(&self) -> i64 {
        self.places
            .iter()
            .map(|p| match p {
                Place::Interior { minpoly, mult } => mult * (minpoly.len() as i64 - 1),
                Place::Cusp { mult, .. } => *mult,
            })
            .sum()
    }

    pub fn poles(&self) -> Vec<&Place> {
        self.places
            .iter()
            .filter(|p| match p {
                Place::Interior { mult, .. } => *mult < 0,
                Place::Cusp { mult, .. } => *mult < 0,
            })
            .collect()
    }

    pub fn interior_pole_minpolys(&self) -> Vec<Vec<BigInt>> {
        self.places
            .iter()
            .filter_map(|p| match p {
                Place::Interior { minpoly, mult } if *mult < 0 => Some(minpoly.clone()),
                _ => None,
            })
            .collect()
    }
}

/// Interior pole content of F read from the recognized symmetric functions:
/// the largest polar degree over e_1..e_4 at each irreducible j-factor.
fn interior_poles(
    mf: &ModularFunction,
    degree_bound: usize,
) -> Result<Vec<(Vec<BigInt>, i64)>, ModpolyError> {
    let k = 4.min(mf.system.index());
    let es = mf.elementary_symmetric(k)?;
    let mut best: Vec<(Vec<BigInt>, i64)> = Vec::new();
    for e in &es {
        if e.is_zero() {
            continue;
        }
        let jr = recognize_with_retry(e, degree_bound)?;
        for (factor, mult) in factor_poly(&jr.den)? {
            if factor.len() <= 1 {
                continue;
            }
            match best.iter_mut().find(|(f, _)| *f == factor) {
                Some((_, m)) => *m = (*m).max(mult as i64),
                None => best.push((factor, mult as i64)),
            }
        }
    }
    Ok(best)
}

fn recognize_with_retry(
    s: &LaurentSeries,
    degree_bound: usize,
) -> Result<JRational, ModpolyError> {
    match j_recognize(s, degree_bound) {
        Ok(jr) => Ok(jr),
        Err(ModpolyError::NoMatch(_)) => {
            let bigger = 2 * degree_bound + 2;
            j_recognize(s, bigger)
        }
        Err(e) => Err(e),
    }
}

/// The divisor of F on X_0(N): interior places from the recognized
/// coefficient functions of Phi_F and Phi_(1/F), cusp places from the
/// valuations of the per-cusp expansions.
pub fn divisor_of(mf: &ModularFunction, degree_bound: usize) -> Result<Divisor, ModpolyError> {
    let mut places = Vec::new();
    // cusp orders
    for (i, g) in mf.cusp_series.iter().enumerate() {
        let v = if g.is_zero() { 0 } else { g.valuation() };
        if v != 0 {
            places.push(Place::Cusp {
                cusp: mf.system.expansions[i].data.cusp,
                mult: v,
            });
        }
    }
    // interior poles of F
    for (minpoly, mult) in interior_poles(mf, degree_bound)? {
        places.push(Place::Interior {
            minpoly,
            mult: -mult,
        });
    }
    // interior zeros of F are the interior poles of 1/F
    let inv_expr = mf
        .expr
        .inverse(&mf.system.e)
        .map_err(|e| ModpolyError::ExpansionUndefined { coset: 0, source: e })?;
    let inv = build_modular_function(mf.system, &inv_expr)?;
    for (minpoly, mult) in interior_poles(&inv, degree_bound)? {
        places.push(Place::Interior { minpoly, mult });
    }
    Ok(Divisor { places })
}

/// Verdict of the fixed-point criterion for W_m.
#[derive(Clone, Debug, PartialEq)]
pub struct CMVerdict {
    pub m: u64,
    pub fixed: bool,
    /// Discriminant of the point's minimal polynomial when fixed.
    pub disc: Option<BigInt>,
    /// Witness s with disc = s^2 (mod 4m).
    pub witness: Option<u64>,
}

/// Exact W_m-fixedness of the Gamma_0(N)-orbit of a quadratic point.
pub fn is_w_fixed(n: u64, m: u64, z: &QuadSurd) -> bool {
    let w = gamma0::atkin_lehner_matrix(n, m);
    let image = z.apply(w);
    z.gamma0_equivalent(&image, n).is_some()
}

/// The fixed-point dichotomy: a W_m-fixed quadratic point has CM by an
/// order of discriminant D with -4m <= D < 0 and D a square mod 4m;
/// otherwise the point pairs with an m-isogenous partner.
pub fn cm_criterion(
    z: &QuadSurd,
    n: u64,
    m: u64,
    fixed: Option<bool>,
) -> Result<CMVerdict, ModpolyError> {
    let fixed = fixed.unwrap_or_else(|| is_w_fixed(n, m, z));
    if !fixed {
        return Ok(CMVerdict {
            m,
            fixed: false,
            disc: None,
            witness: None,
        });
    }
    let d = z.disc();
    let four_m = BigInt::from(4 * m);
    let in_range = d >= -&four_m && d.is_negative();
    let mut witness = None;
    for s in 0..=(2 * m) {
        let s2 = BigInt::from(s * s);
        if (&s2 - &d) % &four_m == BigInt::zero() {
            witness = Some(s);
            break;
        }
    }
    if !in_range || witness.is_none() {
        return Err(ModpolyError::CriterionViolated {
            d: d.to_string(),
            m,
        });
    }
    Ok(CMVerdict {
        m,
        fixed: true,
        disc: Some(d),
        witness,
    })
}

/// F composed with the Atkin-Lehner involution W_m, realized through the
/// group law: phi(W_m z) = lambda_m phi(z) + P_m with P_m the image of the
/// cusp W_m(infinity).
pub fn atkin_lehner_apply<'a>(
    mf: &ModularFunction<'a>,
    m: u64,
) -> Result<ModularFunction<'a>, ModpolyError> {
    let sys = mf.system;
    let n = sys.e.conductor;
    let lambda = param::atkin_lehner_sign(&sys.e, &sys.f, m, sys.bits)?;
    // image point of the cusp W_m(infinity) = class of 1/(N/m)
    let target = Cusp::new(1, (n / m) as i64);
    let exp = sys
        .expansions
        .iter()
        .find(|e| gamma0::cusp_equivalence(n, e.data.cusp, target).is_some())
        .ok_or(ModpolyError::Param(ParamError::CosetDecompositionFailed))?;
    let translation = match &exp.case {
        RecursionCase::Pole => None,
        RecursionCase::Regular { x0, y0 } | RecursionCase::TwoTorsion { x0, y0 } => {
            Some(AffinePoint::finite(x0.clone(), y0.clone()))
        }
    };
    let mut composed = mf.expr.clone();
    if let Some(p) = &translation {
        composed = composed.compose_translation(&sys.e, p);
    }
    if lambda == -1 {
        composed = composed.compose_negation(&sys.e);
    }
    build_modular_function(sys, &composed)
}

/// Numeric j(z) after reduction to the classical fundamental domain.
pub fn j_value(z: &Complex) -> Complex {
    let prec = z.prec();
    let mut cur = z.clone();
    for _ in 0..256 {
        let t = cur.re.round();
        if !t.is_zero() {
            cur = Complex {
                re: cur.re.sub(&Real::from_bigint(&t, prec)),
                im: cur.im.clone(),
            };
        }
        if cur.norm_sqr().cmp(&Real::one(prec)) == Ordering::Less {
            cur = cur.inv().neg();
        } else {
            break;
        }
    }
    let q = crate::arith::float::q_parameter(&cur, 1);
    let terms = prec as usize / 7 + 16;
    let mut e4 = Complex::one(prec);
    let mut e6 = Complex::one(prec);
    let mut qn = Complex::one(prec);
    for k in 1..=terms {
        qn = qn.mul(&q);
        let s3 = jt_sigma(k as u64, 3);
        let s5 = jt_sigma(k as u64, 5);
        e4 = e4.add(&qn.mul_i64(240 * s3));
        e6 = e6.sub(&qn.mul_i64(504 * s5));
    }
    let e4c = e4.mul(&e4).mul(&e4);
    let delta = e4c.sub(&e6.mul(&e6)).div_i64(1728);
    e4c.div(&delta)
}

fn jt_sigma(n: u64, k: u32) -> i64 {
    let mut s = 0i64;
    for d in 1..=n {
        if n % d == 0 {
            s += (d as i64).pow(k);
        }
    }
    s
}

/// Search the coset orbit of a CM point for preimages of a rational point:
/// returns the surds (normalized into |Re| <= 1/2) and the cosets that hit
/// the target, certified at the working precision and once more at twice
/// the precision.
pub fn preimage_search(
    sys: &CurveSystem,
    target: &AffinePoint,
    cm_point: &QuadSurd,
) -> Result<Vec<(QuadSurd, Mat)>, ModpolyError> {
    let (tx, ty) = target.xy().ok_or(ModpolyError::NoPreimageFound)?;
    let hits: Vec<(usize, QuadSurd, Mat)> = sys
        .reps
        .par_iter()
        .enumerate()
        .filter_map(|(t, m)| {
            let z = cm_point.apply(*m);
            let zc = z.to_complex(sys.lattice.prec());
            let (x, y) = sys.eval_xy(&zc).ok()?;
            let prec = x.prec();
            let tol = Real::pow2(sys.bits as i64 / 2, prec);
            let dx = x.sub(&Complex::from_real(Real::from_rat(tx, prec))).abs();
            let dy = y.sub(&Complex::from_real(Real::from_rat(ty, prec))).abs();
            (dx.cmp(&tol) == Ordering::Less && dy.cmp(&tol) == Ordering::Less)
                .then(|| (t, z.normalize_real_part(), *m))
        })
        .collect();
    if hits.is_empty() {
        return Err(ModpolyError::NoPreimageFound);
    }
    // re-verify at doubled precision
    let bits2 = sys.bits * 2;
    let sys2 = CurveSystem::new(&sys.e, 4, bits2)?;
    let mut out = Vec::new();
    for (_, z, m) in hits {
        let zc = z.to_complex(sys2.lattice.prec());
        let (x, y) = sys2.eval_xy(&zc)?;
        let prec = x.prec();
        let tol = Real::pow2(bits2 as i64 / 2, prec);
        let dx = x.sub(&Complex::from_real(Real::from_rat(tx, prec))).abs();
        let dy = y.sub(&Complex::from_real(Real::from_rat(ty, prec))).abs();
        if dx.cmp(&tol) == Ordering::Less && dy.cmp(&tol) == Ordering::Less {
            out.push((z, m));
        }
    }
    if out.is_empty() {
        return Err(ModpolyError::NoPreimageFound);
    }
    Ok(out)
}

/// Modular degree by a numeric fit of the norm product
/// R(z) = prod over cosets of (x0 - X(gamma z)), a rational function of j
/// whose finite zeros have total degree exactly 2 deg(phi) (a product of
/// zero factors cannot cancel). The numerator/denominator degree gap is
/// read off the large-j slope first. Two independent x0 choices must agree.
pub fn modular_degree(sys: &CurveSystem) -> Result<u64, ModpolyError> {
    let prec = sys.lattice.prec();
    let dmax = 28usize;
    let n_samples = 2 * dmax + 16;
    let phi1 = 0.618_033_988_749_894_9_f64;
    let phi2 = 0.381_966_011_250_105_1_f64;
    let mut points: Vec<Complex> = (0..n_samples)
        .map(|s| {
            let x = -0.47 + 0.94 * ((s as f64 * phi1) % 1.0);
            let y = 0.78 + 0.5 * ((s as f64 * phi2) % 1.0);
            Complex::from_f64s(x, y, prec)
        })
        .collect();
    // two high points for the degree-gap slope
    points.push(Complex::from_f64s(0.31, 2.0, prec));
    points.push(Complex::from_f64s(0.11, 2.6, prec));
    // X-values over every coset at every sample, shared by both x0 runs
    let xvals: Vec<(Complex, Vec<Complex>)> = points
        .par_iter()
        .map(|z| -> Result<(Complex, Vec<Complex>), ModpolyError> {
            let jv = j_value(z);
            let mut xs = Vec::with_capacity(sys.reps.len());
            for m in &sys.reps {
                let gz = moebius(z, *m);
                let (x, _) = sys.eval_xy(&gz)?;
                xs.push(x);
            }
            Ok((jv, xs))
        })
        .collect::<Result<_, _>>()?;
    let d1 = degree_once(&xvals, &crate::arith::scalar::rat(31, 7), sys.bits, dmax)?;
    let d2 = degree_once(&xvals, &crate::arith::scalar::rat(45, 11), sys.bits, dmax)?;
    if d1 != d2 {
        return Err(ModpolyError::NoMatch(d1.max(d2) as usize));
    }
    Ok(d1)
}

fn degree_once(
    xvals: &[(Complex, Vec<Complex>)],
    x0: &Rat,
    bits: u32,
    dmax: usize,
) -> Result<u64, ModpolyError> {
    let prec = xvals[0].0.prec();
    let x0r = Real::from_rat(x0, prec);
    let values: Vec<(Complex, Complex)> = xvals
        .iter()
        .map(|(j, xs)| {
            let mut prod = Complex::one(prec);
            for x in xs {
                prod = prod.mul(&Complex::from_real(x0r.clone()).sub(x));
            }
            (j.clone(), prod)
        })
        .collect();
    // degree gap from the two high samples at the end
    let (j1, r1) = &values[values.len() - 2];
    let (j2, r2) = &values[values.len() - 1];
    let slope = (r2.abs().to_f64().abs().ln() - r1.abs().to_f64().abs().ln())
        / (j2.abs().to_f64().ln() - j1.abs().to_f64().ln());
    let delta = slope.round() as i64;
    if (slope - delta as f64).abs() > 0.1 || delta < 0 {
        return Err(ModpolyError::NoMatch(dmax));
    }
    let fit_values = &values[..values.len() - 2];
    for dq in 0..=dmax {
        let dp = dq + delta as usize;
        if fit_verifies(fit_values, dp, dq, bits).is_some() {
            let total = dp;
            if total % 2 != 0 {
                return Err(ModpolyError::NoMatch(total));
            }
            return Ok((total / 2) as u64);
        }
    }
    Err(ModpolyError::NoMatch(dmax))
}

fn fit_verifies(
    values: &[(Complex, Complex)],
    dp: usize,
    dq: usize,
    bits: u32,
) -> Option<()> {
    let prec = values[0].0.prec();
    let unknowns = dp + dq + 1; // p_0..p_dp, q_0..q_(dq-1); q_dq = 1
    if values.len() < unknowns + 6 {
        return None;
    }
    let mut mat: Vec<Vec<Complex>> = Vec::with_capacity(unknowns);
    let mut rhs: Vec<Complex> = Vec::with_capacity(unknowns);
    for (j, v) in values.iter().take(unknowns) {
        let mut row = Vec::with_capacity(unknowns);
        let mut jp = Complex::one(prec);
        for _ in 0..=dp {
            row.push(jp.clone());
            jp = jp.mul(j);
        }
        let mut jp = Complex::one(prec);
        for _ in 0..dq {
            row.push(v.neg().mul(&jp));
            jp = jp.mul(j);
        }
        // monic: q_dq = 1 contributes v j^dq on the right-hand side
        rhs.push(v.mul(&jp));
        mat.push(row);
    }
    let sol = solve_complex(mat, rhs)?;
    let tol = Real::pow2(bits as i64 / 3, prec);
    for (j, v) in values.iter().skip(unknowns) {
        let mut p = Complex::zero(prec);
        let mut jp = Complex::one(prec);
        for k in 0..=dp {
            p = p.add(&sol[k].mul(&jp));
            jp = jp.mul(j);
        }
        let mut q = Complex::zero(prec);
        let mut jp = Complex::one(prec);
        for k in 0..dq {
            q = q.add(&sol[dp + 1 + k].mul(&jp));
            jp = jp.mul(j);
        }
        q = q.add(&jp);
        let resid = p.sub(&v.mul(&q)).abs();
        let scale = v.abs().mul(&q.abs()).add(&p.abs()).add(&Real::one(prec));
        if resid.div(&scale).cmp(&tol) == Ordering::Greater {
            return None;
        }
    }
    Some(())
}

fn solve_complex(mut m: Vec<Vec<Complex>>, mut b: Vec<Complex>) -> Option<Vec<Complex>> {
    let n = m.len();
    let prec = b[0].prec();
    for c in 0..n {
        // partial pivot
        let piv = (c..n).max_by(|&i, &j| m[i][c].norm_sqr().cmp(&m[j][c].norm_sqr()))?;
        if m[piv][c].is_zero() {
            return None;
        }
        m.swap(c, piv);
        b.swap(c, piv);
        let inv = m[c][c].inv();
        for r in (c + 1)..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].mul(&inv);
            let (head, tail) = m.split_at_mut(r);
            for k in c..n {
                tail[0][k] = tail[0][k].sub(&f.mul(&head[c][k]));
            }
            b[r] = b[r].sub(&f.mul(&b[c]));
        }
    }
    let mut x = vec![Complex::zero(prec); n];
    for c in (0..n).rev() {
        let mut acc = b[c].clone();
        for k in (c + 1)..n {
            acc = acc.sub(&m[c][k].mul(&x[k]));
        }
        x[c] = acc.div(&m[c][c]);
    }
    Some(x)
}

/// Trace of F recognized as a rational function of j.
pub fn trace_recognized(
    mf: &ModularFunction,
    degree_bound: usize,
) -> Result<JRational, ModpolyError> {
    recognize_with_retry(&mf.trace()?, degree_bound)
}

/// The coefficient A_i of Phi_F recognized in j.
pub fn coefficient_recognized(
    mf: &ModularFunction,
    i: usize,
    degree_bound: usize,
) -> Result<JRational, ModpolyError> {
    let mu = mf.system.index();
    assert!(i < mu);
    let series = mf
        .modular_polynomial(mu - i)?
        .into_iter()
        .find(|(idx, _)| *idx == i)
        .expect("requested coefficient included")
        .1;
    recognize_with_retry(&series, degree_bound)
}

