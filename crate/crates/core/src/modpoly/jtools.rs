//! Klein's j-function: the exact q-expansion, recognition of invariant
//! series as rational functions of j, and factorization of the resulting
//! polynomials over Q.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::float::{Complex, Real};
use crate::arith::reconstruct::rational_reconstruct;
use crate::arith::scalar::{Rat, Scalar};
use crate::arith::series::LaurentSeries;
use crate::error::ModpolyError;
use crate::modpoly::expr::{poly_divmod, poly_gcd, poly_is_zero, Poly};

fn sigma_big(n: u64, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    for d in 1..=n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
        }
    }
    s
}

/// Exact q-expansion of j = E4^3 / Delta through order `trunc`.
pub fn j_series(trunc: i64) -> LaurentSeries {
    let t = (trunc + 2).max(3);
    let mut e4 = vec![Scalar::zero(); t as usize];
    let mut e6 = vec![Scalar::zero(); t as usize];
    e4[0] = Scalar::one();
    e6[0] = Scalar::one();
    for n in 1..(t as usize) {
        e4[n] = Scalar::from_rat(Rat::from_integer(BigInt::from(240) * sigma_big(n as u64, 3)));
        e6[n] = Scalar::from_rat(Rat::from_integer(BigInt::from(-504) * sigma_big(n as u64, 5)));
    }
    let e4 = LaurentSeries::from_coeffs(1, 0, e4);
    let e6 = LaurentSeries::from_coeffs(1, 0, e6);
    let e4_cubed = e4.mul(&e4).mul(&e4);
    let delta = e4_cubed
        .sub(&e6.mul(&e6))
        .mul_rat(&Rat::new(BigInt::one(), BigInt::from(1728)));
    e4_cubed
        .mul(&delta.invert().expect("Delta has a unit leading term"))
        .truncate_to(trunc)
}

/// A rational function P(j)/Q(j) with coprime parts and monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct JRational {
    pub num: Poly,
    pub den: Poly,
}

impl JRational {
    pub fn normalized(mut num: Poly, mut den: Poly) -> Self {
        let g = poly_gcd(&num, &den);
        if g.len() > 1 {
            num = poly_divmod(&num, &g).0;
            den = poly_divmod(&den, &g).0;
        }
        if let Some(l) = den.last().cloned() {
            if !l.is_zero() && l != Rat::one() {
                num = num.iter().map(|c| c / &l).collect();
                den = den.iter().map(|c| c / &l).collect();
            }
        }
        JRational { num, den }
    }

    /// Re-expand through order `trunc` using the exact j-series.
    pub fn expand(&self, trunc: i64) -> LaurentSeries {
        // generous internal working order: j^deg has valuation -deg
        let deg = self.num.len().max(self.den.len()) as i64;
        let work = trunc + deg + 2;
        let j = j_series(work);
        let eval = |p: &Poly| -> LaurentSeries {
            let coeffs: Vec<Scalar> = p.iter().map(|r| Scalar::from_rat(r.clone())).collect();
            crate::arith::series::poly_eval_series(&coeffs, &j, 1, work)
        };
        let num = eval(&self.num);
        let den = eval(&self.den);
        num.div(&den)
            .expect("denominator has invertible leading term")
            .truncate_to(trunc)
    }

    pub fn degree(&self) -> usize {
        self.num.len().max(self.den.len()).saturating_sub(1)
    }

    pub fn eval_complex(&self, j: &Complex) -> Complex {
        crate::modpoly::expr::poly_eval_complex(&self.num, j)
            .div(&crate::modpoly::expr::poly_eval_complex(&self.den, j))
    }
}

/// Recognize a width-1 rational series as P(j)/Q(j) with degrees at most
/// `degree_bound`, verified by exact re-expansion.
pub fn j_recognize(s: &LaurentSeries, degree_bound: usize) -> Result<JRational, ModpolyError> {
    assert_eq!(s.width(), 1, "invariant series must have width 1");
    let t = s.truncation();
    let need = 2 * degree_bound as i64 + 2;
    if t - s.valuation().min(0) < need {
        return Err(ModpolyError::InsufficientPrecision { have: t, need });
    }
    let coeffs = s
        .try_rational()
        .ok_or(ModpolyError::GaloisResidue { index: s.valuation() })?;
    let _ = coeffs;
    // increasing denominator degree until a verified match appears
    for dq in 0..=degree_bound {
        // deg num - deg den = -valuation when the series has a pole at
        // infinity (valuation < 0)
        let dp_min = (dq as i64 - s.valuation()).max(0) as usize;
        for dp in [dp_min, dp_min.saturating_sub(dq)] {
            if dp > degree_bound {
                continue;
            }
            if let Some(jr) = try_fit(s, dp, dq) {
                let check = jr.expand(s.truncation());
                let tmin = check.truncation().min(s.truncation());
                if check.truncate_to(tmin) == s.truncate_to(tmin) {
                    return Ok(jr);
                }
            }
        }
    }
    Err(ModpolyError::NoMatch(degree_bound))
}

/// Solve the homogeneous linear system for P - s Q = 0 through the series
/// truncation; returns an unverified candidate.
fn try_fit(s: &LaurentSeries, dp: usize, dq: usize) -> Option<JRational> {
    let j = j_series(s.truncation());
    // columns: p_0..p_dp (coefficients of j^k), then q_0..q_dq applied to
    // -(s j^k); rows: coefficients of q^n
    let mut jpow: Vec<LaurentSeries> = Vec::with_capacity(dp.max(dq) + 1);
    let one = LaurentSeries::constant(1, Scalar::one(), s.truncation());
    jpow.push(one);
    for k in 1..=dp.max(dq) {
        jpow.push(jpow[k - 1].mul(&j).truncate_to(s.truncation()));
    }
    let cols: Vec<LaurentSeries> = (0..=dp)
        .map(|k| jpow[k].clone())
        .chain((0..=dq).map(|k| jpow[k].mul(s).neg().truncate_to(s.truncation())))
        .collect();
    let lo = cols.iter().map(|c| c.valuation()).min()?;
    let hi = cols.iter().map(|c| c.truncation()).min()?;
    if hi <= lo {
        return None;
    }
    let rows = (hi - lo) as usize;
    let ncols = cols.len();
    let mut m: Vec<Vec<Rat>> = vec![vec![Rat::zero(); ncols]; rows];
    for (cidx, col) in cols.iter().enumerate() {
        for r in 0..rows {
            m[r][cidx] = col
                .coeff(lo + r as i64)
                .and_then(|c| c.as_rational())
                .unwrap_or_else(Rat::zero);
        }
    }
    let null = nullspace_vector(m)?;
    let num: Poly = null[..=dp].to_vec();
    let den: Poly = null[dp + 1..].to_vec();
    if poly_is_zero(&den) || poly_is_zero(&num) && !s.is_zero() {
        return None;
    }
    Some(JRational::normalized(num, den))
}

/// One nonzero nullspace vector of the rational matrix, or None if the
/// kernel is trivial.
fn nullspace_vector(mut m: Vec<Vec<Rat>>) -> Option<Vec<Rat>> {
    let rows = m.len();
    let cols = m[0].len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0;
    for c in 0..cols {
        // find a pivot
        let mut sel = None;
        for r in rank..rows {
            if !m[r][c].is_zero() {
                sel = Some(r);
                break;
            }
        }
        let Some(r0) = sel else { continue };
        m.swap(rank, r0);
        let inv = Rat::one() / m[rank][c].clone();
        for x in m[rank].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for cc in 0..cols {
                    let sub = &m[rank][cc] * &f;
                    m[r][cc] = &m[r][cc] - &sub;
                }
            }
        }
        pivot_of_col[c] = Some(rank);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    // choose the first free column
    let free = (0..cols).find(|c| pivot_of_col[*c].is_none())?;
    let mut v = vec![Rat::zero(); cols];
    v[free] = Rat::one();
    for c in 0..cols {
        if let Some(pr) = pivot_of_col[c] {
            v[c] = -m[pr][free].clone();
        }
    }
    Some(v)
}

/// Content-free integer form of a rational polynomial.
pub fn primitive_integer_poly(p: &Poly) -> Vec<BigInt> {
    if poly_is_zero(p) {
        return vec![BigInt::zero()];
    }
    let denom_lcm = p
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = p.iter().map(|r| r.numer() * &denom_lcm / r.denom()).collect();
    let content = ints
        .iter()
        .fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let mut out: Vec<BigInt> = ints.iter().map(|x| x / &content).collect();
    if out.last().map_or(false, |l| l.is_negative()) {
        for x in out.iter_mut() {
            *x = -&*x;
        }
    }
    out
}

/// Factor a rational polynomial into irreducible primitive integer factors
/// with multiplicities, by clustering high-precision roots and verifying
/// each candidate by exact division.
pub fn factor_poly(p: &Poly) -> Result<Vec<(Vec<BigInt>, u32)>, ModpolyError> {
    let mut rem: Poly = p.clone();
    let mut out: Vec<(Vec<BigInt>, u32)> = Vec::new();
    let mut guard = 0;
    while rem.len() > 1 {
        guard += 1;
        if guard > 64 {
            return Err(ModpolyError::FactorizationIncomplete);
        }
        // root finding wants simple roots: peel the squarefree part
        let deriv: Poly = rem
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * Rat::from_integer(BigInt::from(k as i64)))
            .collect();
        let g = poly_gcd(&rem, &deriv);
        let sqfree = if g.len() > 1 { poly_divmod(&rem, &g).0 } else { rem.clone() };
        let f = find_one_factor(&sqfree)?;
        // divide out with multiplicity
        let frat: Poly = f.iter().map(|c| Rat::from_integer(c.clone())).collect();
        let mut mult = 0u32;
        loop {
            let (q, r) = poly_divmod(&rem, &frat);
            if poly_is_zero(&r) && !q.is_empty() {
                rem = q;
                mult += 1;
            } else {
                break;
            }
        }
        if mult == 0 {
            return Err(ModpolyError::FactorizationIncomplete);
        }
        out.push((f, mult));
    }
    Ok(out)
}

fn find_one_factor(p: &Poly) -> Result<Vec<BigInt>, ModpolyError> {
    let deg = p.len() - 1;
    if deg == 1 {
        return Ok(primitive_integer_poly(p));
    }
    let prec: u32 = 448;
    let roots = poly_roots(p, prec);
    // try subsets of increasing size built around each root
    for k in 1..=deg {
        for start in 0..roots.len() {
            // greedy subset: the root plus its (k-1) nearest-by-conjugation
            let subset = choose_subset(&roots, start, k);
            if subset.len() < k {
                continue;
            }
            if let Some(f) = snap_factor(&subset, prec) {
                let frat: Poly = f.iter().map(|c| Rat::from_integer(c.clone())).collect();
                let (_, r) = poly_divmod(p, &frat);
                if poly_is_zero(&r) {
                    return Ok(f);
                }
            }
        }
    }
    Err(ModpolyError::FactorizationIncomplete)
}

fn choose_subset(roots: &[Complex], start: usize, k: usize) -> Vec<Complex> {
    if k == 1 {
        return vec![roots[start].clone()];
    }
    // sort remaining roots by distance to the conjugate of the previous
    // pick, which chains conjugate pairs correctly for small degrees
    let mut chosen = vec![roots[start].clone()];
    let mut used = vec![false; roots.len()];
    used[start] = true;
    while chosen.len() < k {
        let target = chosen.last().unwrap().conj();
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in roots.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = r.sub(&target).abs().to_f64();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, _)) => {
                used[i] = true;
                chosen.push(roots[i].clone());
            }
            None => break,
        }
    }
    chosen
}

fn snap_factor(subset: &[Complex], prec: u32) -> Option<Vec<BigInt>> {
    // monic product over the subset
    let mut coeffs = vec![Complex::zero(prec); subset.len() + 1];
    coeffs[0] = Complex::one(prec);
    let mut deg = 0;
    for r in subset {
        // multiply by (x - r)
        deg += 1;
        for i in (0..deg).rev() {
            let shifted = coeffs[i].clone();
            coeffs[i + 1] = coeffs[i + 1].add(&shifted);
            coeffs[i] = coeffs[i].mul(&r.neg());
        }
        // re-assemble: maintain coefficients of ascending powers
        // (the loop above implements in-place convolution with (x - r))
    }
    // reconstruct rational coefficients with a denominator bound
    let bound = BigInt::from(1u64 << 40);
    let err = 120;
    let mut out = Vec::with_capacity(deg + 1);
    for c in coeffs.iter().take(deg + 1) {
        if c.im.abs().cmp(&Real::pow2(err, prec)) == std::cmp::Ordering::Greater {
            return None;
        }
        let r = rational_reconstruct(&c.re, &bound, err as u32).ok()?;
        out.push(r);
    }
    // ascending -> our Poly convention is ascending already
    let poly: Poly = out;
    Some(primitive_integer_poly(&poly))
}

/// All complex roots by Durand-Kerner at f64 followed by Newton polishing
/// at high precision.
pub fn poly_roots(p: &Poly, prec: u32) -> Vec<Complex> {
    let deg = p.len() - 1;
    let pf: Vec<(f64, f64)> = p
        .iter()
        .map(|r| (r.numer().to_f64().unwrap_or(0.0) / r.denom().to_f64().unwrap_or(1.0), 0.0))
        .collect();
    let scale = pf
        .iter()
        .take(deg)
        .map(|c| (c.0.abs() / pf[deg].0.abs()).powf(1.0 / (deg as f64)))
        .fold(1.0f64, f64::max);
    let mut rs: Vec<(f64, f64)> = (0..deg)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (deg as f64) + 0.37;
            (scale * ang.cos(), scale * ang.sin())
        })
        .collect();
    let evalf = |z: (f64, f64)| -> (f64, f64) {
        let mut acc = (0.0, 0.0);
        for c in pf.iter().rev() {
            acc = (
                acc.0 * z.0 - acc.1 * z.1 + c.0,
                acc.0 * z.1 + acc.1 * z.0,
            );
        }
        acc
    };
    for _ in 0..500 {
        let old = rs.clone();
        for i in 0..deg {
            let mut den = (pf[deg].0, 0.0);
            for (j, o) in old.iter().enumerate() {
                if j != i {
                    let d = (old[i].0 - o.0, old[i].1 - o.1);
                    den = (den.0 * d.0 - den.1 * d.1, den.0 * d.1 + den.1 * d.0);
                }
            }
            let v = evalf(old[i]);
            let n2 = den.0 * den.0 + den.1 * den.1;
            if n2 > 0.0 {
                rs[i] = (
                    old[i].0 - (v.0 * den.0 + v.1 * den.1) / n2,
                    old[i].1 - (v.1 * den.0 - v.0 * den.1) / n2,
                );
            }
        }
    }
    // Newton polish at high precision
    let pr: Vec<Real> = p.iter().map(|r| Real::from_rat(r, prec)).collect();
    let dr: Vec<Real> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, r)| Real::from_rat(&(r * Rat::from_integer(BigInt::from(k as i64))), prec))
        .collect();
    let evalp = |coeffs: &[Real], z: &Complex| -> Complex {
        let mut acc = Complex::zero(prec);
        for c in coeffs.iter().rev() {
            acc = acc.mul(z).add(&Complex::from_real(c.clone()));
        }
        acc
    };
    rs.into_iter()
        .map(|(x, y)| {
            let mut z = Complex::from_f64s(x, y, prec);
            for _ in 0..(prec.ilog2() + 6) {
                let f = evalp(&pr, &z);
                let fp = evalp(&dr, &z);
                if fp.is_zero() {
                    break;
                }
                z = z.sub(&f.div(&fp));
            }
            z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::scalar::rat_int;
    use crate::modpoly::expr::poly_mul;

    #[test]
    fn j_series_classical_coefficients() {
        let j = j_series(4);
        assert_eq!(j.coeff(-1), Some(Scalar::one()));
        assert_eq!(j.coeff(0), Some(Scalar::from_int(744)));
        assert_eq!(j.coeff(1), Some(Scalar::from_int(196884)));
        assert_eq!(j.coeff(2), Some(Scalar::from_int(21493760)));
        assert_eq!(j.coeff(3), Some(Scalar::from_int(864299970)));
    }

    #[test]
    fn recognize_j_itself() {
        let s = j_series(12);
        let jr = j_recognize(&s, 4).unwrap();
        assert_eq!(jr.num, vec![Rat::zero(), Rat::one()]);
        assert_eq!(jr.den, vec![Rat::one()]);
    }

    #[test]
    fn recognize_rational_function_roundtrip() {
        // build (j^2 - 3 j + 7)/(j - 2) exactly, re-expand, recognize
        let jr = JRational::normalized(
            vec![rat_int(7), rat_int(-3), rat_int(1)],
            vec![rat_int(-2), rat_int(1)],
        );
        let s = jr.expand(14);
        let got = j_recognize(&s, 5).unwrap();
        assert_eq!(got, jr);
    }

    #[test]
    fn insufficient_precision_detected() {
        let s = j_series(4);
        assert!(matches!(
            j_recognize(&s, 6),
            Err(ModpolyError::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn factor_quadratic_and_linear() {
        // (j + 24729001)(j + 32768)
        let p: Poly = poly_mul(
            &vec![rat_int(24729001), rat_int(1)],
            &vec![rat_int(32768), rat_int(1)],
        );
        let fs = factor_poly(&p).unwrap();
        assert_eq!(fs.len(), 2);
        let mut consts: Vec<BigInt> = fs.iter().map(|(f, _)| f[0].clone()).collect();
        consts.sort();
        assert_eq!(consts, vec![BigInt::from(32768), BigInt::from(24729001)]);
        // an irreducible quadratic times a repeated linear factor
        let q = poly_mul(
            &vec![rat_int(1), rat_int(1), rat_int(1)],
            &poly_mul(&vec![rat_int(-3), rat_int(1)], &vec![rat_int(-3), rat_int(1)]),
        );
        let fs = factor_poly(&q).unwrap();
        let mut seen_quo = false;
        for (f, m) in fs {
            if f.len() == 3 {
                assert_eq!(f, vec![BigInt::one(), BigInt::one(), BigInt::one()]);
                assert_eq!(m, 1);
                seen_quo = true;
            } else {
                assert_eq!(f, vec![BigInt::from(-3), BigInt::one()]);
                assert_eq!(m, 2);
            }
        }
        assert!(seen_quo);
    }
}
