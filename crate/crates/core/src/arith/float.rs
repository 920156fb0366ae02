//! Fixed-point high-precision real and complex arithmetic on top of BigInt.
//!
//! A [`Real`] stores an integer mantissa m at a fixed binary scale: the value
//! is m * 2^(-prec). All numeric work in the crate is absolute-precision
//! arithmetic at a working precision chosen generously above the target
//! tolerance; callers add guard bits rather than tracking error intervals.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Mutex;

#[derive(Clone, PartialEq, Eq)]
pub struct Real {
    pub mant: BigInt,
    pub prec: u32,
}

fn shr_round(m: &BigInt, k: u32) -> BigInt {
    if k == 0 {
        return m.clone();
    }
    let half = BigInt::one() << (k - 1);
    (m + half) >> k
}

impl Real {
    pub fn zero(prec: u32) -> Self {
        Real {
            mant: BigInt::zero(),
            prec,
        }
    }

    pub fn one(prec: u32) -> Self {
        Real {
            mant: BigInt::one() << prec,
            prec,
        }
    }

    pub fn from_int(n: i64, prec: u32) -> Self {
        Real {
            mant: BigInt::from(n) << prec,
            prec,
        }
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Self {
        Real {
            mant: n.clone() << prec,
            prec,
        }
    }

    pub fn from_rat(r: &BigRational, prec: u32) -> Self {
        let num = r.numer() << prec;
        Real {
            mant: num.div_floor(r.denom()),
            prec,
        }
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        // exact binary expansion of the double
        if x == 0.0 {
            return Real::zero(prec);
        }
        assert!(x.is_finite());
        let bits = x.to_bits();
        let sign: i64 = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e2) = if exp == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let m = BigInt::from(mant) * sign;
        let shift = prec as i64 + e2;
        let m = if shift >= 0 {
            m << (shift as u32)
        } else {
            shr_round(&m, (-shift) as u32)
        };
        Real { mant: m, prec }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mant.clone(), BigInt::one() << self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        if bits <= 1000 {
            self.mant.to_f64().unwrap_or(0.0) / 2f64.powi(self.prec as i32)
        } else {
            let shift = bits - 60;
            let top = (&self.mant >> shift).to_f64().unwrap_or(0.0);
            top * 2f64.powi((shift - self.prec as i64) as i32)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    fn check(&self, other: &Self) {
        debug_assert_eq!(self.prec, other.prec, "mixed precisions");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        Real {
            mant: &self.mant + &other.mant,
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        Real {
            mant: &self.mant - &other.mant,
            prec: self.prec,
        }
    }

    pub fn neg(&self) -> Self {
        Real {
            mant: -&self.mant,
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        Real {
            mant: shr_round(&(&self.mant * &other.mant), self.prec),
            prec: self.prec,
        }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        Real {
            mant: &self.mant * k,
            prec: self.prec,
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.check(other);
        assert!(!other.mant.is_zero(), "division by zero");
        let num = &self.mant << (self.prec + 1);
        let q = num / &other.mant;
        Real {
            mant: shr_round(&q, 1),
            prec: self.prec,
        }
    }

    pub fn div_i64(&self, k: i64) -> Self {
        let num = &self.mant << 1;
        let q = num / BigInt::from(k);
        Real {
            mant: shr_round(&q, 1),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Self {
        Real {
            mant: self.mant.abs(),
            prec: self.prec,
        }
    }

    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        self.mant.abs().cmp(&other.mant.abs())
    }

    pub fn cmp(&self, other: &Self) -> Ordering {
        self.mant.cmp(&other.mant)
    }

    /// sqrt of a non-negative value.
    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of negative real");
        let shifted: BigUint = (self.mant.clone() << self.prec).to_biguint().unwrap();
        Real {
            mant: BigInt::from_biguint(Sign::Plus, shifted.sqrt()),
            prec: self.prec,
        }
    }

    /// Nearest integer.
    pub fn round(&self) -> BigInt {
        shr_round(&self.mant, self.prec)
    }

    /// Distance to the nearest integer.
    pub fn dist_to_integer(&self) -> Real {
        let r = self.round();
        self.sub(&Real::from_bigint(&r, self.prec)).abs()
    }

    /// 2^(-k) at this precision.
    pub fn pow2(k: i64, prec: u32) -> Self {
        let e = prec as i64 - k;
        if e < 0 {
            return Real::zero(prec);
        }
        Real {
            mant: BigInt::one() << (e as u32),
            prec,
        }
    }

    /// value * 2^k
    pub fn scale2(&self, k: i64) -> Self {
        let m = if k >= 0 {
            &self.mant << (k as u32)
        } else {
            shr_round(&self.mant, (-k) as u32)
        };
        Real {
            mant: m,
            prec: self.prec,
        }
    }

    /// Decimal rendering with a fixed number of fractional digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let ten = BigInt::from(10u32).pow(digits as u32);
        let scaled = shr_round(&(&self.mant * &ten), self.prec);
        let neg = scaled.is_negative();
        let abs = scaled.abs();
        let (int, frac) = abs.div_rem(&ten);
        let mut f = frac.to_string();
        while f.len() < digits {
            f.insert(0, '0');
        }
        format!("{}{}.{}", if neg { "-" } else { "" }, int, f)
    }

    /// exp(x) by halving + Taylor.
    pub fn exp(&self) -> Self {
        let prec = self.prec;
        let guard = 32 + 2 * (self.mant.abs().bits() as u32).saturating_sub(prec) ;
        let wp = prec + guard;
        let x = Real {
            mant: self.mant.clone() << guard,
            prec: wp,
        };
        // halve until |x| <= 1/4
        let quarter = Real::pow2(2, wp);
        let mut k = 0u32;
        let mut t = x;
        while t.cmp_abs(&quarter) == Ordering::Greater {
            t = t.scale2(-1);
            k += 1;
            if k > 64 {
                break;
            }
        }
        // Taylor
        let mut sum = Real::one(wp);
        let mut term = Real::one(wp);
        let mut n = 1i64;
        loop {
            term = term.mul(&t).div_i64(n);
            if term.mant.is_zero() {
                break;
            }
            sum = sum.add(&term);
            n += 1;
            if n > 10_000 {
                break;
            }
        }
        for _ in 0..k {
            sum = sum.mul(&sum);
        }
        Real {
            mant: shr_round(&sum.mant, guard),
            prec,
        }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// pi at the given precision (Machin's formula), cached.
pub fn pi(prec: u32) -> Real {
    static CACHE: Mutex<Vec<(u32, BigInt)>> = Mutex::new(Vec::new());
    if let Some((_, m)) = CACHE.lock().unwrap().iter().find(|(p, _)| *p == prec) {
        return Real {
            mant: m.clone(),
            prec,
        };
    }
    let wp = prec + 32;
    fn atan_inv(k: i64, prec: u32) -> Real {
        // atan(1/k) = sum (-1)^j / ((2j+1) k^(2j+1))
        let mut x = Real::one(prec).div_i64(k);
        let k2 = k * k;
        let mut sum = Real::zero(prec);
        let mut j = 0i64;
        loop {
            let term = x.div_i64(2 * j + 1);
            if term.mant.is_zero() {
                break;
            }
            if j % 2 == 0 {
                sum = sum.add(&term);
            } else {
                sum = sum.sub(&term);
            }
            x = x.div_i64(k2);
            j += 1;
        }
        sum
    }
    let v = atan_inv(5, wp).mul_i64(16).sub(&atan_inv(239, wp).mul_i64(4));
    let out = Real {
        mant: shr_round(&v.mant, 32),
        prec,
    };
    CACHE.lock().unwrap().push((prec, out.mant.clone()));
    out
}

/// cos(y), sin(y) for |y| reduced internally mod 2 pi.
pub fn cos_sin(y: &Real) -> (Real, Real) {
    let prec = y.prec;
    let guard = 48;
    let wp = prec + guard;
    let two_pi = pi(wp).scale2(1);
    let mut t = Real {
        mant: y.mant.clone() << guard,
        prec: wp,
    };
    // reduce mod 2 pi
    let n = t.div(&two_pi).round();
    if !n.is_zero() {
        t = t.sub(&two_pi.mul(&Real::from_bigint(&n, wp)));
    }
    // halve until |t| <= 1/4
    let quarter = Real::pow2(2, wp);
    let mut k = 0u32;
    while t.cmp_abs(&quarter) == Ordering::Greater {
        t = t.scale2(-1);
        k += 1;
        if k > 80 {
            break;
        }
    }
    // Taylor for cos and sin
    let t2 = t.mul(&t);
    let mut cos = Real::one(wp);
    let mut term = Real::one(wp);
    let mut n_ = 1i64;
    loop {
        term = term.mul(&t2).div_i64((2 * n_ - 1) * (2 * n_)).neg();
        if term.mant.is_zero() {
            break;
        }
        cos = cos.add(&term);
        n_ += 1;
    }
    let mut sin = t.clone();
    let mut term = t.clone();
    let mut n_ = 1i64;
    loop {
        term = term.mul(&t2).div_i64((2 * n_) * (2 * n_ + 1)).neg();
        if term.mant.is_zero() {
            break;
        }
        sin = sin.add(&term);
        n_ += 1;
    }
    // double k times
    for _ in 0..k {
        let c2 = cos.mul(&cos).scale2(1).sub(&Real::one(wp));
        let s2 = sin.mul(&cos).scale2(1);
        cos = c2;
        sin = s2;
    }
    (
        Real {
            mant: shr_round(&cos.mant, guard),
            prec,
        },
        Real {
            mant: shr_round(&sin.mant, guard),
            prec,
        },
    )
}

#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex {
            re: Real::zero(prec),
            im: Real::zero(prec),
        }
    }

    pub fn one(prec: u32) -> Self {
        Complex {
            re: Real::one(prec),
            im: Real::zero(prec),
        }
    }

    pub fn from_real(re: Real) -> Self {
        let prec = re.prec;
        Complex {
            re,
            im: Real::zero(prec),
        }
    }

    pub fn from_f64s(re: f64, im: f64, prec: u32) -> Self {
        Complex {
            re: Real::from_f64(re, prec),
            im: Real::from_f64(im, prec),
        }
    }

    pub fn i(prec: u32) -> Self {
        Complex {
            re: Real::zero(prec),
            im: Real::one(prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        Complex {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Complex {
            re: self.re.sub(&other.re),
            im: self.im.sub(&other.im),
        }
    }

    pub fn neg(&self) -> Self {
        Complex {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn conj(&self) -> Self {
        Complex {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Complex {
            re: self.re.mul(&other.re).sub(&self.im.mul(&other.im)),
            im: self.re.mul(&other.im).add(&self.im.mul(&other.re)),
        }
    }

    pub fn mul_real(&self, r: &Real) -> Self {
        Complex {
            re: self.re.mul(r),
            im: self.im.mul(r),
        }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        Complex {
            re: self.re.mul_i64(k),
            im: self.im.mul_i64(k),
        }
    }

    pub fn div_i64(&self, k: i64) -> Self {
        Complex {
            re: self.re.div_i64(k),
            im: self.im.div_i64(k),
        }
    }

    pub fn norm_sqr(&self) -> Real {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn div(&self, other: &Self) -> Self {
        let d = other.norm_sqr();
        let n = self.mul(&other.conj());
        Complex {
            re: n.re.div(&d),
            im: n.im.div(&d),
        }
    }

    pub fn inv(&self) -> Self {
        Complex::one(self.prec()).div(self)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let prec = self.prec();
        if self.im.is_zero() {
            if self.re.is_negative() {
                return Complex {
                    re: Real::zero(prec),
                    im: self.re.neg().sqrt(),
                };
            }
            return Complex {
                re: self.re.sqrt(),
                im: Real::zero(prec),
            };
        }
        let r = self.abs();
        let half = |x: Real| x.scale2(-1);
        let u = half(r.add(&self.re)).sqrt();
        let v = half(r.sub(&self.re)).sqrt();
        let v = if self.im.is_negative() { v.neg() } else { v };
        Complex { re: u, im: v }
    }

    /// exp(z) = exp(re) (cos im + i sin im).
    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        let (c, s) = cos_sin(&self.im);
        Complex {
            re: m.mul(&c),
            im: m.mul(&s),
        }
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.re.to_f64(), self.im.to_f64())
    }
}

/// e^(2 pi i z / w).
pub fn q_parameter(z: &Complex, w: u32) -> Complex {
    let prec = z.prec();
    let two_pi = pi(prec).scale2(1);
    // 2 pi i z / w = (-2 pi Im z + 2 pi i Re z)/w
    let re = two_pi.mul(&z.im).neg().div_i64(w as i64);
    let im = two_pi.mul(&z.re).div_i64(w as i64);
    Complex { re, im }.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 192;

    fn close(a: &Real, b: &Real, bits: u32) {
        let d = a.sub(b).abs();
        assert!(
            d.cmp(&Real::pow2(bits as i64, P)) == Ordering::Less,
            "difference {} too large",
            d.to_f64()
        );
    }

    #[test]
    fn pi_value() {
        let p = pi(P);
        close(&p, &Real::from_f64(std::f64::consts::PI, P), 50);
        // pi rounds up in the 30th fractional digit
        let s = p.to_decimal_string(30);
        assert_eq!(s, "3.141592653589793238462643383280");
    }

    #[test]
    fn exp_and_trig() {
        let one = Real::one(P);
        let e = one.exp();
        assert!(e.to_decimal_string(20).starts_with("2.71828182845904523536"));
        let (c, s) = cos_sin(&pi(P).div_i64(3));
        close(&c, &Real::from_rat(&BigRational::new(1.into(), 2.into()), P), 150);
        let sq3 = Real::from_int(3, P).sqrt().scale2(-1);
        close(&s, &sq3, 150);
        // big argument reduction
        let (c2, _) = cos_sin(&Real::from_int(1000, P).mul(&pi(P).scale2(1)).add(&pi(P).div_i64(3)));
        close(&c2, &c, 130);
    }

    #[test]
    fn complex_ops() {
        let z = Complex::from_f64s(1.5, -2.25, P);
        let w = z.mul(&z.inv());
        close(&w.re, &Real::one(P), 150);
        close(&w.im, &Real::zero(P), 150);
        let s = z.sqrt();
        let back = s.mul(&s);
        close(&back.re, &z.re, 150);
        close(&back.im, &z.im, 150);
    }

    #[test]
    fn q_parameter_unit() {
        // z = i: q = e^(-2 pi)
        let z = Complex::i(P);
        let q = q_parameter(&z, 1);
        let expect = pi(P).scale2(1).neg().exp();
        close(&q.re, &expect, 140);
        close(&q.im, &Real::zero(P), 140);
    }

    #[test]
    fn exp_large_negative() {
        let x = Real::from_int(-500, P);
        let v = x.exp();
        // e^-500 ~ 2^-721: below absolute precision 2^-192, so ~0
        assert!(v.abs().cmp(&Real::pow2(150, P)) == Ordering::Less);
        let y = Real::from_int(-30, P).exp();
        let expect = Real::from_f64(9.357622968840175e-14, P);
        let d = y.sub(&expect).abs();
        assert!(d.to_f64() < 1e-20);
    }
}
