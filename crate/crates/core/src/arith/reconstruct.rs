//! Rational reconstruction from high-precision values via continued fractions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::float::Real;
use crate::error::ArithError;

/// Best rational approximation with denominator <= bound, from the continued
/// fraction of x (convergents only; a convergent is optimal among all
/// rationals with denominator up to its own).
fn best_approximation(x: &BigRational, bound: &BigInt) -> BigRational {
    use num_integer::Integer;
    let mut p_prev = BigInt::one();
    let mut p = x.numer().div_floor(x.denom());
    let mut q_prev = BigInt::zero();
    let mut q = BigInt::one();
    let mut num = x.numer() - &p * x.denom();
    let mut den = x.denom().clone();
    while !num.is_zero() {
        let a = den.div_floor(&num);
        let r = &den - &a * &num;
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        if &q_next > bound {
            break;
        }
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        den = std::mem::replace(&mut num, r);
    }
    BigRational::new(p, q)
}

/// Reconstruct the unique rational p/q with |q| <= denom_bound lying within
/// `err_bits` (an error ball of radius 2^-err_bits) of x.
///
/// Certification requires the ball radius to be below 1/(2 b^2), which makes
/// such a rational unique when it exists.
pub fn rational_reconstruct(
    x: &Real,
    denom_bound: &BigInt,
    err_bits: u32,
) -> Result<BigRational, ArithError> {
    assert!(denom_bound.is_positive());
    // uniqueness: 2^-err_bits < 1/(2 b^2)
    let two_b2 = BigInt::from(2) * denom_bound * denom_bound;
    if (BigInt::one() << err_bits) <= two_b2 {
        return Err(ArithError::InsufficientPrecision);
    }
    if err_bits > x.prec {
        return Err(ArithError::InsufficientPrecision);
    }
    let xr = x.to_rational();
    let cand = best_approximation(&xr, denom_bound);
    let diff = (&xr - &cand).abs();
    let ball = BigRational::new(BigInt::one(), BigInt::one() << err_bits);
    if diff <= ball {
        Ok(cand)
    } else {
        Err(ArithError::NoRationalInBall {
            bound: denom_bound.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::float::pi;
    use num_rational::BigRational;

    const P: u32 = 128;

    #[test]
    fn reconstructs_one_third() {
        let third = Real::from_rat(&BigRational::new(1.into(), 3.into()), P);
        let r = rational_reconstruct(&third, &BigInt::from(1000), 100).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn reconstructs_large_integer() {
        // 54688 known to +-2^-80, bound 10^6
        let x = Real::from_int(54688, P).add(&Real::pow2(90, P));
        let r = rational_reconstruct(&x, &BigInt::from(1_000_000), 80).unwrap();
        assert_eq!(r, BigRational::from_integer(54688.into()));
    }

    #[test]
    fn pi_has_no_small_rational() {
        let x = pi(P);
        let err = rational_reconstruct(&x, &BigInt::from(10), 100).unwrap_err();
        assert!(matches!(err, ArithError::NoRationalInBall { .. }));
        // oracle: exhaustive scan over all p/q with q <= 10 confirms the
        // nearest such rational (22/7) is far outside the ball
        let xr = x.to_rational();
        let mut best: Option<BigRational> = None;
        for q in 1..=10i64 {
            let p_near = (&xr * BigRational::from_integer(q.into())).round();
            let cand = BigRational::new(p_near.to_integer(), q.into());
            let d = (&xr - &cand).abs();
            if best.as_ref().map_or(true, |b| &d < &(&xr - b).abs()) {
                best = Some(cand);
            }
        }
        let nearest = best.unwrap();
        assert_eq!(nearest, BigRational::new(22.into(), 7.into()));
        let d = (&xr - &nearest).abs();
        assert!(d > BigRational::new(1.into(), 1000.into()));
    }

    #[test]
    fn ball_too_wide_is_rejected() {
        let third = Real::from_rat(&BigRational::new(1.into(), 3.into()), P);
        let err = rational_reconstruct(&third, &BigInt::from(1000), 20).unwrap_err();
        assert_eq!(err, ArithError::InsufficientPrecision);
    }
}
