//! Quadratic surds in the upper half plane as integral binary quadratic
//! forms, with exact Moebius actions, Gauss reduction, and
//! Gamma_0(N)-equivalence through form automorphs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::float::{Complex, Real};
use crate::gamma0::{mat_mul, Mat};

/// The upper-half-plane root of A z^2 + B z + C = 0 with A > 0 and
/// discriminant B^2 - 4AC < 0, stored primitively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl QuadSurd {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Self {
        let mut s = QuadSurd { a, b, c };
        s.normalize();
        s
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Self {
        Self::new(BigInt::from(a), BigInt::from(b), BigInt::from(c))
    }

    fn normalize(&mut self) {
        if self.a.is_negative() {
            self.a = -&self.a;
            self.b = -&self.b;
            self.c = -&self.c;
        }
        let g = self.a.gcd(&self.b).gcd(&self.c);
        if !g.is_zero() && g != BigInt::from(1) {
            self.a = &self.a / &g;
            self.b = &self.b / &g;
            self.c = &self.c / &g;
        }
        assert!(self.a.is_positive(), "form must be definite");
        assert!(self.disc().is_negative(), "root must be imaginary");
    }

    pub fn disc(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    /// Image under an integer matrix of positive determinant.
    pub fn apply(&self, m: Mat) -> QuadSurd {
        let [p, q, r, s] = m.map(BigInt::from);
        // z' = (p z + q)/(r z + s); substitute z = (s z' - q)/(-r z' + p)
        let a2 = &self.a * &s * &s - &self.b * &s * &r + &self.c * &r * &r;
        let b2 = BigInt::from(-2) * &self.a * &s * &q
            + &self.b * (&s * &p + &q * &r)
            - BigInt::from(2) * &self.c * &r * &p;
        let c2 = &self.a * &q * &q - &self.b * &q * &p + &self.c * &p * &p;
        QuadSurd::new(a2, b2, c2)
    }

    /// Translate by an integer: z + k.
    pub fn translate(&self, k: i64) -> QuadSurd {
        self.apply([1, k, 0, 1])
    }

    /// Real part -B/2A as a rational.
    pub fn real_part(&self) -> crate::arith::scalar::Rat {
        crate::arith::scalar::Rat::new(-&self.b, BigInt::from(2) * &self.a)
    }

    /// Translate so that the real part lies in (-1/2, 1/2].
    pub fn normalize_real_part(&self) -> QuadSurd {
        let re = self.real_part();
        // k = round(re); shift by -k
        let two_re = &re + &re;
        let k: BigInt = (two_re.floor().to_integer() + BigInt::from(1)).div_floor(&BigInt::from(2));
        self.translate(-k.to_i64().expect("translation fits in i64"))
    }

    pub fn to_complex(&self, prec: u32) -> Complex {
        let d = self.disc();
        let sq = Real::from_bigint(&-&d, prec).sqrt();
        let two_a = Real::from_bigint(&(BigInt::from(2) * &self.a), prec);
        Complex {
            re: Real::from_bigint(&-&self.b, prec).div(&two_a),
            im: sq.div(&two_a),
        }
    }

    /// Gauss reduction; returns the reduced form and g in SL_2(Z) with
    /// reduced = self.apply(g).
    pub fn reduce(&self) -> (QuadSurd, Mat) {
        let mut cur = self.clone();
        let mut g: Mat = [1, 0, 0, 1];
        for _ in 0..10_000 {
            // translate real part into [-1/2, 1/2)
            let re = cur.real_part();
            let two_re = &re + &re;
            let k: BigInt = (two_re.floor().to_integer() + BigInt::from(1)).div_floor(&BigInt::from(2));
            if !k.is_zero() {
                let ki = -k.to_i64().expect("reduction translation overflow");
                cur = cur.translate(ki);
                g = mat_mul([1, ki, 0, 1], g);
            }
            // |z|^2 = C/A; invert when inside the unit circle
            if cur.c < cur.a {
                cur = cur.apply([0, -1, 1, 0]);
                g = mat_mul([0, -1, 1, 0], g);
            } else {
                break;
            }
        }
        (cur, g)
    }

    /// Automorphs of the form: solutions of t^2 - D u^2 = 4 give the
    /// stabilizer of the root in SL_2(Z) (up to sign).
    pub fn automorphs(&self) -> Vec<Mat> {
        let d = self.disc();
        let mut sols = vec![(2i64, 0i64), (-2, 0)];
        if d == BigInt::from(-4) {
            sols.extend_from_slice(&[(0, 1), (0, -1)]);
        }
        if d == BigInt::from(-3) {
            sols.extend_from_slice(&[(1, 1), (1, -1), (-1, 1), (-1, -1)]);
        }
        let a = self.a.to_i64().unwrap();
        let b = self.b.to_i64().unwrap();
        let c = self.c.to_i64().unwrap();
        sols.iter()
            .filter_map(|&(t, u)| {
                let m: Mat = [(t - b * u) / 2, -c * u, a * u, (t + b * u) / 2];
                (m[0] * m[3] - m[1] * m[2] == 1).then_some(m)
            })
            .collect()
    }

    /// Decide Gamma_0(N)-equivalence; on success returns h in Gamma_0(N)
    /// with other = self.apply(h).
    pub fn gamma0_equivalent(&self, other: &QuadSurd, n: u64) -> Option<Mat> {
        if self.disc() != other.disc() {
            return None;
        }
        let (r1, g1) = self.reduce();
        let (r2, g2) = other.reduce();
        if r1 != r2 {
            return None;
        }
        // other = self.apply(h) with h = g2^-1 s g1, s an automorph
        let g2_inv = crate::gamma0::mat_inv_unimodular(g2);
        for s in r1.automorphs() {
            let h = mat_mul(g2_inv, mat_mul(s, g1));
            if h[2].rem_euclid(n as i64) == 0 {
                debug_assert_eq!(other, &self.apply(h));
                return Some(h);
            }
        }
        None
    }
}
