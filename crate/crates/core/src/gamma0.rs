//! Combinatorics of Gamma_0(N): coset representatives indexed by P^1(Z/N),
//! cusps with widths and scaling matrices, constructive cusp equivalence,
//! and Atkin-Lehner matrices.

use crate::error::ParamError;

pub type Mat = [i64; 4]; // row-major [a, b; c, d]

pub fn det(m: Mat) -> i64 {
    m[0] * m[3] - m[1] * m[2]
}

pub fn mat_mul(x: Mat, y: Mat) -> Mat {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

pub fn mat_inv_unimodular(m: Mat) -> Mat {
    debug_assert_eq!(det(m), 1);
    [m[3], -m[1], -m[2], m[0]]
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd_i64(b, a % b)
    }
}

/// Extended gcd: returns (g, x, y) with a x + b y = g.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Complete coprime (c, d) to a matrix [a, b; c, d] in SL_2(Z).
pub fn complete_to_sl2(c: i64, d: i64) -> Mat {
    let (g, x, y) = ext_gcd(d, -c);
    assert_eq!(g, 1, "bottom row must be coprime");
    // a d - b c = 1 with a = x, b = y by construction: x d + y (-c) = 1
    [x, y, c, d]
}

/// Index [SL2(Z) : Gamma_0(N)] = N prod_{p|N} (1 + 1/p).
pub fn index(n: u64) -> u64 {
    let mut idx = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            idx = idx / p * (p + 1);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        idx = idx / m * (m + 1);
    }
    idx
}

/// Canonical representative of (c : d) in P^1(Z/N): the lexicographically
/// least unit multiple.
fn p1_normalize(n: i64, c: i64, d: i64) -> (i64, i64) {
    let c = c.rem_euclid(n);
    let d = d.rem_euclid(n);
    let mut best = (i64::MAX, i64::MAX);
    for u in 1..n {
        if gcd_i64(u, n) != 1 {
            continue;
        }
        let cand = ((u * c).rem_euclid(n), (u * d).rem_euclid(n));
        if cand < best {
            best = cand;
        }
    }
    best
}

/// Coset representatives of Gamma_0(N) \ SL_2(Z), one per class of
/// P^1(Z/N), the identity first.
pub fn coset_reps(n: u64) -> Vec<Mat> {
    let n = n as i64;
    if n == 1 {
        return vec![[1, 0, 0, 1]];
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut reps = Vec::new();
    // identity corresponds to (0 : 1)
    seen.insert(p1_normalize(n, 0, 1));
    reps.push([1, 0, 0, 1]);
    for c in 0..n {
        for d in 0..n {
            if gcd_i64(gcd_i64(c, d), n) != 1 {
                continue;
            }
            let key = p1_normalize(n, c, d);
            if seen.contains(&key) {
                continue;
            }
            seen.insert(key);
            // lift to coprime integers: adjust d by multiples of n
            let mut dd = d;
            let mut k = 0;
            while gcd_i64(c, dd) != 1 {
                k += 1;
                dd = d + k * n;
                assert!(k < 64, "failed to lift ({}, {}) to coprime pair", c, d);
            }
            reps.push(complete_to_sl2(c, dd));
        }
    }
    assert_eq!(reps.len() as u64, index(n as u64));
    reps
}

/// Coset representatives in the prime-level shape [0, -1; 1, j] plus the
/// identity; only valid for prime N (j runs over 0..N).
pub fn coset_reps_prime_shape(n: u64) -> Vec<Mat> {
    let mut reps = vec![[1i64, 0, 0, 1]];
    for j in 0..n as i64 {
        reps.push([0, -1, 1, j]);
    }
    reps
}

/// A cusp a/c of Gamma_0(N) in lowest terms; infinity is (1, 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cusp {
    pub a: i64,
    pub c: i64,
}

impl Cusp {
    pub fn infinity() -> Self {
        Cusp { a: 1, c: 0 }
    }

    pub fn zero() -> Self {
        Cusp { a: 0, c: 1 }
    }

    pub fn new(a: i64, c: i64) -> Self {
        assert!(c >= 0);
        if c == 0 {
            return Cusp::infinity();
        }
        let g = gcd_i64(a, c);
        Cusp { a: a / g, c: c / g }
    }

    pub fn is_infinity(&self) -> bool {
        self.c == 0
    }

    pub fn label(&self) -> String {
        if self.is_infinity() {
            "oo".to_string()
        } else {
            format!("{}/{}", self.a, self.c)
        }
    }
}

/// Width of a cusp: N / gcd(c^2, N).
pub fn cusp_width(n: u64, cusp: Cusp) -> u32 {
    if cusp.is_infinity() {
        return 1;
    }
    let c2 = (cusp.c as u64).saturating_mul(cusp.c as u64);
    (n / gcd_i64(c2 as i64, n as i64) as u64) as u32
}

/// Canonical cusp list: for each divisor c of N, representatives a/c with
/// a mod gcd(c, N/c) and gcd(a, c) = 1.
pub fn cusps(n: u64) -> Vec<Cusp> {
    let n = n as i64;
    let mut out = vec![Cusp::infinity()];
    let mut divisors: Vec<i64> = (1..=n).filter(|c| n % c == 0).collect();
    divisors.sort();
    for c in divisors {
        if c == n {
            continue; // the class of 1/N is the cusp at infinity
        }
        // classes with denominator c are indexed by units mod gcd(c, N/c)
        let g = gcd_i64(c, n / c);
        for a0 in 0..g.max(1) {
            if g > 1 && gcd_i64(a0, g) != 1 {
                continue;
            }
            let mut a = a0;
            if c > 1 {
                let step = g.max(1);
                let mut k = 0;
                while gcd_i64(a, c) != 1 {
                    a += step;
                    k += 1;
                    assert!(k <= 2 * c, "no coprime lift for cusp {}/{}", a0, c);
                }
            } else {
                a = 0;
            }
            let cand = Cusp { a, c };
            if !out.contains(&cand) {
                out.push(cand);
            }
        }
    }
    out
}

/// Scaling matrix gamma with gamma(infinity) = a/c, det 1.
pub fn scaling_matrix(cusp: Cusp) -> Mat {
    if cusp.is_infinity() {
        return [1, 0, 0, 1];
    }
    let (g, x, y) = ext_gcd(cusp.a, cusp.c);
    assert_eq!(g, 1);
    // a d - b c = 1: d = x, b = -y
    [cusp.a, -y, cusp.c, x]
}

/// Constructive Gamma_0(N)-equivalence of cusps: returns (delta, j) with
/// delta in Gamma_0(N) and delta * (a1/c1) = a2/c2, where
/// delta = g2 T^j g1^(-1) for the scaling matrices g1, g2.
pub fn cusp_equivalence(n: u64, from: Cusp, to: Cusp) -> Option<(Mat, i64)> {
    let n = n as i64;
    let g1 = scaling_matrix(from);
    let g2 = scaling_matrix(to);
    // bottom-left of g2 T^j g1^(-1) must vanish mod N:
    // c2 d1 - c1 d2 - c1 c2 j = 0 (mod N)
    let (c1, d1) = (g1[2], g1[3]);
    let (c2, d2) = (g2[2], g2[3]);
    let a = (c1 * c2).rem_euclid(n);
    let b = (c2 * d1 - c1 * d2).rem_euclid(n);
    // solve a j = b (mod N)
    let g = gcd_i64(a, n);
    if g == 0 {
        if b != 0 {
            return None;
        }
        let delta = mat_mul(g2, mat_inv_unimodular(g1));
        return (delta[2].rem_euclid(n) == 0).then_some((delta, 0));
    }
    if b % g != 0 {
        return None;
    }
    let (_, inv, _) = ext_gcd(a / g, n / g);
    let j = ((b / g) % (n / g)) * inv % (n / g);
    let tj: Mat = [1, j, 0, 1];
    let delta = mat_mul(mat_mul(g2, tj), mat_inv_unimodular(g1));
    debug_assert_eq!(det(delta), 1);
    if delta[2].rem_euclid(n) == 0 {
        Some((delta, j))
    } else {
        None
    }
}

/// Find the canonical cusp class of gamma(infinity).
pub fn cusp_class(n: u64, gamma: Mat) -> Cusp {
    let raw = if gamma[2] < 0 {
        Cusp::new(-gamma[0], -gamma[2])
    } else {
        Cusp::new(gamma[0], gamma[2])
    };
    for c in cusps(n) {
        if cusp_equivalence(n, raw, c).is_some() {
            return c;
        }
    }
    unreachable!("every point of P^1(Q) lies in some cusp class");
}

/// Decompose a coset representative against stored cusp data:
/// M = delta gamma_rho T^t with delta in Gamma_0(N); returns t mod width.
pub fn coset_offset(n: u64, width: u32, gamma_rho: Mat, m: Mat) -> Result<i64, ParamError> {
    let n_i = n as i64;
    // bottom-left of M T^(-t) gamma_rho^(-1) == 0 mod N:
    // with M = [am, bm; cm, dm], gamma_rho = [a, b; c, d]:
    // (cm, dm - cm t) . (d, -c) = cm d - c dm + c cm t == 0 (mod N)
    let (cm, dm) = (m[2], m[3]);
    let (c, d) = (gamma_rho[2], gamma_rho[3]);
    let a_coef = (c * cm).rem_euclid(n_i);
    let b_coef = (c * dm - cm * d).rem_euclid(n_i);
    let g = gcd_i64(a_coef, n_i);
    let solve = |t: i64| -> Option<i64> {
        let tm: Mat = [1, -t, 0, 1];
        let delta = mat_mul(mat_mul(m, tm), mat_inv_unimodular(gamma_rho));
        (delta[2].rem_euclid(n_i) == 0 && det(delta) == 1).then_some(t.rem_euclid(width as i64))
    };
    if a_coef == 0 {
        if b_coef != 0 {
            return Err(ParamError::CosetDecompositionFailed);
        }
        return solve(0).ok_or(ParamError::CosetDecompositionFailed);
    }
    if b_coef % g != 0 {
        return Err(ParamError::CosetDecompositionFailed);
    }
    let (_, inv, _) = ext_gcd(a_coef / g, n_i / g);
    let modulus = n_i / g;
    let t0 = ((b_coef / g) % modulus) * inv % modulus;
    // try the residue class of t0 modulo `modulus`, reduced mod width
    for k in 0..(width as i64).max(1) {
        if let Some(t) = solve(t0 + k * modulus) {
            return Ok(t);
        }
    }
    Err(ParamError::CosetDecompositionFailed)
}

/// Exact divisors m || N.
pub fn exact_divisors(n: u64) -> Vec<u64> {
    (1..=n)
        .filter(|m| n % m == 0 && gcd_i64(*m as i64, (n / m) as i64) == 1)
        .collect()
}

/// Atkin-Lehner matrix W_m = [m, beta; N, delta m] with determinant m,
/// adapted so that W_m(infinity) = 1/(N/m) and the associated scaling
/// matrix below gives a rational slash expansion.
pub fn atkin_lehner_matrix(n: u64, m: u64) -> Mat {
    assert!(n % m == 0 && gcd_i64(m as i64, (n / m) as i64) == 1, "need m || N");
    let c = (n / m) as i64;
    let m = m as i64;
    // delta m - beta c = 1
    let (g, x, _) = ext_gcd(m, c);
    assert_eq!(g, 1);
    // x m == 1 (mod c); delta = x (adjust positive), beta = (delta m - 1)/c
    let delta = x.rem_euclid(c.max(1));
    let delta = if c == 1 { 1 } else { delta };
    let beta = (delta * m - 1) / c.max(1);
    debug_assert_eq!(delta * m - beta * c, 1);
    [m, beta, n as i64, delta * m]
}

/// Scaling matrix adapted to W_m: gamma = [1, beta'; c, delta'] in SL_2(Z)
/// with c = N/m and delta' == 0 mod m, so that (f|W_m = lambda f) re-expands
/// with rational coefficients: (f|[gamma]_2)(z) = (lambda/m) sum a_k q_m^k.
pub fn atkin_lehner_scaling(n: u64, m: u64) -> Mat {
    let c = (n / m) as i64;
    let mi = m as i64;
    if c == 1 {
        // delta' = m k with m k - beta' = 1: k = 1
        return [1, mi - 1, 1, mi];
    }
    // m k - beta' c = 1 with delta' = m k: k = m^(-1) mod c
    let (g, x, _) = ext_gcd(mi, c);
    assert_eq!(g, 1);
    let k = x.rem_euclid(c);
    let beta = (mi * k - 1) / c;
    debug_assert_eq!(mi * k - beta * c, 1);
    [1, beta, c, mi * k]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coset_counts() {
        assert_eq!(coset_reps(1).len(), 1);
        assert_eq!(coset_reps(11).len(), 12);
        assert_eq!(coset_reps(26).len(), 42);
        assert_eq!(coset_reps(14).len(), 24);
        assert_eq!(coset_reps(96).len(), 192);
        for m in coset_reps(26) {
            assert_eq!(det(m), 1);
        }
    }

    #[test]
    fn coset_reps_pairwise_inequivalent() {
        let n = 12i64;
        let reps = coset_reps(12);
        for (i, x) in reps.iter().enumerate() {
            for y in reps.iter().skip(i + 1) {
                // same coset iff bottom rows projectively equal mod N
                let mut equivalent = false;
                for u in 1..n {
                    if gcd_i64(u, n) != 1 {
                        continue;
                    }
                    if (u * x[2] - y[2]).rem_euclid(n) == 0 && (u * x[3] - y[3]).rem_euclid(n) == 0
                    {
                        equivalent = true;
                    }
                }
                assert!(!equivalent);
            }
        }
    }

    #[test]
    fn cusp_counts_and_widths() {
        // Gamma_0(11): cusps oo and 0, widths 1 and 11
        let c11 = cusps(11);
        assert_eq!(c11.len(), 2);
        assert_eq!(cusp_width(11, Cusp::infinity()), 1);
        assert_eq!(cusp_width(11, Cusp::zero()), 11);
        // Gamma_0(26): 4 cusps, widths sum to the index
        let c26 = cusps(26);
        assert_eq!(c26.len(), 4);
        let total: u64 = c26.iter().map(|&c| cusp_width(26, c) as u64).sum();
        assert_eq!(total, index(26));
        // non-squarefree levels
        for n in [48u64, 96] {
            let cs = cusps(n);
            let total: u64 = cs.iter().map(|&c| cusp_width(n, c) as u64).sum();
            assert_eq!(total, index(n), "width sum at N = {}", n);
        }
    }

    #[test]
    fn scaling_matrices_map_infinity() {
        for cusp in cusps(48) {
            let g = scaling_matrix(cusp);
            assert_eq!(det(g), 1);
            if cusp.is_infinity() {
                assert_eq!(g[2], 0);
            } else {
                assert_eq!(Cusp::new(g[0], g[2]), cusp);
            }
        }
    }

    #[test]
    fn equivalence_finds_gamma0_element() {
        // 1/26 ~ oo under Gamma_0(26)
        let (delta, _) = cusp_equivalence(26, Cusp::new(1, 26), Cusp::infinity()).unwrap();
        assert_eq!(delta[2].rem_euclid(26), 0);
        assert_eq!(det(delta), 1);
        // 0 and oo are inequivalent
        assert!(cusp_equivalence(26, Cusp::zero(), Cusp::infinity()).is_none());
    }

    #[test]
    fn offsets_cover_each_cusp_orbit() {
        // for every cusp of Gamma_0(14), the cosets mapping to it carry
        // distinct offsets 0..width
        let n = 14u64;
        let reps = coset_reps(n);
        for cusp in cusps(n) {
            let gamma_rho = scaling_matrix(cusp);
            let w = cusp_width(n, cusp);
            let mut offsets = Vec::new();
            for m in &reps {
                if cusp_class(n, *m) == cusp {
                    offsets.push(coset_offset(n, w, gamma_rho, *m).unwrap());
                }
            }
            offsets.sort();
            assert_eq!(offsets, (0..w as i64).collect::<Vec<_>>(), "cusp {:?}", cusp);
        }
    }

    #[test]
    fn atkin_lehner_shapes() {
        for (n, m) in [(26u64, 2u64), (26, 13), (26, 26), (11, 11), (48, 3), (48, 16)] {
            let w = atkin_lehner_matrix(n, m);
            assert_eq!(det(w), m as i64);
            assert_eq!(w[2].rem_euclid(n as i64), 0);
            assert_eq!(w[0].rem_euclid(m as i64), 0);
            assert_eq!(w[3].rem_euclid(m as i64), 0);
            let g = atkin_lehner_scaling(n, m);
            assert_eq!(det(g), 1);
            assert_eq!(g[3].rem_euclid(m as i64), 0);
            // gamma(infinity) = 1/(N/m), in the class of W_m(infinity)
            let target = Cusp::new(w[0], w[2]);
            assert!(cusp_equivalence(n, Cusp::new(g[0], g[2]), target).is_some());
        }
    }

    #[test]
    fn exact_divisor_list() {
        assert_eq!(exact_divisors(26), vec![1, 2, 13, 26]);
        assert_eq!(exact_divisors(48), vec![1, 3, 16, 48]);
        assert_eq!(exact_divisors(96), vec![1, 3, 32, 96]);
    }
}
