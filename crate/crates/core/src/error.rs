//! Error types shared across the crate, one enum per subsystem.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ArithError {
    #[error("leading coefficient is zero or not invertible")]
    NonUnitLeadingCoefficient,
    #[error("denominator {denom} shares a factor with modulus {modulus}")]
    DenominatorNotCoprime { denom: String, modulus: String },
    #[error("no rational with denominator <= {bound} inside the error ball")]
    NoRationalInBall { bound: String },
    #[error("precision too low to certify reconstruction (need ball < 1/(2 b^2))")]
    InsufficientPrecision,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum CurveError {
    #[error("discriminant is zero; the Weierstrass model is singular")]
    SingularCurve,
    #[error("prime {0} exceeds the point-counting budget {1}")]
    PrimeTooLarge(u64, u64),
    #[error("conductor {n} disagrees with reduction data at p = {p}: {reason}")]
    ConductorMismatch { n: u64, p: u64, reason: String },
    #[error("model is not minimal at p = {0} (p | disc but p does not divide N)")]
    NonMinimalAtPrime(u64),
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PeriodsError {
    #[error("AGM iteration stalled before reaching {0} bits")]
    PrecisionUnreachable(u32),
    #[error("series evaluation exceeded the convergence budget ({0} terms)")]
    ConvergenceBudgetExceeded(usize),
    #[error("nearest lattice point at distance {dist}, beyond tolerance {tol}")]
    LatticeSnapFailed { dist: String, tol: String },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ParamError {
    #[error("recursion determinant vanished at index {index} outside the handled cases")]
    RecursionSingular { index: i64 },
    #[error("failed to reconstruct exact slash-expansion coefficients: {0}")]
    ReconstructionFailed(String),
    #[error("coset representative does not decompose over the stored cusp data")]
    CosetDecompositionFailed,
    #[error("endomorphism scalar {0} not supported without explicit lattice data")]
    UnsupportedLambda(i64),
    #[error(transparent)]
    Periods(#[from] PeriodsError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ModpolyError {
    #[error("symmetrized coefficient has a nonzero cyclotomic residue at q^{index}")]
    GaloisResidue { index: i64 },
    #[error("series truncation {have} below the {need} needed for degree bound")]
    InsufficientPrecision { have: i64, need: i64 },
    #[error("no rational function in j of degree <= {0} matches the series")]
    NoMatch(usize),
    #[error("no coset carries the target point at this precision")]
    NoPreimageFound,
    #[error("expansion undefined at coset {coset}: {source}")]
    ExpansionUndefined {
        coset: usize,
        #[source]
        source: ArithError,
    },
    #[error("could not certify a factorization of the polynomial")]
    FactorizationIncomplete,
    #[error("W_m-fixed point has discriminant {d} failing the bound/square test mod {m}")]
    CriterionViolated { d: String, m: u64 },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Periods(#[from] PeriodsError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum CongruenceError {
    #[error("curves are not isogenous (newform coefficients differ at n = {0})")]
    NotIsogenous(u64),
    #[error("g2 and g3 agree for both lattices; the difference vanishes identically")]
    DegenerateDifference,
    #[error(transparent)]
    Modpoly(#[from] ModpolyError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Periods(#[from] PeriodsError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
