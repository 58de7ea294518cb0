//! Numerics for gauge-invariant free (quasi-free) fermionic states on finitely
//! many modes.
//!
//! A gauge-invariant free state on the CAR algebra over an `n`-dimensional
//! one-mode space is completely determined by its *symbol*, a Hermitian matrix
//! `Q` with `0 ≤ Q ≤ 1`. This crate implements, in closed form at the symbol
//! level,
//!
//! * evaluation of free-state expectations (two-point functions, Wick
//!   determinants, determinant formula for exponential elements),
//! * conditional states of a bipartite free state obtained by perturbing one
//!   party with a positive gauge-invariant element, their exact symbol for
//!   exponential conditioners, and the two-sided operator bounds on all
//!   reachable conditional symbols,
//! * the inverse construction of a conditioner hitting a prescribed reachable
//!   target symbol,
//! * the minimal free completely positive identity-preserving map whose
//!   pull-backs sweep exactly the closed set of conditional symbols,
//! * generic (non-fermionic) bipartite machinery: conditional functionals of
//!   density matrices, correlation dimension, Schmidt-based positive models,
//!
//! and verifies every closed form against a brute-force oracle: a dense
//! Jordan-Wigner representation of the CAR algebra on the 2^n-dimensional
//! Fock space ([`fock`]).
//!
//! All matrices are dense `ndarray` arrays of `Complex64`; inner products are
//! antilinear in the *first* argument throughout.

extern crate blas_src;
extern crate openblas_src;

pub mod bipartite;
pub mod conditioning;
pub mod cp_maps;
pub mod fock;
pub mod free_states;
pub mod json;
pub mod mat;
pub mod report;
pub mod suites;
pub mod symbols;

use num_complex::Complex64;
use thiserror::Error;

pub use bipartite::{DensityMatrix, PureBipartite, PureConditionalModel};
pub use conditioning::{
    conditional_bounds, conditional_symbol, conditioner_for_target, membership,
    oracle_conditional_symbol, ConditionalBounds, ConditioningOracle, ExponentialConditioner,
    Membership,
};
pub use cp_maps::{minimal_model, model_equivalence_check, FreeCPMap, ModelEquivalenceReport};
pub use fock::{FockRep, FockState, EMapBounds, Lemma1Residuals, DEFAULT_MAX_MODES, HARD_MODE_CAP};
pub use free_states::{FreeState, Monomial};
pub use mat::{CMat, CVec, C64};
pub use report::{NamedResidual, Report};
pub use symbols::{random_block_symbol, BlockSymbol, KernelProjectors, Symbol};

/// Numerical tolerances shared by all modules.
///
/// Defaults keep roughly six digits of headroom over double-precision
/// round-off for determinants of matrices up to dimension 64.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Hermiticity residual accepted before an input is rejected.
    pub herm: f64,
    /// Spectral slack: eigenvalue clipping window and positive-semidefinite
    /// acceptance threshold. Also the relative singular-value cutoff for
    /// pseudo-inverses and ranks.
    pub psd: f64,
    /// Smallest determinant modulus treated as invertible.
    pub det: f64,
    /// Accepted deviation between a closed form and the Fock-space oracle.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { herm: 1e-9, psd: 1e-9, det: 1e-9, oracle: 1e-8 }
    }
}

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("not Hermitian: asymmetry {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("spectrum out of range: eigenvalue {eigenvalue} lies outside [0, 1]")]
    SpectrumOutOfRange { eigenvalue: f64 },

    #[error("C or 1-C is singular (eigenvalue {eigenvalue:.3e}); trim the block first")]
    SingularC { eigenvalue: f64 },

    #[error("witness reconstruction failed: residual {residual:.3e}")]
    ReconstructionFailed { residual: f64 },

    #[error("symbol spectrum touches {{0,1}}: eigenvalue {eigenvalue}")]
    SingularSpectrum { eigenvalue: f64 },

    #[error("resolvent 1 - C + CL is singular: |det| = {det_modulus:.3e}")]
    SingularResolvent { det_modulus: f64 },

    #[error("conditioner is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    ConditionerNotPositive { min_eigenvalue: f64 },

    #[error("target lies outside the shrunk conditional bounds: margin {margin:.3e}")]
    TargetOutOfRange { margin: f64 },

    #[error("target - A is not supported on ran(B): residual {residual:.3e}")]
    TargetNotReachable { residual: f64 },

    #[error("S is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    SNotPositive { min_eigenvalue: f64 },

    #[error("S exceeds 1 - R*R: min eigenvalue of the slack {min_eigenvalue:.3e}")]
    SExceedsComplement { min_eigenvalue: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("functional cannot be normalized: expectation {expectation:.3e}")]
    NotNormalizable { expectation: f64 },

    #[error("normalization {value} differs from 1 by more than {tol:.1e}")]
    NotNormalized { value: f64, tol: f64 },

    #[error("operator does not commute with the number operator: residual {residual:.3e}")]
    NotGaugeInvariant { residual: f64 },

    #[error("density matrix trace is {trace}, not 1")]
    TraceNotOne { trace: f64 },

    #[error("{requested} modes exceed the cap of {cap} (the Fock space is 2^n-dimensional)")]
    TooManyModes { requested: usize, cap: usize },

    #[error("no principal logarithm: eigenvalue {eigenvalue} on the closed negative real axis")]
    NoPrincipalLog { eigenvalue: Complex64 },

    #[error("matrix is numerically defective: eigenbasis condition {condition:.3e}")]
    Defective { condition: f64 },

    #[error("rank of B is numerically ambiguous: largest singular value {sigma_max:.3e}")]
    RankDeficient { sigma_max: f64 },

    #[error("monomial is not gauge invariant: {creators} creators vs {annihilators} annihilators")]
    UnbalancedMonomial { creators: usize, annihilators: usize },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("dense linear algebra failed: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
