//! Error type shared by every module.
//!
//! Variants split into two families the CLI maps to distinct exit codes:
//! validation/usage problems (bad parameters, misaligned grids, malformed
//! files) and numerical failures (a quantity the model says should exist
//! does not exist for the given inputs).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument lies outside its documented domain.
    #[error("{0}")]
    OutOfRange(String),

    /// An input was NaN or infinite where a finite number is required.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// The characteristic quadratic has no two distinct real roots.
    /// Only reachable at the single degenerate point p = 1/2, kappa = 1.
    #[error("degenerate discriminant: p = 1/2 with kappa = 1 admits no two distinct real roots")]
    DegenerateDiscriminant,

    /// The Dirichlet polynomial stays above 1 everywhere, so no power-law
    /// invariant exists. Unreachable for mixes that pass validation
    /// (min D <= D(-1) = 1/kappa <= 1); kept as a defensive guard.
    #[error("no real root: min over rho of D(rho) exceeds 1")]
    NoRoot,

    /// The Dirichlet polynomial's smallest root is >= 0, so every power-law
    /// invariant grows; there is no decaying tail.
    #[error("no negative root: the smallest root of D(rho) = 1 is >= 0")]
    NoNegativeRoot,

    /// A grid and a parameter set (or two grids) disagree on lambda or step.
    #[error("alignment mismatch: {0}")]
    AlignmentMismatch(String),

    /// The grid support is too small to contain any interior cell.
    #[error("empty interior: support has fewer than 2m+1 cells")]
    EmptyInterior,

    /// An operation would grow a grid past the configured cell cap.
    #[error("resource limit: operation needs {needed} cells, cap is {cap}")]
    ResourceLimit { needed: usize, cap: usize },

    /// Tail estimation requested at kappa = 1, where the invariant density
    /// x^-1 is non-normalizable and no stationary tail exists.
    #[error("stationary tail unavailable at kappa=1")]
    StationarityUnavailable,

    /// The confiscation experiment needs kappa > 1 for the distance to decay.
    #[error("not dissipative: kappa = 1 conserves the perturbation; nothing decays")]
    NotDissipative,

    /// Fewer data points than the computation can work with.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A regression window with no usable cells.
    #[error("empty window: regression needs at least 3 cells inside the support")]
    EmptyWindow,

    /// Log-log regression met a zero or negative density value.
    #[error("non-positive density value in regression window")]
    NonPositiveDensity,

    /// A tail-estimation sample was zero or negative.
    #[error("non-positive sample: tail estimation needs strictly positive samples")]
    NonPositiveSample,

    /// All order statistics coincide; the Hill estimator divides by zero.
    #[error("degenerate sample: zero log-spacing among the top order statistics")]
    DegenerateSample,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A CSV/JSON document the loaders could not interpret.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the mathematics (no root, degenerate point,
    /// no stationary tail), as opposed to bad usage or bad files.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDiscriminant
                | Error::NoRoot
                | Error::NoNegativeRoot
                | Error::StationarityUnavailable
                | Error::NotDissipative
                | Error::DegenerateSample
        )
    }
}
