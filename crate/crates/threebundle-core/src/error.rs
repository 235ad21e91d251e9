//! Error types shared across the crate.

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("curve has the wrong monotonicity for the requested quadrant")]
    WrongMonotonicity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnsembleError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("boundary data is not domain-wall data")]
    UnsupportedBoundary,
    #[error("boundary data is not admissible: {0}")]
    InadmissibleBoundary(String),
    #[error("no ensemble satisfies the boundary data and restriction")]
    Infeasible,
    #[error("defect line balance violated: {ending} ending and {starting} starting paths")]
    DefectBalance { ending: u32, starting: u32 },
    #[error("invalid ensemble: {0}")]
    Invalid(String),
    #[error("ensembles have different path counts ({0} vs {1})")]
    PathCountMismatch(usize, usize),
    #[error("no defective ensemble maps to this ensemble")]
    NoPreimage,
    #[error("rotation needs A >= 1")]
    RotationNeedsA,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplerError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("the triangular face cannot be switched")]
    TriangleSwitch,
    #[error("initial states are not ordered")]
    Unordered,
    #[error("ordering violated after event {0}")]
    OrderViolated(u64),
    #[error("no coalescence within {budget} events")]
    BudgetExceeded { budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("enumeration cap {cap} exceeded (at least {lower_bound} ensembles)")]
    CapExceeded { cap: u64, lower_bound: u64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormulaError {
    #[error("parameters are not on the simplex: a + b + c = {0}")]
    Simplex(f64),
    #[error("argument outside the domain: {0}")]
    Domain(&'static str),
    #[error("A = 0 has no closed form here; use enumeration")]
    UnsupportedA,
    #[error("index out of range: {0}")]
    OutOfRange(&'static str),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("path is not a monotone up-right path")]
    NonMonotone,
    #[error("empty sample set")]
    Empty,
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}
