use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("function vanishes at node {index} (x = {x}): |value| = {magnitude:e}")]
    NonvanishingViolation { index: usize, x: f64, magnitude: f64 },

    #[error("operands are defined on different grids")]
    GridMismatch,

    #[error("insufficient order: {required} required, {available} available")]
    InsufficientOrder { required: usize, available: usize },

    #[error("tolerance {0:e} cannot be reached in double precision")]
    ToleranceTooTight(f64),

    #[error("parity condition violated for k = {k}, n = {n} ({variant})")]
    ParityMismatch { k: usize, n: usize, variant: &'static str },

    #[error("operation requires a real-valued phi")]
    RealPhiRequired,

    #[error("operation requires a real positive phi")]
    PositivePhiRequired,

    #[error("order {requested} exceeds the cap {cap}")]
    OrderCapExceeded { requested: usize, cap: usize },

    #[error("ill-conditioned determinant at node {index}: condition estimate {condition:e}")]
    ConditioningFailure { index: usize, condition: f64 },

    #[error("ground state vanishes at node {index} (x = {x})")]
    GroundStateVanishes { index: usize, x: f64 },

    #[error("series truncation too small: K = {current} used, about {needed} needed")]
    TruncationTooSmall { current: usize, needed: usize },

    #[error("no characteristic roots found in [{lo}, {hi}]")]
    NoRootsInRange { lo: f64, hi: f64 },

    #[error("only {found} eigenvalues found, {needed} needed")]
    TooFewEigenvalues { found: usize, needed: usize },

    #[error("u0 is not a particular solution: relative residual {residual:e}")]
    NotAParticularSolution { residual: f64 },

    #[error("kernel power 0 is the composition identity and has no array form")]
    IdentityNotMaterializable,

    #[error("Neumann series terms kept growing after term {term}")]
    DivergenceSuspected { term: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("table error: {0}")]
    Table(String),
}

impl Error {
    /// Short machine-friendly name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::NonvanishingViolation { .. } => "NonvanishingViolation",
            Error::GridMismatch => "GridMismatch",
            Error::InsufficientOrder { .. } => "InsufficientOrder",
            Error::ToleranceTooTight(_) => "ToleranceTooTight",
            Error::ParityMismatch { .. } => "ParityMismatch",
            Error::RealPhiRequired => "RealPhiRequired",
            Error::PositivePhiRequired => "PositivePhiRequired",
            Error::OrderCapExceeded { .. } => "OrderCapExceeded",
            Error::ConditioningFailure { .. } => "ConditioningFailure",
            Error::GroundStateVanishes { .. } => "GroundStateVanishes",
            Error::TruncationTooSmall { .. } => "TruncationTooSmall",
            Error::NoRootsInRange { .. } => "NoRootsInRange",
            Error::TooFewEigenvalues { .. } => "TooFewEigenvalues",
            Error::NotAParticularSolution { .. } => "NotAParticularSolution",
            Error::IdentityNotMaterializable => "IdentityNotMaterializable",
            Error::DivergenceSuspected { .. } => "DivergenceSuspected",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Table(_) => "Table",
        }
    }

    /// True when the error means the inputs violate a stated precondition,
    /// as opposed to a failure discovered while computing.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::NonvanishingViolation { .. }
                | Error::GridMismatch
                | Error::ToleranceTooTight(_)
                | Error::ParityMismatch { .. }
                | Error::RealPhiRequired
                | Error::PositivePhiRequired
                | Error::OrderCapExceeded { .. }
                | Error::GroundStateVanishes { .. }
                | Error::NotAParticularSolution { .. }
                | Error::IdentityNotMaterializable
                | Error::InvalidArgument(_)
                | Error::Table(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
