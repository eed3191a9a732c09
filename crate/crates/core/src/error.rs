use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("{field} must be finite")]
    NonFinite { field: &'static str },
    #[error("{field} must be positive, got {value}")]
    NonPositiveSize { field: &'static str, value: f64 },
    #[error("polygon needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("covariance is not symmetric")]
    AsymmetricCovariance,
    #[error("covariance is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("singular covariance in KL divergence")]
    SingularCovariance,
    #[error("probability must lie in (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("invalid cost weight {name} = {value}")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("class id {class_id} has no score in a prediction with {num_classes} classes")]
    MissingClassScore { class_id: usize, num_classes: usize },
    #[error("unknown cost {0:?}")]
    UnknownCost(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("layer {layer} has {got} entries, expected {expected}")]
    Ragged {
        layer: usize,
        got: usize,
        expected: usize,
    },
    #[error("instability needs at least 2 layers, got {0}")]
    TooFewLayers(usize),
    #[error("instability needs at least one ground truth")]
    NoGroundTruths,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdrError {
    #[error("bin count N must be even and at least 2, got {0}")]
    InvalidBins(usize),
    #[error("weighting parameter {name} must be finite and positive, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("bin index {index} outside 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("distribution {which} has {got} logits, expected {expected}")]
    LogitLength {
        which: usize,
        got: usize,
        expected: usize,
    },
    #[error("non-finite logit in distribution {0}")]
    NonFiniteLogit(usize),
    #[error("refined external rectangle collapsed (width {width}, height {height})")]
    DegenerateRectangle { width: f64, height: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise bounds must satisfy {lo_name} < {hi_name}, got {lo} and {hi}")]
    BadOrder {
        lo_name: &'static str,
        hi_name: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("noise parameter {name} = {value} out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("total denoising queries must be even and at least 2, got {0}")]
    BadQueryCount(usize),
    #[error("unknown noise mode {0:?}")]
    UnknownMode(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NmsError {
    #[error("IoU threshold must lie in (0, 1), got {0}")]
    IouThreshold(f64),
    #[error("confidence threshold must lie in [0, 1), got {0}")]
    ConfThreshold(f64),
    #[error("score must lie in [0, 1], got {0}")]
    Score(f64),
    #[error("scene spacing must be positive, got {0}")]
    Spacing(f64),
    #[error("benchmark needs at least 5 repeats, got {0}")]
    Repeats(usize),
    #[error("benchmark counts must be ascending")]
    UnsortedCounts,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
