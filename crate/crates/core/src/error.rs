use thiserror::Error;

/// Errors raised by every operation in the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("grid axis {axis} is degenerate: lo = {lo}, hi = {hi}")]
    DegenerateBox { axis: usize, lo: f64, hi: f64 },
    #[error("grid spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("grid axis {axis} has {nodes} nodes; the stencil needs at least 5")]
    TooCoarse { axis: usize, nodes: usize },
    #[error("unsupported complex dimension {0} (only 1 and 2)")]
    UnsupportedDimension(usize),
    #[error("point lies on the singular set: {0}")]
    SingularPoint(String),
    #[error("grid leaves the natural domain of the function: {0}")]
    OutsideNaturalDomain(String),
    #[error("mollifier radius {epsilon} is below the resolution floor 3h = {floor}")]
    ResolutionFloor { epsilon: f64, floor: f64 },
    #[error("no valid stencil nodes: {0}")]
    InvalidStencil(String),
    #[error("complex Hessian is not Hermitian at node {node} (defect {defect:e})")]
    NonHermitian { node: usize, defect: f64 },
    #[error("analytic derivatives unavailable; `{0}` is finite-difference only")]
    FiniteDifferenceOnly(String),
    #[error("scheme is incompatible with the function: {0}")]
    IncompatibleScheme(String),
    #[error("product dimension {0} exceeds the supported maximum of 2")]
    DimensionTooLarge(usize),
    #[error("value {value} lies outside the domain of the reparametrization {chi}")]
    ChiDomain { chi: String, value: f64 },
    #[error("reparametrization derivative not evaluable: {0}")]
    ChiNotEvaluable(String),
    #[error("unsupported current / degree combination: {0}")]
    UnsupportedCurrent(String),
    #[error("weight is not evaluable at a point carrying mass ({0})")]
    WeightNotEvaluable(String),
    #[error("integration region is empty")]
    EmptyRegion,
    #[error("radius constraint violated: {0}")]
    RadiusConstraint(String),
    #[error("boundary condition u - v >= 0 violated on the outer shell (min = {min:e}, tolerance = {tolerance:e})")]
    BoundaryViolated { min: f64, tolerance: f64 },
    #[error("candidate {index} leaves [0, 1] on the domain (value {value})")]
    CandidateOutOfRange { index: usize, value: f64 },
    #[error("leaf family leaves {missing} base cells uncovered")]
    LeafGaps { missing: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("hard cutoffs need smoothing or a radial reduction: {0}")]
    NeedsSmoothing(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
