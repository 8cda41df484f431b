use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not supported (expected 2, 3 or 4)")]
    UnsupportedDimension(usize),

    #[error("point has {got} coordinates, domain dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid spacing {spacing} exceeds radius/8 = {limit}")]
    ResolutionTooCoarse { spacing: f64, limit: f64 },

    #[error("invalid length parameter `{name}` = {value}")]
    InvalidLength { name: &'static str, value: f64 },

    #[error("metric is not symmetric positive definite at {point:?}")]
    MetricNotPositiveDefinite { point: Vec<f64> },

    #[error("half-ball center has negative normal coordinate y0 = {0}")]
    CenterBelowBoundary(f64),

    #[error("half-ball center coordinate y0 = {y0} is not a multiple of the spacing {spacing}")]
    CenterOffGrid { y0: f64, spacing: f64 },

    #[error("operation requires a {expected} domain")]
    WrongDomainKind { expected: &'static str },

    #[error("domain has no flat boundary nodes")]
    DomainHasNoFlatBoundary,

    #[error("subregion centered at {center:?} does not meet the domain")]
    SubregionOutsideDomain { center: Vec<f64> },

    #[error("shell of radius {radius} leaves the resolved domain near {point:?}")]
    ShellExitsDomain { radius: f64, point: Vec<f64> },

    #[error("shell radius {radius} is below 4h = {limit}")]
    RadiusBelowResolution { radius: f64, limit: f64 },

    #[error("point {point:?} is not an in-mask grid node")]
    NotANode { point: Vec<f64> },

    #[error("field value at node {node} is not admissible: {value}")]
    InvalidFieldValue { node: usize, value: f64 },

    #[error("fields live on different domains")]
    DomainMismatch,

    #[error("a = b = 0: the energy threshold is not defined")]
    BothNonlinearitiesZero,

    #[error("A1 = B1 = 0: the cap branch always applies")]
    BothLinearTermsZero,

    #[error("radius {0} is outside (0, 1]")]
    RadiusOutOfRange(f64),

    #[error("bound constant `{name}` = {value} must be finite and nonnegative")]
    InvalidConstant { name: &'static str, value: f64 },

    #[error("no in-mask node at the scan center")]
    EmptyBall,

    #[error("all stencil-valid nodes lie below the density floor {floor}")]
    AllNodesBelowFloor { floor: f64 },

    #[error("hypothesis violated at node {node} ({point:?}): {detail}")]
    HypothesisViolated {
        node: usize,
        point: Vec<f64>,
        detail: String,
    },

    #[error("estimation family is empty")]
    EmptyFamily,

    #[error(
        "quantization violated at sequence index {index}: concentration forced but measured energy {measured} <= hbar {hbar}"
    )]
    QuantizationViolated {
        index: usize,
        measured: f64,
        hbar: f64,
    },

    #[error("candidate concentration points {first:?} and {second:?} lie within 2*delta = {separation}")]
    ExclusionOverlap {
        first: Vec<f64>,
        second: Vec<f64>,
        separation: f64,
    },

    #[error("bubble scale {lambda} is below 4h = {limit} or the schedule is not strictly decreasing")]
    UnresolvableScale { lambda: f64, limit: f64 },

    #[error("generator does not fit the domain: {0}")]
    SpecOutOfDomain(String),

    #[error("field energy {energy} exceeds the declared bound {bound}")]
    EnergyBoundExceeded { energy: f64, bound: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed field file, line {line}: {detail}")]
    FieldFormat { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
