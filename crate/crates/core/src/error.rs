use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid support [{lower}, {upper}]: bounds must be finite with lower < upper")]
    InvalidSupport { lower: f64, upper: f64 },

    #[error("sample is empty")]
    EmptySample,

    #[error("sample value at position {index} is not finite")]
    NonFiniteValue { index: usize },

    #[error("value {value} lies outside the support [{lower}, {upper}]")]
    OutsideSupport { value: f64, lower: f64, upper: f64 },

    #[error("invalid bandwidth {bandwidth}: {reason}")]
    InvalidBandwidth { bandwidth: f64, reason: &'static str },

    #[error("histogram bin edges must be finite and strictly increasing")]
    NonMonotoneEdges,

    #[error("histogram has {bins} bins but {counts} counts")]
    HistogramShape { bins: usize, counts: usize },

    #[error("histogram counts must be finite, nonnegative and sum to a positive total")]
    ZeroMass,

    #[error("grid mismatch: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },

    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("{what} is not nondecreasing at index {index}")]
    NotMonotone { what: &'static str, index: usize },

    #[error("invalid {what}: {reason}")]
    InvalidValues { what: &'static str, reason: String },

    #[error("component index {index} out of range for p = {p}")]
    ComponentOutOfRange { index: usize, p: usize },

    #[error("need at least {min} subjects, got {got}")]
    TooFewSubjects { min: usize, got: usize },

    #[error("ensemble has no time index")]
    MissingTimeIndex,

    #[error("invalid time index: {0}")]
    InvalidTimeIndex(String),

    #[error("component {index} has zero Wasserstein variance")]
    DegenerateComponent { index: usize },

    #[error("matrix is not positive definite (largest eigenvalue {largest})")]
    NotPositiveDefinite { largest: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("need at least two groups, got {got}")]
    TooFewGroups { got: usize },

    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("subject {subject}, component {component}, line {line}: value {value} outside support [{lower}, {upper}]")]
    CellOutsideSupport {
        subject: String,
        component: String,
        line: u64,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("missing cells (subject, component): {}", format_cells(.0))]
    MissingCells(Vec<(String, String)>),

    #[error("subject {subject}, component {component}: {source}")]
    Cell {
        subject: String,
        component: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_cells(cells: &[(String, String)]) -> String {
    cells
        .iter()
        .map(|(s, c)| format!("({s}, {c})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    /// True for failures of the numerics (non-PD matrices, zero variances)
    /// as opposed to malformed inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegenerateComponent { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::NotSymmetric { .. } => true,
            Error::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn in_cell(self, subject: &str, component: &str) -> Self {
        Error::Cell {
            subject: subject.to_string(),
            component: component.to_string(),
            source: Box::new(self),
        }
    }
}
