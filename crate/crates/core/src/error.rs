use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: lower bound {lo} must be below upper bound {hi}")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("coefficient count {got} does not match basis size {expected}")]
    CoefficientCount { expected: usize, got: usize },

    #[error("value {u} lies outside the spline domain [{lo}, {hi}]")]
    OutOfDomain { u: f64, lo: f64, hi: f64 },

    #[error("derivative of a degree-0 spline is not representable")]
    UnsupportedDerivative,

    #[error("penalty order {order} requires degree of at least {order} (got {degree})")]
    PenaltyOrderTooHigh { order: usize, degree: usize },

    #[error("invalid smoothing parameter {0}: must be finite and non-negative")]
    InvalidLambda(f64),

    #[error("singular normal equations: the basis is rank deficient for these observations and lambda = 0")]
    SingularSystem,

    #[error("empty curve: no observations")]
    EmptyCurve,

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("phase path requires a spline of degree >= 2 (got {0})")]
    DegreeTooLowForPhase(usize),

    #[error("invalid sampling step {0}: must be finite and positive")]
    InvalidStep(f64),

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("mismatched domains: [{a_lo}, {a_hi}] vs [{b_lo}, {b_hi}]")]
    MismatchedDomains {
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
    },

    #[error("malformed row at line {line}: expected {expected} fields, found {found}")]
    MalformedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric value {value:?} at line {line}")]
    NonNumeric { line: usize, value: String },

    #[error("negative rate {value} at line {line}")]
    NegativeRate { line: usize, value: f64 },

    #[error("non-finite value at line {line}")]
    NonFinite { line: usize },

    #[error("duplicate cell for year {year}, age {age}")]
    DuplicateCell { year: String, age: f64 },

    #[error("missing cell for year {year}, age {age}")]
    MissingCell { year: String, age: f64 },

    #[error("empty table")]
    EmptyTable,

    #[error("unknown year {0}")]
    UnknownYear(String),

    #[error("invalid plot: {0}")]
    InvalidPlot(String),

    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
