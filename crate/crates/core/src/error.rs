use thiserror::Error;

/// Errors raised by every fallible operation in the toolkit.
///
/// Each variant carries a stable kebab-case [`Error::code`] used by the CLI
/// and by the results store.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid-argument: {0}")]
    InvalidArgument(String),
    #[error("support-overflow: support radius {radius} exceeds half box {limit}")]
    SupportOverflow { radius: f64, limit: f64 },
    #[error("unsupported-dilation: {0} is not a power of two")]
    UnsupportedDilation(f64),
    #[error("grid-too-coarse: only {bands} dyadic bands fit on the lattice")]
    GridTooCoarse { bands: i32 },
    #[error("band-out-of-range: j={j} outside [{j_min}, {j_max}]")]
    BandOutOfRange { j: i32, j_min: i32, j_max: i32 },
    #[error("epsilon-under-resolved: {0}")]
    EpsilonUnderResolved(String),
    #[error("degenerate-mollifier: {0}")]
    DegenerateMollifier(String),
    #[error("invalid-epsilon: {0} is not in the mollifier family")]
    InvalidEpsilon(f64),
    #[error("not-band-limited: spectral tail carries {tail_fraction:e} of the energy")]
    NotBandLimited { tail_fraction: f64 },
    #[error("moment-order-too-low: s={s} requires more than {k} vanishing moments")]
    MomentOrderTooLow { s: f64, k: usize },
    #[error("exponent-mismatch: {0}")]
    ExponentMismatch(String),
    #[error("missing-exponent: {0}")]
    MissingExponent(String),
    #[error("condition-violated: {0}")]
    ConditionViolated(String),
    #[error("condition-violated required: {0}")]
    ConditionViolationRequired(String),
    #[error("unresolvable-at-scale: {0}")]
    UnresolvableAtScale(String),
    #[error("missing-calibration: {0}")]
    Calibration(String),
    #[error("factor {factor}: {source}")]
    Factor {
        factor: String,
        #[source]
        source: Box<Error>,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::SupportOverflow { .. } => "support-overflow",
            Error::UnsupportedDilation(_) => "unsupported-dilation",
            Error::GridTooCoarse { .. } => "grid-too-coarse",
            Error::BandOutOfRange { .. } => "band-out-of-range",
            Error::EpsilonUnderResolved(_) => "epsilon-under-resolved",
            Error::DegenerateMollifier(_) => "degenerate-mollifier",
            Error::InvalidEpsilon(_) => "invalid-epsilon",
            Error::NotBandLimited { .. } => "not-band-limited",
            Error::MomentOrderTooLow { .. } => "moment-order-too-low",
            Error::ExponentMismatch(_) => "exponent-mismatch",
            Error::MissingExponent(_) => "missing-exponent",
            Error::ConditionViolated(_) => "condition-violated",
            Error::ConditionViolationRequired(_) => "condition-violated-required",
            Error::UnresolvableAtScale(_) => "unresolvable-at-scale",
            Error::Calibration(_) => "missing-calibration",
            Error::Factor { source, .. } => source.code(),
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub fn in_factor(self, factor: impl Into<String>) -> Self {
        Error::Factor {
            factor: factor.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
