use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("channel vector has zero norm")]
    ZeroChannel,

    #[error("target power is unreachable: effective channel is zero")]
    UnreachableTarget,

    #[error("frequency {0} GHz is outside the tabulated 2-300 GHz range")]
    FrequencyOutOfRange(f64),

    #[error("radiator at distance {distance} m lies inside the {radius} m evaluation sphere")]
    RadiatorInsideSphere { distance: f64, radius: f64 },

    #[error("time series is not sorted at sample {0}")]
    UnsortedSeries(usize),

    #[error("objective returned a non-finite value ({0})")]
    NonFiniteObjective(f64),

    #[error("domain has {configs} configurations, limit is {max}")]
    DomainTooLarge { configs: f64, max: u64 },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
