use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric parameter fell outside its admissible range.
    #[error("{name} = {value} is outside the valid range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    #[error("invalid length {len}: {reason}")]
    Length { len: usize, reason: String },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("series is constant; statistic is undefined")]
    Constant,

    #[error("{0}")]
    Invalid(String),

    #[error("scenario {signal} n={n} snr={snr} replication {replication}: {source}")]
    Scenario {
        signal: String,
        n: usize,
        snr: f64,
        replication: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, range: &'static str) -> Self {
        Error::Domain { name, value, range }
    }

    pub(crate) fn length(len: usize, reason: impl Into<String>) -> Self {
        Error::Length {
            len,
            reason: reason.into(),
        }
    }

    /// True for errors caused by numeric parameters rather than by the data.
    pub fn is_domain(&self) -> bool {
        match self {
            Error::Domain { .. } => true,
            Error::Scenario { source, .. } => source.is_domain(),
            _ => false,
        }
    }
}

/// Returns the index of the first non-finite value, as an error.
pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}
