use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("index {index} out of range for axis of length {len}")]
    IndexOutOfRange { index: i64, len: usize },

    #[error("modulus must be positive")]
    ZeroModulus,

    #[error("tap ({doppler}, {delay}) outside a {n_doppler}x{n_delay} grid")]
    TapOutOfRange {
        doppler: usize,
        delay: usize,
        n_doppler: usize,
        n_delay: usize,
    },

    #[error("dense structure of order {order} exceeds the cap of {cap}")]
    ResourceCap { order: usize, cap: usize },

    /// The dense oracle refused to invert an (almost) singular system.
    #[error("channel matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },

    /// A spectral bin at or below the zero-forcing threshold.
    #[error("spectral null at bin ({doppler}, {delay}): |delta| = {magnitude:e}")]
    SpectralNull {
        doppler: usize,
        delay: usize,
        magnitude: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("outside the complexity model's domain: {0}")]
    ModelDomain(String),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
