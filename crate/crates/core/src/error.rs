use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A model, grid or solver parameter lies outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Field data is malformed (non-finite entries, wrong length, zero norm).
    #[error("data error: {0}")]
    Data(String),

    /// Convolution kernel cannot be tabulated or evaluated.
    #[error("kernel error: {0}")]
    Kernel(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Time propagation produced non-finite values.
    #[error("propagation blew up at t = {time}")]
    BlowUp { time: f64 },

    /// File contents do not follow the expected layout.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn data(msg: impl Into<String>) -> Error {
    Error::Data(msg.into())
}
