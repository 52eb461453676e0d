use alloc::string::String;

/// Failures raised by the spectral kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid domain, grid, or solver configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Field data does not match the shape implied by its domain.
    #[error("shape mismatch: expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },
    /// An argument outside the operation's domain of definition.
    #[error("argument error: {0}")]
    Argument(String),
    /// The input has no mass where the operation needs some.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// The time integration produced non-finite values or lost mass.
    #[error("blow-up at step {step}: {reason}")]
    BlowUp { step: usize, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;
