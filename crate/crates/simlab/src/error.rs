use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Invalid experiment configuration.
    #[error("argument error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tensorinf_core::Error),
    /// More than the tolerated fraction of replicates failed.
    #[error("numeric error: {failed} of {reps} replicates failed (first: replicate {first_index}: {first_message})")]
    TooManyFailures { failed: usize, reps: usize, first_index: usize, first_message: String },
}

pub type SimResult<T> = std::result::Result<T, SimError>;
