use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("niggli reduction did not converge within {0} iterations")]
    Reduction(usize),

    #[error("degenerate structure: atoms {0} and {1} overlap")]
    DegenerateStructure(usize, usize),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("time step {t} outside 1..={max}")]
    StepOutOfRange { t: usize, max: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("sampling diverged at step {step}")]
    Divergence { step: usize },

    #[error("training diverged at step {step}: loss {loss}, lr {lr}, grad norm {grad_norm}")]
    TrainingDivergence {
        step: usize,
        loss: f64,
        lr: f64,
        grad_norm: f64,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unsupported symmetry: {0}")]
    UnsupportedSymmetry(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by numerically diverging computations.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::TrainingDivergence { .. })
    }
}
