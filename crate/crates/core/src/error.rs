//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A line of an input file failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A category name was not found in the active ontology.
    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    /// Matrix or vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Training could not start or diverged.
    #[error("training error: {0}")]
    Train(String),

    /// World generation exhausted its retry budget.
    #[error("world generation failed: {0}")]
    WorldGen(String),

    /// Every known candidate has already been visited this episode.
    #[error("all candidates visited")]
    Exhausted,

    /// An instruction could not be parsed into a goal.
    #[error("instruction error: {0}")]
    Instruction(String),

    /// The symbolic planner found no plan.
    #[error("planning failed: {0}")]
    Planning(String),

    /// A plan step failed at execution time.
    #[error("execution failed at step {step} ({op}): {msg}")]
    Execution {
        step: usize,
        op: String,
        msg: String,
    },

    /// Bad configuration or mismatched artifacts (exit code 2 at the CLI).
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
