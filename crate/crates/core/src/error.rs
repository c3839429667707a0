use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A delay would push a nonzero amplitude past the last bin of the frame.
    #[error("frame overflow: amplitude at bin {bin} delayed by {delay} leaves a {n_bins}-bin frame")]
    FrameOverflow {
        bin: usize,
        delay: usize,
        n_bins: usize,
    },

    /// A coupler expects its gated bins to carry amplitude on the H rail only.
    #[error("coupler input at bin {bin} has amplitude on the V rail")]
    RailOccupied { bin: usize },

    #[error("schedule infeasible at gate {gate_index}: {reason}")]
    ScheduleInfeasible { gate_index: usize, reason: String },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("unsupported instance N={modulus}, a={base}: {reason}")]
    UnsupportedInstance {
        modulus: u64,
        base: u64,
        reason: String,
    },

    #[error("order not found: {0}")]
    OrderNotFound(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
