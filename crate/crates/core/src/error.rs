use thiserror::Error;

/// Errors raised by the geometry, flow and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ambient parameters: {0}")]
    InvalidParams(String),

    #[error("radius s = {s} is not outside the horizon s0 = {s0}")]
    Domain { s: f64, s0: f64 },

    #[error("lookup {value} outside table range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("surface reaches the horizon at node {node} (s = {s})")]
    HorizonViolation { node: usize, s: f64 },

    #[error("flow breakdown at node {node}: F = {f:e} at t = {t}")]
    Breakdown { node: usize, f: f64, t: f64 },

    #[error("time step {dt:e} fell below dt_min = {dt_min:e}")]
    DtUnderflow { dt: f64, dt_min: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
