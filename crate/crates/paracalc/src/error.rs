use thiserror::Error;

/// Errors raised by field operations, solvers and IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("level {level} outside -1..={top}")]
    LevelOutOfRange { level: i32, top: i32 },
    #[error("input has nonzero mean (|f^(0)| = {0:e})")]
    NonzeroMean(f64),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("insufficient blocks: {0} above the noise floor, need 4")]
    InsufficientBlocks(usize),
    #[error("parameter {value} outside [{lo}, {hi}]")]
    ParameterRange { value: f64, lo: f64, hi: f64 },
    #[error("time grids are not aligned")]
    MisalignedSlabs,
    #[error("too few frames: {0}")]
    TooFewFrames(usize),
    #[error("derivative order {0} not supported (max 2)")]
    DerivativeOrder(usize),
    #[error("degenerate diffusion coefficient: {0}")]
    Degenerate(String),
    #[error("grid too large for the kernel reference (n = {0}, max 16)")]
    GridTooLarge(usize),
    #[error("instability: sup norm {norm:e} at step {step}; reduce dt")]
    Instability { step: usize, norm: f64 },
    #[error("no contraction at this T: {0}")]
    NoContraction(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
