use thiserror::Error;

/// Errors raised by measure construction and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure has no atoms")]
    EmptyMeasure,
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid grid measure: {0}")]
    InvalidGrid(String),
    #[error("keep count {t} exceeds branching {n}")]
    InvalidKeepCount { t: u64, n: u64 },
    #[error("invalid construction parameters: {0}")]
    InvalidParams(String),
    #[error("level {level} rejected after {attempts} attempts")]
    RetryExhausted { level: usize, attempts: u32 },
    #[error("level {requested} exceeds construction depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("support contains a point too close to zero ({position})")]
    SupportContainsZero { position: f64 },
    #[error("need at least {need} samples in the fit window, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("radius {radius} is not positive")]
    NonpositiveRadius { radius: f64 },
    #[error("exponent s = {s} outside (0, {d})")]
    InvalidExponent { s: f64, d: usize },
    #[error("Fourier-side integral does not converge (last decade holds {tail_fraction:.3} of the total, decade slope {slope:.3})")]
    NonconvergentTail { tail_fraction: f64, slope: f64 },
    #[error("resolution {delta} is coarser than the smallest input feature {feature}")]
    ResolutionTooCoarse { delta: f64, feature: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
