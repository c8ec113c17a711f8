use thiserror::Error;

/// Everything that can go wrong across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} not supported: need an even number ≥ 4 with prime factors in {{2, 3, 5}}")]
    BadGridSize(usize),
    #[error("box length must be positive, got {0}")]
    BadBoxLength(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("symbol is singular at the zero mode and the input has nonzero mean (|mean component| = {0:.3e})")]
    SingularSymbol(f64),
    #[error("regularization strength must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error("semigroup time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("input field is identically zero")]
    ZeroField,
    #[error("the two fields are bitwise identical; the quotient is undefined")]
    DegeneratePair,
    #[error("iteration failed to reach tolerance {tol:.3e} after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, tol: f64, residual: f64 },
    #[error("iteration left the localized branch: iterates collapsed to zero, diverged, or delocalized across the box")]
    CollapseToZero,
    #[error("rescaling by a = {a} is not resolved on this grid: {detail}")]
    UnresolvedScale { a: f64, detail: String },
    #[error("time step must be a nonzero finite number")]
    ZeroStep,
    #[error("spectral tail {tail:.3e} of peak exceeds the resolution threshold {threshold:.3e}")]
    ResolutionLoss { tail: f64, threshold: f64 },
    #[error("fixed-point iteration stopped contracting after {0} iterations")]
    NoContraction(usize),
    #[error("no admissible relative form bound a < 1 fits the probe family (best a = {best_a:.4})")]
    NotFormBounded { best_a: f64 },
    #[error("snapshot file is malformed: {0}")]
    BadSnapshot(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
