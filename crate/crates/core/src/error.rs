use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("truncation length {c} out of range for spectrum of length {n}")]
    TruncationOutOfRange { c: usize, n: usize },

    #[error("density undefined for n = {n} (need n > 1)")]
    DensityUndefined { n: usize },

    #[error("invalid graph: {reason}")]
    InvalidGraph { reason: String },

    #[error("graph format error{}: {reason}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    GraphFormat { line: Option<usize>, reason: String },

    #[error("invalid model parameters: {reason}")]
    InvalidParams { reason: String },

    #[error("kernel argument {value} outside [0, 1]")]
    KernelArgOutOfRange { value: f64 },

    #[error("no sign change for eigenvalue {index}: f({a}) = {fa}, f({b}) = {fb}")]
    NoSignChange {
        index: usize,
        a: f64,
        b: f64,
        fa: f64,
        fb: f64,
    },

    #[error("root finding for eigenvalue {index} did not converge after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("eigenvalue {index} of the expected adjacency matrix is too close to zero ({value})")]
    DegenerateEigenvalue { index: usize, value: f64 },

    #[error("quadrature failed to normalise with {nodes} nodes (defect {defect:e})")]
    QuadratureNonconvergence { nodes: usize, defect: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("across-block density is undefined for a single block; pin p_1 to the target density instead")]
    QUndefinedForSingleBlock,

    #[error("weighted density {value} outside (0, 1)")]
    DensityOutOfRange { value: f64 },

    #[error("degenerate regression weights: sum = {sum}")]
    DegenerateWeights { sum: f64 },

    #[error("regression variance is zero")]
    ZeroVariance,

    #[error("no fit supplied for sample time {t}")]
    MissingFit { t: f64 },

    #[error("gradient evaluation failed at component {component}: {reason}")]
    GradientEvaluation { component: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
