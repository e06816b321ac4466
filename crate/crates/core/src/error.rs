use thiserror::Error;

/// Errors raised across the crate. Variants map one-to-one onto the failure
/// modes of model validation, synthesis, wavelet analysis, estimation and the
/// statistical diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Hurst exponent H[{index}] = {value} is outside (0, 1)")]
    HurstOutOfRange { index: usize, value: f64 },
    #[error("Hurst vector must be sorted ascending, but H[{index}] = {prev} > H[{next_index}] = {next}", next_index = .index + 1)]
    HurstUnsorted { index: usize, prev: f64, next: f64 },
    #[error("mixing matrix is numerically singular (singular value ratio {ratio:e})")]
    SingularMixing { ratio: f64 },
    #[error("intrinsic covariance is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    CovarianceNotPsd { min_eigenvalue: f64 },
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),
    #[error("variance of component {index} must be positive and finite, got {value}")]
    InvalidVariance { index: usize, value: f64 },
    #[error(
        "correlation between components {m} and {m_prime} is infeasible: |rho| = {rho} > rho_max = {rho_max}"
    )]
    CorrelationInfeasible {
        m: usize,
        m_prime: usize,
        rho: f64,
        rho_max: f64,
    },
    #[error("pairwise-feasible correlations are jointly infeasible: G ⊙ Σ has eigenvalue {min_eigenvalue:e}")]
    JointlyInfeasible { min_eigenvalue: f64 },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("circulant embedding failed: clipped spectral mass {clipped_mass:e} exceeds tolerance {tolerance:e}")]
    EmbeddingFailed { clipped_mass: f64, tolerance: f64 },
    #[error("series of length {len} is too short for the requested analysis ({needed})")]
    SeriesTooShort { len: usize, needed: String },
    #[error("bad wavelet filter: {0}")]
    BadFilter(String),
    #[error("octave {j} not available (pyramid has octaves 1..={j_max})")]
    ScaleUnavailable { j: usize, j_max: usize },
    #[error("window of {n_window} coefficients is too small for {dim} components")]
    WindowTooSmall { n_window: usize, dim: usize },
    #[error("octave {j} has {available} coefficients, {needed} required")]
    InsufficientCoefficients { j: usize, available: usize, needed: usize },
    #[error("degenerate regression range j1 = {j1}, j2 = {j2}")]
    DegenerateRange { j1: usize, j2: usize },
    #[error("sample size {n} is below the reference size {n0}")]
    SampleTooSmall { n: usize, n0: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("non-positive diagonal entry S[{m}][{m}] = {value} at octave {j}")]
    NonPositiveDiagonal { j: usize, m: usize, value: f64 },
    #[error("non-positive eigenvalue {value} (index {m}) at octave {j}")]
    NonPositiveEigenvalue { j: usize, m: usize, value: f64 },
    #[error("spectrum at octave {j} is rank deficient: {count} coefficients for {dim} components")]
    RankDeficient { j: usize, count: usize, dim: usize },
    #[error("empirical covariance is singular")]
    SingularCovariance,
    #[error("probability {0} outside the admissible range")]
    BadProbability(f64),
    #[error("empty sample")]
    EmptySample,
    #[error("component {0} has zero variance")]
    ZeroVariance(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("realization {realization}: {source}")]
    Realization {
        realization: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Strips any realization wrapper.
    pub fn root(&self) -> &Error {
        match self {
            Error::Realization { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for errors that come from invalid model parameters.
    pub fn is_model_error(&self) -> bool {
        matches!(
            self.root(),
            Error::DimensionMismatch(_)
                | Error::HurstOutOfRange { .. }
                | Error::HurstUnsorted { .. }
                | Error::SingularMixing { .. }
                | Error::CovarianceNotPsd { .. }
                | Error::InvalidCorrelation(_)
                | Error::InvalidVariance { .. }
                | Error::CorrelationInfeasible { .. }
                | Error::JointlyInfeasible { .. }
        )
    }
}
