//! Synthesis of mixed multivariate fractional Brownian motion and estimation
//! of its vector of Hurst exponents by wavelet-spectrum eigenvalue regression.
//!
//! * [`model`]: parameter validation and the operator-fBm equivalent;
//! * [`synthesis`]: circulant-embedding generator for mfGn / mfBm;
//! * [`wavelet`]: pyramid DWT and (windowed) wavelet spectra;
//! * [`estimation`]: univariate, multivariate and bias-corrected estimators;
//! * [`analysis`]: Monte-Carlo harness, diagnostics and group tests.

pub mod analysis;
pub mod error;
pub mod estimation;
pub mod io;
pub mod linalg;
pub mod model;
pub mod special;
pub mod synthesis;
pub mod wavelet;

pub use error::{Error, Result};
pub use estimation::{EstimateRecord, Estimator, RegressionWeights, ScalingRangeConfig, WeightBalance};
pub use model::{ModelParams, OfbmEquivalent};
pub use synthesis::{EmbeddingReport, MfgnGenerator, PathKind, SamplePath};
pub use wavelet::{WaveletFilter, WaveletPyramid, WaveletSpectrumSet};
