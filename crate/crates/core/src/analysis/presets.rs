//! Benchmark parameter configurations for Monte-Carlo studies.
//!
//! | preset  | Σ                | W            | H             |
//! |---------|------------------|--------------|---------------|
//! | Config1 | 0.7^{\|m-m'\|}   | random fixed | all different |
//! | Config2 | 0.7^{\|m-m'\|}   | random fixed | all equal     |
//! | Config3 | 0.7^{\|m-m'\|}   | identity     | all different |
//! | Config4 | 0.7^{\|m-m'\|}   | identity     | all equal     |
//! | Config5 | identity         | random fixed | all different |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{geometric_correlation, validate_params, HurstVector, IntrinsicCovariance, MixingMatrix, ModelParams};

pub const CORRELATION_DECAY: f64 = 0.7;
pub const MIXING_SEED: u64 = 20_231_105;
pub const MIXING_MAX_CONDITION: f64 = 10.0;
pub const EQUAL_HURST: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    Config1,
    Config2,
    Config3,
    Config4,
    Config5,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "config1" => Ok(Self::Config1),
            "config2" => Ok(Self::Config2),
            "config3" => Ok(Self::Config3),
            "config4" => Ok(Self::Config4),
            "config5" => Ok(Self::Config5),
            other => Err(Error::InvalidConfig(format!("unknown preset '{other}'"))),
        }
    }
}

/// Distinct exponents for dimension M: the six-component reference vector
/// (0.4, 0.5, 0.6, 0.65, 0.7, 0.8) for M = 6, endpoints 0.4 and 0.8 with
/// even spacing otherwise.
pub fn distinct_hurst(dim: usize) -> Vec<f64> {
    match dim {
        1 => vec![0.6],
        6 => vec![0.4, 0.5, 0.6, 0.65, 0.7, 0.8],
        _ => (0..dim)
            .map(|m| 0.4 + 0.4 * m as f64 / (dim - 1) as f64)
            .collect(),
    }
}

impl Preset {
    pub fn mixing(self) -> bool {
        matches!(self, Preset::Config1 | Preset::Config2 | Preset::Config5)
    }

    pub fn correlated(self) -> bool {
        !matches!(self, Preset::Config5)
    }

    pub fn equal_hurst(self) -> bool {
        matches!(self, Preset::Config2 | Preset::Config4)
    }

    /// Parameters with the preset's default exponents.
    pub fn params(self, dim: usize) -> Result<ModelParams> {
        let h = if self.equal_hurst() {
            vec![EQUAL_HURST; dim]
        } else {
            distinct_hurst(dim)
        };
        self.params_with_hurst(h)
    }

    /// Parameters with caller-supplied exponents (Σ and W from the preset).
    pub fn params_with_hurst(self, hurst: Vec<f64>) -> Result<ModelParams> {
        let dim = hurst.len();
        let sigma = if self.correlated() {
            IntrinsicCovariance::new(vec![1.0; dim], geometric_correlation(dim, CORRELATION_DECAY))?
        } else {
            IntrinsicCovariance::identity(dim)
        };
        let mixing = if self.mixing() {
            MixingMatrix::new(MixingMatrix::random(dim, MIXING_SEED + dim as u64, MIXING_MAX_CONDITION).matrix().clone())?
        } else {
            MixingMatrix::identity(dim)
        };
        validate_params(HurstVector::new(hurst)?, sigma, mixing)
    }
}
