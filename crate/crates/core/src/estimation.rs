//! Estimators of the Hurst vector from wavelet spectra.
//!
//! * univariate: regression of log₂ S_mm(2^j) on j, per component;
//! * multivariate: regression of the sorted log₂ eigenvalues of S(2^j);
//! * bias-corrected multivariate: eigenvalues are taken on windows of
//!   n_{j2} coefficients at every octave and their logs averaged across the
//!   2^{j2-j} windows before regressing, so every eigenvalue is estimated
//!   from the same number of coefficients and the small-sample repulsion
//!   between eigenvalues is the same at every scale.
//!
//! All three map a slope s to H = (s - 1)/2.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
pub use crate::linalg::sorted_eigenvalues;
use crate::wavelet::{dwt, windowed_spectra, WaveletFilter, WaveletPyramid, WaveletSpectrumSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightBalance {
    Uniform,
    #[default]
    ByCount,
}

impl std::str::FromStr for WeightBalance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "by-count" | "by_count" => Ok(Self::ByCount),
            other => Err(Error::InvalidConfig(format!("unknown weight mode '{other}'"))),
        }
    }
}

/// Linear-regression slope weights over octaves j1..=j2:
/// Σ w_j = 0 and Σ j w_j = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionWeights {
    pub j1: usize,
    pub j2: usize,
    pub w: Vec<f64>,
}

impl RegressionWeights {
    pub fn get(&self, j: usize) -> Option<f64> {
        (j >= self.j1 && j <= self.j2).then(|| self.w[j - self.j1])
    }

    pub fn octaves(&self) -> impl Iterator<Item = usize> {
        self.j1..=self.j2
    }

    /// Σ_j w_j y_j for values aligned with j1..=j2.
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.w.iter().zip(values).map(|(w, y)| w * y).sum()
    }
}

/// Weighted least-squares slope weights w_j = b_j (j - j̄) / Σ b_j (j - j̄)²,
/// with b_j = 1 or b_j = n_j.
pub fn regression_weights(
    j1: usize,
    j2: usize,
    balance: WeightBalance,
    counts: Option<&[usize]>,
) -> Result<RegressionWeights> {
    if j2 <= j1 {
        return Err(Error::DegenerateRange { j1, j2 });
    }
    let len = j2 - j1 + 1;
    let b: Vec<f64> = match balance {
        WeightBalance::Uniform => vec![1.0; len],
        WeightBalance::ByCount => {
            let counts = counts.ok_or_else(|| {
                Error::InvalidConfig("by-count weights need coefficient counts".into())
            })?;
            if counts.len() != len {
                return Err(Error::DimensionMismatch(format!(
                    "{} counts for {len} octaves",
                    counts.len()
                )));
            }
            if counts.contains(&0) {
                return Err(Error::InvalidConfig("zero coefficient count".into()));
            }
            counts.iter().map(|&c| c as f64).collect()
        }
    };
    let js: Vec<f64> = (j1..=j2).map(|j| j as f64).collect();
    let v0: f64 = b.iter().sum();
    let jbar = b.iter().zip(&js).map(|(b, j)| b * j).sum::<f64>() / v0;
    let denom: f64 = b.iter().zip(&js).map(|(b, j)| b * (j - jbar).powi(2)).sum();
    let w = b
        .iter()
        .zip(&js)
        .map(|(b, j)| b * (j - jbar) / denom)
        .collect();
    Ok(RegressionWeights { j1, j2, w })
}

/// Sample-size driven regression range: octaves shift by log₂ a(N) with
/// a(N) = 2^{⌊β log₂(N/N0)⌋}, keeping j2 - j1 fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRangeConfig {
    pub j1_0: usize,
    pub j2_0: usize,
    pub beta: f64,
    pub n0: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varpi_hint: Option<f64>,
}

impl Default for ScalingRangeConfig {
    fn default() -> Self {
        Self {
            j1_0: 6,
            j2_0: 9,
            beta: 0.9,
            n0: 1 << 13,
            varpi_hint: None,
        }
    }
}

impl ScalingRangeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.j1_0 >= self.j2_0 {
            return Err(Error::DegenerateRange {
                j1: self.j1_0,
                j2: self.j2_0,
            });
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidConfig(format!("beta = {} outside (0, 1)", self.beta)));
        }
        if self.j2_0 >= usize::BITS as usize || self.n0 < (1usize << self.j2_0) {
            return Err(Error::InvalidConfig(format!(
                "n0 = {} is smaller than 2^j2_0 = 2^{}",
                self.n0, self.j2_0
            )));
        }
        Ok(())
    }

    /// Warning text when β ≤ 1/(2ϖ+1) for the ϖ hint, if one is set.
    pub fn beta_warning(&self) -> Option<String> {
        let varpi = self.varpi_hint?;
        let bound = 1.0 / (2.0 * varpi + 1.0);
        (self.beta <= bound).then(|| {
            format!(
                "beta = {} does not exceed 1/(2*varpi + 1) = {bound:.4} for varpi = {varpi:.4}",
                self.beta
            )
        })
    }
}

/// ϖ = min{ min positive gaps H_i - H_{i-1}, H_1/2 + 1/4 } for a sorted H.
pub fn varpi(h: &[f64]) -> f64 {
    let base = h.first().map_or(f64::INFINITY, |h1| h1 / 2.0 + 0.25);
    h.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|gap| *gap > 0.0)
        .fold(base, f64::min)
}

pub fn scaling_range(n: usize, cfg: &ScalingRangeConfig) -> Result<(usize, usize)> {
    cfg.validate()?;
    if n < cfg.n0 {
        return Err(Error::SampleTooSmall { n, n0: cfg.n0 });
    }
    let log2_ratio = (n as f64 / cfg.n0 as f64).log2();
    let shift = (cfg.beta * log2_ratio).floor() as usize;
    Ok((cfg.j1_0 + shift, cfg.j2_0 + shift))
}

fn slope_to_hurst(slope: f64) -> f64 {
    0.5 * (slope - 1.0)
}

fn check_weights_cover(scales: &[usize], w: &RegressionWeights) -> Result<Vec<usize>> {
    w.octaves()
        .map(|j| {
            scales.iter().position(|&s| s == j).ok_or(Error::ScaleUnavailable {
                j,
                j_max: scales.iter().copied().max().unwrap_or(0),
            })
        })
        .collect()
}

/// log₂ S_mm(2^j) per octave in the weight range.
pub fn diagonal_logs(spectra: &WaveletSpectrumSet, w: &RegressionWeights) -> Result<Vec<Vec<f64>>> {
    let idx = check_weights_cover(&spectra.scales, w)?;
    idx.iter()
        .zip(w.octaves())
        .map(|(&i, j)| {
            let s = &spectra.spectra[i];
            (0..s.nrows())
                .map(|m| {
                    let value = s[(m, m)];
                    if value > 0.0 && value.is_finite() {
                        Ok(value.log2())
                    } else {
                        Err(Error::NonPositiveDiagonal { j, m, value })
                    }
                })
                .collect()
        })
        .collect()
}

fn log2_eigenvalues(s: &DMatrix<f64>, j: usize) -> Result<Vec<f64>> {
    crate::linalg::check_symmetric(s)?;
    let (values, _) = symmetric_eigen(s);
    values
        .into_iter()
        .enumerate()
        .map(|(m, value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.log2())
            } else {
                Err(Error::NonPositiveEigenvalue { j, m, value })
            }
        })
        .collect()
}

/// Ascending log₂ eigenvalues of S(2^j) per octave in the weight range.
pub fn eigen_logs(spectra: &WaveletSpectrumSet, w: &RegressionWeights) -> Result<Vec<Vec<f64>>> {
    let idx = check_weights_cover(&spectra.scales, w)?;
    let dim = spectra.dim();
    idx.iter()
        .zip(w.octaves())
        .map(|(&i, j)| {
            let count = spectra.counts[i];
            if count < dim {
                return Err(Error::RankDeficient { j, count, dim });
            }
            log2_eigenvalues(&spectra.spectra[i], j)
        })
        .collect()
}

/// Window-averaged log₂ eigenvalues 2^{j-j2} Σ_τ log₂ λ^(τ)_m(2^j), per octave j1..=j2.
pub fn averaged_eigen_logs(pyr: &WaveletPyramid, j1: usize, j2: usize) -> Result<Vec<Vec<f64>>> {
    (j1..=j2)
        .map(|j| {
            let windows = windowed_spectra(pyr, j, j2)?;
            let mut acc = vec![0.0; pyr.dim()];
            for s in &windows {
                for (a, l) in acc.iter_mut().zip(log2_eigenvalues(s, j)?) {
                    *a += l;
                }
            }
            let count = windows.len() as f64;
            Ok(acc.into_iter().map(|a| a / count).collect())
        })
        .collect()
}

/// Applies the regression per component to a table indexed [scale][m].
pub fn regress_logs(logs: &[Vec<f64>], w: &RegressionWeights) -> Vec<f64> {
    let dim = logs.first().map_or(0, Vec::len);
    (0..dim)
        .map(|m| {
            let column: Vec<f64> = logs.iter().map(|row| row[m]).collect();
            slope_to_hurst(w.apply(&column))
        })
        .collect()
}

pub fn estimate_univariate(spectra: &WaveletSpectrumSet, w: &RegressionWeights) -> Result<Vec<f64>> {
    Ok(regress_logs(&diagonal_logs(spectra, w)?, w))
}

pub fn estimate_multivariate(spectra: &WaveletSpectrumSet, w: &RegressionWeights) -> Result<Vec<f64>> {
    Ok(regress_logs(&eigen_logs(spectra, w)?, w))
}

pub fn estimate_multivariate_bc(
    pyr: &WaveletPyramid,
    j1: usize,
    j2: usize,
    w: &RegressionWeights,
) -> Result<Vec<f64>> {
    if j2 <= j1 {
        return Err(Error::DegenerateRange { j1, j2 });
    }
    if (w.j1, w.j2) != (j1, j2) {
        return Err(Error::InvalidConfig(format!(
            "weights cover {}..={} but the range is {j1}..={j2}",
            w.j1, w.j2
        )));
    }
    Ok(regress_logs(&averaged_eigen_logs(pyr, j1, j2)?, w))
}

/// All three estimates with the per-scale tables they regress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    #[serde(rename = "H_U")]
    pub h_u: Vec<f64>,
    #[serde(rename = "H_M")]
    pub h_m: Vec<f64>,
    #[serde(rename = "H_M_bc")]
    pub h_m_bc: Vec<f64>,
    pub j1: usize,
    pub j2: usize,
    pub weights: Vec<f64>,
    pub log_eig: Vec<Vec<f64>>,
    pub log_eig_bc: Vec<Vec<f64>>,
    pub diag_logs: Vec<Vec<f64>>,
}

impl EstimateRecord {
    pub fn regression_weights(&self) -> RegressionWeights {
        RegressionWeights {
            j1: self.j1,
            j2: self.j2,
            w: self.weights.clone(),
        }
    }

    pub fn get(&self, which: Estimator) -> &[f64] {
        match which {
            Estimator::Univariate => &self.h_u,
            Estimator::Multivariate => &self.h_m,
            Estimator::MultivariateBc => &self.h_m_bc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "H_U")]
    Univariate,
    #[serde(rename = "H_M")]
    Multivariate,
    #[serde(rename = "H_M_bc")]
    MultivariateBc,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [
        Estimator::Univariate,
        Estimator::Multivariate,
        Estimator::MultivariateBc,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Estimator::Univariate => "H_U",
            Estimator::Multivariate => "H_M",
            Estimator::MultivariateBc => "H_M_bc",
        }
    }
}

/// Runs the three estimators on an already computed pyramid.
pub fn estimate_pyramid(
    pyr: &WaveletPyramid,
    j1: usize,
    j2: usize,
    balance: WeightBalance,
) -> Result<EstimateRecord> {
    if j2 <= j1 {
        return Err(Error::DegenerateRange { j1, j2 });
    }
    if j1 == 0 {
        return Err(Error::ScaleUnavailable { j: 0, j_max: pyr.octaves() });
    }
    let counts = (j1..=j2).map(|j| pyr.count(j)).collect::<Result<Vec<_>>>()?;
    let w = regression_weights(j1, j2, balance, Some(&counts))?;
    let spectra = WaveletSpectrumSet::from_pyramid(pyr, j1, j2)?;
    let diag_logs = diagonal_logs(&spectra, &w)?;
    let log_eig = eigen_logs(&spectra, &w)?;
    let log_eig_bc = averaged_eigen_logs(pyr, j1, j2)?;
    Ok(EstimateRecord {
        h_u: regress_logs(&diag_logs, &w),
        h_m: regress_logs(&log_eig, &w),
        h_m_bc: regress_logs(&log_eig_bc, &w),
        j1,
        j2,
        weights: w.w,
        log_eig,
        log_eig_bc,
        diag_logs,
    })
}

/// Wavelet analysis to octave j2 followed by all three estimators.
pub fn estimate_series(
    x: &[Vec<f64>],
    j1: usize,
    j2: usize,
    filter: &WaveletFilter,
    balance: WeightBalance,
) -> Result<EstimateRecord> {
    let pyr = dwt(x, j2, filter)?;
    if pyr.count(j2)? < pyr.dim() {
        return Err(Error::WindowTooSmall {
            n_window: pyr.count(j2)?,
            dim: pyr.dim(),
        });
    }
    estimate_pyramid(&pyr, j1, j2, balance)
}
