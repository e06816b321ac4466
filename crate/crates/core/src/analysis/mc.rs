//! Monte-Carlo harness: synthesize, analyze and estimate `n_mc` independent
//! realizations, then summarize each estimator.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{
    chi2_qq_correlation, estimate_correlation, mahalanobis_samples, performance_matrices,
    sample_covariance, spectral_norm, v_n_approx,
};
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_pyramid, regression_weights, scaling_range, EstimateRecord, Estimator,
    ScalingRangeConfig, WeightBalance,
};
use crate::linalg::to_rows;
use crate::model::ModelParams;
use crate::synthesis::{EmbeddingReport, MfgnGenerator};
use crate::wavelet::{dwt, octave_counts, WaveletFilter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub params: ModelParams,
    pub n: usize,
    pub n_mc: usize,
    pub seed0: u64,
    pub range_cfg: ScalingRangeConfig,
    /// Explicit (j1, j2), overriding `range_cfg` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_override: Option<(usize, usize)>,
    pub filter: WaveletFilter,
    pub balance: WeightBalance,
}

impl McConfig {
    pub fn new(params: ModelParams, n: usize, n_mc: usize, seed0: u64) -> Self {
        Self {
            params,
            n,
            n_mc,
            seed0,
            range_cfg: ScalingRangeConfig::default(),
            range_override: None,
            filter: WaveletFilter::default(),
            balance: WeightBalance::default(),
        }
    }

    pub fn range(&self) -> Result<(usize, usize)> {
        match self.range_override {
            Some((j1, j2)) if j2 <= j1 => Err(Error::DegenerateRange { j1, j2 }),
            Some(r) => Ok(r),
            None => scaling_range(self.n, &self.range_cfg),
        }
    }

    /// Seed of realization r (1-based).
    pub fn seed(&self, r: usize) -> u64 {
        self.seed0.wrapping_add(r as u64)
    }

    pub fn validate(&self) -> Result<(usize, usize)> {
        if self.n_mc < 2 {
            return Err(Error::InvalidConfig(format!("n_mc = {} < 2", self.n_mc)));
        }
        let (j1, j2) = self.range()?;
        if j1 == 0 {
            return Err(Error::ScaleUnavailable { j: 0, j_max: 0 });
        }
        let counts = octave_counts(self.n, self.filter.len(), j2);
        if counts.len() < j2 {
            return Err(Error::SeriesTooShort {
                len: self.n,
                needed: format!("octave {j2} with a {}-tap filter", self.filter.len()),
            });
        }
        if counts[j2 - 1] < self.params.dim() {
            return Err(Error::WindowTooSmall {
                n_window: counts[j2 - 1],
                dim: self.params.dim(),
            });
        }
        Ok((j1, j2))
    }
}

/// Per-estimator summary over all realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: Estimator,
    pub mean: Vec<f64>,
    pub bias2: Vec<Vec<f64>>,
    pub cov: Vec<Vec<f64>>,
    pub mse: Vec<Vec<f64>>,
    pub norm_bias2: f64,
    pub norm_cov: f64,
    pub norm_mse: f64,
    /// Estimate correlation matrix; absent when a component has zero variance.
    pub corr: Option<Vec<Vec<f64>>>,
    /// Squared Mahalanobis distances; absent when the covariance is singular.
    pub mahalanobis: Option<Vec<f64>>,
    pub qq_correlation: Option<f64>,
    /// Unbiased sample variance per component.
    pub variance: Vec<f64>,
    /// (variance - V_N) / V_N per component.
    pub rel_var_diff: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n: usize,
    pub n_mc: usize,
    pub seed0: u64,
    pub h_true: Vec<f64>,
    pub j1: usize,
    pub j2: usize,
    pub counts: Vec<usize>,
    pub weights: Vec<f64>,
    pub v_n: f64,
    pub embedding: EmbeddingReport,
    pub summaries: Vec<EstimatorSummary>,
    /// estimates[estimator][r][m], estimators in [`Estimator::ALL`] order.
    pub estimates: Vec<Vec<Vec<f64>>>,
}

impl McReport {
    pub fn summary(&self, which: Estimator) -> &EstimatorSummary {
        self.summaries
            .iter()
            .find(|s| s.estimator == which)
            .expect("every estimator is summarized")
    }

    pub fn estimates_of(&self, which: Estimator) -> &[Vec<f64>] {
        let idx = Estimator::ALL.iter().position(|e| *e == which).unwrap();
        &self.estimates[idx]
    }

    /// Rows: estimators (U, M, M-bc); columns: bias², covariance, MSE.
    pub fn spectral_norms(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (row, e) in out.iter_mut().zip(Estimator::ALL) {
            let s = self.summary(e);
            *row = [s.norm_bias2, s.norm_cov, s.norm_mse];
        }
        out
    }
}

/// Estimates for one realization.
pub fn run_realization(
    generator: &MfgnGenerator,
    seed: u64,
    j1: usize,
    j2: usize,
    filter: &WaveletFilter,
    balance: WeightBalance,
) -> Result<EstimateRecord> {
    let path = generator.sample(seed).integrate();
    let pyr = dwt(&path.data, j2, filter)?;
    estimate_pyramid(&pyr, j1, j2, balance)
}

/// Runs all realizations in parallel on the current rayon pool. Realization r
/// always uses seed `seed0 + r` and results are reduced in r order, so the
/// report does not depend on the number of worker threads.
pub fn run_mc(cfg: &McConfig) -> Result<McReport> {
    let (j1, j2) = cfg.validate()?;
    let generator = MfgnGenerator::new(&cfg.params, cfg.n)?;
    let records: Vec<EstimateRecord> = (1..=cfg.n_mc)
        .into_par_iter()
        .map(|r| {
            run_realization(&generator, cfg.seed(r), j1, j2, &cfg.filter, cfg.balance).map_err(|e| {
                Error::Realization {
                    realization: r,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(cfg, j1, j2, generator.report(), &records)
}

fn summarize(
    cfg: &McConfig,
    j1: usize,
    j2: usize,
    embedding: EmbeddingReport,
    records: &[EstimateRecord],
) -> Result<McReport> {
    let counts: Vec<usize> = octave_counts(cfg.n, cfg.filter.len(), j2)[j1 - 1..].to_vec();
    let w = regression_weights(j1, j2, cfg.balance, Some(&counts))?;
    let v_n = v_n_approx(&w, &counts)?;
    let h_true = cfg.params.h().to_vec();
    let dim = h_true.len();
    let mut estimates = Vec::new();
    let mut summaries = Vec::new();
    for which in Estimator::ALL {
        let est: Vec<Vec<f64>> = records.iter().map(|r| r.get(which).to_vec()).collect();
        let pm = performance_matrices(&est, &h_true)?;
        let var = sample_covariance(&est)?;
        let variance: Vec<f64> = (0..dim).map(|m| var[(m, m)]).collect();
        let mahalanobis = mahalanobis_samples(&est).ok();
        let qq_correlation = match &mahalanobis {
            Some(d) => Some(chi2_qq_correlation(d, dim)?),
            None => None,
        };
        let mean: Vec<f64> = (0..dim)
            .map(|m| est.iter().map(|r| r[m]).sum::<f64>() / est.len() as f64)
            .collect();
        summaries.push(EstimatorSummary {
            estimator: which,
            mean,
            norm_bias2: spectral_norm(&pm.bias2)?,
            norm_cov: spectral_norm(&pm.cov)?,
            norm_mse: spectral_norm(&pm.mse)?,
            bias2: to_rows(&pm.bias2),
            cov: to_rows(&pm.cov),
            mse: to_rows(&pm.mse),
            corr: estimate_correlation(&est).ok().map(|c: DMatrix<f64>| to_rows(&c)),
            mahalanobis,
            qq_correlation,
            rel_var_diff: variance.iter().map(|v| (v - v_n) / v_n).collect(),
            variance,
        });
        estimates.push(est);
    }
    Ok(McReport {
        n: cfg.n,
        n_mc: cfg.n_mc,
        seed0: cfg.seed0,
        h_true,
        j1,
        j2,
        counts,
        weights: w.w,
        v_n,
        embedding,
        summaries,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> McConfig {
        let params = ModelParams::from_parts(
            vec![0.4, 0.7],
            vec![1.0, 1.0],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.4, -0.2, 0.9]),
        )
        .unwrap();
        let mut cfg = McConfig::new(params, 1 << 12, 2, 100);
        cfg.range_override = Some((3, 6));
        cfg
    }

    #[test]
    fn two_realization_smoke() {
        let report = run_mc(&small_cfg()).unwrap();
        assert_eq!(report.estimates.len(), 3);
        assert_eq!(report.estimates[0].len(), 2);
        for s in &report.summaries {
            for a in 0..2 {
                for b in 0..2 {
                    assert!((s.mse[a][b] - s.bias2[a][b] - s.cov[a][b]).abs() < 1e-10);
                }
            }
            assert!(s.norm_bias2 >= 0.0 && s.norm_cov >= 0.0 && s.norm_mse >= 0.0);
            // n_mc = 2 does not exceed M = 2
            assert!(s.mahalanobis.is_none());
        }
    }

    #[test]
    fn deterministic() {
        let a = run_mc(&small_cfg()).unwrap();
        let b = run_mc(&small_cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = small_cfg();
        cfg.n_mc = 1;
        assert!(run_mc(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.range_override = None;
        cfg.n = 4000;
        assert!(matches!(run_mc(&cfg), Err(Error::SampleTooSmall { .. })));
    }
}
