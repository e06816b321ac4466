//! Sliding-window estimation and two-group comparison of window estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{bh_reject, wilcoxon_ranksum, GroupTestReport};
use crate::error::{Error, Result};
use crate::estimation::{estimate_series, EstimateRecord, Estimator, WeightBalance};
use crate::wavelet::{octave_counts, WaveletFilter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    /// Index of the first sample of the window.
    pub start: usize,
    pub record: EstimateRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlidingConfig {
    pub window: usize,
    pub hop: usize,
    pub j1: usize,
    pub j2: usize,
    pub filter: WaveletFilter,
    pub balance: WeightBalance,
}

impl SlidingConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.hop == 0 || self.window < self.hop {
            return Err(Error::InvalidConfig(format!(
                "need window >= hop >= 1, got window {} and hop {}",
                self.window, self.hop
            )));
        }
        if self.j2 <= self.j1 || self.j1 == 0 {
            return Err(Error::DegenerateRange {
                j1: self.j1,
                j2: self.j2,
            });
        }
        let counts = octave_counts(self.window, self.filter.len(), self.j2);
        let n_j2 = if counts.len() == self.j2 { counts[self.j2 - 1] } else { 0 };
        if n_j2 < dim.max(1) {
            return Err(Error::WindowTooSmall { n_window: n_j2, dim });
        }
        Ok(())
    }

    /// Window start indices for a series of length n.
    pub fn starts(&self, n: usize) -> Vec<usize> {
        if n < self.window {
            return Vec::new();
        }
        (0..=(n - self.window) / self.hop).map(|i| i * self.hop).collect()
    }
}

/// One estimate record per window position, in time order.
pub fn sliding_window_estimates(x: &[Vec<f64>], cfg: &SlidingConfig) -> Result<Vec<WindowEstimate>> {
    let dim = x.len();
    if dim == 0 {
        return Err(Error::DimensionMismatch("no components".into()));
    }
    let n = x[0].len();
    if x.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("components have different lengths".into()));
    }
    cfg.validate(dim)?;
    cfg.starts(n)
        .into_par_iter()
        .map(|start| {
            let slice: Vec<Vec<f64>> = x.iter().map(|r| r[start..start + cfg.window].to_vec()).collect();
            let record = estimate_series(&slice, cfg.j1, cfg.j2, &cfg.filter, cfg.balance)?;
            Ok(WindowEstimate { start, record })
        })
        .collect()
}

/// One rank-sum test per (estimator, component).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTest {
    pub estimator: Estimator,
    pub m: usize,
    pub pvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub groups: [String; 2],
    pub sizes: [usize; 2],
    pub tests: Vec<GroupTest>,
    pub bh: GroupTestReport,
}

/// Compares window estimates between exactly two labels with a Wilcoxon
/// rank-sum test per estimator and component, then applies the
/// Benjamini-Hochberg step-up rule at level `alpha` across all tests.
/// Windows whose label is `None` (mixed labels) are left out.
pub fn compare_groups(
    windows: &[WindowEstimate],
    labels: &[Option<String>],
    alpha: f64,
) -> Result<GroupComparison> {
    if windows.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} windows but {} labels",
            windows.len(),
            labels.len()
        )));
    }
    let mut names: Vec<String> = labels.iter().flatten().cloned().collect();
    names.sort();
    names.dedup();
    if names.len() != 2 {
        return Err(Error::InvalidConfig(format!(
            "group comparison needs exactly two labels, found {}: {:?}",
            names.len(),
            names
        )));
    }
    let groups = [names[0].clone(), names[1].clone()];
    let member = |g: &str| -> Vec<&WindowEstimate> {
        windows
            .iter()
            .zip(labels)
            .filter(|(_, l)| l.as_deref() == Some(g))
            .map(|(w, _)| w)
            .collect()
    };
    let a = member(&groups[0]);
    let b = member(&groups[1]);
    let dim = windows.first().map_or(0, |w| w.record.h_u.len());
    let mut tests = Vec::new();
    for which in Estimator::ALL {
        for m in 0..dim {
            let xa: Vec<f64> = a.iter().map(|w| w.record.get(which)[m]).collect();
            let xb: Vec<f64> = b.iter().map(|w| w.record.get(which)[m]).collect();
            tests.push(GroupTest {
                estimator: which,
                m,
                pvalue: wilcoxon_ranksum(&xa, &xb)?,
            });
        }
    }
    let pvals: Vec<f64> = tests.iter().map(|t| t.pvalue).collect();
    Ok(GroupComparison {
        sizes: [a.len(), b.len()],
        groups,
        tests,
        bh: bh_reject(&pvals, alpha)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(window: usize, hop: usize) -> SlidingConfig {
        SlidingConfig {
            window,
            hop,
            j1: 1,
            j2: 4,
            filter: WaveletFilter::daubechies2(),
            balance: WeightBalance::ByCount,
        }
    }

    #[test]
    fn window_positions() {
        let c = cfg(256, 256);
        assert_eq!(c.starts(1000).len(), 1000 / 256);
        let c = cfg(256, 100);
        assert_eq!(c.starts(1000).len(), (1000 - 256) / 100 + 1);
        assert!(c.starts(200).is_empty());
    }

    #[test]
    fn hop_larger_than_window_rejected() {
        assert!(matches!(cfg(128, 256).validate(2), Err(Error::InvalidConfig(_))));
        assert!(matches!(cfg(40, 20).validate(2), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn short_series_gives_no_windows() {
        let x = vec![vec![0.0; 100]; 2];
        assert!(sliding_window_estimates(&x, &cfg(256, 64)).unwrap().is_empty());
    }

    #[test]
    fn two_labels_required() {
        let labels = vec![Some("a".to_string())];
        let err = compare_groups(&[], &[], 0.05).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        assert!(compare_groups(&[], &labels, 0.05).is_err());
    }
}
