//! Estimator performance summaries and group-comparison tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::RegressionWeights;
use crate::linalg::{check_symmetric, symmetric_eigen};
use crate::special::{chi2_inv_cdf, normal_sf};

/// Bias², covariance and MSE matrices of a set of vector estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceMatrices {
    pub bias2: DMatrix<f64>,
    pub cov: DMatrix<f64>,
    pub mse: DMatrix<f64>,
}

fn check_rect(est: &[Vec<f64>]) -> Result<usize> {
    let dim = est.first().map_or(0, Vec::len);
    if dim == 0 || est.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch("estimates must be a non-empty rectangular table".into()));
    }
    Ok(dim)
}

fn column_means(est: &[Vec<f64>], dim: usize) -> DVector<f64> {
    let mut mean = DVector::zeros(dim);
    for row in est {
        mean += DVector::from_column_slice(row);
    }
    mean / est.len() as f64
}

/// Bias² = (Ē−H)(Ē−H)ᵀ, Cov = mean (Ĥ−Ē)(Ĥ−Ē)ᵀ, MSE = mean (Ĥ−H)(Ĥ−H)ᵀ.
/// With the 1/n normalization the identity MSE = Bias² + Cov is exact.
pub fn performance_matrices(est: &[Vec<f64>], h_true: &[f64]) -> Result<PerformanceMatrices> {
    if est.len() < 2 {
        return Err(Error::InvalidConfig("at least two realizations required".into()));
    }
    let dim = check_rect(est)?;
    if h_true.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "estimates have {dim} components, truth has {}",
            h_true.len()
        )));
    }
    let truth = DVector::from_column_slice(h_true);
    let mean = column_means(est, dim);
    let bias = &mean - &truth;
    let bias2 = &bias * bias.transpose();
    let mut cov = DMatrix::zeros(dim, dim);
    let mut mse = DMatrix::zeros(dim, dim);
    for row in est {
        let h = DVector::from_column_slice(row);
        let c = &h - &mean;
        let e = &h - &truth;
        cov += &c * c.transpose();
        mse += &e * e.transpose();
    }
    let n = est.len() as f64;
    Ok(PerformanceMatrices {
        bias2,
        cov: cov / n,
        mse: mse / n,
    })
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    check_symmetric(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    let (values, _) = symmetric_eigen(m);
    Ok(values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

/// First-order variance approximation ((log₂e)²/2) Σ_j w_j² / n_j.
pub fn v_n_approx(w: &RegressionWeights, counts: &[usize]) -> Result<f64> {
    if counts.len() != w.w.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for {} weights",
            counts.len(),
            w.w.len()
        )));
    }
    if counts.contains(&0) {
        return Err(Error::InvalidConfig("coefficient counts must be positive".into()));
    }
    let log2e = std::f64::consts::LOG2_E;
    Ok(0.5 * log2e * log2e * w.w.iter().zip(counts).map(|(w, &n)| w * w / n as f64).sum::<f64>())
}

/// Unbiased sample covariance of the estimate components.
pub fn sample_covariance(est: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let dim = check_rect(est)?;
    if est.len() < 2 {
        return Err(Error::InvalidConfig("at least two realizations required".into()));
    }
    let mean = column_means(est, dim);
    let mut cov = DMatrix::zeros(dim, dim);
    for row in est {
        let c = DVector::from_column_slice(row) - &mean;
        cov += &c * c.transpose();
    }
    Ok(cov / (est.len() - 1) as f64)
}

/// Squared Mahalanobis distance of every realization to the across-realization
/// mean, under the sample covariance.
pub fn mahalanobis_samples(est: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = check_rect(est)?;
    if est.len() <= dim {
        return Err(Error::SingularCovariance);
    }
    let cov = sample_covariance(est)?;
    let (values, _) = symmetric_eigen(&cov);
    let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 || values[0] <= 1e-12 * max {
        return Err(Error::SingularCovariance);
    }
    let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;
    let mean = column_means(est, dim);
    Ok(est
        .iter()
        .map(|row| {
            let c = DVector::from_column_slice(row) - &mean;
            let z = chol.solve(&c);
            c.dot(&z)
        })
        .collect())
}

pub fn chi2_quantiles(dof: usize, probs: &[f64]) -> Result<Vec<f64>> {
    if dof == 0 {
        return Err(Error::InvalidConfig("chi-square needs at least one degree of freedom".into()));
    }
    probs
        .iter()
        .map(|&p| {
            if p > 0.0 && p < 1.0 {
                Ok(chi2_inv_cdf(dof as f64, p))
            } else {
                Err(Error::BadProbability(p))
            }
        })
        .collect()
}

/// (empirical, theoretical) quantile pairs of sorted samples against χ²_dof
/// at plotting positions (i - ½)/n.
pub fn chi2_qq_pairs(samples: &[f64], dof: usize) -> Result<Vec<(f64, f64)>> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let probs: Vec<f64> = (0..sorted.len()).map(|i| (i as f64 + 0.5) / n).collect();
    let theo = chi2_quantiles(dof, &probs)?;
    Ok(sorted.into_iter().zip(theo).collect())
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Correlation between sorted Mahalanobis distances and χ²_dof quantiles.
pub fn chi2_qq_correlation(samples: &[f64], dof: usize) -> Result<f64> {
    let pairs = chi2_qq_pairs(samples, dof)?;
    let (e, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(pearson(&e, &t))
}

/// Pearson correlation matrix of the estimate components.
pub fn estimate_correlation(est: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let dim = check_rect(est)?;
    if est.len() < 3 {
        return Err(Error::InvalidConfig("at least three realizations required".into()));
    }
    let cov = sample_covariance(est)?;
    for m in 0..dim {
        if cov[(m, m)] <= 0.0 {
            return Err(Error::ZeroVariance(m));
        }
    }
    Ok(DMatrix::from_fn(dim, dim, |a, b| {
        if a == b {
            1.0
        } else {
            cov[(a, b)] / (cov[(a, a)] * cov[(b, b)]).sqrt()
        }
    }))
}

/// Largest off-diagonal |correlation|.
pub fn max_offdiag_abs(c: &DMatrix<f64>) -> f64 {
    let mut best = 0.0f64;
    for a in 0..c.nrows() {
        for b in 0..c.ncols() {
            if a != b {
                best = best.max(c[(a, b)].abs());
            }
        }
    }
    best
}

/// Sample sizes up to which the rank-sum p-value is computed exactly.
pub const WILCOXON_EXACT_MAX: usize = 8;

/// Mid-ranks (1-based) of the pooled sample and the tie-group sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut k = i;
        while k + 1 < order.len() && values[order[k + 1]] == values[order[i]] {
            k += 1;
        }
        let rank = (i + k) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=k] {
            ranks[idx] = rank;
        }
        ties.push(k - i + 1);
        i = k + 1;
    }
    (ranks, ties)
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value. Exact permutation
/// distribution of the rank sum when both samples have at most
/// [`WILCOXON_EXACT_MAX`] values, normal approximation with tie and
/// continuity corrections otherwise.
pub fn wilcoxon_ranksum(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    if pooled.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidConfig("NaN in rank-sum sample".into()));
    }
    let (ranks, ties) = midranks(&pooled);
    let n1 = x.len();
    let n = pooled.len();
    let w: f64 = ranks[..n1].iter().sum();
    let mu = n1 as f64 * (n + 1) as f64 / 2.0;
    let dev = (w - mu).abs();
    if n1 <= WILCOXON_EXACT_MAX && y.len() <= WILCOXON_EXACT_MAX {
        let (mut extreme, mut total) = (0u64, 0u64);
        enumerate_rank_sums(&ranks, n1, 0, 0.0, &mut |s| {
            total += 1;
            if (s - mu).abs() >= dev - 1e-9 {
                extreme += 1;
            }
        });
        return Ok(extreme as f64 / total as f64);
    }
    let n2 = y.len() as f64;
    let nf = n as f64;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum::<f64>() / (nf * (nf - 1.0));
    let var = n1 as f64 * n2 / 12.0 * ((nf + 1.0) - tie_term);
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = (dev - 0.5).max(0.0) / var.sqrt();
    Ok((2.0 * normal_sf(z)).min(1.0))
}

fn enumerate_rank_sums(ranks: &[f64], remaining: usize, start: usize, acc: f64, visit: &mut dyn FnMut(f64)) {
    if remaining == 0 {
        visit(acc);
        return;
    }
    for i in start..=ranks.len() - remaining {
        enumerate_rank_sums(ranks, remaining - 1, i + 1, acc + ranks[i], visit);
    }
}

/// Benjamini-Hochberg step-up outcome, in ascending p-value order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTestReport {
    pub alpha: f64,
    /// (original index, p-value), ascending in p.
    pub pvalues: Vec<(usize, f64)>,
    pub bh_thresholds: Vec<f64>,
    pub rejected: Vec<bool>,
}

impl GroupTestReport {
    pub fn n_rejected(&self) -> usize {
        self.rejected.iter().filter(|r| **r).count()
    }

    /// Rejection flags in the caller's original order.
    pub fn rejected_original(&self) -> Vec<bool> {
        let mut out = vec![false; self.pvalues.len()];
        for ((idx, _), &r) in self.pvalues.iter().zip(&self.rejected) {
            out[*idx] = r;
        }
        out
    }
}

/// Rejects every hypothesis up to the largest k with p_(k) ≤ kα/K.
pub fn bh_reject(pvals: &[f64], alpha: f64) -> Result<GroupTestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadProbability(alpha));
    }
    if let Some(&p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::BadProbability(p));
    }
    let k_total = pvals.len();
    let mut sorted: Vec<(usize, f64)> = pvals.iter().copied().enumerate().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let thresholds: Vec<f64> = (1..=k_total).map(|k| k as f64 * alpha / k_total as f64).collect();
    let cutoff = sorted
        .iter()
        .zip(&thresholds)
        .rposition(|((_, p), t)| p <= t)
        .map_or(0, |i| i + 1);
    Ok(GroupTestReport {
        alpha,
        pvalues: sorted,
        bh_thresholds: thresholds,
        rejected: (0..k_total).map(|i| i < cutoff).collect(),
    })
}
