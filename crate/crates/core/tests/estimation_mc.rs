//! Monte-Carlo behaviour of the estimators on synthesized mfBm.

use nalgebra::DMatrix;
use ofbmkit::analysis::{max_offdiag_abs, run_mc, McConfig, McReport, Preset};
use ofbmkit::estimation::{regression_weights, WeightBalance};
use ofbmkit::wavelet::{dwt, wavelet_spectrum};
use ofbmkit::{Estimator, MfgnGenerator, ModelParams, WaveletFilter};

fn fbm(h: f64) -> ModelParams {
    ModelParams::from_parts(vec![h], vec![1.0], DMatrix::identity(1, 1), DMatrix::identity(1, 1)).unwrap()
}

fn mc(p: ModelParams, n: usize, n_mc: usize, seed0: u64) -> McReport {
    run_mc(&McConfig::new(p, n, n_mc, seed0)).unwrap()
}

fn mc_range(p: ModelParams, n: usize, n_mc: usize, seed0: u64, range: (usize, usize)) -> McReport {
    let mut cfg = McConfig::new(p, n, n_mc, seed0);
    cfg.range_override = Some(range);
    run_mc(&cfg).unwrap()
}

#[test]
fn mean_log_spectrum_slope() {
    let f = WaveletFilter::default();
    for h in [0.3, 0.7] {
        let g = MfgnGenerator::new(&fbm(h), 1 << 13).unwrap();
        let mut mean_log = vec![0.0; 5];
        let reps = 50;
        for s in 0..reps {
            let pyr = dwt(&g.sample(s).integrate().data, 7, &f).unwrap();
            for (i, j) in (3..=7).enumerate() {
                mean_log[i] += wavelet_spectrum(&pyr, j).unwrap()[(0, 0)].log2() / reps as f64;
            }
        }
        let w = regression_weights(3, 7, WeightBalance::Uniform, None).unwrap();
        let slope = w.apply(&mean_log);
        assert!((slope - (2.0 * h + 1.0)).abs() < 0.1, "H = {h}: slope {slope}");
    }
}

#[test]
fn coefficients_decorrelate_beyond_lag_one() {
    let f = WaveletFilter::default();
    let g = MfgnGenerator::new(&fbm(0.7), 1 << 14).unwrap();
    let reps = 50;
    let mut acf = [0.0; 5];
    for s in 0..reps {
        let pyr = dwt(&g.sample(s).integrate().data, 5, &f).unwrap();
        let d = &pyr.detail(5).unwrap()[0];
        let c0 = d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64;
        for (lag, a) in acf.iter_mut().enumerate().skip(2) {
            let c = d.windows(lag + 1).map(|w| w[0] * w[lag]).sum::<f64>() / (d.len() - lag) as f64;
            *a += c / c0 / reps as f64;
        }
    }
    for (lag, a) in acf.iter().enumerate().skip(2) {
        assert!(a.abs() < 0.15, "lag {lag}: {a}");
    }
}

#[test]
fn univariate_fbm_mean() {
    let r = mc(fbm(0.7), 1 << 16, 200, 100);
    let m = r.summary(Estimator::Univariate).mean[0];
    assert!((m - 0.7).abs() < 0.02, "{m}");
}

#[test]
fn multivariate_recovers_mixed_exponents() {
    let r = mc(Preset::Config5.params(2).unwrap(), 1 << 16, 200, 200);
    let mean = &r.summary(Estimator::Multivariate).mean;
    for (m, t) in mean.iter().zip([0.4, 0.8]) {
        assert!((m - t).abs() < 0.03, "{mean:?}");
    }
    // Under mixing the univariate estimate of the small exponent is pulled
    // toward the dominant one.
    let u = &r.summary(Estimator::Univariate).mean;
    assert!(u[0] > 0.5, "{u:?}");
}

#[test]
fn repulsion_of_equal_exponents() {
    let p = Preset::Config4.params_with_hurst(vec![0.6; 6]).unwrap();
    let r = mc_range(p.clone(), 1 << 12, 100, 300, (3, 7));
    let f = WaveletFilter::default();
    let g = MfgnGenerator::new(&p, 1 << 12).unwrap();
    // Gap between extreme log-eigenvalues widens as coefficients get scarce.
    let mut gap = vec![0.0; 5];
    for s in 0..50 {
        let pyr = dwt(&g.sample(1000 + s).integrate().data, 7, &f).unwrap();
        for (i, j) in (3..=7).enumerate() {
            let ev = ofbmkit::linalg::sorted_eigenvalues(&wavelet_spectrum(&pyr, j).unwrap()).unwrap();
            gap[i] += (ev[5] / ev[0]).log2() / 50.0;
        }
    }
    assert!(gap.windows(2).all(|w| w[1] > w[0]), "{gap:?}");
    // Spread Ĥ_6 − Ĥ_1 per realization: mean and standard error.
    let spread = |e: Estimator| {
        let d: Vec<f64> = r.estimates_of(e).iter().map(|h| h[5] - h[0]).collect();
        let n = d.len() as f64;
        let m = d.iter().sum::<f64>() / n;
        let sd = (d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt();
        (m, sd / n.sqrt())
    };
    let (m, se) = spread(Estimator::Multivariate);
    assert!(m > 5.0 * se, "{m} ± {se}");
    assert!(spread(Estimator::MultivariateBc).0 < m);
}

#[test]
fn bias_corrected_error_shrinks_with_n() {
    let p = Preset::Config1.params(2).unwrap();
    let mae: Vec<f64> = (13..=16)
        .map(|k| {
            let r = mc(p.clone(), 1 << k, 100, 400);
            let est = r.estimates_of(Estimator::MultivariateBc);
            let total: f64 = est
                .iter()
                .flat_map(|row| row.iter().zip(p.h()).map(|(e, t)| (e - t).abs()))
                .sum();
            total / (2 * est.len()) as f64
        })
        .collect();
    assert!(mae.windows(2).all(|w| w[1] < 1.1 * w[0]), "{mae:?}");
    assert!(mae[3] < 0.7 * mae[0], "{mae:?}");
}

#[test]
fn univariate_variance_near_v_n() {
    for h in [0.4, 0.6] {
        let r = mc(fbm(h), 1 << 15, 500, 500);
        let d = r.summary(Estimator::Univariate).rel_var_diff[0];
        assert!(d.abs() < 0.30, "H = {h}: {d}");
    }
}

#[test]
fn bias_corrected_variance_proxy_and_parameter_independence() {
    let runs: Vec<McReport> = [Preset::Config1, Preset::Config3, Preset::Config5]
        .into_iter()
        .map(|c| mc(c.params(2).unwrap(), 1 << 15, 1000, 600))
        .collect();
    for r in &runs {
        for ratio in r.summary(Estimator::MultivariateBc).rel_var_diff.iter().map(|d| 1.0 + d) {
            assert!((0.6..=1.4).contains(&ratio), "{ratio}");
        }
    }
    // Variances do not depend on Σ: Config1 against Config5, component-wise.
    // With 1000 realizations each, a variance ratio has SE ≈ 0.063.
    let v1 = &runs[0].summary(Estimator::MultivariateBc).variance;
    let v5 = &runs[2].summary(Estimator::MultivariateBc).variance;
    for (a, b) in v1.iter().zip(v5) {
        assert!((a / b - 1.0).abs() < 0.2, "{a} vs {b}");
    }
}

#[test]
fn multivariate_estimates_are_less_correlated() {
    let r = mc(Preset::Config3.params(3).unwrap(), 1 << 13, 200, 700);
    let corr = |e: Estimator| {
        let c = r.summary(e).corr.as_ref().unwrap();
        max_offdiag_abs(&ofbmkit::linalg::from_rows(c).unwrap())
    };
    assert!(corr(Estimator::Multivariate) < corr(Estimator::Univariate));
    let s = r.summary(Estimator::Multivariate);
    for a in 0..3 {
        for b in 0..3 {
            assert!((s.mse[a][b] - s.bias2[a][b] - s.cov[a][b]).abs() < 1e-10);
        }
    }
}
