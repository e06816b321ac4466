//! Monte-Carlo checks of the generator against closed-form moments.

use nalgebra::DMatrix;
use ofbmkit::model::MixingMatrix;
use ofbmkit::synthesis::mixed_covariance;
use ofbmkit::{MfgnGenerator, ModelParams};

fn fbm(h: f64) -> ModelParams {
    ModelParams::from_parts(vec![h], vec![1.0], DMatrix::identity(1, 1), DMatrix::identity(1, 1)).unwrap()
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Per-realization time-averaged lagged product of components a and b.
fn lagged_product(x: &[Vec<f64>], a: usize, b: usize, k: usize) -> f64 {
    let n = x[0].len();
    (0..n - k).map(|t| x[a][t + k] * x[b][t]).sum::<f64>() / (n - k) as f64
}

#[test]
fn white_noise_moments() {
    let g = MfgnGenerator::new(&fbm(0.5), 256).unwrap();
    let (mut c0, mut c1) = (Vec::new(), Vec::new());
    for seed in 0..10_000 {
        let x = g.sample(seed).data;
        c0.push(lagged_product(&x, 0, 0, 0));
        c1.push(lagged_product(&x, 0, 0, 1));
    }
    let r = (c0.len() as f64).sqrt();
    let (m0, s0) = mean_sd(&c0);
    let (m1, s1) = mean_sd(&c1);
    assert!((m0 - 1.0).abs() < 5.0 * s0 / r, "lag 0: {m0}");
    assert!(m1.abs() < 5.0 * s1 / r, "lag 1: {m1}");
}

#[test]
fn mixed_cross_covariance_small_sample() {
    let rho = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
    let w = MixingMatrix::random(2, 99, 10.0).matrix().clone();
    let p = ModelParams::from_parts(vec![0.4, 0.7], vec![1.0, 1.0], rho, w).unwrap();
    let g = MfgnGenerator::new(&p, 64).unwrap();
    let paths: Vec<_> = (0..4000).map(|s| g.sample(s).data).collect();
    for k in 0..=8usize {
        let target = mixed_covariance(&p, k as i64);
        for a in 0..2 {
            for b in 0..2 {
                let q: Vec<f64> = paths.iter().map(|x| lagged_product(x, a, b, k)).collect();
                let (m, s) = mean_sd(&q);
                let se = s / (q.len() as f64).sqrt();
                assert!(
                    (m - target[(a, b)]).abs() < 5.0 * se,
                    "lag {k} ({a},{b}): {m} vs {}",
                    target[(a, b)]
                );
            }
        }
    }
}

#[test]
fn pooled_samples_are_gaussian() {
    let p = ofbmkit::analysis::Preset::Config1.params(2).unwrap();
    let g = MfgnGenerator::new(&p, 64).unwrap();
    let n = 4000;
    for m in 0..2 {
        let v: Vec<f64> = (0..n).map(|s| g.sample(s).data[m][17]).collect();
        let (mean, sd) = mean_sd(&v);
        let z: Vec<f64> = v.iter().map(|x| (x - mean) / sd).collect();
        let skew = z.iter().map(|x| x.powi(3)).sum::<f64>() / n as f64;
        let kurt = z.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        assert!(skew.abs() < 5.0 * (6.0 / n as f64).sqrt(), "skew {skew}");
        assert!((kurt - 3.0).abs() < 5.0 * (24.0 / n as f64).sqrt(), "kurtosis {kurt}");
    }
}

#[test]
fn brownian_variance_grows_linearly() {
    let g = MfgnGenerator::new(&fbm(0.5), 64).unwrap();
    let paths: Vec<_> = (0..10_000).map(|s| g.sample(s).integrate().data).collect();
    for t in [15usize, 63] {
        let v: Vec<f64> = paths.iter().map(|x| x[0][t] * x[0][t]).collect();
        let (m, s) = mean_sd(&v);
        let se = s / (v.len() as f64).sqrt();
        assert!((m - (t + 1) as f64).abs() < 5.0 * se, "t = {t}: {m}");
    }
}

#[test]
fn dyadic_selfsimilarity() {
    // B(2t) has the law of 2^H B(t); compare second moments at indices 31, 63.
    let h = 0.7;
    let g = MfgnGenerator::new(&fbm(h), 64).unwrap();
    let (mut v32, mut v64) = (0.0, 0.0);
    let reps = 10_000;
    for s in 0..reps {
        let b = &g.sample(s).integrate().data[0];
        v32 += b[31] * b[31];
        v64 += b[63] * b[63];
    }
    let ratio = v64 / v32;
    let expected = 2f64.powf(2.0 * h);
    // Each second moment has relative SE sqrt(2/reps) ≈ 1.4%; the two are
    // positively correlated, so 6% is a loose five-sigma band.
    assert!((ratio / expected - 1.0).abs() < 0.06, "{ratio} vs {expected}");
    assert!((v32 / reps as f64 / 32f64.powf(2.0 * h) - 1.0).abs() < 0.07);
}

#[test]
fn distinct_seeds_are_uncorrelated() {
    let p = ofbmkit::analysis::Preset::Config1.params(2).unwrap();
    let g = MfgnGenerator::new(&p, 1024).unwrap();
    let mut worst: f64 = 0.0;
    for s in 0..50 {
        let x = g.sample(2 * s).data;
        let y = g.sample(2 * s + 1).data;
        worst = worst.max(ofbmkit::analysis::stats::pearson(&x[0], &y[0]).abs());
    }
    // Fifty draws of a roughly N(0, 1/1024) statistic.
    assert!(worst < 5.0 / 32.0, "{worst}");
}
