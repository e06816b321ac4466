//! Exact synthesis of multivariate fractional Gaussian noise (mfGn) and of
//! mfBm by multivariate circulant embedding.
//!
//! Each cross-covariance sequence Γ_{mm'}(k) is wrapped onto a circle of
//! length L (a power of two) and transformed; at every Fourier frequency the
//! M×M spectral matrix is real symmetric. Its PSD square root colours a
//! complex white vector, an inverse FFT per component returns to time, and the
//! real part of the first `n` samples is a path with the target covariance.
//! The mixing matrix is applied last.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{num_complex::Complex64, Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::model::ModelParams;

/// Identifier of the random stream: ChaCha20 keyed by `seed_from_u64`,
/// standard normals by the ziggurat sampler of `rand_distr`.
pub const RNG_ID: &str = "chacha20(rand_chacha-0.9,seed_from_u64)+ziggurat(rand_distr-0.5)";

/// Relative clipped spectral mass above which synthesis fails.
pub const CLIP_TOL: f64 = 1e-6;

/// Upper bound on the embedding circle, in addition to `2^16 * n`.
pub const MAX_EMBEDDING: usize = 1 << 22;

// Negative spectral eigenvalues smaller than this (relative to the largest)
// are treated as round-off when deciding whether to grow the embedding.
const PSD_ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Mfgn,
    Mfbm,
}

/// M×N sample path, component-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub data: Vec<Vec<f64>>,
    pub params: ModelParams,
    pub seed: u64,
    pub kind: PathKind,
}

impl SamplePath {
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn len(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cumulative sum along time of an mfGn path.
    pub fn integrate(mut self) -> SamplePath {
        for row in &mut self.data {
            let mut acc = 0.0;
            for v in row.iter_mut() {
                acc += *v;
                *v = acc;
            }
        }
        self.kind = PathKind::Mfbm;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub embedding_size: usize,
    pub min_spectral_eigenvalue: f64,
    pub clipped_mass: f64,
}

/// Pre-mixing covariance Γ_{mm'}(k) of the increments of the underlying
/// correlated fBms.
pub fn mfgn_cross_covariance(p: &ModelParams, m: usize, m_prime: usize, k: i64) -> Result<f64> {
    let dim = p.dim();
    for index in [m, m_prime] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    let sigma = p.sigma().matrix()[(m, m_prime)];
    Ok(increment_covariance(sigma, p.h()[m] + p.h()[m_prime], k))
}

fn increment_covariance(sigma: f64, exponent: f64, k: i64) -> f64 {
    let k = k.unsigned_abs() as f64;
    let pw = |x: f64| if x == 0.0 { 0.0 } else { x.powf(exponent) };
    0.5 * sigma * (pw((k - 1.0).abs()) - 2.0 * pw(k) + pw(k + 1.0))
}

/// Full M×M pre-mixing covariance matrix Γ(k).
pub fn mfgn_covariance_matrix(p: &ModelParams, k: i64) -> DMatrix<f64> {
    let sigma = p.sigma().matrix();
    let h = p.h();
    DMatrix::from_fn(p.dim(), p.dim(), |a, b| {
        increment_covariance(sigma[(a, b)], h[a] + h[b], k)
    })
}

/// Covariance W Γ(k) Wᵀ of the mixed mfGn at lag k.
pub fn mixed_covariance(p: &ModelParams, k: i64) -> DMatrix<f64> {
    let w = p.mixing().matrix();
    w * mfgn_covariance_matrix(p, k) * w.transpose()
}

/// Reusable circulant-embedding generator for a fixed (params, n).
pub struct MfgnGenerator {
    params: ModelParams,
    n: usize,
    size: usize,
    // Per-frequency PSD square roots, row-major M×M blocks.
    roots: Vec<f64>,
    report: EmbeddingReport,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MfgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MfgnGenerator")
            .field("n", &self.n)
            .field("report", &self.report)
            .finish()
    }
}

impl MfgnGenerator {
    pub fn new(params: &ModelParams, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::SeriesTooShort {
                len: n,
                needed: "at least 2 samples".into(),
            });
        }
        let dim = params.dim();
        let mut size = (2 * (n - 1)).next_power_of_two().max(2);
        let cap = MAX_EMBEDDING.min(n.saturating_mul(1 << 16)).max(size);
        let mut planner = FftPlanner::new();
        loop {
            let spectra = spectral_matrices(params, size, &mut planner);
            let decomposed: Vec<(Vec<f64>, DMatrix<f64>)> =
                spectra.iter().map(symmetric_eigen).collect();
            let (mut min_eig, mut max_abs) = (f64::INFINITY, 0.0f64);
            for (values, _) in &decomposed {
                for &v in values {
                    min_eig = min_eig.min(v);
                    max_abs = max_abs.max(v.abs());
                }
            }
            let psd = min_eig >= -PSD_ROUNDOFF * max_abs;
            if psd || size * 2 > cap {
                let mut clipped = 0.0;
                let mut total = 0.0;
                let mut roots = Vec::with_capacity(size * dim * dim);
                for (values, vectors) in &decomposed {
                    for &v in values {
                        total += v.abs();
                        if v < 0.0 {
                            clipped += -v;
                        }
                    }
                    let sq = DVector::from_iterator(dim, values.iter().map(|v| v.max(0.0).sqrt()));
                    let root = vectors * DMatrix::from_diagonal(&sq) * vectors.transpose();
                    for a in 0..dim {
                        for b in 0..dim {
                            roots.push(root[(a, b)]);
                        }
                    }
                }
                let clipped_mass = if total > 0.0 { clipped / total } else { 0.0 };
                if clipped_mass > CLIP_TOL {
                    return Err(Error::EmbeddingFailed {
                        clipped_mass,
                        tolerance: CLIP_TOL,
                    });
                }
                let report = EmbeddingReport {
                    embedding_size: size,
                    min_spectral_eigenvalue: min_eig,
                    clipped_mass,
                };
                return Ok(Self {
                    params: params.clone(),
                    n,
                    size,
                    roots,
                    report,
                    ifft: planner.plan_fft_inverse(size),
                });
            }
            size *= 2;
        }
    }

    pub fn report(&self) -> EmbeddingReport {
        self.report
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// One mixed mfGn realization; a pure function of `seed`.
    pub fn sample(&self, seed: u64) -> SamplePath {
        let dim = self.params.dim();
        let size = self.size;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut columns = vec![vec![Complex64::new(0.0, 0.0); size]; dim];
        let mut z = vec![Complex64::new(0.0, 0.0); dim];
        for k in 0..size {
            for zc in z.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *zc = Complex64::new(re, im);
            }
            let root = &self.roots[k * dim * dim..(k + 1) * dim * dim];
            for (a, col) in columns.iter_mut().enumerate() {
                let row = &root[a * dim..(a + 1) * dim];
                col[k] = row.iter().zip(&z).map(|(r, zc)| zc * *r).sum();
            }
        }
        let scale = 1.0 / (size as f64).sqrt();
        let mut unmixed = Vec::with_capacity(dim);
        for mut col in columns {
            self.ifft.process(&mut col);
            unmixed.push(col[..self.n].iter().map(|c| c.re * scale).collect::<Vec<f64>>());
        }
        let data = if self.params.mixing().is_identity() {
            unmixed
        } else {
            let w = self.params.mixing().matrix();
            (0..dim)
                .map(|a| {
                    (0..self.n)
                        .map(|t| (0..dim).map(|b| w[(a, b)] * unmixed[b][t]).sum())
                        .collect()
                })
                .collect()
        };
        SamplePath {
            data,
            params: self.params.clone(),
            seed,
            kind: PathKind::Mfgn,
        }
    }

    /// Parallel realizations, one per seed, in seed order.
    pub fn sample_batch(&self, seeds: &[u64]) -> Vec<SamplePath> {
        seeds.par_iter().map(|&s| self.sample(s)).collect()
    }

    /// Exact lag-k covariance of the generator's output, computed in closed
    /// form from the (possibly clipped) spectral square roots.
    pub fn exact_covariance(&self, lag: i64) -> DMatrix<f64> {
        let dim = self.params.dim();
        let size = self.size;
        let mut acc = DMatrix::<f64>::zeros(dim, dim);
        for k in 0..size {
            let root = DMatrix::from_row_slice(dim, dim, &self.roots[k * dim * dim..(k + 1) * dim * dim]);
            let phase = 2.0 * std::f64::consts::PI * ((k as i64 * lag).rem_euclid(size as i64)) as f64
                / size as f64;
            acc += (&root * root.transpose()) * phase.cos();
        }
        acc /= size as f64;
        let w = self.params.mixing().matrix();
        w * acc * w.transpose()
    }
}

/// Real symmetric spectral matrices of the wrapped covariance sequence.
fn spectral_matrices(p: &ModelParams, size: usize, planner: &mut FftPlanner<f64>) -> Vec<DMatrix<f64>> {
    let dim = p.dim();
    let fft = planner.plan_fft_forward(size);
    let mut spectra = vec![DMatrix::<f64>::zeros(dim, dim); size];
    let sigma = p.sigma().matrix();
    let h = p.h();
    for a in 0..dim {
        for b in a..dim {
            let exponent = h[a] + h[b];
            let mut buf: Vec<Complex64> = (0..size)
                .map(|i| {
                    let lag = if i <= size / 2 { i } else { size - i };
                    Complex64::new(increment_covariance(sigma[(a, b)], exponent, lag as i64), 0.0)
                })
                .collect();
            fft.process(&mut buf);
            for (k, v) in buf.iter().enumerate() {
                spectra[k][(a, b)] = v.re;
                spectra[k][(b, a)] = v.re;
            }
        }
    }
    spectra
}

pub fn synthesize_mfgn(p: &ModelParams, n: usize, seed: u64) -> Result<(SamplePath, EmbeddingReport)> {
    let generator = MfgnGenerator::new(p, n)?;
    Ok((generator.sample(seed), generator.report()))
}

/// mfBm path B(t_i) = Σ_{u ≤ i} X(u): n samples, no leading zero.
pub fn synthesize_mfbm(p: &ModelParams, n: usize, seed: u64) -> Result<SamplePath> {
    Ok(synthesize_mfgn(p, n, seed)?.0.integrate())
}
