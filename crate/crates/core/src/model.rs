//! Mixed multivariate fractional Brownian motion (mfBm) parameters.
//!
//! A model is the triple (H, Σ, W): sorted Hurst exponents, the covariance of
//! the underlying correlated fBms (assembled from variances and a correlation
//! matrix) and an invertible mixing matrix. Validation enforces the ordering
//! of H, invertibility of W, positive semidefiniteness of Σ and the pairwise
//! bound on cross-correlations between fBms with different exponents.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{from_rows, symmetric_eigen, to_rows};
use crate::special::gamma;

/// Mixing matrices are rejected when their singular value ratio drops below this.
pub const SINGULAR_RATIO_TOL: f64 = 1e-10;
/// Σ is PSD when its smallest eigenvalue is at least `-PSD_TOL * trace(Σ)`.
pub const PSD_TOL: f64 = 1e-10;
const FEASIBILITY_SLACK: f64 = 1e-12;

/// Sorted vector of Hurst exponents, each in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct HurstVector(Vec<f64>);

impl HurstVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch("Hurst vector is empty".into()));
        }
        check_hurst_range(&values)?;
        for (i, w) in values.windows(2).enumerate() {
            if w[0] > w[1] {
                return Err(Error::HurstUnsorted {
                    index: i,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

fn check_hurst_range(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::HurstOutOfRange { index, value });
        }
    }
    Ok(())
}

/// Variances and pairwise correlations of the underlying fBms.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicCovariance {
    variances: Vec<f64>,
    correlations: DMatrix<f64>,
}

impl IntrinsicCovariance {
    pub fn new(variances: Vec<f64>, correlations: DMatrix<f64>) -> Result<Self> {
        let m = variances.len();
        if correlations.nrows() != m || correlations.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} variances but a {}x{} correlation matrix",
                m,
                correlations.nrows(),
                correlations.ncols()
            )));
        }
        for (index, &value) in variances.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidVariance { index, value });
            }
        }
        for i in 0..m {
            if correlations[(i, i)] != 1.0 {
                return Err(Error::InvalidCorrelation(format!(
                    "diagonal entry {i} is {}, expected 1",
                    correlations[(i, i)]
                )));
            }
            for j in 0..m {
                let r = correlations[(i, j)];
                if !(-1.0..=1.0).contains(&r) {
                    return Err(Error::InvalidCorrelation(format!(
                        "entry ({i}, {j}) = {r} outside [-1, 1]"
                    )));
                }
                if r != correlations[(j, i)] {
                    return Err(Error::InvalidCorrelation(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        Ok(Self {
            variances,
            correlations,
        })
    }

    /// Unit variances and identity correlation.
    pub fn identity(dim: usize) -> Self {
        Self {
            variances: vec![1.0; dim],
            correlations: DMatrix::identity(dim, dim),
        }
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn correlations(&self) -> &DMatrix<f64> {
        &self.correlations
    }

    pub fn dim(&self) -> usize {
        self.variances.len()
    }

    /// Σ = diag(σ) ρ diag(σ) with σ_m the standard deviations.
    pub fn matrix(&self) -> DMatrix<f64> {
        let sd: Vec<f64> = self.variances.iter().map(|v| v.sqrt()).collect();
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            sd[i] * sd[j] * self.correlations[(i, j)]
        })
    }
}

/// Correlation matrix with entries r^{|m - m'|}.
pub fn geometric_correlation(dim: usize, r: f64) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| r.powi(i.abs_diff(j) as i32))
}

/// Invertible mixing matrix W.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix(DMatrix<f64>);

impl MixingMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() || w.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "mixing matrix must be square and nonempty, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMixing { ratio: f64::NAN });
        }
        let sv = w.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        let ratio = if max > 0.0 { min / max } else { 0.0 };
        if ratio < SINGULAR_RATIO_TOL {
            return Err(Error::SingularMixing { ratio });
        }
        Ok(Self(w))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Gaussian random matrix drawn from `seed`, redrawn until its condition
    /// number is below `max_condition` and it is visibly non-orthogonal.
    pub fn random(dim: usize, seed: u64, max_condition: f64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        loop {
            let w = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
            let sv: DVector<f64> = w.clone().singular_values();
            let cond = sv.max() / sv.min();
            if dim == 1 || (cond < max_condition && cond > 1.5) {
                return Self(w);
            }
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0 == DMatrix::identity(self.0.nrows(), self.0.ncols())
    }
}

/// Validated mfBm parameter triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    hurst: HurstVector,
    sigma: IntrinsicCovariance,
    mixing: MixingMatrix,
}

impl ModelParams {
    pub fn hurst(&self) -> &HurstVector {
        &self.hurst
    }

    pub fn sigma(&self) -> &IntrinsicCovariance {
        &self.sigma
    }

    pub fn mixing(&self) -> &MixingMatrix {
        &self.mixing
    }

    pub fn dim(&self) -> usize {
        self.hurst.dim()
    }

    pub fn h(&self) -> &[f64] {
        self.hurst.values()
    }

    /// Convenience constructor from raw parts.
    pub fn from_parts(
        hurst: Vec<f64>,
        variances: Vec<f64>,
        correlations: DMatrix<f64>,
        mixing: DMatrix<f64>,
    ) -> Result<Self> {
        let m = hurst.len();
        if variances.len() != m || correlations.nrows() != m || mixing.nrows() != m {
            return Err(Error::DimensionMismatch(format!(
                "H has {m} entries, var {}, rho {}x{}, W {}x{}",
                variances.len(),
                correlations.nrows(),
                correlations.ncols(),
                mixing.nrows(),
                mixing.ncols()
            )));
        }
        validate_params(
            HurstVector::new(hurst)?,
            IntrinsicCovariance::new(variances, correlations)?,
            MixingMatrix::new(mixing)?,
        )
    }

    /// Re-runs validation on the held components.
    pub fn revalidate(&self) -> Result<Self> {
        validate_params(self.hurst.clone(), self.sigma.clone(), self.mixing.clone())
    }
}

/// Checks cross-component consistency of already well-formed components.
pub fn validate_params(
    h: HurstVector,
    s: IntrinsicCovariance,
    w: MixingMatrix,
) -> Result<ModelParams> {
    let m = h.dim();
    if s.dim() != m || w.matrix().nrows() != m {
        return Err(Error::DimensionMismatch(format!(
            "H has {m} entries, covariance {}, mixing {}x{}",
            s.dim(),
            w.matrix().nrows(),
            w.matrix().ncols()
        )));
    }
    let hv = h.values();
    for a in 0..m {
        for b in (a + 1)..m {
            let bound = rho_max(hv[a], hv[b])?;
            let rho = s.correlations()[(a, b)];
            if rho.abs() > bound + FEASIBILITY_SLACK {
                return Err(Error::CorrelationInfeasible {
                    m: a,
                    m_prime: b,
                    rho,
                    rho_max: bound,
                });
            }
        }
    }
    let sigma = s.matrix();
    let (eig, _) = symmetric_eigen(&sigma);
    let min_eigenvalue = eig[0];
    if min_eigenvalue < -PSD_TOL * sigma.trace() {
        return Err(Error::CovarianceNotPsd { min_eigenvalue });
    }
    // The pairwise bound is the 2x2-minor condition of G ⊙ Σ ⪰ 0; for M > 2
    // the full matrix must be checked as well.
    if m > 2 {
        let joint = DMatrix::from_fn(m, m, |i, j| g_entry(hv[i], hv[j])).component_mul(&sigma);
        let (eig, _) = symmetric_eigen(&joint);
        if eig[0] < -PSD_TOL * joint.trace() {
            return Err(Error::JointlyInfeasible { min_eigenvalue: eig[0] });
        }
    }
    Ok(ModelParams {
        hurst: h,
        sigma: s,
        mixing: w,
    })
}

/// Largest admissible |correlation| between two fBms with exponents h1, h2.
pub fn rho_max(h1: f64, h2: f64) -> Result<f64> {
    check_hurst_range(&[h1, h2])?;
    let a = gamma(2.0 * h1 + 1.0) * (PI * h1).sin();
    let b = gamma(2.0 * h2 + 1.0) * (PI * h2).sin();
    let denom = gamma(h1 + h2 + 1.0) * (PI * (h1 + h2) / 2.0).sin();
    Ok((a * b).sqrt() / denom)
}

/// Operator-fBm representation (A A*, Hurst matrix, G) of an mfBm.
#[derive(Debug, Clone, PartialEq)]
pub struct OfbmEquivalent {
    pub aastar: DMatrix<f64>,
    pub hurst_matrix: DMatrix<f64>,
    pub g_matrix: DMatrix<f64>,
}

pub fn g_entry(h1: f64, h2: f64) -> f64 {
    let s = h1 + h2;
    gamma(s + 1.0) * (s * PI / 2.0).sin() / (2.0 * PI)
}

pub fn ofbm_equivalent(p: &ModelParams) -> OfbmEquivalent {
    let m = p.dim();
    let h = p.h();
    let g_matrix = DMatrix::from_fn(m, m, |i, j| g_entry(h[i], h[j]));
    let w = p.mixing().matrix();
    let inner = g_matrix.component_mul(&p.sigma().matrix());
    let aastar = w * inner * w.transpose();
    let aastar = (&aastar + aastar.transpose()) * 0.5;
    let w_inv = w
        .clone()
        .try_inverse()
        .expect("validated mixing matrix is invertible");
    let hurst_matrix = w * DMatrix::from_diagonal(&DVector::from_column_slice(h)) * w_inv;
    OfbmEquivalent {
        aastar,
        hurst_matrix,
        g_matrix,
    }
}

/// JSON layout of a parameter file: row-major matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    #[serde(rename = "H")]
    pub hurst: Vec<f64>,
    #[serde(rename = "var")]
    pub variances: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    pub mixing: Vec<Vec<f64>>,
}

impl TryFrom<ParamsDoc> for ModelParams {
    type Error = Error;

    fn try_from(doc: ParamsDoc) -> Result<Self> {
        ModelParams::from_parts(
            doc.hurst,
            doc.variances,
            from_rows(&doc.rho)?,
            from_rows(&doc.mixing)?,
        )
    }
}

impl From<&ModelParams> for ParamsDoc {
    fn from(p: &ModelParams) -> Self {
        ParamsDoc {
            hurst: p.h().to_vec(),
            variances: p.sigma().variances().to_vec(),
            rho: to_rows(p.sigma().correlations()),
            mixing: to_rows(p.mixing().matrix()),
        }
    }
}

impl Serialize for ModelParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ParamsDoc::deserialize(d)?;
        ModelParams::try_from(doc).map_err(serde::de::Error::custom)
    }
}
