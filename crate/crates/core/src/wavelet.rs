//! Multivariate discrete wavelet transform and wavelet spectra.
//!
//! The pyramid treats raw samples as level-0 approximation coefficients and
//! applies orthonormal quadrature-mirror filters with "valid" support only:
//! no border extension, so every coefficient depends on observed samples.
//! Under this L²-normalized octave convention the detail variance of fBm
//! scales as 2^{j(2H+1)} and that of white noise is constant across octaves.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletFilter {
    pub name: String,
    pub n_vanishing: usize,
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
}

const DB3: [f64; 6] = [
    0.332_670_552_950_082_6,
    0.806_891_509_311_092_5,
    0.459_877_502_118_491_5,
    -0.135_011_020_010_254_6,
    -0.085_441_273_882_026_7,
    0.035_226_291_885_709_5,
];

const DB4: [f64; 8] = [
    0.230_377_813_308_896_4,
    0.714_846_570_552_915_4,
    0.630_880_767_929_858_7,
    -0.027_983_769_416_859_9,
    -0.187_034_811_719_093_1,
    0.030_841_381_835_560_7,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_0,
];

/// Names accepted by [`WaveletFilter::by_name`].
pub const FILTER_NAMES: [&str; 4] = ["haar", "db2", "db3", "db4"];

impl WaveletFilter {
    /// Builds a filter from its lowpass taps, deriving the quadrature mirror
    /// highpass g_k = (-1)^k h_{L-1-k}, and checks orthonormality and the
    /// claimed number of vanishing moments.
    pub fn new(name: &str, n_vanishing: usize, lowpass: Vec<f64>) -> Result<Self> {
        let len = lowpass.len();
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::BadFilter(format!("{name}: need an even number of taps, got {len}")));
        }
        if n_vanishing == 0 {
            return Err(Error::BadFilter(format!("{name}: at least one vanishing moment required")));
        }
        for shift in (0..len).step_by(2) {
            let dot: f64 = (0..len - shift).map(|k| lowpass[k] * lowpass[k + shift]).sum();
            let target = if shift == 0 { 1.0 } else { 0.0 };
            if (dot - target).abs() > 1e-10 {
                return Err(Error::BadFilter(format!(
                    "{name}: not orthonormal at shift {shift} (inner product {dot})"
                )));
            }
        }
        let highpass: Vec<f64> = (0..len)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * lowpass[len - 1 - k])
            .collect();
        for p in 0..n_vanishing {
            let moment: f64 = highpass
                .iter()
                .enumerate()
                .map(|(k, g)| (k as f64).powi(p as i32) * g)
                .sum();
            let scale: f64 = highpass
                .iter()
                .enumerate()
                .map(|(k, g)| ((k as f64).powi(p as i32) * g).abs())
                .sum();
            if moment.abs() > 1e-10 * scale.max(1.0) {
                return Err(Error::BadFilter(format!(
                    "{name}: moment {p} of the highpass is {moment}, expected 0"
                )));
            }
        }
        Ok(Self {
            name: name.to_string(),
            n_vanishing,
            lowpass,
            highpass,
        })
    }

    pub fn haar() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::new("haar", 1, vec![r, r]).expect("haar taps")
    }

    /// Four-tap Daubechies filter with two vanishing moments. At this length
    /// the least-asymmetric and extremal-phase solutions coincide.
    pub fn daubechies2() -> Self {
        let s3 = 3f64.sqrt();
        let d = 4.0 * std::f64::consts::SQRT_2;
        let taps = vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        Self::new("db2", 2, taps).expect("db2 taps")
    }

    pub fn daubechies3() -> Self {
        Self::new("db3", 3, DB3.to_vec()).expect("db3 taps")
    }

    pub fn daubechies4() -> Self {
        Self::new("db4", 4, DB4.to_vec()).expect("db4 taps")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "haar" | "db1" => Ok(Self::haar()),
            "db2" => Ok(Self::daubechies2()),
            "db3" => Ok(Self::daubechies3()),
            "db4" => Ok(Self::daubechies4()),
            other => Err(Error::BadFilter(format!(
                "unknown filter '{other}' (known: {})",
                FILTER_NAMES.join(", ")
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }
}

impl Default for WaveletFilter {
    fn default() -> Self {
        Self::daubechies2()
    }
}

/// Coefficient count at the next octave under the valid-support convention.
pub fn next_count(prev: usize, filter_len: usize) -> usize {
    if prev + 1 < filter_len {
        0
    } else {
        (prev + 1 - filter_len) / 2
    }
}

/// Counts n_1, n_2, ... until they reach zero or `j_max` octaves.
pub fn octave_counts(n: usize, filter_len: usize, j_max: usize) -> Vec<usize> {
    let mut counts = Vec::new();
    let mut cur = n;
    while counts.len() < j_max {
        cur = next_count(cur, filter_len);
        if cur == 0 {
            break;
        }
        counts.push(cur);
    }
    counts
}

/// Deepest octave with at least one coefficient.
pub fn max_octave(n: usize, filter_len: usize) -> usize {
    octave_counts(n, filter_len, usize::MAX).len()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    /// `coeffs[j - 1][m][k]` is D_m(2^j, k).
    coeffs: Vec<Vec<Vec<f64>>>,
    counts: Vec<usize>,
    filter: WaveletFilter,
    source_len: usize,
}

impl WaveletPyramid {
    /// Pyramid from precomputed details, `coeffs[j - 1][m][k]`. Counts are
    /// taken from the rows and must be non-increasing across octaves.
    pub fn from_details(
        coeffs: Vec<Vec<Vec<f64>>>,
        filter: WaveletFilter,
        source_len: usize,
    ) -> Result<Self> {
        let dim = coeffs.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::DimensionMismatch("no octaves or no components".into()));
        }
        let mut counts = Vec::with_capacity(coeffs.len());
        for (level, octave) in coeffs.iter().enumerate() {
            if octave.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "octave {} has {} components, expected {dim}",
                    level + 1,
                    octave.len()
                )));
            }
            let n = octave[0].len();
            if n == 0 || octave.iter().any(|row| row.len() != n) {
                return Err(Error::DimensionMismatch(format!(
                    "octave {} has empty or ragged rows",
                    level + 1
                )));
            }
            if counts.last().is_some_and(|&prev| n > prev) {
                return Err(Error::DimensionMismatch(format!(
                    "octave {} has more coefficients than octave {level}",
                    level + 1
                )));
            }
            counts.push(n);
        }
        Ok(Self {
            coeffs,
            counts,
            filter,
            source_len,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    /// Number of octaves J.
    pub fn octaves(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn filter(&self) -> &WaveletFilter {
        &self.filter
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    fn check_octave(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.octaves() {
            return Err(Error::ScaleUnavailable {
                j,
                j_max: self.octaves(),
            });
        }
        Ok(())
    }

    pub fn count(&self, j: usize) -> Result<usize> {
        self.check_octave(j)?;
        Ok(self.counts[j - 1])
    }

    /// Detail coefficients at octave j, component-major.
    pub fn detail(&self, j: usize) -> Result<&[Vec<f64>]> {
        self.check_octave(j)?;
        Ok(&self.coeffs[j - 1])
    }
}

/// Pyramid algorithm applied independently to every component of `x`
/// (component-major, all rows the same length).
pub fn dwt(x: &[Vec<f64>], j_max: usize, f: &WaveletFilter) -> Result<WaveletPyramid> {
    if x.is_empty() {
        return Err(Error::DimensionMismatch("no components".into()));
    }
    let n = x[0].len();
    if x.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch("components have different lengths".into()));
    }
    if j_max == 0 {
        return Err(Error::InvalidConfig("j_max must be at least 1".into()));
    }
    let len = f.len();
    if len < 2 || f.highpass.len() != len {
        return Err(Error::BadFilter("lowpass and highpass must have equal length >= 2".into()));
    }
    let counts = octave_counts(n, len, j_max);
    if counts.len() < j_max {
        return Err(Error::SeriesTooShort {
            len: n,
            needed: format!(
                "{j_max} octaves with a {len}-tap filter (only {} available)",
                counts.len()
            ),
        });
    }
    let mut coeffs: Vec<Vec<Vec<f64>>> = (0..j_max).map(|_| Vec::with_capacity(x.len())).collect();
    for row in x {
        let mut approx = row.clone();
        for (level, &count) in counts.iter().enumerate() {
            let mut next = Vec::with_capacity(count);
            let mut detail = Vec::with_capacity(count);
            for i in 0..count {
                let window = &approx[2 * i + 1..2 * i + 1 + len];
                let (mut a, mut d) = (0.0, 0.0);
                for ((v, h), g) in window.iter().zip(&f.lowpass).zip(&f.highpass) {
                    a += h * v;
                    d += g * v;
                }
                next.push(a);
                detail.push(d);
            }
            coeffs[level].push(detail);
            approx = next;
        }
    }
    Ok(WaveletPyramid {
        coeffs,
        counts,
        filter: f.clone(),
        source_len: n,
    })
}

/// Average of outer products D D^T over coefficients `start..start + len`.
fn outer_product_mean(detail: &[Vec<f64>], start: usize, len: usize) -> DMatrix<f64> {
    let dim = detail.len();
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..dim {
        let ra = &detail[a][start..start + len];
        for b in a..dim {
            let rb = &detail[b][start..start + len];
            let v = ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>() / len as f64;
            s[(a, b)] = v;
            s[(b, a)] = v;
        }
    }
    s
}

/// S(2^j) = (1/n_j) Σ_k D(2^j, k) D(2^j, k)^T.
pub fn wavelet_spectrum(p: &WaveletPyramid, j: usize) -> Result<DMatrix<f64>> {
    let detail = p.detail(j)?;
    Ok(outer_product_mean(detail, 0, p.counts[j - 1]))
}

/// S(2^j) restricted to the first `len` coefficients.
pub fn wavelet_spectrum_prefix(p: &WaveletPyramid, j: usize, len: usize) -> Result<DMatrix<f64>> {
    let detail = p.detail(j)?;
    let available = p.counts[j - 1];
    if len == 0 || len > available {
        return Err(Error::InsufficientCoefficients { j, available, needed: len.max(1) });
    }
    Ok(outer_product_mean(detail, 0, len))
}

/// Spectra S^(τ)(2^j) over 2^{j2-j} consecutive non-overlapping windows of
/// n_{j2} coefficients each. Trailing coefficients beyond the last window
/// are discarded.
pub fn windowed_spectra(p: &WaveletPyramid, j: usize, j2: usize) -> Result<Vec<DMatrix<f64>>> {
    if j > j2 {
        return Err(Error::InvalidConfig(format!("octave {j} is coarser than j2 = {j2}")));
    }
    let detail = p.detail(j)?;
    let window = p.count(j2)?;
    if window < p.dim() {
        return Err(Error::WindowTooSmall {
            n_window: window,
            dim: p.dim(),
        });
    }
    let n_windows = 1usize << (j2 - j);
    let available = p.counts[j - 1];
    let needed = n_windows * window;
    if available < needed {
        return Err(Error::InsufficientCoefficients { j, available, needed });
    }
    Ok((0..n_windows)
        .map(|tau| outer_product_mean(detail, tau * window, window))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpectrumSet {
    pub scales: Vec<usize>,
    pub spectra: Vec<DMatrix<f64>>,
    pub counts: Vec<usize>,
}

impl WaveletSpectrumSet {
    pub fn from_pyramid(p: &WaveletPyramid, j1: usize, j2: usize) -> Result<Self> {
        let mut set = Self {
            scales: Vec::new(),
            spectra: Vec::new(),
            counts: Vec::new(),
        };
        for j in j1..=j2 {
            set.spectra.push(wavelet_spectrum(p, j)?);
            set.scales.push(j);
            set.counts.push(p.count(j)?);
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.spectra.first().map_or(0, DMatrix::nrows)
    }

    pub fn get(&self, j: usize) -> Option<&DMatrix<f64>> {
        self.scales.iter().position(|&s| s == j).map(|i| &self.spectra[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSpectrumSet {
    pub j2: usize,
    pub window_len: usize,
    /// (j, windows at octave j), finest first.
    pub scales: Vec<(usize, Vec<DMatrix<f64>>)>,
}

impl WindowedSpectrumSet {
    pub fn from_pyramid(p: &WaveletPyramid, j1: usize, j2: usize) -> Result<Self> {
        let scales = (j1..=j2)
            .map(|j| Ok((j, windowed_spectra(p, j, j2)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            j2,
            window_len: p.count(j2)?,
            scales,
        })
    }
}
