//! File formats: sample paths as CSV or raw little-endian f64 with a JSON
//! sidecar, generic multichannel CSV input and spectra tables.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::model::ModelParams;
use crate::synthesis::{PathKind, SamplePath, RNG_ID};
use crate::wavelet::WaveletSpectrumSet;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
}

/// Header `t,c1..cM`, one row per time index. Values use the shortest
/// representation that parses back to the same f64.
pub fn write_path_csv<W: Write>(data: &[Vec<f64>], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=data.len()).map(|m| format!("c{m}")));
    w.write_record(&header)?;
    let n = data.first().map_or(0, Vec::len);
    let mut row = Vec::with_capacity(data.len() + 1);
    for t in 0..n {
        row.clear();
        row.push(t.to_string());
        row.extend(data.iter().map(|c| c[t].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Multichannel series read from CSV, with optional per-sample labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub names: Vec<String>,
    /// Component-major samples.
    pub data: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads a headed CSV. A `t` column is ignored and a `label` column is kept
/// as text; every other column is a numeric component.
pub fn read_series_csv<R: Read>(input: R) -> Result<Series, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let mut comp_cols = Vec::new();
    let mut label_col = None;
    for (i, h) in headers.iter().enumerate() {
        match h {
            "t" => {}
            "label" => label_col = Some(i),
            _ => comp_cols.push(i),
        }
    }
    if comp_cols.is_empty() {
        return Err(IoError::Format("CSV has no component columns".into()));
    }
    let mut data = vec![Vec::new(); comp_cols.len()];
    let mut labels = label_col.map(|_| Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (dst, &c) in data.iter_mut().zip(&comp_cols) {
            let field = rec.get(c).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| {
                IoError::Format(format!("row {}: column '{}' is not a number: '{field}'", line + 2, &headers[c]))
            })?;
            dst.push(v);
        }
        if let (Some(l), Some(c)) = (labels.as_mut(), label_col) {
            l.push(rec.get(c).unwrap_or("").to_string());
        }
    }
    Ok(Series {
        names: comp_cols.iter().map(|&c| headers[c].to_string()).collect(),
        data,
        labels,
    })
}

/// JSON sidecar describing a raw binary path file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSidecar {
    #[serde(rename = "M")]
    pub dim: usize,
    #[serde(rename = "N")]
    pub len: usize,
    pub seed: u64,
    pub kind: PathKind,
    pub params: ModelParams,
    pub rng: String,
}

impl PathSidecar {
    pub fn for_path(path: &SamplePath) -> Self {
        Self {
            dim: path.dim(),
            len: path.len(),
            seed: path.seed,
            kind: path.kind,
            params: path.params.clone(),
            rng: RNG_ID.to_string(),
        }
    }
}

/// Raw little-endian f64, component-contiguous (column-major M×N).
pub fn write_path_bin<W: Write>(data: &[Vec<f64>], mut out: W) -> Result<(), IoError> {
    for row in data {
        for v in row {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_path_bin<R: Read>(mut input: R, dim: usize, len: usize) -> Result<Vec<Vec<f64>>, IoError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != dim * len * 8 {
        return Err(IoError::Format(format!(
            "binary file has {} bytes, expected {} for M = {dim}, N = {len}",
            bytes.len(),
            dim * len * 8
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(values.chunks(len.max(1)).take(dim).map(<[f64]>::to_vec).collect())
}

/// Rows (j, m, m', S_mm'(2^j), n_j) with 1-based component indices.
pub fn write_spectra_csv<W: Write>(set: &WaveletSpectrumSet, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "m", "m_prime", "S", "n_j"])?;
    for ((j, s), n) in set.scales.iter().zip(&set.spectra).zip(&set.counts) {
        for a in 0..s.nrows() {
            for b in 0..s.ncols() {
                w.write_record([
                    j.to_string(),
                    (a + 1).to_string(),
                    (b + 1).to_string(),
                    s[(a, b)].to_string(),
                    n.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 7), 1..4)) {
            let mut buf = Vec::new();
            write_path_csv(&rows, &mut buf).unwrap();
            let back = read_series_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.data, rows);
            prop_assert!(back.labels.is_none());
        }

        #[test]
        fn bin_round_trip_is_exact(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 5), 1..4)) {
            let mut buf = Vec::new();
            write_path_bin(&rows, &mut buf).unwrap();
            let back = read_path_bin(buf.as_slice(), rows.len(), 5).unwrap();
            prop_assert_eq!(back, rows);
        }
    }

    #[test]
    fn csv_header_and_labels() {
        let mut buf = Vec::new();
        write_path_csv(&[vec![1.0, 2.0], vec![3.0, 4.5]], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,c1,c2\n0,1,3\n1,2,4.5\n");
        let text = "t,Fp1,Fp2,label\n0,1.5,2,ictal\n1,-1,0.25,interictal\n";
        let s = read_series_csv(text.as_bytes()).unwrap();
        assert_eq!(s.names, vec!["Fp1", "Fp2"]);
        assert_eq!(s.data, vec![vec![1.5, -1.0], vec![2.0, 0.25]]);
        assert_eq!(s.labels.unwrap(), vec!["ictal", "interictal"]);
    }

    #[test]
    fn csv_rejects_text_in_numeric_column() {
        let err = read_series_csv("a,b\n1,x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("not a number"));
    }

    #[test]
    fn bin_size_checked() {
        assert!(read_path_bin(&[0u8; 12][..], 1, 2).is_err());
    }
}
