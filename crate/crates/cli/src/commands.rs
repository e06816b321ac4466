use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use ofbmkit::analysis::{chi2_qq_pairs, compare_groups, run_mc, sliding_window_estimates, McConfig, SlidingConfig};
use ofbmkit::estimation::{estimate_pyramid, scaling_range};
use ofbmkit::io::{read_path_bin, read_series_csv, write_path_bin, write_path_csv, write_spectra_csv, PathSidecar};
use ofbmkit::model::ParamsDoc;
use ofbmkit::wavelet::dwt;
use ofbmkit::{
    Error, EstimateRecord, Estimator, MfgnGenerator, ModelParams, ScalingRangeConfig, WaveletFilter,
    WaveletSpectrumSet,
};
use serde::Serialize;

use crate::args::{AnalysisArgs, EstimateArgs, Format, Kind, McArgs, SlidingArgs, SynthArgs};
use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_csv, write_json, write_jsonl};

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::file(path, e))
}

/// Parse errors are file errors; validation errors keep their model code.
pub fn load_params(path: &Path) -> CliResult<ModelParams> {
    let doc: ParamsDoc = serde_json::from_reader(open(path)?).map_err(|e| CliError::file(path, e))?;
    Ok(ModelParams::try_from(doc)?)
}

struct Input {
    names: Vec<String>,
    data: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

/// A `.bin` file is read through its `.bin.json` sidecar; anything else as CSV.
fn load_series(path: &Path) -> CliResult<Input> {
    if path.extension().is_some_and(|e| e == "bin") {
        let side = sidecar_path(path);
        let meta: PathSidecar = serde_json::from_reader(open(&side)?).map_err(|e| CliError::file(&side, e))?;
        let data = read_path_bin(open(path)?, meta.dim, meta.len).map_err(|e| CliError::file(path, e))?;
        return Ok(Input {
            names: (1..=meta.dim).map(|m| format!("c{m}")).collect(),
            data,
            labels: None,
        });
    }
    let s = read_series_csv(open(path)?).map_err(|e| CliError::file(path, e))?;
    Ok(Input {
        names: s.names,
        data: s.data,
        labels: s.labels,
    })
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

impl AnalysisArgs {
    fn filter(&self) -> CliResult<WaveletFilter> {
        WaveletFilter::by_name(&self.filter).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn range_cfg(&self) -> ScalingRangeConfig {
        ScalingRangeConfig {
            beta: self.beta,
            n0: self.n0,
            ..ScalingRangeConfig::default()
        }
    }

    /// Explicit octaves if given, otherwise the automatic range for length n.
    fn range(&self, n: usize) -> CliResult<(usize, usize)> {
        match (self.j1, self.j2) {
            (Some(j1), Some(j2)) if j2 <= j1 || j1 == 0 => Err(Error::DegenerateRange { j1, j2 }.into()),
            (Some(j1), Some(j2)) => Ok((j1, j2)),
            _ => Ok(scaling_range(n, &self.range_cfg())?),
        }
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

pub fn synth(a: &SynthArgs) -> CliResult<()> {
    let params = load_params(&a.params)?;
    let generator = MfgnGenerator::new(&params, a.n)?;
    let mut path = generator.sample(a.seed);
    if a.kind == Kind::Mfbm {
        path = path.integrate();
    }
    let ext = match a.format {
        Format::Csv => "csv",
        Format::Bin => "bin",
    };
    let out = a.out.clone().unwrap_or_else(|| a.out_dir.join(format!("path.{ext}")));
    match a.format {
        Format::Csv => write_atomic(&out, |w| write_path_csv(&path.data, w))?,
        Format::Bin => {
            write_atomic(&out, |w| write_path_bin(&path.data, w))?;
            write_json(&sidecar_path(&out), &PathSidecar::for_path(&path))?;
        }
    }
    let report_dir = match (&a.out, out.parent()) {
        (Some(_), Some(p)) if !p.as_os_str().is_empty() => p.to_path_buf(),
        (Some(_), _) => PathBuf::from("."),
        (None, _) => a.out_dir.clone(),
    };
    write_json(&report_dir.join("embedding.json"), &generator.report())?;
    Ok(())
}

#[derive(Serialize)]
struct EstimateDoc<'a> {
    names: &'a [String],
    n: usize,
    filter: &'a str,
    #[serde(flatten)]
    record: &'a EstimateRecord,
}

/// Rows (table, j, m, value) of the per-octave log₂ quantities each
/// estimator regresses.
fn log_table_rows(rec: &EstimateRecord) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let tables = [("diag", &rec.diag_logs), ("eig", &rec.log_eig), ("eig_bc", &rec.log_eig_bc)];
    for (name, table) in tables {
        for (j, row) in (rec.j1..=rec.j2).zip(table.iter()) {
            for (m, v) in row.iter().enumerate() {
                rows.push(vec![name.to_string(), j.to_string(), (m + 1).to_string(), num(*v)]);
            }
        }
    }
    rows
}

pub fn estimate(a: &EstimateArgs) -> CliResult<()> {
    let input = load_series(&a.input)?;
    let filter = a.analysis.filter()?;
    let n = input.data.first().map_or(0, Vec::len);
    let (j1, j2) = a.analysis.range(n)?;
    let pyr = dwt(&input.data, j2, &filter)?;
    let top = pyr.count(j2)?;
    if top < pyr.dim() {
        return Err(Error::WindowTooSmall {
            n_window: top,
            dim: pyr.dim(),
        }
        .into());
    }
    let rec = estimate_pyramid(&pyr, j1, j2, a.analysis.weights.into())?;
    let spectra = WaveletSpectrumSet::from_pyramid(&pyr, j1, j2)?;
    let doc = EstimateDoc {
        names: &input.names,
        n,
        filter: &filter.name,
        record: &rec,
    };
    write_json(&a.out_dir.join("estimate.json"), &doc)?;
    write_csv(&a.out_dir.join("log_eig.csv"), &["table", "j", "m", "value"], &log_table_rows(&rec))?;
    write_atomic(&a.out_dir.join("spectra.csv"), |w| write_spectra_csv(&spectra, w))?;
    Ok(())
}

pub fn mc(a: &McArgs) -> CliResult<()> {
    let params = load_params(&a.params)?;
    let mut cfg = McConfig::new(params, a.n, a.n_mc, a.seed);
    cfg.range_cfg = a.analysis.range_cfg();
    if let (Some(j1), Some(j2)) = (a.analysis.j1, a.analysis.j2) {
        cfg.range_override = Some((j1, j2));
    }
    cfg.filter = a.analysis.filter()?;
    cfg.balance = a.analysis.weights.into();
    let report = run_mc(&cfg)?;
    let dir = &a.out_dir;
    write_json(&dir.join("mc_report.json"), &report)?;

    let mut est_rows = Vec::new();
    let mut qq_rows = Vec::new();
    let mut norm_rows = Vec::new();
    let mut corr_rows = Vec::new();
    let mut var_rows = Vec::new();
    let log2n = (report.n as f64).log2();
    for e in Estimator::ALL {
        let label = e.label().to_string();
        for (r, row) in report.estimates_of(e).iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                est_rows.push(vec![(r + 1).to_string(), label.clone(), (m + 1).to_string(), num(*v)]);
            }
        }
        let s = report.summary(e);
        if let Some(d) = &s.mahalanobis {
            for (emp, theo) in chi2_qq_pairs(d, report.h_true.len())? {
                qq_rows.push(vec![label.clone(), num(theo), num(emp)]);
            }
        }
        norm_rows.push(vec![num(log2n), label.clone(), num(s.norm_bias2), num(s.norm_cov), num(s.norm_mse)]);
        if let Some(c) = &s.corr {
            for (m, row) in c.iter().enumerate() {
                for (mp, v) in row.iter().enumerate() {
                    corr_rows.push(vec![label.clone(), (m + 1).to_string(), (mp + 1).to_string(), num(*v)]);
                }
            }
        }
        for (m, (v, d)) in s.variance.iter().zip(&s.rel_var_diff).enumerate() {
            var_rows.push(vec![label.clone(), (m + 1).to_string(), num(*v), num(report.v_n), num(*d)]);
        }
    }
    write_csv(&dir.join("estimates.csv"), &["r", "estimator", "m", "value"], &est_rows)?;
    write_csv(&dir.join("qq.csv"), &["estimator", "chi2_quantile", "mahalanobis"], &qq_rows)?;
    write_csv(&dir.join("norms.csv"), &["log2N", "estimator", "bias2", "cov", "mse"], &norm_rows)?;
    write_csv(&dir.join("corr.csv"), &["estimator", "m", "m_prime", "value"], &corr_rows)?;
    write_csv(&dir.join("variance.csv"), &["estimator", "m", "variance", "v_n", "rel_diff"], &var_rows)?;
    Ok(())
}

/// The label shared by every sample of a window, or `None` if they differ.
fn window_label(labels: &[String], start: usize, len: usize) -> Option<String> {
    let first = &labels[start];
    labels[start..start + len].iter().all(|l| l == first).then(|| first.clone())
}

#[derive(Serialize)]
struct WindowDoc<'a> {
    index: usize,
    start: usize,
    end: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    #[serde(flatten)]
    record: &'a EstimateRecord,
}

pub fn sliding(a: &SlidingArgs) -> CliResult<()> {
    let input = load_series(&a.input)?;
    let (j1, j2) = a.analysis.range(a.window)?;
    let cfg = SlidingConfig {
        window: a.window,
        hop: a.hop,
        j1,
        j2,
        filter: a.analysis.filter()?,
        balance: a.analysis.weights.into(),
    };
    let windows = sliding_window_estimates(&input.data, &cfg)?;
    let labels: Option<Vec<Option<String>>> = input
        .labels
        .as_ref()
        .map(|l| windows.iter().map(|w| window_label(l, w.start, cfg.window)).collect());

    let dim = input.data.len();
    let mut header = vec!["index".to_string(), "start".into(), "end".into(), "label".into()];
    for e in Estimator::ALL {
        header.extend((1..=dim).map(|m| format!("{}_{m}", e.label())));
    }
    let mut rows = Vec::with_capacity(windows.len());
    let mut docs = Vec::with_capacity(windows.len());
    for (i, w) in windows.iter().enumerate() {
        let label = labels.as_ref().and_then(|l| l[i].as_deref());
        let mut row = vec![
            i.to_string(),
            w.start.to_string(),
            (w.start + cfg.window).to_string(),
            label.unwrap_or("").to_string(),
        ];
        for e in Estimator::ALL {
            row.extend(w.record.get(e).iter().map(|v| num(*v)));
        }
        rows.push(row);
        docs.push(WindowDoc {
            index: i,
            start: w.start,
            end: w.start + cfg.window,
            label,
            record: &w.record,
        });
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&a.out_dir.join("windows.csv"), &header, &rows)?;
    write_jsonl(&a.out_dir.join("windows.jsonl"), &docs)?;

    let Some(labels) = labels else { return Ok(()) };
    let mut distinct: Vec<&String> = labels.iter().flatten().collect();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < 2 {
        eprintln!("note: fewer than two window labels, group comparison skipped");
        return Ok(());
    }
    let cmp = compare_groups(&windows, &labels, a.alpha)?;
    write_json(&a.out_dir.join("groups.json"), &cmp)?;
    let mut prows = Vec::new();
    for (k, ((idx, p), (t, r))) in cmp
        .bh
        .pvalues
        .iter()
        .zip(cmp.bh.bh_thresholds.iter().zip(&cmp.bh.rejected))
        .enumerate()
    {
        let test = &cmp.tests[*idx];
        prows.push(vec![
            (k + 1).to_string(),
            test.estimator.label().to_string(),
            (test.m + 1).to_string(),
            num(*p),
            num(*t),
            r.to_string(),
        ]);
    }
    write_csv(
        &a.out_dir.join("pvalues.csv"),
        &["rank", "estimator", "m", "pvalue", "bh_threshold", "rejected"],
        &prows,
    )?;
    Ok(())
}
