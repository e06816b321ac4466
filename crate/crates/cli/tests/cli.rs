//! End-to-end behaviour of the `ofbmkit` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use tempfile::TempDir;

const PARAMS: &str = r#"{"H":[0.4,0.8],"var":[1,1],"rho":[[1,0.5],[0.5,1]],"W":[[1,0.4],[-0.2,0.9]]}"#;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofbmkit"))
        .current_dir(dir)
        .env_remove("OFBMKIT_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = bin(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn setup() -> TempDir {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("p.json"), PARAMS).unwrap();
    d
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let d = setup();
    let p = d.path();
    ok(p, &["synth", "--params", "p.json", "--n", "4096", "--seed", "7", "--out", "a.csv"]);
    ok(p, &["synth", "--params", "p.json", "--n", "4096", "--seed", "7", "--out", "b.csv"]);
    let a = fs::read(p.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(p.join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 4097);
    ok(p, &["synth", "--params", "p.json", "--n", "4096", "--seed", "8", "--out", "c.csv"]);
    assert_ne!(fs::read(p.join("a.csv")).unwrap(), fs::read(p.join("c.csv")).unwrap());
}

#[test]
fn missing_params_file_is_exit_2() {
    let d = setup();
    let out = bin(d.path(), &["synth", "--params", "absent.json", "--n", "64"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}

#[test]
fn infeasible_correlation_is_exit_3() {
    let d = setup();
    let p = d.path();
    fs::write(
        p.join("bad.json"),
        r#"{"H":[0.1,0.9],"var":[1,1],"rho":[[1,0.99],[0.99,1]],"W":[[1,0],[0,1]]}"#,
    )
    .unwrap();
    let out = bin(p, &["synth", "--params", "bad.json", "--n", "64"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn usage_errors_are_exit_2() {
    let d = setup();
    let p = d.path();
    assert_eq!(code(&bin(p, &["synth", "--params", "p.json"])), 2);
    assert_eq!(code(&bin(p, &["mc", "--params", "p.json", "--n", "4096", "--filter", "sym9"])), 2);
    assert_eq!(code(&bin(p, &["--threads", "0", "synth", "--params", "p.json", "--n", "64"])), 2);
    assert_eq!(code(&bin(p, &["estimate", "--input", "x.csv", "--j1", "3"])), 2);
}

#[test]
fn estimate_reports_all_estimators_with_override() {
    let d = setup();
    let p = d.path();
    ok(p, &["synth", "--params", "p.json", "--n", "16384", "--seed", "3", "--out", "x.csv"]);
    ok(p, &["estimate", "--input", "x.csv", "--j1", "4", "--j2", "8", "--out-dir", "e"]);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("e/estimate.json")).unwrap()).unwrap();
    for key in ["H_U", "H_M", "H_M_bc"] {
        assert_eq!(doc[key].as_array().unwrap().len(), 2, "{key}");
    }
    assert_eq!(doc["j1"], 4);
    assert_eq!(doc["j2"], 8);
    let h_m: Vec<f64> = serde_json::from_value(doc["H_M"].clone()).unwrap();
    assert!((h_m[0] - 0.4).abs() < 0.15 && (h_m[1] - 0.8).abs() < 0.15, "{h_m:?}");
    // Three tables of 5 octaves × 2 components, plus the header.
    assert_eq!(fs::read_to_string(p.join("e/log_eig.csv")).unwrap().lines().count(), 31);
    assert_eq!(fs::read_to_string(p.join("e/spectra.csv")).unwrap().lines().count(), 21);

    // Without an override the range follows the series length.
    ok(p, &["estimate", "--input", "x.csv", "--out-dir", "auto"]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p.join("auto/estimate.json")).unwrap()).unwrap();
    assert_eq!((doc["j1"].as_u64(), doc["j2"].as_u64()), (Some(6), Some(9)));
}

#[test]
fn binary_and_csv_paths_give_the_same_estimate() {
    let d = setup();
    let p = d.path();
    ok(p, &["synth", "--params", "p.json", "--n", "8192", "--seed", "5", "--out", "x.csv"]);
    ok(p, &["synth", "--params", "p.json", "--n", "8192", "--seed", "5", "--format", "bin", "--out-dir", "b"]);
    assert!(p.join("b/path.bin.json").exists());
    assert_eq!(fs::metadata(p.join("b/path.bin")).unwrap().len(), 2 * 8192 * 8);
    ok(p, &["estimate", "--input", "x.csv", "--j1", "3", "--j2", "7", "--out-dir", "ec"]);
    ok(p, &["estimate", "--input", "b/path.bin", "--j1", "3", "--j2", "7", "--out-dir", "eb"]);
    assert_eq!(
        fs::read(p.join("ec/log_eig.csv")).unwrap(),
        fs::read(p.join("eb/log_eig.csv")).unwrap()
    );
}

#[test]
fn short_series_is_exit_4() {
    let d = setup();
    let p = d.path();
    ok(p, &["synth", "--params", "p.json", "--n", "4096", "--out", "x.csv"]);
    // Octave 10 of 4096 samples keeps a single coefficient, fewer than M = 2.
    let out = bin(p, &["estimate", "--input", "x.csv", "--j1", "6", "--j2", "10"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    // Too short for the automatic range as well.
    assert_eq!(code(&bin(p, &["estimate", "--input", "x.csv"])), 4);
}

#[test]
fn mc_output_does_not_depend_on_threads() {
    let d = setup();
    let p = d.path();
    let start = Instant::now();
    ok(p, &["--threads", "1", "mc", "--params", "p.json", "--n", "4096", "--n-mc", "2", "--j1", "3", "--j2", "6", "--out-dir", "one"]);
    assert!(start.elapsed().as_secs_f64() < 10.0);
    ok(p, &["--threads", "8", "mc", "--params", "p.json", "--n", "4096", "--n-mc", "2", "--j1", "3", "--j2", "6", "--out-dir", "eight"]);
    for f in ["mc_report.json", "estimates.csv", "qq.csv", "norms.csv", "corr.csv", "variance.csv"] {
        assert_eq!(fs::read(p.join("one").join(f)).unwrap(), fs::read(p.join("eight").join(f)).unwrap(), "{f}");
    }
    // Three estimators × 2 realizations × 2 components.
    assert_eq!(fs::read_to_string(p.join("one/estimates.csv")).unwrap().lines().count(), 13);
}

#[test]
fn thread_count_from_environment() {
    let d = setup();
    let p = d.path();
    let out = Command::new(env!("CARGO_BIN_EXE_ofbmkit"))
        .current_dir(p)
        .env("OFBMKIT_THREADS", "0")
        .args(["synth", "--params", "p.json", "--n", "64"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn rerun_replaces_outputs_without_leftovers() {
    let d = setup();
    let p = d.path();
    let args = ["mc", "--params", "p.json", "--n", "4096", "--n-mc", "2", "--j1", "3", "--j2", "6", "--out-dir", "o"];
    ok(p, &args);
    let first = fs::read(p.join("o/mc_report.json")).unwrap();
    ok(p, &args);
    assert_eq!(first, fs::read(p.join("o/mc_report.json")).unwrap());
    let mut names: Vec<String> = fs::read_dir(p.join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["corr.csv", "estimates.csv", "mc_report.json", "norms.csv", "qq.csv", "variance.csv"]);
}

fn write_labeled(p: &Path, n: usize) {
    ok(p, &["synth", "--params", "p.json", "--n", &n.to_string(), "--seed", "11", "--out", "x.csv"]);
    let text = fs::read_to_string(p.join("x.csv")).unwrap();
    let mut out = String::new();
    for (i, line) in text.lines().enumerate() {
        out.push_str(line);
        out.push(',');
        out.push_str(match i {
            0 => "label",
            i if (i - 1) / 1024 % 2 == 0 => "rest",
            _ => "task",
        });
        out.push('\n');
    }
    fs::write(p.join("labeled.csv"), out).unwrap();
}

#[test]
fn sliding_row_count_and_groups() {
    let d = setup();
    let p = d.path();
    let n = 16384;
    write_labeled(p, n);
    let (window, hop) = (1024, 512);
    ok(p, &["sliding", "--input", "labeled.csv", "--window", "1024", "--hop", "512", "--j1", "1", "--j2", "4", "--out-dir", "s"]);
    let rows = fs::read_to_string(p.join("s/windows.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, (n - window) / hop + 1);
    assert_eq!(fs::read_to_string(p.join("s/windows.jsonl")).unwrap().lines().count(), rows);
    let groups: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("s/groups.json")).unwrap()).unwrap();
    // Windows straddling a label change belong to neither group.
    assert_eq!(groups["sizes"], serde_json::json!([8, 8]));
    assert_eq!(fs::read_to_string(p.join("s/pvalues.csv")).unwrap().lines().count(), 7);
}

#[test]
fn sliding_hop_larger_than_window_is_rejected() {
    let d = setup();
    let p = d.path();
    ok(p, &["synth", "--params", "p.json", "--n", "4096", "--out", "x.csv"]);
    let out = bin(p, &["sliding", "--input", "x.csv", "--window", "512", "--hop", "1024", "--j1", "1", "--j2", "3"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hop"));
}

#[test]
fn version_names_filters_and_rng() {
    let d = setup();
    let out = bin(d.path(), &["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(&ofbmkit_cli::filter_taps_hash()));
    assert!(text.contains(ofbmkit::synthesis::RNG_ID));
}
