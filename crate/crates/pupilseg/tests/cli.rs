//! End-to-end tests of the `pupilseg` binary: exit codes, file outputs,
//! and report contents.

use std::path::Path;
use std::process::{Command, Output};

use pupilseg::pgm::write_pgm;
use pupilseg::synth::{generate_eye, EyeSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pupilseg"))
}

fn eye_pgm(dir: &Path, name: &str) -> std::path::PathBuf {
    let spec = EyeSpec::centered(64, 14.0, 22.0, 42);
    let (img, _) = generate_eye(&spec).unwrap();
    let path = dir.join(name);
    write_pgm(&img, &path).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn run_writes_outputs_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = eye_pgm(dir.path(), "eye.pgm");
    let out = bin()
        .args(["run", input.to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for suffix in ["edges", "mask", "overlay"] {
        assert!(dir.path().join(format!("eye_{suffix}.pgm")).exists());
    }
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"]["variant"], "approx");
    assert_eq!(report["rows"].as_array().unwrap().len(), 1);
    assert!(report["rows"][0]["radius"].as_f64().unwrap() > 0.0);
}

#[test]
fn compare_reports_stage_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let input = eye_pgm(dir.path(), "eye.pgm");
    let json = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let out = bin()
        .args(["compare", input.to_str().unwrap(), "--report"])
        .arg(&json)
        .arg("--report-csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    let stages = report["rows"][0]["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 5);
    assert!(report["aggregates"]["mean_ssim_smoothed"].as_f64().unwrap() > 0.9);
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("schema_version,input,seed,psnr_smoothed_db"));
    assert_eq!(csv_text.lines().count(), 2);
}

#[test]
fn ascii_pgm_exits_3_with_advice() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ascii.pgm");
    std::fs::write(&path, "P2\n2 2\n255\n0 1 2 3\n").unwrap();
    let out = bin().args(["run", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("P5"));
}

#[test]
fn truncated_pgm_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.pgm");
    std::fs::write(&path, b"P5\n4 4\n255\n\0\0\0").unwrap();
    let out = bin().args(["run", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));
}

#[test]
fn oversized_characterization_exits_4() {
    let out = bin()
        .args(["characterize", "--width", "16", "--approx-bits", "5"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
}

#[test]
fn characterize_emits_frozen_goldens() {
    let out = bin()
        .args(["characterize", "--width", "8", "--approx-bits", "5", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["stats"]["max_error_distance"], 16);
    assert_eq!(report["stats"]["total_cases"], 65536);
    assert_eq!(report["cost"]["comparator_reduction"], 0.625);
}

#[test]
fn synth_is_deterministic_and_writes_ground_truth() {
    let run = |dir: &Path| {
        let out = bin()
            .args(["synth", "--count", "3", "--seed", "9", "--noise-sigma", "5", "--out"])
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path());
    run(b.path());
    for name in ["eye_0000.pgm", "eye_0001.pgm", "eye_0002.pgm", "ground_truth.csv"] {
        let fa = std::fs::read(a.path().join(name)).unwrap();
        let fb = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(fa, fb, "{name}");
    }
    let csv = std::fs::read_to_string(a.path().join("ground_truth.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("file,seed,cx,cy,radius"));
}

#[test]
fn synth_count_zero_writes_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["synth", "--count", "0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("ground_truth.csv")).unwrap();
    assert_eq!(csv, "file,seed,cx,cy,radius\n");
}

#[test]
fn synthesized_corpus_feeds_back_into_run() {
    let dir = tempfile::tempdir().unwrap();
    bin()
        .args(["synth", "--count", "1", "--seed", "4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let out = bin()
        .args(["run", dir.path().join("eye_0000.pgm").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_inputs_is_usage_error() {
    let out = bin().arg("compare").output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn uniform_image_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.pgm");
    write_pgm(&pupilseg::filters::GrayImage::constant(32, 32, 50), &path).unwrap();
    let out = bin()
        .args(["run", path.to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 5);
}
