//! End-to-end checks of the compiled binary: exit codes, output format,
//! determinism and the documented numerical guarantees of each subcommand.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bistab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bistab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV emission as parsed float columns (text fields NaN).
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(|f| f.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bistab-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn steady_zero_drive_single_row_at_origin() {
    let out = bistab(&["steady", "--preset", "raizen", "--drive-Y", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# n_s = 1.1124955500177999e1"), "header must echo n_s");
    assert!(text.contains("# c = 3.9581363636363633e1"));
    let data = rows(&text);
    assert_eq!(data.len(), 1);
    assert_eq!(data[0][0], 0.0);
    assert_eq!(data[0][1], 0.0);
    assert!(text.contains(",lower,"));
}

#[test]
fn steady_sweep_covers_the_bistable_window() {
    let out = bistab(&[
        "steady", "--xi", "0.2", "--c", "40", "--natoms", "100", "--y-max", "90", "--y-steps",
        "180",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let data = rows(&text);
    // Multi-rooted drives add extra rows beyond the 181 grid points.
    assert!(data.len() > 181, "expected three-rooted region, got {} rows", data.len());
    // Three-root region sits between the fold drives ~17.78 and ~41.01.
    let tri: Vec<f64> = {
        let mut counts = std::collections::BTreeMap::new();
        for r in &data {
            *counts.entry(r[0].to_bits()).or_insert(0) += 1;
        }
        counts
            .iter()
            .filter(|(_, &n)| n == 3)
            .map(|(&y, _)| f64::from_bits(y))
            .collect()
    };
    assert!(!tri.is_empty());
    assert!(tri.iter().all(|&y| y > 17.0 && y < 42.0), "{tri:?}");
}

#[test]
fn missing_parameters_exit_code_2() {
    let out = bistab(&["covariance"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bistab(&["steady", "--preset", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bistab(&["correlate", "--preset", "raizen", "--pair", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn correlate_reduced_diff_column_below_1e8() {
    let out = bistab(&["correlate", "--preset", "raizen", "--tau-steps", "120"]);
    assert!(out.status.success());
    let data = rows(&stdout(&out));
    assert_eq!(data.len(), 121);
    for r in &data {
        assert!(r[3] < 1e-8, "abs diff {} at tau {}", r[3], r[0]);
    }
}

#[test]
fn correlate_components_sum_to_the_closed_form() {
    let out = bistab(&[
        "correlate", "--preset", "raizen", "--tau-steps", "40", "--components",
    ]);
    assert!(out.status.success());
    for r in rows(&stdout(&out)) {
        assert!((r[4] + r[5] - r[2]).abs() <= 1e-18 + 1e-12 * r[2].abs());
    }
}

#[test]
fn correlate_requires_numeric_only_for_uncovered_pairs() {
    let out = bistab(&["correlate", "--preset", "raizen", "--pair", "nu*mu"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bistab(&[
        "correlate", "--preset", "raizen", "--pair", "nu*mu", "--tau-steps", "10",
        "--numeric-only",
    ]);
    assert!(out.status.success());
    assert_eq!(rows(&stdout(&out)).len(), 11);
}

#[test]
fn spectrum_is_symmetric_with_negative_central_squeezing() {
    let out = bistab(&["spectrum", "--preset", "raizen", "--detuning-steps", "32"]);
    assert!(out.status.success());
    let data = rows(&stdout(&out));
    assert_eq!(data.len(), 33);
    let n = data.len();
    for k in 0..n {
        let (a, b) = (&data[k], &data[n - 1 - k]);
        assert!((a[0] + b[0]).abs() < 1e-12);
        assert!((a[1] - b[1]).abs() <= 1e-12 * a[1].abs().max(1e-300), "transmission symmetry");
        assert!((a[2] - b[2]).abs() <= 1e-12 * a[2].abs().max(1e-300), "squeezing symmetry");
    }
    let mid = &data[n / 2];
    assert_eq!(mid[0], 0.0);
    assert!(mid[2] < 0.0, "squeezing at zero detuning must be negative");
}

#[test]
fn figure_bundles_are_written_with_headers() {
    let dir = temp_dir("figs");
    for (n, files) in [
        ("1", vec!["fig1_ratio.csv"]),
        ("2", vec!["fig2_components.csv"]),
        ("3", vec!["fig3_main.csv", "fig3_inset.csv"]),
        ("4", vec!["fig4_overlay.csv"]),
    ] {
        let out = bistab(&["figure", n, "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "figure {n}");
        for f in files {
            let text = std::fs::read_to_string(dir.join(f)).unwrap_or_else(|_| panic!("{f} missing"));
            assert!(text.starts_with("# version = "), "{f} header");
            assert!(!rows(&text).is_empty(), "{f} rows");
        }
    }
    // fig1: the corrected average ratio never drops below one.
    let fig1 = std::fs::read_to_string(dir.join("fig1_ratio.csv")).unwrap();
    assert!(rows(&fig1).iter().all(|r| r[2] >= 1.0));
    // fig3: solid minus dashed is exactly the second component's share.
    let fig3 = std::fs::read_to_string(dir.join("fig3_main.csv")).unwrap();
    assert!(rows(&fig3).iter().skip(1).any(|r| (r[1] - r[2]).abs() > 1e-6));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn runs_are_byte_identical() {
    let a = bistab(&["correlate", "--preset", "raizen", "--tau-steps", "50"]);
    let b = bistab(&["correlate", "--preset", "raizen", "--tau-steps", "50"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let a = bistab(&["spectrum", "--preset", "fig3", "--detuning-steps", "64", "--format", "json"]);
    let b = bistab(&["spectrum", "--preset", "fig3", "--detuning-steps", "64", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_output_is_well_formed() {
    let out = bistab(&["covariance", "--preset", "raizen", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["columns"].as_array().unwrap().len(), 3);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 25);
    assert_eq!(doc["header"]["mode"], "reduced");
}

#[test]
fn config_file_layers_under_flags() {
    let dir = temp_dir("conf");
    let path = dir.join("run.conf");
    std::fs::write(&path, "xi = 0.2\nc = 40\nnatoms = 100\nx = 0.01\ntau_steps = 10\n").unwrap();
    // Flag overrides the file's x.
    let out = bistab(&["covariance", "--config", path.to_str().unwrap(), "--X", "0.02"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# x = 2.0000000000000000e-2"));
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "frobnicate = 1\n").unwrap();
    let out = bistab(&["covariance", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_decoupled_cavity_report() {
    let out = bistab(&[
        "oracle", "--g", "0", "--kappa", "1", "--gamma", "2", "--natoms", "1", "--fock-cutoff",
        "6", "--drive-Y", "0.2",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["coherent_check"]["pass"], true);
    assert!(doc["cutoff_population"].as_f64().unwrap() < 1e-8);
}

#[test]
fn oracle_linear_response_slope() {
    let out = bistab(&[
        "oracle", "--g", "1", "--kappa", "1", "--gamma", "2", "--natoms", "2", "--fock-cutoff",
        "8", "--drive-Y", "0.05",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["linear_response"]["pass_1pct"], true);
    let c = doc["dimensionless"]["c"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 1e-12);
}

#[test]
fn selftest_passes() {
    let out = bistab(&["selftest"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(!text.contains("FAIL"), "{text}");
}
