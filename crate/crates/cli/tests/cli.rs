use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pmnoise_cli::output::embedded_config;
use pmnoise_cli::validation::{run_criterion, Options};
use pmnoise_core::{Quadrature, Sign, SignTable};

const POINTLIKE: &str = "[source]\nkind = \"spl\"\n\n[detection]\nscheme = \"two_beam\"\nbranch = \"plus\"\n\n[grid]\nqx = [0.0, 0.5]\nomega = [0.0, 1.0]\n";

fn pmnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmnoise")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn perfect_suppression_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", POINTLIKE);
    let out = pmnoise(&["spectrum", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\nqx,qy,omega,s_abs,s_norm\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[0], &[0.0, 0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn reruns_are_byte_identical_and_reproducible_from_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", POINTLIKE);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let out = pmnoise(&["spectrum", "--config", &cfg, "--out", path.to_str().unwrap(), "--workers", workers]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());

    // the figure tables are reproducible through `spectrum` as well
    let figs = dir.path().join("figs");
    assert!(pmnoise(&["figure", "fig5", "--out", figs.to_str().unwrap()]).status.success());
    for table in [a, figs.join("fig5_dopo_minus_n7.csv")] {
        let text = fs::read_to_string(&table).unwrap();
        let embedded = embedded_config(&text).unwrap();
        let cfg = write(dir.path(), "embedded.toml", &embedded);
        let again = pmnoise(&["spectrum", "--config", &cfg]);
        assert!(again.status.success());
        assert_eq!(String::from_utf8(again.stdout).unwrap(), text, "{}", table.display());
    }
}

#[test]
fn only_oracle_mode_reports_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{POINTLIKE}\n[oracle]\nsegment_len = 256\n");
    let cfg = write(dir.path(), "o.toml", &text);
    let oracle = pmnoise(&["oracle", "--config", &cfg, "--seed", "11"]);
    assert!(oracle.status.success(), "{}", String::from_utf8_lossy(&oracle.stderr));
    let oracle = String::from_utf8(oracle.stdout).unwrap();
    assert!(oracle.contains("\nqx,qy,omega,s_abs,s_norm,stderr\n"));
    assert!(oracle.contains("# seed = 11\n"));
    let rows = data_rows(&oracle);
    assert!(rows.iter().all(|r| r.len() == 6 && r[5] >= 0.0));
    // q = 0, Omega = 0 is the squeezed point
    assert!(rows[0][4].abs() <= 3.0 * rows[0][5] + 1e-9);

    let analytic = pmnoise(&["spectrum", "--config", &cfg, "--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&analytic.stdout).unwrap();
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.get("stderr").is_none() && r.get("s_norm").is_some()));
    assert_eq!(json["meta"]["mode"], "analytic");
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &POINTLIKE.replace("branch = \"plus\"", "branch = \"plus\"\nbogus = 1"));
    let out = pmnoise(&["spectrum", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 7"));

    let cfg = write(dir.path(), "p.toml", POINTLIKE);
    let missing = dir.path().join("no/such/dir/out.csv");
    let out = pmnoise(&["spectrum", "--config", &cfg, "--out", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let report = dir.path().join("report.json");
    let out = pmnoise(&["validate", "--only", "3,4", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["criteria"].as_array().unwrap().len(), 2);
    assert_eq!(json["passed"], true);
}

#[test]
fn corrupted_sign_table_fails_the_zero_noise_point() {
    let mut signs = SignTable::default();
    signs.spl_plus = (Sign::Positive, Quadrature::X);
    let report = run_criterion(4, &Options { signs, ..Options::default() });
    assert!(!report.passed);
    assert!(report.failed_checks().any(|c| c.name == "spl/two_beam/plus at origin" && c.measured == 2.0));
    assert!(run_criterion(4, &Options::default()).passed);
}
