use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bose-scatter"));
    cmd.env_remove("BOSE_SCATTER_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(&[args, &["--format", "json"]].concat());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn validate(doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

/// Rows of a CSV report, skipping `#` metadata and the header.
fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn rate_reports_condensate_term() {
    let doc = json(&["rate", "--delta", "0.1", "--tau", "0.85"]);
    validate(&doc);
    let row = &doc["rows"][0];
    assert!((num(&row["condensate"]) - 73.34).abs() < 0.01);
    let sum = num(&row["unstimulated"]) + num(&row["thermal_thermal"]) + num(&row["condensate"]);
    assert!((sum - num(&row["total"])).abs() < 1e-12 * sum);
}

#[test]
fn rate_at_large_transfer_is_unenhanced() {
    let doc = json(&["rate", "--delta", "5", "--tau", "1.5"]);
    assert!((num(&doc["rows"][0]["total"]) - 1.0).abs() < 0.01);
}

#[test]
fn invalid_input_exits_two() {
    let out = run(&["rate", "--delta", "0", "--tau", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta must be positive"));
    assert_eq!(
        run(&["rate", "--delta", "-1", "--tau", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["rate", "--delta", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["rate", "--delta", "1", "--tau", "1", "--convention", "half"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["rate", "--delta", "1", "--tau", "1", "--rel-tol", "0.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn quadrature_failure_exits_three() {
    let out = run(&[
        "rate",
        "--delta",
        "0.1",
        "--tau",
        "1.0",
        "--rel-tol",
        "1e-13",
        "--max-subdivisions",
        "10",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("thermal"));
}

#[test]
fn paper_constant_doubles_thermal_term() {
    let a = json(&["rate", "--delta", "0.3", "--tau", "1.2"]);
    let b = json(&[
        "rate",
        "--delta",
        "0.3",
        "--tau",
        "1.2",
        "--convention",
        "paper_constant",
    ]);
    assert_eq!(b["config"]["n_total_convention"], "paper_constant");
    let ratio = num(&b["rows"][0]["thermal_thermal"]) / num(&a["rows"][0]["thermal_thermal"]);
    assert!((ratio - 2.0).abs() < 1e-7);
}

#[test]
fn sweeps_are_ordered_and_schema_valid() {
    let doc = json(&[
        "sweep-tau",
        "--delta",
        "0.3",
        "--tau-range",
        "0.8:1.2",
        "--steps",
        "9",
    ]);
    validate(&doc);
    let taus: Vec<f64> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| num(&r["tau"]))
        .collect();
    assert_eq!(taus.len(), 9);
    assert!(taus.windows(2).all(|w| w[1] > w[0]));

    let doc = json(&[
        "sweep-delta",
        "--tau",
        "1.2",
        "--delta-range",
        "0.01:5",
        "--steps",
        "6",
        "--log",
    ]);
    validate(&doc);
    let totals: Vec<f64> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| num(&r["total"]))
        .collect();
    assert!(totals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sweep_csv_is_thread_count_independent() {
    let args = ["sweep-delta", "--tau", "0.9", "--deltas", "0.05,0.2,0.7,2"];
    let one = bin()
        .args(args)
        .env("BOSE_SCATTER_THREADS", "1")
        .output()
        .unwrap();
    let four = bin()
        .args(args)
        .env("BOSE_SCATTER_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = bin()
        .args(args)
        .env("BOSE_SCATTER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn figure1_is_reproducible_and_matches_magnitudes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&["figure1", "--out", dir.path().to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for delta in ["0.03", "0.1", "0.3", "1"] {
        let name = format!("figure1_delta_{delta}.csv");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
        let text = String::from_utf8(x).unwrap();
        assert!(text
            .lines()
            .any(|l| l == "tau,total,condensate_contribution"));
        let rows = csv_rows(&text);
        assert_eq!(rows.len(), 141);
        for r in &rows {
            if r[0] >= 1.0 {
                assert_eq!(r[2], 0.0);
            }
        }
    }
    let read = |delta: &str| {
        csv_rows(
            &std::fs::read_to_string(a.path().join(format!("figure1_delta_{delta}.csv"))).unwrap(),
        )
    };
    let at =
        |rows: &[Vec<f64>], tau: f64| rows.iter().find(|r| (r[0] - tau).abs() < 1e-9).unwrap()[1];
    let r = at(&read("0.3"), 1.2);
    assert!((2.0..=5.0).contains(&r), "R(0.3, 1.2) = {r}");
    assert!(read("0.1")
        .iter()
        .any(|r| (0.8..=0.9).contains(&r[0]) && r[1] >= 100.0));
}

#[test]
fn figure1_json_files_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "figure1",
        "--delta-list",
        "0.5",
        "--tau-range",
        "0.9:1.1",
        "--steps",
        "3",
        "--format",
        "json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("figure1_delta_0.5.json")).unwrap(),
    )
    .unwrap();
    validate(&doc);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn sumrule_above_critical() {
    let doc = json(&["sumrule", "--tau", "1.5"]);
    validate(&doc);
    assert!((num(&doc["rows"][0]["ratio_to_n_total"]) - 1.0).abs() < 0.01);
}

#[test]
fn convert_rubidium() {
    let doc = json(&[
        "convert",
        "--mass-amu",
        "87",
        "--wavelength-nm",
        "780",
        "--tc-nk",
        "100",
        "--angle-mrad",
        "10",
    ]);
    validate(&doc);
    let row = &doc["rows"][0];
    assert!((num(&row["photon_momentum"]) - 1.90).abs() < 0.02);
    assert!((num(&row["delta"]) - 0.019).abs() < 5e-4);
    assert!(row["delta_small_angle"].is_number());
}

#[test]
fn monte_carlo_output_is_repeatable() {
    let args = [
        "oracle",
        "mc",
        "--delta",
        "0.5",
        "--tau",
        "1.2",
        "--samples",
        "1000000",
        "--seed",
        "42",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&args);
    validate(&doc);
}

#[test]
fn oracle_box_and_quad3d() {
    let doc = json(&[
        "oracle",
        "box",
        "--tau",
        "1.2",
        "--spacing",
        "0.25",
        "--max-mode",
        "34",
        "--delta-mode",
        "2,0,0",
    ]);
    validate(&doc);
    assert!(num(&doc["rows"][0]["relative_difference"]).abs() < 0.02);
    assert_eq!(doc["rows"][0]["cutoff_warning"], false);
    let doc = json(&["oracle", "quad3d", "--delta", "0.5", "--tau", "1.2"]);
    assert!(num(&doc["rows"][0]["relative_difference"]).abs() < 5e-3);
    let out = run(&["oracle", "box", "--tau", "1.2", "--delta-mode", "0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_sets_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("engine.conf");
    std::fs::write(
        &path,
        "# shared settings\nconvention = paper_constant\nrel-tol = 1e-7\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let doc = json(&["rate", "--delta", "1", "--tau", "1.2", "--config", p]);
    assert_eq!(doc["config"]["n_total_convention"], "paper_constant");
    assert_eq!(num(&doc["config"]["rel_tol"]), 1e-7);
    let doc = json(&[
        "rate",
        "--delta",
        "1",
        "--tau",
        "1.2",
        "--config",
        p,
        "--convention",
        "integral",
    ]);
    assert_eq!(doc["config"]["n_total_convention"], "integral");

    std::fs::write(&path, "speed = fast\n").unwrap();
    assert_eq!(
        run(&["rate", "--delta", "1", "--tau", "1.2", "--config", p])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rate.csv");
    let out = run(&[
        "rate",
        "--delta",
        "1",
        "--tau",
        "1.2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(csv_rows(&text).len(), 1);
}
