use std::path::Path;
use std::process::{Command, Output};

fn lasml(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lasml"))
        .args(args)
        .env("LASML_OUT", out)
        .output()
        .expect("binary runs")
}

fn error_json(o: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let line = stderr.lines().last().expect("an error line");
    serde_json::from_str(line).expect("error line is JSON")
}

#[test]
fn summary_writes_json_into_lasml_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = lasml(&["summary"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["rows"], 124);
    assert_eq!(v["format_version"], 1);
}

#[test]
fn out_flag_beats_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = lasml(&["summary", "--out", flag_dir.path().to_str().unwrap()], env_dir.path());
    assert!(o.status.success());
    assert!(flag_dir.path().join("summary.json").exists());
    assert!(!env_dir.path().join("summary.json").exists());
}

#[test]
fn train_mlp_has_the_default_topology() {
    let dir = tempfile::tempdir().unwrap();
    let o = lasml(&["train", "--family", "mlp", "--hidden", "64,32", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = lasml::model::TrainedModel::load(&dir.path().join("model.json")).unwrap();
    match &m.family {
        lasml::model::Family::Mlp { config, .. } => assert_eq!(config.layer_sizes, vec![4, 64, 32, 3]),
        other => panic!("{other:?}"),
    }
    let history = std::fs::read_to_string(dir.path().join("loss_history.csv")).unwrap();
    assert!(history.starts_with("epoch,train_mse,validation_mse\n"));
}

#[test]
fn compare_writes_six_rows_and_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let o = lasml(&["compare", "--seed", "7", "--k", "3", "--repeats", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let labels: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["linear", "poly2", "poly3", "poly4", "gbt", "mlp"]);
    let scatter = std::fs::read_to_string(dir.path().join("scatter.csv")).unwrap();
    assert!(scatter.starts_with("spec_label,output_name,measured,predicted\n"));
    assert_eq!(scatter.lines().count(), 1 + 6 * 25);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("comparison.json")).unwrap()).unwrap();
    assert_eq!(json["format_version"], 1);
}

#[test]
fn design_ranks_grid_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("poly.json");
    let m = model.to_str().unwrap();
    assert!(lasml(&["train", "--family", "poly2", "--model", m], dir.path()).status.success());
    let o = lasml(
        &["design", "--model", m, "--target", "444.5,500,100", "--tol", "50", "--candidates", "grid", "--grid-counts", "8,8,8,8", "--top-k", "4"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("design.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty() && rows.len() <= 4);
    for r in &rows {
        assert!((r[6] - 444.5).abs() <= 50.0 && (r[7] - 500.0).abs() <= 50.0 && (r[8] - 100.0).abs() <= 50.0);
    }
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));
}

#[test]
fn usage_and_input_errors_exit_2_with_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["train", "--no-such-flag"],
        vec!["frobnicate"],
        vec!["summary", "--data", "/definitely/missing.csv"],
        vec!["train", "--family", "svm"],
        vec!["generate", "--candidates", "grid", "--grid-counts", "1,2,3"],
    ] {
        let o = lasml(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let v = error_json(&o);
        assert!(v["code"].is_string() && v["error"].is_string());
        assert_eq!(String::from_utf8_lossy(&o.stderr).trim().lines().count(), 1);
    }
}

#[test]
fn schema_violations_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "frequency_hz,amplitude_mm\n1,2\n").unwrap();
    let o = lasml(&["summary", "--data", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["code"], "parse_error");
}

#[test]
fn computational_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = lasml(&["generate", "--candidates", "grid", "--grid-counts", "1000,1000,100,2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["code"], "size_error");
}

#[test]
fn every_subcommand_has_help() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["summary", "train", "compare", "importance", "sweep-nn", "generate", "design", "serve"] {
        let o = lasml(&[sub, "--help"], dir.path());
        assert!(o.status.success());
        let text = String::from_utf8_lossy(&o.stdout);
        assert!(text.contains("--out") && text.contains("--seed"), "{sub}");
    }
}
