//! End-to-end tests of the binary: exit codes, file outputs, config-file
//! precedence and seeded determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condmode"))
}

fn write_sine_sample(dir: &Path, n: usize) {
    let mut curves = String::from("series_id,time,value\n");
    let mut responses = String::from("series_id,response\n");
    for i in 0..n {
        let a = 0.2 + 0.15 * i as f64;
        for j in 0..12 {
            let t = j as f64 / 11.0;
            curves.push_str(&format!(
                "c{i},{t},{}\n",
                a * (std::f64::consts::PI * t).sin()
            ));
        }
        responses.push_str(&format!("c{i},{a}\n"));
    }
    fs::write(dir.join("curves.csv"), curves).unwrap();
    fs::write(dir.join("responses.csv"), responses).unwrap();
    let mut query = String::from("time,value\n");
    for j in 0..12 {
        let t = j as f64 / 11.0;
        query.push_str(&format!("{t},{}\n", 0.5 * (std::f64::consts::PI * t).sin()));
    }
    fs::write(dir.join("query.csv"), query).unwrap();
}

fn write_periodic_series(path: &Path, total: usize, period: usize) {
    let mut s = String::from("time,value\n");
    for i in 0..total {
        s.push_str(&format!(
            "{i},{}\n",
            (2.0 * std::f64::consts::PI * (i % period) as f64 / period as f64).sin()
        ));
    }
    fs::write(path, s).unwrap();
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn density_writes_expected_shapes() {
    let dir = tempdir().unwrap();
    write_sine_sample(dir.path(), 8);
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "density",
            "--curves",
            dir.path().join("curves.csv").to_str().unwrap(),
            "--responses",
            dir.path().join("responses.csv").to_str().unwrap(),
            "--query",
            dir.path().join("query.csv").to_str().unwrap(),
            "--h-k",
            "0.5",
            "--h-h",
            "0.2",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0, "{output:?}");
    let csv = fs::read_to_string(out.join("density.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("y,density"));
    assert_eq!(lines.count(), 201);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("density.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], "1");
    assert!(json["effective_n"].as_u64().unwrap() > 0);
}

#[test]
fn density_grid_points_two_gives_two_rows() {
    let dir = tempdir().unwrap();
    write_sine_sample(dir.path(), 6);
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "density",
            "--curves",
            dir.path().join("curves.csv").to_str().unwrap(),
            "--responses",
            dir.path().join("responses.csv").to_str().unwrap(),
            "--query",
            dir.path().join("query.csv").to_str().unwrap(),
            "--h-k",
            "0.5",
            "--grid-points",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0);
    let csv = fs::read_to_string(out.join("density.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3); // header + 2 rows
}

#[test]
fn density_far_query_warns_with_zero_density_and_exit_zero() {
    let dir = tempdir().unwrap();
    write_sine_sample(dir.path(), 6);
    let mut query = String::from("time,value\n");
    for j in 0..12 {
        let t = j as f64 / 11.0;
        query.push_str(&format!("{t},{}\n", 500.0 + t));
    }
    fs::write(dir.path().join("far.csv"), query).unwrap();
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "density",
            "--curves",
            dir.path().join("curves.csv").to_str().unwrap(),
            "--responses",
            dir.path().join("responses.csv").to_str().unwrap(),
            "--query",
            dir.path().join("far.csv").to_str().unwrap(),
            "--h-k",
            "0.01",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0, "warnings must not change the exit code");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("density.json")).unwrap()).unwrap();
    assert_eq!(json["effective_n"], 0);
    assert!(json["warnings"][0].as_str().unwrap().contains("empty ball"));
    let csv = fs::read_to_string(out.join("density.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",0"), "nonzero density row: {line}");
    }
}

#[test]
fn malformed_csv_exits_two_with_line_number() {
    let dir = tempdir().unwrap();
    write_sine_sample(dir.path(), 4);
    fs::write(
        dir.path().join("curves.csv"),
        "series_id,time,value\na,0,1\na,1,bad\n",
    )
    .unwrap();
    let output = bin()
        .args([
            "density",
            "--curves",
            dir.path().join("curves.csv").to_str().unwrap(),
            "--responses",
            dir.path().join("responses.csv").to_str().unwrap(),
            "--query",
            dir.path().join("query.csv").to_str().unwrap(),
            "--h-k",
            "0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains(":3:"), "no line number in: {stderr}");
}

#[test]
fn unknown_kernel_exits_three() {
    let dir = tempdir().unwrap();
    write_sine_sample(dir.path(), 4);
    let output = bin()
        .args([
            "density",
            "--curves",
            dir.path().join("curves.csv").to_str().unwrap(),
            "--responses",
            dir.path().join("responses.csv").to_str().unwrap(),
            "--query",
            dir.path().join("query.csv").to_str().unwrap(),
            "--h-k",
            "0.5",
            "--k-kernel",
            "triangle",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 3);
}

#[test]
fn missing_required_option_exits_three() {
    let output = bin().args(["density"]).output().unwrap();
    assert_eq!(code(&output), 3);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--curves"));
}

#[test]
fn predict_constant_series_recovers_constant() {
    let dir = tempdir().unwrap();
    let series = dir.path().join("series.csv");
    let mut s = String::from("time,value\n");
    for i in 0..60 {
        s.push_str(&format!("{i},2.5\n"));
    }
    fs::write(&series, s).unwrap();
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "predict",
            "--series",
            series.to_str().unwrap(),
            "--segments",
            "6",
            "--characteristic",
            "endpoint",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0, "{output:?}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("prediction.json")).unwrap()).unwrap();
    let prediction = json["prediction"].as_f64().unwrap();
    let step = (json["interval"]["upper"].as_f64().unwrap()
        - json["interval"]["lower"].as_f64().unwrap())
        / 200.0;
    assert!(
        (prediction - 2.5).abs() <= step,
        "prediction {prediction} step {step}"
    );
}

#[test]
fn predict_too_short_series_exits_two() {
    let dir = tempdir().unwrap();
    let series = dir.path().join("series.csv");
    // 2N - 1 samples for N segments: blocks of one sample are not curves
    let mut s = String::from("time,value\n");
    for i in 0..11 {
        s.push_str(&format!("{i},1.0\n"));
    }
    fs::write(&series, s).unwrap();
    let output = bin()
        .args([
            "predict",
            "--series",
            series.to_str().unwrap(),
            "--segments",
            "6",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
}

#[test]
fn predict_cv_reports_selected_bandwidths_and_table() {
    let dir = tempdir().unwrap();
    let series = dir.path().join("series.csv");
    write_periodic_series(&series, 200, 20);
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "predict",
            "--series",
            series.to_str().unwrap(),
            "--segments",
            "10",
            "--cv",
            "--knn-grid",
            "2,4",
            "--hh-grid",
            "0.1,0.3",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0, "{output:?}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("prediction.json")).unwrap()).unwrap();
    assert!(json["h_k"].as_f64().unwrap() > 0.0);
    assert!(json["h_h"].as_f64().unwrap() > 0.0);
    let table = fs::read_to_string(out.join(json["cv_table_path"].as_str().unwrap())).unwrap();
    assert_eq!(table.lines().count(), 5); // header + 2x2 candidates
}

#[test]
fn cv_command_writes_full_table() {
    let dir = tempdir().unwrap();
    write_sine_sample(dir.path(), 12);
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "cv",
            "--curves",
            dir.path().join("curves.csv").to_str().unwrap(),
            "--responses",
            dir.path().join("responses.csv").to_str().unwrap(),
            "--knn-grid",
            "2,4,8",
            "--hh-grid",
            "0.05,0.2",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0, "{output:?}");
    let table = fs::read_to_string(out.join("cv_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 7); // header + 3x2
    assert!(table.starts_with("h_k,h_h,score,excluded_folds,hk_kind"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("cv_selection.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], "1");
    assert!(json["score"].as_f64().unwrap().is_finite());
}

#[test]
fn simulate_row_count_and_summary() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("out");
    let output = bin()
        .args([
            "simulate",
            "--n-grid",
            "100,200",
            "--reps",
            "30",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0, "{output:?}");
    let table = fs::read_to_string(out.join("rate_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 61); // header + 2 x 30
    assert!(table.starts_with("n,replication,abs_error,excluded"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("rate_summary.json")).unwrap()).unwrap();
    let slope = json["slope"].as_f64().unwrap();
    assert!(slope.is_finite() && slope < 0.0, "slope {slope}");
}

#[test]
fn simulate_identical_seeds_byte_identical_outputs() {
    let dir = tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--n-grid".into(),
            "100,200".into(),
            "--reps".into(),
            "30".into(),
            "--seed".into(),
            "7".into(),
            "--workers".into(),
            "1".into(),
            "--out".into(),
            out.to_str().unwrap().to_string(),
        ]
    };
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    assert_eq!(code(&bin().args(args(&out1)).output().unwrap()), 0);
    assert_eq!(code(&bin().args(args(&out2)).output().unwrap()), 0);
    assert_eq!(
        fs::read(out1.join("rate_table.csv")).unwrap(),
        fs::read(out2.join("rate_table.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out1.join("rate_summary.json")).unwrap(),
        fs::read(out2.join("rate_summary.json")).unwrap()
    );
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempdir().unwrap();
    write_sine_sample(dir.path(), 8);
    let out = dir.path().join("out");
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "out = \"{}\"\n[density]\ncurves = \"{}\"\nresponses = \"{}\"\nquery = \"{}\"\nh_k = 0.5\ngrid_points = 51\n",
            out.display(),
            dir.path().join("curves.csv").display(),
            dir.path().join("responses.csv").display(),
            dir.path().join("query.csv").display(),
        ),
    )
    .unwrap();
    // config alone
    let output = bin()
        .args(["density", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0, "{output:?}");
    assert_eq!(
        fs::read_to_string(out.join("density.csv"))
            .unwrap()
            .lines()
            .count(),
        52
    );
    // flag overrides the config file's grid_points
    let output = bin()
        .args([
            "density",
            "--config",
            config.to_str().unwrap(),
            "--grid-points",
            "11",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0);
    assert_eq!(
        fs::read_to_string(out.join("density.csv"))
            .unwrap()
            .lines()
            .count(),
        12
    );
}

#[test]
fn invalid_config_file_exits_three() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[density]\nno_such_key = 1\n").unwrap();
    let output = bin()
        .args(["density", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&output), 3);
}

#[test]
fn invalid_generator_parameter_exits_three() {
    let output = bin()
        .args([
            "simulate", "--n-grid", "100,200", "--reps", "30", "--rho", "1.5",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&output), 3);
}
