use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn muskat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muskat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn small(init: Value, t_end: f64) -> Value {
    json!({
        "grid": {"N": 32, "L": PI},
        "init": init,
        "t_end": t_end,
        "cfl_safety": 0.5,
        "output_stride": 4,
        "quadrature": {"truncation_radius": 2.0 * PI}
    })
}

fn write_samples(path: &Path, n: usize, f: impl Fn(f64) -> f64) {
    let h = 2.0 * PI / n as f64;
    let mut s = String::from("x,value\n");
    for j in 0..n {
        let x = -PI + j as f64 * h;
        s.push_str(&format!("{:e},{:e}\n", x, f(x)));
    }
    fs::write(path, s).unwrap();
}

fn read_samples(path: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (x, v) = l.split_once(',').unwrap();
            (x.parse().unwrap(), v.parse().unwrap())
        })
        .collect()
}

fn series(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,sup_f,B,M_2,M_inf,hhalf,envelope,ledger_slack_p2");
    lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect()
}

#[test]
fn simulate_zero_data() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.json", &small(json!({"family": "constant", "c": 0.0}), 0.2));
    let r = muskat(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let rows = series(&out.join("series.csv"));
    assert!(rows.len() > 2);
    for row in rows {
        assert!(row[1..].iter().all(|&v| v == 0.0), "{row:?}");
    }
    let events: Value = serde_json::from_str(&fs::read_to_string(out.join("events.json")).unwrap()).unwrap();
    assert_eq!(events, json!([]));
    assert!(read_samples(&out.join("final.csv")).iter().all(|&(_, v)| v == 0.0));
    assert!(out.join("config.json").exists());
}

#[test]
fn simulate_nan_injection_exits_two() {
    let tmp = TempDir::new().unwrap();
    let mut c = small(json!({"family": "sine", "a": 0.1}), 1.0);
    c["hooks"] = json!({"inject_nan_at_step": 2});
    c["output_dir"] = json!(tmp.path().join("o"));
    let cfg = write_config(tmp.path(), "c.json", &c);
    let r = muskat(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&r), 2);
    let events: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/events.json")).unwrap()).unwrap();
    assert_eq!(events[0]["kind"], "nan_detected");
}

#[test]
fn simulate_is_deterministic_and_lossless() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &small(json!({"family": "random", "modes": 4, "slope": 0.3, "seed": 11}), 0.3),
    );
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let r = muskat(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&r), 0, "{}", stderr(&r));
        outputs.push(fs::read(dir.join("series.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    // Re-serialising the parsed numbers reproduces the file byte for byte.
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    for line in text.lines().skip(1) {
        let again: Vec<String> = line.split(',').map(|v| format!("{:e}", v.parse::<f64>().unwrap())).collect();
        assert_eq!(again.join(","), line);
    }
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let mut c = small(json!({"family": "sine", "a": 0.1}), 1.0);
    c["gridd"] = json!({});
    let cfg = write_config(tmp.path(), "bad.json", &c);
    let r = muskat(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("gridd"), "{}", stderr(&r));

    let c = small(json!({"family": "square", "a": 0.1}), 1.0);
    let cfg = write_config(tmp.path(), "fam.json", &c);
    let r = muskat(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("square"));

    let r = muskat(&["simulate", "--config", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&r), 1);
    let r = muskat(&["frobnicate"]);
    assert_eq!(code(&r), 1);
}

#[test]
fn verify_operators_passes() {
    let tmp = TempDir::new().unwrap();
    let mut c = small(json!({"family": "sine", "a": 0.3}), 1.0);
    c["grid"]["N"] = json!(64);
    c["output_dir"] = json!(tmp.path());
    let cfg = write_config(tmp.path(), "c.json", &c);
    let r = muskat(&["verify", "--suite", "operators", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    let checks = report.as_array().unwrap();
    assert!(checks.len() >= 8);
    for c in checks {
        assert_eq!(c["pass"], true, "{c}");
        for key in ["name", "worst_margin", "worst_location", "tolerance"] {
            assert!(c.get(key).is_some());
        }
    }
}

#[test]
fn verify_bounds_detects_scaled_constants() {
    let tmp = TempDir::new().unwrap();
    let mut c = small(json!({"family": "sine", "a": 0.3}), 1.0);
    c["grid"]["N"] = json!(128);
    c["output_dir"] = json!(tmp.path());
    let cfg = write_config(tmp.path(), "ok.json", &c);
    let r = muskat(&["verify", "--suite", "bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));

    c["hooks"] = json!({"bound_scale": 10.0});
    let cfg = write_config(tmp.path(), "bad.json", &c);
    let r = muskat(&["verify", "--suite", "bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&r), 2);
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert!(report
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["pass"] == false && c["worst_margin"].as_f64().unwrap() < 0.0));
}

#[test]
fn verify_bounds_skips_unresolved_data() {
    let tmp = TempDir::new().unwrap();
    let mut c = small(json!({"family": "sine", "a": 0.01, "k": 12}), 1.0);
    c["output_dir"] = json!(tmp.path());
    let cfg = write_config(tmp.path(), "c.json", &c);
    let r = muskat(&["verify", "--suite", "bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert!(report.as_array().unwrap().iter().any(|c| c.get("skipped").is_some()));
}

#[test]
fn verify_theorems_small_slope() {
    let tmp = TempDir::new().unwrap();
    let mut c = small(json!({"family": "sine", "a": 0.01}), 1.0);
    c["output_dir"] = json!(tmp.path());
    let cfg = write_config(tmp.path(), "c.json", &c);
    let r = muskat(&["verify", "--suite", "theorems", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
}

#[test]
fn op_examples() {
    let tmp = TempDir::new().unwrap();
    let cos = tmp.path().join("cos.csv");
    write_samples(&cos, 64, f64::cos);
    let out = tmp.path().join("lam.csv");
    let r = muskat(&["op", "--name", "lambda", "--in", cos.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    for (x, v) in read_samples(&out) {
        assert!((v - PI * x.cos()).abs() < 1e-12);
    }

    let constant = tmp.path().join("c.csv");
    write_samples(&constant, 32, |_| 0.7);
    for name in ["velocity", "rhs"] {
        let out = tmp.path().join(format!("{name}.csv"));
        let r = muskat(&["op", "--name", name, "--in", constant.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&r), 0, "{}", stderr(&r));
        assert!(read_samples(&out).iter().all(|&(_, v)| v == 0.0));
    }

    let out = tmp.path().join("df.csv");
    let r = muskat(&[
        "op", "--name", "Df", "--in", constant.to_str().unwrap(), "--g", cos.to_str().unwrap(), "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 1, "grid mismatch must fail");

    let r = muskat(&["op", "--name", "laplace", "--in", cos.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 1);

    let tt = tmp.path().join("tt.csv");
    let r = muskat(&["op", "--name", "tterms", "--in", cos.to_str().unwrap(), "--out", tt.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    for k in 1..=5 {
        assert!(tmp.path().join(format!("tt_t{k}.csv")).exists());
    }
}

#[test]
fn single_point_sweep_matches_simulate() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &small(json!({"family": "sine", "a": 0.02}), 0.3));
    let sim = tmp.path().join("sim");
    let r = muskat(&["simulate", "--config", cfg.to_str().unwrap(), "--out", sim.to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    let sw = tmp.path().join("sweep");
    let r = muskat(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--grid", r#"{"init.a": [0.02]}"#, "--out",
        sw.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert_eq!(
        fs::read(sim.join("series.csv")).unwrap(),
        fs::read(sw.join("run_000/series.csv")).unwrap()
    );
}

#[test]
fn amplitude_sweep_orders_curvature() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &small(json!({"family": "sine", "a": 0.01}), 0.5));
    let grid = tmp.path().join("grid.json");
    fs::write(&grid, r#"{"init.a": [0.005, 0.01, 0.02]}"#).unwrap();
    let sw = tmp.path().join("sweep");
    let r = muskat(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--grid", grid.to_str().unwrap(), "--out",
        sw.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let text = fs::read_to_string(sw.join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run,init.a,final_B,final_M_inf,max_envelope_slack,event"
    );
    let m: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(m.len(), 3);
    assert!(m[0] < m[1] && m[1] < m[2], "{m:?}");

    let r = muskat(&["sweep", "--config", cfg.to_str().unwrap(), "--grid", "{}"]);
    assert_eq!(code(&r), 1);
}

#[test]
fn sweep_records_failed_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &small(json!({"family": "sine", "a": 0.01}), 0.2));
    let sw = tmp.path().join("sweep");
    let r = muskat(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--grid", r#"{"cfl_safety": [0.9, 0.5]}"#, "--out",
        sw.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let text = fs::read_to_string(sw.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows[0].contains("error"));
    assert!(!rows[1].contains("error"));
}

#[test]
fn thread_count_from_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &small(json!({"family": "sine", "a": 0.02}), 0.1));
    let run = |threads: &str, dir: &str| {
        Command::new(env!("CARGO_BIN_EXE_muskat"))
            .env("MUSKAT_THREADS", threads)
            .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join(dir).to_str().unwrap()])
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1", "one")), 0);
    assert_eq!(code(&run("3", "three")), 0);
    assert_eq!(
        fs::read(tmp.path().join("one/series.csv")).unwrap(),
        fs::read(tmp.path().join("three/series.csv")).unwrap()
    );
    assert_eq!(code(&run("zero", "bad")), 1);
}
