use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_softedge");

fn reference_spec(exponent: f64) -> Value {
    json!({
        "kind": "modulated", "N": 2, "alpha": [1, 1], "beta": [0, 0],
        "a_tilde": {"law": "power", "params": {"exponent": exponent}}
    })
}

struct Run {
    dir: TempDir,
    out: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join("out").join(name)
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.path(name)).unwrap()).unwrap()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }
}

fn run_with(cmd: &str, config: &Value, extra: &[&str], env: &[(&str, &str)]) -> Run {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, config.to_string()).unwrap();
    let mut c = Command::new(BIN);
    c.arg(cmd).arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("out"));
    c.args(extra).env_remove("JS_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    let out = c.output().unwrap();
    Run { dir, out }
}

fn run(cmd: &str, config: &Value) -> Run {
    run_with(cmd, config, &[], &[])
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn build_from_ratios_is_soft_edge() {
    let r = run("build", &json!({"build": {"method": "ratios", "r": [1, 1], "q": [0, 0]}}));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let b = r.json("build.json");
    assert_eq!(b["regime"], "soft_edge");
    assert_eq!(b["gamma"].as_f64(), Some(-1.0));
    assert!(b["residual"].as_f64().unwrap() < 1e-10);
    for key in ["alpha", "beta", "gamma", "residual", "regime"] {
        assert!(b.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn build_from_critical_root() {
    let r = run("build", &json!({"build": {"method": "critical_q", "alpha": [1, 2], "root": 1}}));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let b = r.json("build.json");
    assert_eq!(b["N"], 4);
    assert!(b["residual"].as_f64().unwrap() < 1e-10);
    let beta: Vec<f64> = serde_json::from_value(b["beta"].clone()).unwrap();
    // q = +√5 is the larger root; β_i = q·α_i on the first half
    assert!((beta[0] - 5f64.sqrt()).abs() < 1e-10, "{beta:?}");
}

#[test]
fn build_rejects_bad_ratio_product() {
    let r = run("build", &json!({"build": {"method": "ratios", "r": [1, 2], "q": [0, 0]}}));
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("error:"), "{}", r.stderr());
    assert!(!r.path("build.json").exists());
}

#[test]
fn build_root_out_of_range() {
    let r = run("build", &json!({"build": {"method": "critical_q", "alpha": [1, 2], "root": 7}}));
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("out of range"), "{}", r.stderr());
}

fn classify(exponent: f64) -> Value {
    let cfg = json!({
        "spec": reference_spec(exponent),
        "classify": {"ladder": [32, 64, 128], "probe_ladder": [128, 256, 512], "carleman_n": 1000}
    });
    let r = run("classify", &cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    r.json("classify.json")
}

#[test]
fn classify_three_regimes() {
    let sqrt = classify(0.5);
    assert_eq!(sqrt["phase"]["verdict"], "unbounded");
    assert_eq!(sqrt["phase"]["criterion"], "k_over_a");
    let norms: Vec<f64> = sqrt["phase"]["ladder"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["norm"].as_f64().unwrap())
        .collect();
    assert!(norms.windows(2).all(|w| w[1] > w[0]), "{norms:?}");

    let linear = classify(1.0);
    assert_eq!(linear["phase"]["verdict"], "bounded");
    assert_eq!(linear["gap_probe"]["signal"], "stable");

    let square = classify(2.0);
    assert_eq!(square["phase"]["verdict"], "compact");
    for p in square["phase"]["ladder"].as_array().unwrap() {
        assert!(p.get("M").is_some() && p.get("sv_count").is_some());
    }
}

fn density_config(spec: Value, from: f64, to: f64, points: usize) -> Value {
    json!({
        "spec": spec,
        "density": {"grid": {"from": from, "to": to, "points": points}, "normalization": false}
    })
}

#[test]
fn density_reference_is_positive_and_decreasing() {
    let r = run("density", &density_config(reference_spec(1.0), 0.6, 3.0, 13));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = csv_rows(&r.path("density.csv"));
    assert_eq!(rows.len(), 13);
    let d: Vec<f64> = rows.iter().map(|row| row[1].parse().unwrap()).collect();
    assert!(d.iter().all(|v| *v > 0.0));
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    // 12 significant digits
    assert_eq!(rows[0][1].split('e').next().unwrap().len(), 13, "{}", rows[0][1]);

    let s = r.json("density_summary.json");
    assert_eq!(s["all_converged"], true);
    assert_eq!(s["collar"].as_f64(), Some(0.05));
    assert_eq!(s["gap"]["lo"].as_f64(), Some(-0.5));
    assert!(s["lambda"].is_array());
}

#[test]
fn density_summary_carries_normalization() {
    let mut cfg = density_config(reference_spec(1.0), 1.0, 2.0, 3);
    cfg["density"]["normalization"] = json!(true);
    let r = run("density", &cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let n = &r.json("density_summary.json")["normalization"];
    assert!((n["total"].as_f64().unwrap() - 1.0).abs() < 1e-2, "{n}");
}

#[test]
fn density_symmetric_spec_is_even() {
    let spec = json!({
        "kind": "modulated", "N": 4, "alpha": [1, 2, 2, 1], "beta": [0, 0, 0, 0],
        "a_tilde": {"law": "power", "params": {"exponent": 1}}
    });
    let x = [-2.5, -1.7, -1.2, 1.2, 1.7, 2.5];
    let cfg = json!({"spec": spec, "density": {"x": x, "normalization": false}});
    let r = run("density", &cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let d: Vec<f64> = csv_rows(&r.path("density.csv")).iter().map(|row| row[1].parse().unwrap()).collect();
    for i in 0..3 {
        assert!((d[i] - d[5 - i]).abs() <= 1e-9 * d[i], "{d:?}");
    }
}

#[test]
fn density_rejects_grid_outside_lambda() {
    let r = run("density", &density_config(reference_spec(1.0), 0.0, 2.0, 5));
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("outside"), "{}", r.stderr());
}

#[test]
fn density_reports_non_convergence() {
    let mut cfg = density_config(reference_spec(1.0), 1.0, 2.0, 3);
    cfg["density"]["k_max"] = json!(3);
    let r = run("density", &cfg);
    assert_eq!(r.code(), 1, "{}", r.stderr());
    assert!(r.path("density.csv").exists());
}

#[test]
fn resolvent_report() {
    let cfg = json!({
        "spec": reference_spec(0.5),
        "resolvent": {"blocks": 10, "witness_blocks": 64, "inverse": {"size": 10, "x": 0.3}}
    });
    let r = run("resolvent", &cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("resolvent.json");
    assert_eq!(v["gamma"].as_f64(), Some(-1.0));
    assert_eq!(v["f"], json!([[0.0, 1.0], [0.0, 0.0]]));
    assert!(v["section_product"]["interior"].as_f64().unwrap() < 1e-9);
    assert!(v["inverse"]["residual"].as_f64().unwrap() < 1e-8);
    let w = &v["witness"];
    assert!(w["ratio"].as_f64().unwrap() >= w["bound"].as_f64().unwrap());
}

#[test]
fn validate_reference_passes() {
    let r = run("validate", &json!({"spec": reference_spec(1.0)}));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("validate.json");
    assert_eq!(v["all_passed"], true);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["max_residual"].is_number(), "{row}");
    }
}

#[test]
fn validate_perturbed_alpha_fails_criticality() {
    let mut spec = reference_spec(1.0);
    spec["alpha"] = json!([1.0, 1.01]);
    let r = run("validate", &json!({"spec": spec}));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("validate.json");
    assert_eq!(v["all_passed"], false);
    let crit = v["rows"].as_array().unwrap().iter().find(|r| r["name"] == "criticality").unwrap();
    assert_eq!(crit["passed"], false);
    assert!(crit["max_residual"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_keys_are_rejected() {
    let r = run("validate", &json!({"spec": reference_spec(1.0), "colour": "blue"}));
    assert_eq!(r.code(), 2);
    let mut bad = density_config(reference_spec(1.0), 1.0, 2.0, 3);
    bad["density"]["gird"] = json!(1);
    assert_eq!(run("density", &bad).code(), 2);
}

#[test]
fn missing_section_is_a_config_error() {
    let r = run("density", &json!({"spec": reference_spec(1.0)}));
    assert_eq!(r.code(), 2);
}

#[test]
fn outputs_are_byte_identical() {
    let cfg = density_config(reference_spec(1.0), 0.6, 3.0, 17);
    let a = run_with("density", &cfg, &["--threads", "1"], &[]);
    let b = run_with("density", &cfg, &["--threads", "4"], &[]);
    for name in ["density.csv", "density_summary.json"] {
        let x = std::fs::read(a.path(name)).unwrap();
        let y = std::fs::read(b.path(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let cfg = json!({"spec": reference_spec(2.0), "classify": {"ladder": [16, 32], "probe_ladder": [64, 128], "carleman_n": 100}});
    let a = run_with("classify", &cfg, &[], &[("JS_THREADS", "2")]);
    let b = run_with("classify", &cfg, &[], &[("JS_THREADS", "3")]);
    assert_eq!(a.code(), 0, "{}", a.stderr());
    assert_eq!(std::fs::read(a.path("classify.json")).unwrap(), std::fs::read(b.path("classify.json")).unwrap());
}

#[test]
fn thread_settings_are_checked() {
    let cfg = json!({"spec": reference_spec(1.0)});
    assert_eq!(run_with("validate", &cfg, &["--threads", "0"], &[]).code(), 2);
    assert_eq!(run_with("validate", &cfg, &[], &[("JS_THREADS", "many")]).code(), 2);
    assert_eq!(run_with("validate", &cfg, &[], &[("JS_THREADS", "2")]).code(), 0);
    // the flag wins over the environment
    assert_eq!(run_with("validate", &cfg, &["--threads", "1"], &[("JS_THREADS", "many")]).code(), 0);
}
