use std::path::Path;
use std::process::{Command, Output};

fn uqbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqbench"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok(args: &[&str], cwd: &Path) {
    let out = uqbench(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn piecewise_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["design", "--kind", "sobol", "--m", "20", "--n", "2", "--out", "train.csv"], d);
    ok(&["--seed", "3", "design", "--kind", "lhs", "--m", "200", "--n", "2", "--out", "val.csv"], d);
    ok(&["design", "--kind", "grid", "--n", "2", "--k", "4", "--out", "grid.csv"], d);
    for (design, out) in [("train.csv", "y.csv"), ("val.csv", "vy.csv"), ("grid.csv", "gy.csv")] {
        ok(&["simulate", "--simulator", "toy", "--design", design, "--out", out], d);
    }
    let header = std::fs::read_to_string(d.join("grid.csv")).unwrap();
    assert!(header.starts_with("x1,x2,weight\n"));

    ok(&["fit", "--method", "pce-reg", "--p", "3", "--design", "train.csv", "--outputs", "y.csv", "--out", "reg.json"], d);
    ok(&["fit", "--method", "pce-quad", "--p", "3", "--design", "grid.csv", "--outputs", "gy.csv", "--out", "quad.json"], d);
    ok(&["fit", "--method", "gp-matern", "--design", "train.csv", "--outputs", "y.csv", "--out", "gp.json"], d);

    ok(&["predict", "--model", "gp.json", "--design", "train.csv", "--out", "p.csv", "--variance"], d);
    let preds = std::fs::read_to_string(d.join("p.csv")).unwrap();
    let truth = std::fs::read_to_string(d.join("y.csv")).unwrap();
    for (p, t) in preds.lines().skip(1).zip(truth.lines().skip(1)) {
        let mut f = p.split(',');
        let mean: f64 = f.next().unwrap().parse().unwrap();
        let t: f64 = t.parse().unwrap();
        assert!((mean - t).abs() < 1e-6);
    }

    for model in ["reg.json", "quad.json", "gp.json"] {
        ok(
            &["validate", "--model", model, "--design", "val.csv", "--outputs", "vy.csv", "--out", "r.json", "--pdf-csv", "pdf.csv", "--samples", "100", "--bootstrap", "200"],
            d,
        );
        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
        let rmse = report["report"]["rmse"]["point"].as_f64().unwrap();
        assert!(rmse.is_finite() && rmse > 0.0 && rmse < 1.0, "{model}: {rmse}");
        assert!(std::fs::read_to_string(d.join("pdf.csv")).unwrap().starts_with("value,density,lo,hi\n"));
    }

    let bad = uqbench(&["predict", "--model", "reg.json", "--design", "train.csv", "--out", "x.csv", "--variance"], d);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
}

#[test]
fn bench_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("ok.json"),
        r#"{"dimension": 2, "simulator": {"kind": "quadratic-bowl"}, "classes": [2, 3],
            "orders": [1, 2], "validation_size": 100, "bootstrap_replicates": 100,
            "posterior_samples": 50, "output_dir": "ok-out"}"#,
    )
    .unwrap();
    ok(&["bench", "--config", "ok.json"], d);
    for f in ["run_result.json", "timing.json", "metrics_class2.csv", "metrics_class3.csv", "reference.csv", "pdf/simulator.csv", "plots/rmse_class3.svg"] {
        assert!(d.join("ok-out").join(f).exists(), "{f}");
    }

    std::fs::write(
        d.join("fail.json"),
        r#"{"dimension": 2, "simulator": {"kind": "toy"}, "classes": [1], "orders": [1],
            "methods": ["gp-se"], "validation_size": 50, "bootstrap_replicates": 100}"#,
    )
    .unwrap();
    let out = uqbench(&["bench", "--config", "fail.json", "--out", "fail-out"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(d.join("fail-out/run_result.json").exists());

    std::fs::write(d.join("bad.json"), r#"{"dimension": 3, "simulator": {"kind": "toy"}}"#).unwrap();
    assert_eq!(uqbench(&["bench", "--config", "bad.json"], d).status.code(), Some(1));
}

#[test]
fn seed_flag_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["--seed", "1", "design", "--kind", "sobol", "--m", "8", "--n", "3", "--out", "a.csv"], d);
    ok(&["--seed", "1", "design", "--kind", "sobol", "--m", "8", "--n", "3", "--out", "b.csv"], d);
    ok(&["--seed", "2", "design", "--kind", "sobol", "--m", "8", "--n", "3", "--out", "c.csv"], d);
    let read = |f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("ext.json"),
        r#"{"dimension": 2, "classes": [2], "orders": [1], "methods": ["pce-reg"],
            "validation_size": 20, "bootstrap_replicates": 100,
            "simulator": {"kind": "external", "program": "sh",
                          "args": ["-c", "awk -F, 'NR>1 {print $2}' \"$0\" > \"$1\"", "{input}", "{output}"]}}"#,
    )
    .unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_uqbench"))
            .args(["bench", "--config", "ext.json", "--out", "out"])
            .env("UQBENCH_CACHE_DIR", d.join("shared-cache"))
            .current_dir(d)
            .output()
            .unwrap()
    };
    assert!(run().status.success());
    let cached: Vec<_> = std::fs::read_dir(d.join("shared-cache")).unwrap().collect();
    assert_eq!(cached.len(), 1);
    assert!(run().status.success());
    let timing: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("out/timing.json")).unwrap()).unwrap();
    assert_eq!(timing["external_invocations"], 0);
}
