use std::path::Path;
use std::process::{Command, Output};

fn invopt(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_invopt"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("INVOPT_THREADS", t),
        None => cmd.env_remove("INVOPT_THREADS"),
    };
    cmd.output().unwrap()
}

fn write(path: &Path, text: &str) -> String {
    std::fs::write(path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn gen_train_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg = write(&root.join("gen.json"), r#"{"experiment": "consistent", "N": 20, "n_test": 5}"#);
    let out = root.join("data");
    let o = invopt(&["gen", "--config", &cfg, "--seed", "3", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let seed_dir = out.join("seed_3");
    let train = seed_dir.join("train.jsonl");
    assert_eq!(std::fs::read_to_string(&train).unwrap().lines().count(), 20);

    let model = root.join("model");
    let o = invopt(
        &["train", "--data", train.to_str().unwrap(), "--method", "incenter", "--out", model.to_str().unwrap()],
        Some("2"),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let theta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(model.join("theta.json")).unwrap()).unwrap();
    assert_eq!(theta["theta"].as_array().unwrap().len(), 6);

    let eval = root.join("eval");
    let o = invopt(
        &[
            "eval",
            "--data",
            seed_dir.join("test.jsonl").to_str().unwrap(),
            "--theta",
            model.join("theta.json").to_str().unwrap(),
            "--theta-true",
            seed_dir.join("theta_true.json").to_str().unwrap(),
            "--out",
            eval.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(eval.join("eval.csv")).unwrap();
    assert!(csv.starts_with("instances,loss,response_error,cost_gap,theta_error"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad = write(&dir.path().join("bad.json"), r#"{"experiment": "consistent", "bogus": true}"#);
    assert_eq!(invopt(&["bench", "--config", &bad, "--out", out], None).status.code(), Some(2));
    let mismatch = write(&dir.path().join("mm.json"), r#"{"experiment": "consistent", "methods": ["asl_mi_lp_z"]}"#);
    assert_eq!(invopt(&["bench", "--config", &mismatch, "--out", out], None).status.code(), Some(2));
    let good = write(&dir.path().join("ok.json"), r#"{"experiment": "consistent", "N": 5, "seeds": [0]}"#);
    assert_eq!(invopt(&["bench", "--config", &good, "--out", out], Some("zero")).status.code(), Some(2));
    assert_eq!(invopt(&["bench", "--config", &good, "--out", out], Some("0")).status.code(), Some(2));
    assert_eq!(invopt(&["bench", "--config", &good, "--out", out], Some("1")).status.code(), Some(0));
}
