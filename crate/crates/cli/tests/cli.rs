//! End-to-end checks of the `cmdp-lab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn cmdp_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmdp-lab"))
        .args(args)
        .env_remove("CMDP_LAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cmdp_lab(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TREE: [&str; 5] = ["--family", "tree", "--params", "branching=2", "depth=3"];

fn construct_tree(dir: &Path) -> PathBuf {
    let fam = dir.join("fam");
    let mut args = vec!["construct"];
    args.extend(TREE);
    args.extend(["epsilon=0.3", "--out", path(&fam)]);
    let summary = json(&args);
    assert_eq!(summary["truths"], 2);
    assert_eq!(summary["policy_class_size"], 3);
    fam
}

#[test]
fn construct_plan_rollout_learn() {
    let dir = tempfile::tempdir().unwrap();
    let fam = construct_tree(dir.path());
    let instance = fam.join("instances/instance_0.json");
    let expert = fam.join("experts/expert_0.json");

    let plan_dir = dir.path().join("plan");
    let report = json(&["plan", "--instance", path(&instance), "--reachability", "some", "--out", path(&plan_dir)]);
    assert!((report["value"].as_f64().unwrap() - 0.9).abs() < 1e-12);
    assert!(plan_dir.join("policy.json").exists() && plan_dir.join("qtable.json").exists());

    let traj = dir.path().join("traj.jsonl");
    ok(&["rollout", "--instance", path(&instance), "--policy", path(&expert), "--m", "25", "--seed", "9", "--out", path(&traj)]);
    assert_eq!(std::fs::read_to_string(&traj).unwrap().lines().count(), 25);

    let dpl_dir = dir.path().join("dpl");
    let class = fam.join("policy_class.json");
    let dpl = json(&[
        "dpl", "--batch", path(&traj), "--class", path(&class), "--instance", path(&instance), "--expert", path(&expert),
        "--out", path(&dpl_dir),
    ]);
    assert_eq!(dpl["empirical_error"], 0.0);
    assert!((dpl["value_error"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let provenance: Value = serde_json::from_str(&std::fs::read_to_string(dpl_dir.join("provenance.json")).unwrap()).unwrap();
    assert_eq!(provenance["learner"], "dpl");
    assert_eq!(provenance["batch"]["sha256"].as_str().unwrap().len(), 64);

    let models = fam.join("model_class.json");
    let mle = json(&["mble", "--batch", path(&traj), "--class", path(&models), "--instance", path(&instance)]);
    let ll = mle["log_likelihoods"].as_array().unwrap();
    assert_eq!(ll[0], ll[1], "expert data cannot separate the two trees");

    let one = dir.path().join("one.jsonl");
    ok(&["rollout", "--instance", path(&instance), "--data", "one-step", "--m", "400", "--out", path(&one)]);
    let fqi = json(&["fqi", "--batch", path(&one), "--class", path(&models), "--instance", path(&instance)]);
    assert!(fqi["value_error"].as_f64().unwrap() < 1e-12);
    let mle = json(&["mble", "--batch", path(&one), "--class", path(&models), "--instance", path(&instance)]);
    assert_eq!(mle["index"], 0);
}

#[test]
fn rollout_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let fam = construct_tree(dir.path());
    let args = |seed: &'static str| {
        vec![
            "rollout".to_string(),
            "--instance".into(),
            path(&fam.join("instances/instance_1.json")).into(),
            "--policy".into(),
            path(&fam.join("experts/expert_1.json")).into(),
            "--m".into(),
            "10".into(),
            "--seed".into(),
            seed.into(),
        ]
    };
    let run = |seed| ok(&args(seed).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run("4"), run("4"));
    assert_ne!(run("4"), run("5"));
}

#[test]
fn analysis_commands_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let fam = construct_tree(dir.path());

    let ndim = json(&["ndim", "--class", path(&fam.join("policy_class.json"))]);
    assert_eq!(ndim["dimension"], 1);

    let mixing = json(&[
        "mixing", "--instance", path(&fam.join("instances/instance_0.json")), "--policy",
        path(&fam.join("experts/expert_0.json")),
    ]);
    let dbar = mixing["profile"]["dbar"].as_array().unwrap();
    assert_eq!(dbar.len(), 12);
    assert!(dbar[3].as_f64().unwrap() < 1e-12);

    let bounds = json(&["bounds", "--bound", "dpl_value", "--d", "2", "--epsilon", "0.1", "--horizon", "5"]);
    assert!(bounds["values"][0]["samples"].as_u64().unwrap() > 0);
    let all = json(&["bounds", "--d", "2", "--epsilon", "0.1", "--horizon", "5", "--num-actions", "2"]);
    assert!(!all["values"].as_array().unwrap().is_empty());

    let cert = json(&["certify", "--family", "permutation_bandit", "--params", "arms=4", "epsilon=0.1", "pulls=2"]);
    assert_eq!(cert["passed"], true);
}

#[test]
fn invalid_input_exits_with_two() {
    let bad_key = cmdp_lab(&["certify", "--family", "tree", "--params", "branching=2", "depth=3", "epsilon=0.3", "bogus=1"]);
    assert_eq!(bad_key.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_key.stderr).contains("bogus"));

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[experiment]\nid = \"x\"\nseed = 1\nextra = true\n").unwrap();
    assert_eq!(cmdp_lab(&["run", "--config", path(&config)]).status.code(), Some(2));

    let instance = dir.path().join("instance.json");
    std::fs::write(
        &instance,
        r#"{"version":1,"num_states":1,"num_actions":1,"horizon":1,"num_contexts":1,
            "context_prior":[1.0],"initial_dist":[0.5],"transitions":[[[[1.0]]]],"reward_means":[[0.0]]}"#,
    )
    .unwrap();
    assert_eq!(cmdp_lab(&["plan", "--instance", path(&instance)]).status.code(), Some(2));

    assert_eq!(cmdp_lab(&["plan", "--instance", path(&dir.path().join("missing.json"))]).status.code(), Some(1));
}

#[test]
fn run_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
[experiment]
id = "cli-run"
seed = 3

[family]
kind = "tree"
branching = 2
depth = 3
epsilon = 0.3

[learner]
kind = "fqi"
data = "one_step"

[evaluation]
epsilon = 0.05
delta = 0.1
m_grid = [1, 10, 100]
trials = 30

[output]
dir = "unused"
"#,
    )
    .unwrap();
    let read = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let summary = json(&["run", "--config", path(&config), "--out", path(&out), "--workers", workers]);
        assert_eq!(summary["records"], 90);
        std::fs::read_to_string(out.join("curve.csv")).unwrap()
    };
    assert_eq!(read("a", "1"), read("b", "6"));
    assert!(!dir.path().join("unused").exists());

    let curve = ok(&["curve", "--config", path(&config), "--workers", "2"]);
    assert_eq!(curve, read("c", "2"));
    assert!(curve.starts_with("experiment_id,family,learner,m,trials,successes,mean_value_error,ci_halfwidth,seed\n"));

    let reseeded = ok(&["curve", "--config", path(&config), "--seed", "4"]);
    assert_ne!(curve, reseeded);
}

#[test]
fn shipped_configs_parse_and_certify() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cert = json(&["certify", "--config", path.to_str().unwrap()]);
            assert_eq!(cert["passed"], true, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
