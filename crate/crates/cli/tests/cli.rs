use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn openloop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_openloop")).args(args).env_remove("OPENLOOP_SEED").output().unwrap()
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.json");
    std::fs::write(
        &path,
        r#"{
  "environment": { "kind": "track1d_discrete" },
  "q_grid": [0.0, 0.1],
  "episodes": 4,
  "planner": { "budget": 20, "exploration": 0.7, "discount": 0.9, "horizon": 10 },
  "algorithms": ["oluct", "plain", { "kind": "sdm", "threshold": 80 }],
  "seed": 9
}"#,
    )
    .unwrap();
    path
}

fn without_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|l| l.split(',').enumerate().filter(|(i, _)| *i != 6).map(|(_, f)| f).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn run_is_reproducible_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o =
            openloop(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta.lines().count(), 1 + 2 * 3 * 4);
    assert!(ta.starts_with("env,q,algorithm,episode,loss,model_calls,wall_time_us,replans,steps,seed\n"));
    assert_eq!(without_wall_time(&ta), without_wall_time(&tb));

    let summary = dir.path().join("summary.csv");
    let o = openloop(&["aggregate", "--in", a.to_str().unwrap(), "--out", summary.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&summary).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 6);
    assert!(lines[1].starts_with("track1d_discrete,oluct,0.0,4,2.0,0.0,"), "{}", lines[1]);
}

#[test]
fn seed_override_and_steps_and_tree_dump() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("e.csv");
    let steps = dir.path().join("steps.csv");
    let tree = dir.path().join("tree.json");
    let o = Command::new(env!("CARGO_BIN_EXE_openloop"))
        .args(["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(["--episodes", "1", "--steps-out", steps.to_str().unwrap(), "--dump-tree", tree.to_str().unwrap()])
        .env("OPENLOOP_SEED", "77")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 3);
    let seed = openloop::harness::episode_seed(77, 0.0, 0).to_string();
    assert!(rows.lines().nth(1).unwrap().ends_with(&format!(",{seed}")));
    assert!(std::fs::read_to_string(&steps).unwrap().starts_with("env,q,algorithm,episode,step,action,planned\n"));
    let dump: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&tree).unwrap()).unwrap();
    assert!(dump.is_object());
}

#[test]
fn bounds_subcommand_emits_rows() {
    let o = openloop(&["bounds", "--rho", "2", "--delta", "0.27", "--depths", "0..3", "--n-grid", "100,1000"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,d,bound,vacuous");
    assert_eq!(lines.len(), 1 + 4 * 2);
    let d1: Vec<&str> = lines.iter().copied().filter(|l| l.starts_with("100,1,")).collect();
    let bound: f64 = d1[0].split(',').nth(2).unwrap().parse().unwrap();
    assert!((bound - 0.84548).abs() < 1e-4);
}

#[test]
fn presets_parse() {
    for name in ["track1d-discrete.json", "track1d-continuous.json", "ptsp-discrete.json", "ptsp-continuous.json"] {
        let text = std::fs::read_to_string(preset(name)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["q_grid"].as_array().unwrap().len(), 11, "{name}");
    }
}

#[test]
fn bad_input_fails_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"q_grid\": [0.1,\n}").unwrap();
    let o = openloop(&["run", "--config", bad.to_str().unwrap(), "--out", "x.csv"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = openloop(&["run", "--config", dir.path().join("missing.json").to_str().unwrap(), "--out", "x.csv"]);
    assert!(!o.status.success());

    let csv = dir.path().join("wrong.csv");
    std::fs::write(&csv, "a,b\n1,2\n").unwrap();
    let o =
        openloop(&["aggregate", "--in", csv.to_str().unwrap(), "--out", dir.path().join("s.csv").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));

    let o = openloop(&["bounds", "--n-grid", "nonsense"]);
    assert!(!o.status.success());
}
