use std::path::Path;
use std::process::{Command, Output};

fn toricgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toricgen"))
        .args(args)
        .env_remove("TORICGEN_CONE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fan_to_file_then_engine_genus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y8.json");
    let o = toricgen(&["fan", "--n", "8", "--eps", "3", "--a", "1", "--b", "-1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("11 rays"));
    let fan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(fan["rays"].as_array().unwrap().len(), 11);

    let o = toricgen(&["genus", "--fan", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "engine: 30");
}

#[test]
fn edge_blowup_fan_on_stdout() {
    let o = toricgen(&["fan", "--n", "3", "--eps", "2", "--a", "1", "--b", "1", "--edge-blowup"]);
    assert_eq!(o.status.code(), Some(0));
    let fan: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rays = fan["rays"].as_array().unwrap();
    assert_eq!(rays.len(), 7);
    assert!(rays.contains(&serde_json::json!([1, 1, 0])));
    assert!(stderr(&o).contains("regular: true, complete: true"));
}

#[test]
fn invalid_family_is_a_usage_error() {
    let o = toricgen(&["fan", "--n", "2", "--eps", "2", "--a", "1", "--b", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid parameter"));
    assert_eq!(toricgen(&["fan", "--n", "5"]).status.code(), Some(2));
    assert_eq!(toricgen(&["bogus"]).status.code(), Some(2));
}

#[test]
fn closed_form_genus() {
    let o = toricgen(&["genus", "--closed-form", "--n", "24", "--eps", "5", "--a", "1", "--b", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "closed form: 33630");
    let o = toricgen(&["genus", "--closed-form", "--n", "3", "--eps", "2", "--a", "1", "--b", "1", "--edge-blowup"]);
    assert_eq!(stdout(&o).trim(), "closed form: 4");
    assert_eq!(toricgen(&["genus"]).status.code(), Some(2));
}

#[test]
fn engine_and_closed_form_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y5.json");
    let family = ["--n", "5", "--eps", "3", "--a", "2", "--b", "1"];
    let mut args = vec!["fan"];
    args.extend(family);
    args.extend(["--out", path_str(&out)]);
    assert_eq!(toricgen(&args).status.code(), Some(0));

    let mut args = vec!["genus", "--fan", path_str(&out), "--engine", "--closed-form"];
    args.extend(family);
    let o = toricgen(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("agree"));

    let o = toricgen(&[
        "genus", "--fan", path_str(&out), "--engine", "--closed-form", "--n", "5", "--eps", "3", "--a", "2", "--b", "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("engine gives"));
}

#[test]
fn construct_golden_plans() {
    let o = toricgen(&["construct", "--n", "43"]);
    assert_eq!(o.status.code(), Some(0));
    let plan: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(plan["point_blowups"], "5703197000");
    assert_eq!(plan["base_genus"], "239534274001");
    assert_eq!(plan["base"]["a"], 21);

    let o = toricgen(&["construct", "--n", "24"]);
    let plan: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(plan["point_blowups"], "1345");
    assert_eq!(plan["final_genus"], "5");
}

#[test]
fn construct_with_engine() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let fan = dir.path().join("fan.json");
    let o = toricgen(&[
        "construct", "--n", "8", "--verify-engine", "--materialize", "--fan-out", path_str(&fan), "--out", path_str(&plan),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("engine genus: 3"));
    assert!(fan.exists() && plan.exists());
    let o = toricgen(&["genus", "--fan", path_str(&fan)]);
    assert_eq!(stdout(&o).trim(), "engine: 3");
}

#[test]
fn cone_cap_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_toricgen"))
        .args(["construct", "--n", "8", "--materialize"])
        .env("TORICGEN_CONE_CAP", "20")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("maximal cones exceeds limit"));
    let o = toricgen(&["construct", "--n", "43", "--materialize"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let summary = dir.path().join("summary.json");
    let o = toricgen(&["sweep", "--max", "1000", "--out", path_str(&csv), "--summary", path_str(&summary)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,witness_eps,prime_witness_eps,eps_count,elapsed_ms"));
    assert_eq!(lines.next(), Some("14,6,7,,"));
    assert_eq!(lines.next(), Some("20,7,,,"));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["counterexample"], false);
    assert_eq!(s["prime_heuristic_failures"], serde_json::json!([20, 50]));
}

#[test]
fn sweep_output_is_identical_across_jobs_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let csv = dir.path().join(name);
        let mut args = vec!["sweep", "--max", "1500", "--full-count", "--out", path_str(&csv)];
        args.extend_from_slice(extra);
        let o = toricgen(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(&csv).unwrap()
    };
    let one = run("one.csv", &["--jobs", "1"]);
    let three = run("three.csv", &["--jobs", "3", "--checkpoint-every", "97"]);
    assert_eq!(one, three);

    let cp = dir.path().join("cp.json");
    let cp = path_str(&cp).to_string();
    let short = dir.path().join("short.csv");
    let o = toricgen(&["sweep", "--max", "700", "--full-count", "--checkpoint", &cp, "--out", path_str(&short)]);
    assert_eq!(o.status.code(), Some(0));
    let resumed = run("resumed.csv", &["--checkpoint", &cp, "--checkpoint-every", "200"]);
    assert_eq!(one, resumed);
}
