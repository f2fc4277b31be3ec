use std::process::{Command, Output};

fn perfeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perfeq"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn half_half_is_not_perfect() {
    let o = perfeq(&["perfect", "games/admissible-dominated.game", "--profile", "(1/2,1/2,0);(1/2,1/2,0)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not perfect: dominated by (0,0,1)"), "{}", stdout(&o));
}

#[test]
fn reduced_coordination_dr_is_perfect() {
    let o = perfeq(&["perfect", "games/reduced-coordination.game"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = perfeq(&["perfect", "games/reduced-coordination.game", "--profile", "(1,0);(1,0)"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn embedding_pushes_forward() {
    let o = perfeq(&[
        "pushforward",
        "games/coordination-3.game",
        "games/reduced-coordination.game",
        "--map",
        "map{1->D, 2->U, 3->U}",
        "--map",
        "map{1->R, 2->L, 3->L}",
        "--allowed",
        "(0,1);(0,1)",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = perfeq(&[
        "pushforward",
        "games/coordination-3.game",
        "games/reduced-coordination.game",
        "--map",
        "map{1->U, 2->D, 3->D}",
        "--map",
        "map{1->R, 2->L, 3->L}",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn integrate_diffuse_pair() {
    let o = perfeq(&["integrate", "--game", "variant_wald", "--profile", "diffuse;diffuse", "--tol", "1/100", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["report_version"], 1);
    assert_eq!(doc["status"], "pass");
}

#[test]
fn witness_file_verifies() {
    let o = perfeq(&["witness", "games/example-3-3-witness.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn scenarios_and_selftest() {
    let o = perfeq(&["scenario", "admissible_dominated"]);
    assert_eq!(o.status.code(), Some(0));
    let o = perfeq(&["selftest", "--cases", "16", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn json_is_deterministic() {
    let args = ["nash", "games/admissible-dominated.game", "--format", "json"];
    assert_eq!(perfeq(&args).stdout, perfeq(&args).stdout);
}

#[test]
fn usage_and_parse_errors_exit_3() {
    assert_eq!(perfeq(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(perfeq(&["nash", "games/missing.game"]).status.code(), Some(3));
    let o = perfeq(&["nash", "games/admissible-dominated.game", "--profile", "(1/2,1/2,1/4);(1,0,0)"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nash"));
    assert_eq!(perfeq(&["scenario", "nope"]).status.code(), Some(3));
}
