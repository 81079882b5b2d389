use std::process::{Command, Output};

fn l0lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l0lab"))
        .args(args)
        .env_remove("L0LAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn gauge_of_a_ball_on_a_uniform_space() {
    let o = l0lab(&["gauge", "ball:abs,eps=2", "[4,2,0]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "[2,1,0]");
}

#[test]
fn gauge_of_the_counterexample_set_vanishes() {
    let o = l0lab(&["gauge", "cex:eps=1", "<1|1>"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0");
}

#[test]
fn bisection_prints_an_enclosure() {
    let o = l0lab(&["gauge", "ball:abs,eps=2", "[4,2,0]", "--engine", "bisection"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("lower="), "{text}");
    assert!(text.contains("upper=[2,1,0]"), "{text}");
}

#[test]
fn membership_ignores_finitely_many_atoms() {
    assert_eq!(stdout(&l0lab(&["member", "cex:eps=1", "<5,5,5|1/2>"])), "true");
    assert_eq!(stdout(&l0lab(&["member", "cex:eps=1", "<0|2>"])), "false");
}

#[test]
fn bad_inputs_exit_with_two() {
    for args in [
        &["verify", "--space", "finite:1/2,1/2,1/4"][..],
        &["verify", "--suite", "nothing"],
        &["gauge", "ball:abs,eps=0", "[1]"],
        &["member", "cex:eps=1", "<1|"],
        &["verify", "--space", "geometric:N=8", "--truncation", "16"],
    ] {
        let o = l0lab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn counterexample_suite_writes_a_passing_report() {
    let dir = std::env::temp_dir().join(format!("l0lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cex.json");
    let o = l0lab(&["verify", "--suite", "counterexample", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["passed"], true);
    assert_eq!(v["config"]["seed"], 42);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_l0lab"))
        .args(["verify", "--suite", "counterexample"])
        .env("L0LAB_SEED", "7")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    let o = Command::new(env!("CARGO_BIN_EXE_l0lab"))
        .args(["verify", "--suite", "counterexample"])
        .env("L0LAB_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
