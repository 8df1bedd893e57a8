use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn smd2cpn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smd2cpn")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn translate_writes_a_deterministic_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cd.cpn");
    let dot = dir.path().join("cd.dot");
    let input = corpus("cdplayer.smdl");
    let args = [
        "translate",
        input.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ];
    let first = smd2cpn(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let text = stdout(&first);
    assert!(text.contains("places: 16") && text.contains("arcs: 118"), "{text}");
    let ms: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("time: "))
        .and_then(|t| t.strip_suffix(" ms"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ms < 1000.0);
    let a = std::fs::read(&out).unwrap();
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    assert_eq!(smd2cpn(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), a);
}

#[test]
fn check_reports_duplicates_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.smdl");
    std::fs::write(&bad, "machine M {\n  state A initial;\n  state A;\n}\n").unwrap();
    let o = smd2cpn(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`A`") && err.contains("more than once"), "{err}");
}

#[test]
fn check_accepts_the_corpus() {
    let o = smd2cpn(&["check", corpus("cdplayer.smdl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valid"));
}

#[test]
fn syntax_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.smdl");
    std::fs::write(&bad, "machine M { state A initial;").unwrap();
    assert_eq!(smd2cpn(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn simulate_reports_states_and_safety() {
    let o = smd2cpn(&["simulate", corpus("cdplayer.smdl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("reachable markings: 2528") && text.contains("1-safe: yes"), "{text}");
}

#[test]
fn equiv_at_depth_six() {
    let o = smd2cpn(&["equiv", corpus("cdplayer.smdl").to_str().unwrap(), "--depth", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("equivalent up to depth 6"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(smd2cpn(&[]).status.code(), Some(1));
    assert_eq!(smd2cpn(&["translate"]).status.code(), Some(1));
    assert_eq!(smd2cpn(&["equiv", "x.smdl", "--depth", "0"]).status.code(), Some(1));
    assert_eq!(smd2cpn(&["check", "/nonexistent/model.smdl"]).status.code(), Some(1));
    assert_eq!(smd2cpn(&["--help"]).status.code(), Some(0));
}
