use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdlc-lab"))
        .args(args)
        .env_remove("TDLC_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = lab(&all);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (o.status.code().unwrap(), v)
}

#[test]
fn minimal_action_exits_zero() {
    let o = lab(&["dynamics", "minimal", "preset:u_s3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: verified"));
}

#[test]
fn rotation_measure_is_feasible() {
    let (code, v) = json(&["dynamics", "measure", "preset:rotations", "--depths", "2,3"]);
    assert_eq!(code, 1);
    let weights = v["result"][0]["verdict"]["weights"].as_object().unwrap();
    assert_eq!(weights.len(), 6);
    assert!(weights.values().all(|w| w == "1/6"));
}

#[test]
fn two_copy_degree() {
    let (code, v) = json(&["dynamics", "degree", "preset:two_copy"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["degree"], 2);
}

#[test]
fn free_semigroup_table() {
    let (code, v) = json(&["certify", "free-semigroup", "preset:u_s3", "--L", "8"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["table"].as_array().unwrap().len(), 511);
    let text = stdout(&lab(&[
        "certify",
        "free-semigroup",
        "preset:u_s3",
        "--L",
        "8",
    ]));
    assert!(text.contains("rows: 511"));
}

#[test]
fn contraction_step() {
    let (code, v) = json(&[
        "certify",
        "contraction",
        "preset:contraction",
        "--element",
        "g",
        "--u",
        "u1",
        "--ball",
        "4",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["step"], 4);
}

#[test]
fn elliptic_goodshrink_is_refuted() {
    let o = lab(&[
        "certify",
        "goodshrink",
        "preset:contraction",
        "--element",
        "e",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not skewering"));
}

#[test]
fn exports() {
    let count = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| l.contains("[label=") && !l.contains("->") && !l.contains("--"))
            .count()
    };
    let ball = lab(&["export", "cayley-abels", "preset:u_s3", "--radius", "2"]);
    assert_eq!(ball.status.code(), Some(0));
    assert_eq!(count(&ball), 10);
    let schreier = lab(&[
        "export",
        "schreier",
        "--degree",
        "4",
        "--gen",
        "(0 1)",
        "--gen",
        "(0 1 2 3)",
        "--stab",
        "0",
    ]);
    assert_eq!(count(&schreier), 4);
    let stone = lab(&["export", "stone-orbit", "preset:u_s3", "--depth", "2"]);
    assert_eq!(count(&stone), 6);
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("ball.dot");
    let o = lab(&[
        "export",
        "--dot",
        dot.to_str().unwrap(),
        "cayley-abels",
        "preset:u_s3",
        "--radius",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&dot).unwrap(), stdout(&o));
    let (_, v) = json(&["export", "stone-orbit", "preset:u_s3", "--depth", "2"]);
    assert_eq!(v["graph"]["nodes"].as_array().unwrap().len(), 6);
}

#[test]
fn malformed_cycle_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tdlc");
    std::fs::write(
        &path,
        "[tree]\nkind = regular\ndegree = 3\n[local_group]\ngenerators = (0 1 2), (0 1\n",
    )
    .unwrap();
    let o = lab(&["dynamics", "minimal", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 5, column"), "{err}");
}

#[test]
fn report_local() {
    let (code, v) = json(&["report-local", "preset:u_s3", "--depths", "1..4"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["eta"]["eta"], serde_json::json!([2]));
    let max = v["result"]["sphere_orbits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["max_orbit"].as_u64().unwrap())
        .max();
    assert_eq!(max, Some(2));
    let (code, v) = json(&["report-local", "preset:rooted_c2", "--depths", "1..4"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["eta"]["eta"], serde_json::json!([2]));
    for level in v["result"]["realized_levels"].as_array().unwrap() {
        assert!(level["composition_factors"]
            .as_array()
            .unwrap()
            .iter()
            .all(|f| f == "C2"));
    }
}

#[test]
fn certificates_written_with_out_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let p = path.to_str().unwrap();
    let o = lab(&[
        "certify",
        "goodshrink",
        "preset:u_s3",
        "--element",
        "t0",
        "--depth",
        "5",
        "--format",
        "json",
        "--out",
        p,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let o = lab(&["replay", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("identical: true"));
    let text_mode = lab(&[
        "--out",
        p,
        "certify",
        "tits-core",
        "preset:u_s3",
        "--element",
        "t0",
    ]);
    assert!(stdout(&text_mode).contains("verdict: verified"));
    assert_eq!(lab(&["replay", p]).status.code(), Some(0));
    let tampered = std::fs::read_to_string(&path)
        .unwrap()
        .replace("\"verified\"", "\"refuted-at-depth\"");
    std::fs::write(&path, tampered).unwrap();
    assert_eq!(lab(&["replay", p]).status.code(), Some(1));
}

#[test]
fn cap_and_search_exit_codes() {
    let o = Command::new(env!("CARGO_BIN_EXE_tdlc-lab"))
        .args(["report-local", "preset:u_s3", "--depths", "1..3"])
        .env("TDLC_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = lab(&[
        "dynamics",
        "skewering",
        "preset:rotations",
        "--depth",
        "2",
        "--word-bound",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(4));
    let o = lab(&["dynamics", "minimal", "preset:nope"]);
    assert_eq!(o.status.code(), Some(2));
}
