use std::process::Command;

use linspace_cli::format::{parse_space, REPORT_SCHEMA};
use linspace_cli::run;

fn cli(args: &[&str], stdin: &str) -> (i32, String, String) {
    let mut input = stdin.as_bytes();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("linspace").chain(args.iter().copied());
    let code = run(argv, &mut input, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn ok(args: &[&str], stdin: &str) -> String {
    let (code, out, err) = cli(args, stdin);
    assert_eq!(code, 0, "{args:?} failed: {err}");
    out
}

#[test]
fn fano_is_homogeneous_through_a_pipe() {
    let plane = ok(&["pg", "2"], "");
    let out = ok(&["homog", "-"], &plane);
    assert!(out.contains("homogeneous: true"), "{out}");
    assert!(out.contains("automorphisms: 168"));
}

#[test]
fn validate_rejects_two_lines_sharing_two_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ls");
    std::fs::write(&path, "points 4\nline 0 1 2\nline 0 1 3\n").unwrap();
    let (code, _, err) = cli(&["validate", path.to_str().unwrap()], "");
    assert_eq!(code, 1);
    assert!(err.contains("TwoLinesShareTwoPoints"), "{err}");
}

#[test]
fn ap_for_degree_three() {
    let out = ok(
        &["ap", "--class", "d3", "--max-points", "7", "--jobs", "2"],
        "",
    );
    assert!(out.contains("failures: 0"), "{out}");
}

#[test]
fn ap_for_the_full_class_reports_failures() {
    let out = ok(&["--json", "ap", "--class", "all", "--max-points", "5"], "");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(!v["result"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_name_the_flag() {
    let (code, _, err) = cli(&["ap", "--class", "nonsense"], "");
    assert_eq!(code, 2);
    assert!(err.contains("--class"), "{err}");
    let (code, _, err) = cli(&["planarise", "@quadrilateral", "--pairs", "0,1"], "");
    assert_eq!(code, 2);
    assert!(err.contains("--pairs"), "{err}");
    let (code, _, err) = cli(&["homog", "--bogus", "@fano"], "");
    assert_eq!(code, 2);
    assert!(err.contains("--bogus"), "{err}");
}

#[test]
fn formats_round_trip() {
    for space in [
        "@fano",
        "@pg:3",
        "@near-pencil:5",
        "@pentagon",
        "@trivial:0",
    ] {
        let text = ok(&["convert", space, "--to", "text"], "");
        let json = ok(&["convert", space, "--to", "json"], "");
        let (a, _) = parse_space(&text).unwrap();
        let (b, _) = parse_space(&json).unwrap();
        assert_eq!(a, b);
        assert_eq!(ok(&["convert", "-", "--to", "text"], &json), text);
    }
    let dot = ok(&["convert", "@fano", "--to", "dot"], "");
    assert!(dot.starts_with("graph incidence {"));
}

#[test]
fn json_reports_are_versioned() {
    let out = ok(&["--json", "info", "@fano"], "");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], REPORT_SCHEMA);
    assert_eq!(v["command"], "info");
    assert_eq!(v["result"]["is_projective_plane"], true);
}

#[test]
fn certificate_round_trip() {
    let cert = ok(&["--json", "incompatible", "@quadrilateral"], "");
    assert!(ok(&["verify-cert", "-"], &cert).contains("verified: true"));

    let mut v: serde_json::Value = serde_json::from_str(&cert).unwrap();
    let l1 = v["result"]["cert"]["l1"].clone();
    v["result"]["cert"]["l3"] = l1;
    let (code, out, _) = cli(&["verify-cert", "-"], &v.to_string());
    assert_eq!(code, 1);
    assert!(out.contains("verified: false"));

    let (code, _, err) = cli(&["incompatible", "@fano"], "");
    assert_eq!(code, 1);
    assert!(err.contains("closed"), "{err}");
}

#[test]
fn planarise_and_dual() {
    let out = ok(&["planarise", "@quadrilateral", "--pairs", "0,1:2,3"], "");
    let (b, _) = parse_space(&out).unwrap();
    assert_eq!(b.n_points(), 5);
    let out = ok(&["dual", "@fano"], "");
    assert_eq!(parse_space(&out).unwrap().0.n_points(), 7);
    let (code, _, _) = cli(&["planarise", "@triangle", "--pairs", "0,1:1,2"], "");
    assert_eq!(code, 1);
}

#[test]
fn amalgamate_free_and_in_class() {
    let dir = tempfile::tempdir().unwrap();
    let ext = dir.path().join("ext.ls");
    std::fs::write(&ext, "points 4\nline 0 1 3\n").unwrap();
    let ext = ext.to_str().unwrap();
    let out = ok(
        &[
            "amalgamate",
            "@triangle",
            "@trivial:4",
            ext,
            "--in-class",
            "d3",
        ],
        "",
    );
    assert!(out.contains("DeclaredTriple"), "{out}");
    let out = ok(&["amalgamate", "@fano", "@fano", "@fano"], "");
    assert!(out.contains("points 7"));
}

#[test]
fn game_is_deterministic() {
    let args = [
        "--json",
        "game",
        "--start",
        "@triangle",
        "--rounds",
        "6",
        "--strategy-a",
        "random_extension",
        "--strategy-b",
        "closure-strategy",
        "--seed",
        "7",
    ];
    assert_eq!(ok(&args, ""), ok(&args, ""));
    let (code, _, err) = cli(&["game", "--strategy-a", "nobody"], "");
    assert_eq!(code, 2);
    assert!(err.contains("--strategy-a"));
}

#[test]
fn completion_budget_is_reported() {
    let out = ok(&["complete", "@quadrilateral", "--rounds", "2"], "");
    assert!(out.contains("projective plane: false"));
    let (code, _, err) = cli(&["complete", "@quadrilateral", "--rounds", "4"], "");
    assert_eq!(code, 1);
    assert!(err.contains("round 4"), "{err}");
}

#[test]
fn enumerate_and_classify() {
    let out = ok(&["--json", "enumerate", "--points", "6"], "");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        v["result"]["counts"],
        serde_json::json!([1, 1, 1, 2, 3, 5, 10])
    );
    let out = ok(&["classify", "--max-points", "4"], "");
    assert!(out.contains("false"));
}

#[test]
fn binary_honours_the_budget_variable() {
    let bin = env!("CARGO_BIN_EXE_linspace");
    let out = Command::new(bin)
        .args(["aut", "@pg:3"])
        .env(linspace_cli::BUDGET_ENV, "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    let out = Command::new(bin).args(["aut", "@fano"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "automorphisms: 168\n");
}
