use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_designforge"));
    c.env_remove("DESIGNFORGE_BUDGET_SECS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const APS27: &str = r#"{"v":27,"pairs":[[1,4],[2,12],[5,13],[6,10],[7,8],[9,11]]}"#;
const PS13: &str = r#"{"v":13,"pairs":[[1,5],[2,3],[4,6]]}"#;

#[test]
fn verify_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let f = write(&d, "ex.json", APS27);
    let f = f.to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "verify", "--type", "aps", "--alpha", "3", "--beta", "6", "--file", f
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "verify", "--type", "aps", "--alpha", "3", "--beta", "5", "--file", f
        ])),
        1
    );
    assert_eq!(code(&run(&["verify", "--type", "aps", "--file", f])), 2);
    assert_eq!(code(&run(&["verify", "--file", "/nonexistent.json"])), 2);
    let o = run(&["--json", "verify", "--file", f]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["inferred"]["type"], "APS");
}

#[test]
fn verify_negative_alpha_and_pps() {
    let d = tempfile::tempdir().unwrap();
    let f = write(&d, "ex.json", APS27);
    let f = f.to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "verify", "--type", "aps", "--alpha", "-3", "--beta", "21", "--file", f
        ])),
        0
    );
    let o = run(&[
        "verify", "--type", "pps", "--a1", "0,3,-3", "--a2", "0,6,-6", "--file", f,
    ]);
    assert_eq!(code(&o), 0);
    let s = write(&d, "spec.json", r#"{"type":"APS","alpha":3,"beta":6}"#);
    assert_eq!(
        code(&run(&[
            "verify",
            "--spec-file",
            s.to_str().unwrap(),
            "--file",
            f
        ])),
        0
    );
}

#[test]
fn km_search_prints_ps13() {
    let o = run(&["--json", "search", "km", "--v", "13", "--spec", "ps"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["set"]["v"], 13);
    assert_eq!(v["set"]["pairs"].as_array().unwrap().len(), 3);
}

#[test]
fn budget_env_and_exhausted_searches() {
    let o = bin()
        .args([
            "search",
            "km",
            "--v",
            "133",
            "--spec",
            "ps",
            "--multiplier",
            "122",
        ])
        .env("DESIGNFORGE_BUDGET_SECS", "30")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = run(&[
        "search",
        "exhaustive",
        "--v",
        "11",
        "--spec",
        "aps",
        "--alpha",
        "1",
        "--beta",
        "1",
    ]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&run(&["construct", "aps", "--v", "11"])), 3);
    assert_eq!(code(&run(&["search", "admissible", "--v", "19"])), 3);
}

#[test]
fn admissible_listing() {
    let o = run(&["--json", "search", "admissible", "--v", "7"]);
    assert_eq!(code(&o), 0);
    let params = json(&o)["params"].clone();
    assert!(params
        .as_array()
        .unwrap()
        .iter()
        .any(|p| p == &serde_json::json!([1, 3])));
}

#[test]
fn catalog_commands() {
    let o = run(&["--json", "catalog", "ps-133"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["set"]["pairs"].as_array().unwrap().len(), 33);
    assert_eq!(v["check"]["ok"], true);
    let o = run(&["--json", "catalog", "aps-651-217"]);
    assert_eq!(json(&o)["set"]["pairs"].as_array().unwrap().len(), 162);
    assert_eq!(code(&run(&["catalog", "nope"])), 2);
    assert_eq!(code(&run(&["catalog", "--check"])), 0);
    let o = run(&["--json", "catalog", "--list"]);
    assert_eq!(json(&o).as_array().unwrap().len(), 10);
}

#[test]
fn construct_and_designs() {
    let d = tempfile::tempdir().unwrap();
    let ps = write(&d, "ps13.json", PS13);
    let ps = ps.to_str().unwrap();
    let o = run(&["--json", "construct", "silver", "--p", "7"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["set"]["pairs"], serde_json::json!([[4, 2]]));
    let o = run(&[
        "--json",
        "construct",
        "product",
        "--left",
        ps,
        "--right",
        ps,
    ]);
    assert_eq!(json(&o)["set"]["v"], 169);
    assert_eq!(
        code(&run(&[
            "whist",
            "from-pairs",
            "--file",
            ps,
            "--directed",
            "--ordered"
        ])),
        0
    );
    assert_eq!(code(&run(&["cdm", "from-pairs", "--file", ps])), 0);
    let o = run(&["--json", "ooc", "templates", "--file", ps]);
    assert_eq!(json(&o)["report"]["leave"], serde_json::json!([0, 13, 26]));
    let o = run(&["--json", "ooc", "p-squared", "--p", "7"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["maximality"]["maximal"], true);
}

#[test]
fn whist_and_cdm_file_roundtrip() {
    let d = tempfile::tempdir().unwrap();
    let ps = write(&d, "ps13.json", PS13);
    let o = run(&[
        "--json",
        "whist",
        "from-pairs",
        "--rounds",
        "--file",
        ps.to_str().unwrap(),
    ]);
    let t = write(&d, "t.json", &json(&o)["tournament"].to_string());
    assert_eq!(
        code(&run(&[
            "whist",
            "verify",
            "--zcps",
            "--directed",
            "--file",
            t.to_str().unwrap()
        ])),
        0
    );
    let bad = write(&d, "bad.json", r#"{"v":5,"rounds":[[[0,1,2,3]]]}"#);
    assert_eq!(
        code(&run(&["whist", "verify", "--file", bad.to_str().unwrap()])),
        1
    );
    let o = run(&[
        "--json",
        "cdm",
        "from-pairs",
        "--file",
        ps.to_str().unwrap(),
    ]);
    let mut m = json(&o)["matrix"].clone();
    let dm = write(&d, "dm.json", &m.to_string());
    assert_eq!(
        code(&run(&["cdm", "verify", "--file", dm.to_str().unwrap()])),
        0
    );
    m["rows"][1][1] = serde_json::json!(2);
    let dm = write(&d, "dm2.json", &m.to_string());
    assert_eq!(
        code(&run(&["cdm", "verify", "--file", dm.to_str().unwrap()])),
        1
    );
}

#[test]
fn ooc_verify_detects_repeats() {
    let d = tempfile::tempdir().unwrap();
    let f = write(
        &d,
        "c.json",
        r#"{"n":13,"k":3,"codewords":[[0,1,3],[0,1,4]]}"#,
    );
    assert_eq!(
        code(&run(&["ooc", "verify", "--file", f.to_str().unwrap()])),
        1
    );
    let f = write(&d, "c.json", r#"{"n":13,"k":3,"codewords":[[0,1,4]]}"#);
    let o = run(&[
        "--json",
        "ooc",
        "verify",
        "--maximal",
        "--file",
        f.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["maximality"]["maximal"], false);
}

#[test]
fn deterministic_output() {
    let a = run(&[
        "--json", "search", "km", "--v", "27", "--spec", "aps", "--alpha", "3", "--beta", "6",
    ]);
    let b = run(&[
        "--json", "search", "km", "--v", "27", "--spec", "aps", "--alpha", "3", "--beta", "6",
    ]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_output_feeds_back_in() {
    let d = tempfile::tempdir().unwrap();
    let save = |name: &str, args: &[&str]| {
        let o = run(args);
        assert_eq!(code(&o), 0, "{args:?}");
        write(&d, name, std::str::from_utf8(&o.stdout).unwrap())
    };
    let set = save("s.json", &["--json", "construct", "silver", "--p", "23"]);
    let entry = save("e.json", &["--json", "catalog", "ps-133"]);
    for f in [&set, &entry] {
        assert_eq!(code(&run(&["verify", "--file", f.to_str().unwrap()])), 0);
    }
    let e = entry.to_str().unwrap();
    let t = save(
        "t.json",
        &["--json", "whist", "from-pairs", "--file", e, "--rounds"],
    );
    let c = save("c.json", &["--json", "cdm", "from-pairs", "--file", e]);
    let o = save(
        "o.json",
        &["--json", "ooc", "templates", "--file", e, "--k", "5"],
    );
    for (sub, f) in [("whist", &t), ("cdm", &c), ("ooc", &o)] {
        let out = run(&[sub, "verify", "--file", f.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{sub}");
    }
}
