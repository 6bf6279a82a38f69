use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toric-spec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for name in ["cp1", "cp2", "square", "h2"] {
        let out = run(dir.path(), &["library", name, "--out", &format!("{name}.json")]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    fs::write(
        dir.path().join("fake.json"),
        r#"{"schema":1,"dim":2,"unit":"2pi","name":"fake weighted triangle","facets":[
            {"normal":[1,0],"offset":"0"},{"normal":[0,1],"offset":"0"},{"normal":[-1,-2],"offset":"2"}]}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("sheared.json"),
        r#"{"dim":2,"facets":[{"normal":[1,-1],"offset":"0"},{"normal":[0,1],"offset":"0"},
            {"normal":[-1,1],"offset":"1"},{"normal":[0,-1],"offset":"1"}]}"#,
    )
    .unwrap();
    fs::write(dir.path().join("malformed.json"), "{\"dim\": 2, \"facets\": [").unwrap();
    dir
}

#[test]
fn validate_reports() {
    let dir = setup();
    let ok = run(dir.path(), &["validate", "square.json"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("Delzant: OK, prequantizable: c = 0, half-form: u = (1,1)\n"));

    let fake = run(dir.path(), &["validate", "fake.json"]);
    assert_eq!(fake.status.code(), Some(1));
    assert!(stdout(&fake).contains("vertex (0,1): normals of facets [0, 2] have det = -2"), "{}", stdout(&fake));

    assert_eq!(run(dir.path(), &["validate", "malformed.json"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["validate", "missing.json"]).status.code(), Some(2));
    fs::write(dir.path().join("v2.json"), r#"{"schema":2,"dim":1,"facets":[]}"#).unwrap();
    assert_eq!(run(dir.path(), &["validate", "v2.json"]).status.code(), Some(2));

    fs::write(
        dir.path().join("abs.json"),
        r#"{"dim":1,"unit":"absolute","facets":[{"normal":[1],"offset":"1"},{"normal":[-1],"offset":"1"}]}"#,
    )
    .unwrap();
    let abs = run(dir.path(), &["validate", "abs.json"]);
    assert_eq!(abs.status.code(), Some(0));
    assert!(stdout(&abs).contains("prequantizable: no"));
    assert!(stdout(&abs).contains("absolute units"));
    assert_eq!(run(dir.path(), &["spectrum", "abs.json", "--k", "2"]).status.code(), Some(1));
}

#[test]
fn spectrum_files() {
    let dir = setup();
    let out = run(dir.path(), &["spectrum", "square.json", "--k", "2", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(0));
    let cloud: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(cloud["points"].as_array().unwrap().len(), 9);
    assert_eq!(cloud["schema"], 1);

    let meta = run(dir.path(), &["spectrum", "cp2.json", "--k", "2", "--metaplectic"]);
    assert_eq!(meta.status.code(), Some(1));
    assert!(stderr(&meta).contains("no half-form bundle"));

    fs::write(dir.path().join("g.json"), r#"{"schema":1,"dim":1,"coefficients":[]}"#).unwrap();
    let csv = run(dir.path(), &["spectrum", "cp1.json", "--k", "3", "--deform", "g.json", "--plot-data", "p.csv"]);
    assert_eq!(csv.status.code(), Some(0), "{}", stderr(&csv));
    let text = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "0");
    assert!(lines[2].starts_with("2.094395"));

    assert_eq!(run(dir.path(), &["spectrum", "square.json", "--k", "0"]).status.code(), Some(2));
    fs::write(dir.path().join("bad_g.json"), r#"{"dim":1,"coefficients":[[[{"coeff":0.5,"powers":[1]}]]]}"#).unwrap();
    assert_eq!(run(dir.path(), &["spectrum", "cp1.json", "--k", "2", "--deform", "bad_g.json"]).status.code(), Some(2));
}

#[test]
fn seeded_noise_is_byte_identical() {
    let dir = setup();
    fs::write(
        dir.path().join("g.json"),
        r#"{"dim":2,"coefficients":[[[{"coeff":"3/10","powers":[1,0]}],[{"coeff":"1/5","powers":[0,1]}]]]}"#,
    )
    .unwrap();
    let args = |out: &'static str| {
        vec!["spectrum", "h2.json", "--k", "6", "--deform", "g.json", "--noise", "0.5,1", "--seed", "42", "--out", out]
    };
    assert_eq!(run(dir.path(), &args("a.json")).status.code(), Some(0));
    assert_eq!(run(dir.path(), &args("b.json")).status.code(), Some(0));
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
    let mut other = args("c.json");
    other[9] = "43";
    assert_eq!(run(dir.path(), &other).status.code(), Some(0));
    assert_ne!(a, fs::read(dir.path().join("c.json")).unwrap());
}

#[test]
fn oracle_agreement() {
    let dir = setup();
    let cp1 = run(dir.path(), &["oracle", "cp1.json", "--k", "5"]);
    assert_eq!(cp1.status.code(), Some(0));
    assert_eq!(stdout(&cp1).trim(), "dim 6, sets identical");
    let cp2 = run(dir.path(), &["oracle", "cp2.json", "--k", "3"]);
    assert_eq!(cp2.status.code(), Some(0));
    assert!(stdout(&cp2).contains("dim 10"));
    let h2 = run(dir.path(), &["oracle", "h2.json", "--k", "4", "--metaplectic", "--out", "o.json"]);
    assert_eq!(h2.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o.json")).unwrap()).unwrap();
    assert_eq!(doc["alpha"].as_array().unwrap().len(), doc["points"].as_array().unwrap().len());
}

#[test]
fn reconstruct_and_compare() {
    let dir = setup();
    for k in ["8", "32"] {
        let out = run(dir.path(), &["spectrum", "square.json", "--k", k, "--out", &format!("s{k}.json")]);
        assert_eq!(out.status.code(), Some(0));
    }
    let r = run(dir.path(), &["reconstruct", "s8.json", "s32.json", "--out", "result.json"]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    assert!(stdout(&r).contains("Delzant: OK"));
    let same = run(dir.path(), &["compare", "result.json", "square.json"]);
    assert_eq!(same.status.code(), Some(0));
    assert!(stdout(&same).contains("polytopes: isomorphic"));
    assert!(stdout(&same).contains("spectra: identical"));

    let diff = run(dir.path(), &["compare", "square.json", "sheared.json"]);
    assert_eq!(diff.status.code(), Some(1));
    assert!(stdout(&diff).contains("NOT isomorphic"));

    fs::write(dir.path().join("cfg.json"), r#"{"schema":1,"snap_tolerance":1e-12,"minimum_clouds":3}"#).unwrap();
    let few = run(dir.path(), &["reconstruct", "s8.json", "s32.json", "--config", "cfg.json"]);
    assert_eq!(few.status.code(), Some(1));
    fs::write(dir.path().join("cfg2.json"), r#"{"denominator_bound":0}"#).unwrap();
    assert_eq!(run(dir.path(), &["reconstruct", "s8.json", "--config", "cfg2.json"]).status.code(), Some(2));
}

#[test]
fn weyl_table() {
    let dir = setup();
    let out = run(dir.path(), &["weyl", "cp1.json", "--kmax", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<Vec<String>> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (i + 1).to_string());
        assert_eq!(row[1], (i + 2).to_string());
        assert_eq!(row[3].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn manifests_and_threads() {
    let dir = setup();
    let out = run(dir.path(), &["spectrum", "square.json", "--k", "3", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(0));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "spectrum");
    assert_eq!(m["exit_code"], 0);
    let bytes = fs::read(dir.path().join("c.json")).unwrap();
    let digest = m["outputs"][0]["sha256"].as_str().unwrap().to_string();
    assert_eq!(digest, hex::encode(Sha256::digest(&bytes)));
    let input = m["inputs"][0]["path"].as_str().unwrap();
    assert_eq!(input, "square.json");

    let fail = run(dir.path(), &["validate", "malformed.json", "--manifest", "m.json"]);
    assert_eq!(fail.status.code(), Some(2));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(m["exit_code"], 2);
    assert!(m["error"].as_str().unwrap().contains("parse error"));

    let threaded = Command::new(env!("CARGO_BIN_EXE_toric-spec"))
        .args(["weyl", "square.json", "--kmax", "3"])
        .env("TORIC_SPEC_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(threaded.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_toric-spec"))
        .args(["weyl", "square.json", "--kmax", "3"])
        .env("TORIC_SPEC_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
