use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn sil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sil")).args(args).output().expect("run sil")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn single_germ(dir: &Path) -> PathBuf {
    write(
        dir,
        "single.json",
        &json!({"n": 1, "characteristics": [
            {"name": "y1", "initial_index": 1, "blocks": [{"kind": "N1", "lambda": 1, "b": 1}]}
        ]}),
    )
}

fn ellipsoid2(dir: &Path) -> PathBuf {
    let p = dir.join("ellipsoid2.json");
    let o = sil(&["ellipsoid", "--axes", "1,phi", "--out", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    p
}

#[test]
fn index_table() {
    let dir = tempfile::tempdir().unwrap();
    let m = single_germ(dir.path());
    let o = sil(&["index", "--model", m.to_str().unwrap(), "--orbit", "y1", "--max", "5"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "m,i_maslov,i_viterbo,nullity,good\n1,1,0,1,good\n2,3,2,1,good\n3,5,4,1,good\n4,7,6,1,good\n5,9,8,1,good\n"
    );
}

#[test]
fn mean_and_morse() {
    let dir = tempfile::tempdir().unwrap();
    let m = single_germ(dir.path());
    let o = sil(&["mean", "--model", m.to_str().unwrap()]);
    assert_eq!(stdout(&o), "name,mean_index,sign\ny1,2,1\n");
    let o = sil(&["morse", "--model", m.to_str().unwrap(), "--lo", "-1", "--hi", "9"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "p,M_p\n0,1\n2,1\n4,1\n6,1\n8,1\n");
    assert!(stderr(&o).contains("holds"));
}

#[test]
fn jump_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let m = single_germ(dir.path());
    let cert = dir.path().join("cert.json");
    let o = sil(&["jump", "--model", m.to_str().unwrap(), "--count", "2", "--dual", "--out", cert.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    let first = &v[0];
    let n = first["N"].as_u64().unwrap();
    assert_eq!(n % 2, 0);
    assert_eq!(first["m"], json!([n / 2]));
    assert_eq!(first["tool_version"], json!(env!("CARGO_PKG_VERSION")));
    assert_eq!(first["model_hash"].as_str().unwrap().len(), 64);
    assert_eq!(v.as_array().unwrap().len(), 4);

    let o = sil(&["verify", "--model", m.to_str().unwrap(), "--cert", cert.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with(&format!("N = {}: pass", n)));

    let mut bad = first.clone();
    bad["m"] = json!([n / 2 + 1]);
    let bad_path = write(dir.path(), "bad.json", &bad);
    let o = sil(&["verify", "--model", m.to_str().unwrap(), "--cert", bad_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("(3.30) violated for y1"));

    // a different model file invalidates the hash
    let other = write(
        dir.path(),
        "other.json",
        &json!({"n": 1, "characteristics": [
            {"name": "y1", "initial_index": 1, "blocks": [{"kind": "N1", "lambda": 1, "b": 1}]}
        ], "metadata": {"note": "copy"}}),
    );
    let o = sil(&["verify", "--model", other.to_str().unwrap(), "--cert", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model hash"));
}

#[test]
fn report_on_ellipsoid() {
    let dir = tempfile::tempdir().unwrap();
    let m = ellipsoid2(dir.path());
    let out = dir.path().join("report.json");
    let o = sil(&["report", "--model", m.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "lower bound 2; non-hyperbolic: y1, y2\n");
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["bound"], json!(2));
    assert_eq!(v["primary"]["N"], json!(5168));

    let o = sil(&["resonance", "--model", m.to_str().unwrap()]);
    assert!(o.status.success());
    let o = sil(&["perfect", "--model", m.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("perfect\n"));
}

#[test]
fn abstract_jump_form() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "rows.json", &json!({"rows": [{"beta": -1, "alpha": ["sqrt(2)"]}], "delta": "1/10"}));
    let o = sil(&["abstract-jump", "--input", input.to_str().unwrap(), "--count", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ns: Vec<u64> = v.as_array().unwrap().iter().map(|c| c["N"].as_u64().unwrap()).collect();
    assert_eq!(ns, vec![408, 985, 1393]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = sil(&["ellipsoid", "--axes", "1,3/2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate ellipsoid"));

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{not json").unwrap();
    assert_eq!(sil(&["mean", "--model", garbage.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(sil(&["frobnicate"]).status.code(), Some(2));

    // golden and conjugate rotations without the declared relation
    let undecidable = write(
        dir.path(),
        "undecidable.json",
        &json!({"n": 3, "characteristics": [{"name": "z", "initial_index": -1, "blocks": [
            {"kind": "N1", "lambda": 1, "b": 1},
            {"kind": "R", "rho": {"type": "irrational", "decimal": "0.61803398874989484820458683436563811772030917980576", "digits": 50}},
            {"kind": "R", "rho": {"type": "irrational", "decimal": "0.38196601125010515179541316563436188227969082019424", "digits": 50}}
        ]}]}),
    );
    let o = sil(&["mean", "--model", undecidable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let m = ellipsoid2(dir.path());
    let o = sil(&["jump", "--model", m.to_str().unwrap(), "--scan-limit", "100"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("scan exhausted"));
}

#[test]
fn precision_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    let o = Command::new(env!("CARGO_BIN_EXE_sil"))
        .args(["ellipsoid", "--axes", "1,phi", "--out", out.to_str().unwrap()])
        .env("SIL_PRECISION_DIGITS", "20")
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["characteristics"][0]["blocks"][1]["rho"]["digits"], json!(20));

    let o = Command::new(env!("CARGO_BIN_EXE_sil"))
        .args(["ellipsoid", "--axes", "1,phi"])
        .env("SIL_PRECISION_DIGITS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let m = ellipsoid2(dir.path());
    let mut texts = Vec::new();
    for w in ["1", "3"] {
        let cert = dir.path().join(format!("cert{}.json", w));
        let report = dir.path().join(format!("report{}.json", w));
        let o = sil(&["jump", "--model", m.to_str().unwrap(), "--count", "3", "--dual", "--workers", w, "--out", cert.to_str().unwrap()]);
        assert!(o.status.success());
        let o = sil(&["report", "--model", m.to_str().unwrap(), "--workers", w, "--out", report.to_str().unwrap()]);
        assert!(o.status.success());
        texts.push((fs::read(&cert).unwrap(), fs::read(&report).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
}
