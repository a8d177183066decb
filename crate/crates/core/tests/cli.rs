//! The command line binary: exit codes, outputs, and written artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn ordsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordsep")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ordsep-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn dihedral_instance_exits_with_hypothesis_code() {
    let out = ordsep(&["separate", data("dihedral.json").to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "SharedFactorOrder");
}

#[test]
fn separate_writes_a_verified_certificate() {
    let cert = scratch("abc.json");
    let dot = scratch("dot");
    let out = ordsep(&[
        "separate",
        data("z2z3_abc.json").to_str().unwrap(),
        "--out",
        cert.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["verified"], true);
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(written["schema"], 1);
    assert_eq!(written["verified"], true);
    assert!(dot.join("component_0.dot").exists());

    let out = ordsep(&["verify", data("z2z3_abc.json").to_str().unwrap(), cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["pass"], true);
}

#[test]
fn tampered_certificate_exits_with_verification_code() {
    let cert = scratch("tamper.json");
    let out = ordsep(&["separate", data("z2z3_abc.json").to_str().unwrap(), "--out", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    c["orders"]["2"] = 12.into();
    let tampered = scratch("tampered.json");
    std::fs::write(&tampered, c.to_string()).unwrap();
    let out = ordsep(&["verify", data("z2z3_abc.json").to_str().unwrap(), tampered.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(4));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "VerificationFailed");
}

#[test]
fn malformed_input_exits_with_parse_code() {
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\"factors\": 3}").unwrap();
    assert_eq!(ordsep(&["separate", bad.to_str().unwrap()]).status.code(), Some(5));
    assert_eq!(ordsep(&["separate", "/nonexistent/instance.json"]).status.code(), Some(5));
    assert_eq!(ordsep(&["no-such-command"]).status.code(), Some(5));
    let out = ordsep(&["separate", data("z2z3_abc.json").to_str().unwrap(), "--mode", "bogus"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn certificates_are_byte_identical_across_runs() {
    let a = scratch("det_a.json");
    let b = scratch("det_b.json");
    for p in [&a, &b] {
        let out = ordsep(&["separate", data("z2z3_classes.json").to_str().unwrap(), "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn forced_modes_and_infinite_factors() {
    for name in ["free_powers.json", "z_z3_mixed.json"] {
        let cert = scratch(name);
        let out = ordsep(&["separate", data(name).to_str().unwrap(), "--out", cert.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn lemma_commands_print_results() {
    for (name, count) in [("lemma1.json", 1), ("lemma2.json", 1), ("lemma4.json", 3)] {
        let out = ordsep(&[name.trim_end_matches(".json"), data(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let res = stdout_json(&out);
        assert_eq!(res["orders"].as_array().unwrap().len(), count, "{name}");
    }
    let out = ordsep(&["lemma3", data("lemma3.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let orders = stdout_json(&out)["orders"].as_array().unwrap().clone();
    assert_ne!(orders[0], orders[1]);
    assert!(orders.iter().all(|o| o.as_u64().unwrap() % 3 != 0));
}

#[test]
fn lemma_arguments_missing_prime() {
    let bad = scratch("noprime.json");
    let text = std::fs::read_to_string(data("lemma1.json")).unwrap().replace(",\"p\":2", "");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(ordsep(&["lemma1", bad.to_str().unwrap()]).status.code(), Some(5));
}

#[test]
fn oracle_reports_witness_and_absence() {
    let out = ordsep(&["oracle", data("z2z3_abc.json").to_str().unwrap(), "--max-degree", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["found"], true);
    let out = ordsep(&["oracle", data("dihedral.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["found"], false);
}

#[test]
fn graph_commands() {
    let g = data("graph_z2z3.json");
    let out = ordsep(&["graph", "surgery", g.to_str().unwrap(), "--t", "2", "--mark", "0:0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["vcount"], 12);
    let out = ordsep(&["graph", "product", g.to_str().unwrap(), g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = ordsep(&["graph", "dot", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("digraph"));
    let out = ordsep(&["graph", "surgery", g.to_str().unwrap(), "--t", "2", "--mark", "0:0", "--mark", "3:0", "--json"]);
    assert_eq!(out.status.code(), Some(2));
}
