use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cdspack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdspack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cdspack(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn ratio(v: &Value) -> (i64, i64) {
    let text = v.as_str().unwrap();
    match text.split_once('/') {
        Some((a, b)) => (a.parse().unwrap(), b.parse().unwrap()),
        None => (text.parse().unwrap(), 1),
    }
}

#[test]
fn conn_on_clique_chain_prints_three() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "chain.txt");
    ok(&["gen", "--family", "clique-chain", "--n", "12", "--k", "3", "--out", s(&g)]);
    assert_eq!(ok(&["conn", "--graph", s(&g)]).trim(), "3");
    let meta = json(&path(&dir, "chain.txt.meta.json"));
    assert_eq!(meta["k"], 3);
    assert_eq!(meta["family"], "clique-chain");
}

#[test]
fn pack_then_verify_passes() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "h.txt");
    let p = path(&dir, "p.json");
    ok(&["gen", "--family", "harary", "--k", "16", "--n", "256", "--out", s(&g)]);
    ok(&["pack", "--graph", s(&g), "--k", "AUTO", "--seed", "5", "--out", s(&p)]);
    let report = json(&p);
    assert_eq!(report["k"], 16);
    assert_eq!(report["seed"], 5);
    assert!(report["size"].as_f64().unwrap() <= 16.0);
    let out = cdspack(&["verify", "--graph", s(&g), "--packing", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_rejects_overloaded_packing() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "c.txt");
    let p = path(&dir, "bad.json");
    ok(&["gen", "--family", "cycle", "--n", "6", "--out", s(&g)]);
    let bad = serde_json::json!({
        "n": 6, "k": 2, "p": 1.0, "t": 2, "L": 11,
        "classes": [[0, 1, 2, 3], [0, 1, 2, 3]],
        "weights": [0.75, 0.75],
        "size": 1.5, "valid": true
    });
    std::fs::write(&p, bad.to_string()).unwrap();
    let out = cdspack(&["verify", "--graph", s(&g), "--packing", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn extract_after_simulate_bounds_throughput() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "h.txt");
    let p = path(&dir, "p.json");
    let log = path(&dir, "log.csv");
    let x = path(&dir, "x.json");
    ok(&["gen", "--family", "harary", "--k", "8", "--n", "64", "--out", s(&g)]);
    ok(&["pack", "--graph", s(&g), "--seed", "1", "--out", s(&p)]);
    ok(&["simulate", "--graph", s(&g), "--packing", s(&p), "--messages", "25", "--seed", "3", "--out", s(&log)]);
    let sim = json(&path(&dir, "log.json"));
    let (msgs, rounds) = (sim["report"]["messages"].as_i64().unwrap(), sim["report"]["rounds"].as_i64().unwrap());
    ok(&["extract", "--log", s(&log), "--graph", s(&g), "--out", s(&x)]);
    let extracted = json(&x);
    let (a, b) = ratio(&extracted["size_exact"]);
    assert!(a * rounds >= msgs * b, "size {a}/{b} below throughput {msgs}/{rounds}");
    assert_eq!(extracted["valid"], true);
}

#[test]
fn seeds_are_reproducible_and_recorded() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "g.txt");
    ok(&["gen", "--family", "gnp", "--n", "40", "--p", "0.3", "--seed", "11", "--out", s(&g)]);
    let first = std::fs::read_to_string(&g).unwrap();
    ok(&["gen", "--family", "gnp", "--n", "40", "--p", "0.3", "--seed", "11", "--out", s(&g)]);
    assert_eq!(first, std::fs::read_to_string(&g).unwrap());

    let h = path(&dir, "h.txt");
    let p = path(&dir, "p.json");
    ok(&["gen", "--family", "harary", "--k", "6", "--n", "50", "--out", s(&h)]);
    let out = cdspack(&["pack", "--graph", s(&h), "--out", s(&p)]);
    assert!(out.status.success());
    let seed = json(&p)["seed"].as_u64().expect("entropy seed recorded");
    assert!(String::from_utf8_lossy(&out.stderr).contains(&seed.to_string()));
    let replay = path(&dir, "replay.json");
    ok(&["pack", "--graph", s(&h), "--seed", &seed.to_string(), "--out", s(&replay)]);
    assert_eq!(json(&p), json(&replay));
}

#[test]
fn experiment_output_ignores_worker_count() {
    let dir = TempDir::new().unwrap();
    let run = |workers: &str, name: &str| {
        let out = path(&dir, name);
        ok(&[
            "experiment", "sampled-conn", "--config", "family=clique-chain", "n=60", "k=6", "p=0.5,0.9", "trials=16",
            "seed=4", "--workers", workers, "--out", s(&out),
        ]);
        let csv = std::fs::read_to_string(&out).unwrap();
        let manifest = std::fs::read_to_string(out.with_extension("json")).unwrap();
        (csv, manifest)
    };
    assert_eq!(run("1", "a.csv"), run("3", "b.csv"));
}

#[test]
fn partition_writes_valid_report() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "k.txt");
    let out = path(&dir, "part.json");
    ok(&["gen", "--family", "complete", "--n", "30", "--out", s(&g)]);
    ok(&["partition", "--graph", s(&g), "--k", "29", "--seed", "2", "--out", s(&out)]);
    let report = json(&out);
    assert_eq!(report["valid"], true);
    assert!(report["count"].as_u64().unwrap() >= 1);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(cdspack(&["conn", "--graph", "/definitely/missing.txt"]).status.code(), Some(3));
    assert_eq!(cdspack(&["pack", "--no-such-flag"]).status.code(), Some(2));
    let bad = path(&dir, "bad.txt");
    std::fs::write(&bad, "3\n0 x\n").unwrap();
    let out = cdspack(&["conn", "--graph", s(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
    assert_eq!(
        cdspack(&["gen", "--family", "harary", "--n", "10", "--out", s(&path(&dir, "x.txt"))]).status.code(),
        Some(2)
    );
}
