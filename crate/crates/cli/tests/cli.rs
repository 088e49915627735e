// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

/// Runs `qnet` in `dir` with whitespace-separated arguments.
fn qnet(dir: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnet"))
        .current_dir(dir)
        .args(args.split_whitespace())
        .output()
        .expect("qnet runs")
}

fn code(dir: &Path, args: &str) -> i32 {
    let out = qnet(dir, args);
    if !out.status.success() {
        eprintln!("qnet {args}: {}", String::from_utf8_lossy(&out.stderr));
    }
    out.status.code().unwrap_or(-1)
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn records(dir: &Path, name: &str) -> usize {
    json(dir, name)["records"].as_array().unwrap().len()
}

#[test]
fn generate_two_nodes_is_a_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(p, "generate --nodes 2 --seed 1 --out n.json"), 0);
    let net = json(p, "n.json");
    assert_eq!(net["n"], 2);
    assert_eq!(net["edges"], serde_json::json!([[0, 1]]));
    let manifest = json(p, "n.json.manifest.json");
    assert_eq!(manifest["command"], "generate");
    assert_eq!(manifest["outputs"][0]["name"], "n.json");
}

#[test]
fn generate_rejects_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for args in [
        "generate --nodes 1 --seed 1 --out n.json",
        "generate --nodes 5 --seed 1 --edge-prob 1.5 --out n.json",
        "generate --nodes 5 --seed 1 --allow-disconnected --out n.json",
        "--threads 0 generate --nodes 5 --seed 1 --out n.json",
    ] {
        assert_eq!(code(p, args), 2, "{args}");
    }
    assert!(!p.join("n.json").exists());
}

#[test]
fn generate_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for (seed, name) in [(9, "a.json"), (9, "b.json"), (10, "c.json")] {
        assert_eq!(
            code(p, &format!("generate --nodes 9 --seed {seed} --out {name}")),
            0
        );
    }
    let read = |n: &str| std::fs::read(p.join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
}

#[test]
fn probe_fixed_excitation_and_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(p, "generate --nodes 4 --seed 2 --out n.json"), 0);

    assert_eq!(
        code(
            p,
            "probe --network n.json --excitation 0 --times 0.5,1,2 --out fixed.json"
        ),
        0
    );
    let fixed = json(p, "fixed.json");
    let recs = fixed["records"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    assert!(recs
        .iter()
        .all(|r| r["e"] == 0 && r["p"].as_array().unwrap().len() == 3));

    assert_eq!(
        code(
            p,
            "probe --network n.json --pairs all --times 1 --out all.json"
        ),
        0
    );
    assert_eq!(records(p, "all.json"), 12);

    for out in ["five.json", "five2.json"] {
        let args = format!("probe --network n.json --pairs 5 --auto-schedule --seed 3 --out {out}");
        assert_eq!(code(p, &args), 0);
    }
    assert_eq!(records(p, "five.json"), 5);
    assert_eq!(json(p, "five.json")["times"].as_array().unwrap().len(), 5);
    assert_eq!(
        std::fs::read(p.join("five.json")).unwrap(),
        std::fs::read(p.join("five2.json")).unwrap()
    );
    assert!(json(p, "five.json.manifest.json")["config"]["peak_time_fit"].is_object());
}

#[test]
fn probe_rejects_bad_procedures() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(p, "generate --nodes 4 --seed 2 --out n.json"), 0);
    for extra in [
        "--excitation 0 --pairs 3 --times 1",
        "--excitation 0",
        "--excitation 7 --times 1",
        "--pairs 13 --times 1",
        "--excitation 0 --times 2,1",
    ] {
        assert_eq!(
            code(p, &format!("probe --network n.json --out d.json {extra}")),
            2,
            "{extra}"
        );
    }
    let missing = "probe --network missing.json --excitation 0 --times 1 --out d.json";
    assert_eq!(code(p, missing), 1);
}

#[test]
fn reconstruct_two_nodes_exactly_at_first_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(p, "generate --nodes 2 --seed 1 --out n.json"), 0);
    assert_eq!(
        code(
            p,
            "probe --network n.json --excitation 0 --times 0.5,1 --out d.json"
        ),
        0
    );
    assert_eq!(
        code(p, "reconstruct --target-data d.json --seed 1 --out r.json"),
        0
    );
    let report = json(p, "r.json");
    assert_eq!(report["outcome"], "exact");
    assert_eq!(report["iterations"], 1);
    assert_eq!(
        report["best"]["network"]["edges"],
        serde_json::json!([[0, 1]])
    );
}

#[test]
fn reconstruct_reports_iteration_limit_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("ga.json"),
        r#"{"population_size": 10, "max_iterations": 1}"#,
    )
    .unwrap();
    assert_eq!(code(p, "generate --nodes 9 --seed 4 --out n.json"), 0);
    assert_eq!(
        code(
            p,
            "probe --network n.json --excitation 0 --auto-schedule --out d.json"
        ),
        0
    );
    let args = "reconstruct --target-data d.json --config ga.json --seed 2 --out r.json";
    assert_eq!(code(p, args), 3);
    assert_eq!(json(p, "r.json")["outcome"], "iteration_limit");
}

#[test]
fn reconstruct_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(p, "generate --nodes 3 --seed 1 --out n.json"), 0);
    assert_eq!(
        code(
            p,
            "probe --network n.json --excitation 0 --times 1 --out d.json"
        ),
        0
    );
    let text = std::fs::read_to_string(p.join("d.json")).unwrap();
    std::fs::write(p.join("cut.json"), &text[..text.len() / 2]).unwrap();
    assert_eq!(
        code(
            p,
            "reconstruct --target-data cut.json --seed 1 --out r.json"
        ),
        2
    );

    std::fs::write(p.join("ga.json"), r#"{"population_sise": 10}"#).unwrap();
    let args = "reconstruct --target-data d.json --config ga.json --seed 1 --out r.json";
    assert_eq!(code(p, args), 2);
    assert!(!p.join("r.json").exists());
}

#[test]
fn experiment_fdc_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = r#"{"n_values": [4], "n_targets": 3, "n_trials": 8, "t_step": 0.5, "t_max": 2.0}"#;
    std::fs::write(p.join("fdc.json"), cfg).unwrap();
    let args = "experiment --kind fdc --config fdc.json --seed 5 --out-dir out";
    assert_eq!(code(p, args), 0);
    let csv = std::fs::read_to_string(p.join("out/fdc_4_5.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,t,mean_fdc,replicates,excluded"));
    assert_eq!(lines.count(), 4);
    let sidecar = json(p, "out/fdc_4_5.json");
    assert_eq!(sidecar["seed"], 5);
    assert_eq!(sidecar["config"]["n_trials"], 8);
    let manifest = json(p, "out/fdc_4_5.manifest.json");
    assert_eq!(manifest["inputs"][0]["name"], "fdc.json");
}

#[test]
fn experiment_rejects_unknown_kind_and_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(p, "experiment --kind bogus --seed 1 --out-dir out"), 2);
    std::fs::write(p.join("pop.json"), r#"{"n": 5, "pop_size": [10]}"#).unwrap();
    assert_eq!(
        code(
            p,
            "experiment --kind pop --config pop.json --seed 1 --out-dir out"
        ),
        2
    );
    assert!(!p.join("out").exists());
}
