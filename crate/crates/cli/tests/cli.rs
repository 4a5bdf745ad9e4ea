use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use symctl::bundle::Bundle;
use symctl::trace::read_case;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn symctl(dir: &Path, args: &[&str]) -> Out {
    let o = Command::new(env!("CARGO_BIN_EXE_symctl"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    Out {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn put(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

/// `b` and `c` behave alike up to their names.
fn system() -> Value {
    json!({
        "states": ["a", "b", "c"],
        "initial": ["a"],
        "inputs": ["u", "v"],
        "trans": {
            "a|u": ["b", "c"], "a|v": ["a"],
            "b|u": ["a"], "b|v": ["c"],
            "c|u": ["a"], "c|v": ["b"]
        }
    })
}

/// Like `system`, but only `b` can reach `c`.
fn branching() -> Value {
    json!({
        "states": ["a", "b", "c"],
        "initial": ["a"],
        "inputs": ["u", "v"],
        "trans": {
            "a|u": ["b"], "a|v": ["c"],
            "b|u": ["a", "c"], "b|v": ["b"],
            "c|u": ["a"], "c|v": ["b"]
        }
    })
}

fn identity(kappa: f64) -> Value {
    let mut entries = Vec::new();
    for x in ["a", "b", "c"] {
        for u in ["u", "v"] {
            entries.push(json!({"x1": x, "x2": x, "u1": u, "u2": u, "gauge": kappa}));
        }
    }
    json!({"kappa": kappa, "entries": entries})
}

/// Writes a model whose observation abstraction merges `b` and `c`.
fn write_model(dir: &Path, sys: Value) {
    let mut plant = sys.clone();
    plant["outputs"] = json!({"a": "0", "b": "1", "c": "1"});
    put(dir, "sys.json", &sys);
    put(dir, "plant.json", &plant);
    put(dir, "id.json", &identity(0.0));
    put(
        dir,
        "oabs.json",
        &json!({
            "states": ["a", "m"],
            "initial": ["a"],
            "inputs": ["u", "v"],
            "trans": {"a|u": ["m"], "a|v": ["a"], "m|u": ["a"], "m|v": ["m"]}
        }),
    );
    let mut entries = Vec::new();
    for (x, o) in [("a", "a"), ("b", "m"), ("c", "m")] {
        for u in ["u", "v"] {
            entries.push(json!({"x1": x, "x2": o, "u1": u, "u2": u, "gauge": 0}));
        }
    }
    put(dir, "rel_o.json", &json!({"kappa": 0, "entries": entries}));
}

const SYNTH: &[&str] = &[
    "synth", "--spec", "sys.json", "--cabs", "sys.json", "--oabs", "oabs.json", "--plant", "plant.json", "--rel-c",
    "id.json", "--rel-chat", "id.json", "--rel-o", "rel_o.json", "--params-c", "0,0,0", "--params-o", "0,0,0",
];

#[test]
fn synthesized_bundle_replays_in_simulation() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path(), system());
    let out = symctl(dir.path(), &[SYNTH, &["--out", "bundle.json"]].concat());
    assert_eq!(out.code, 0, "{}", out.stderr);
    let bundle = Bundle::load(&dir.path().join("bundle.json")).unwrap();
    assert!(!bundle.states.is_empty());
    assert_eq!(bundle.initial.keys().collect::<Vec<_>>(), ["0"]);

    let sim = symctl(dir.path(), &["simulate", "--controller", "bundle.json", "--steps", "12", "--seed", "7"]);
    assert_eq!(sim.code, 0, "{}", sim.stderr);
    let lines: Vec<&str> = sim.stdout.lines().collect();
    assert_eq!(lines[0], "k,x,y,u,uc,n_obs,n_ctrl,bound");
    assert_eq!(lines.len(), 14);
    let again = symctl(dir.path(), &["simulate", "--controller", "bundle.json", "--steps", "12", "--seed", "7"]);
    assert_eq!(again.stdout, sim.stdout);
}

#[test]
fn tampered_bundle_is_an_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path(), system());
    assert_eq!(symctl(dir.path(), &[SYNTH, &["--out", "bundle.json"]].concat()).code, 0);
    let path = dir.path().join("bundle.json");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let input = &mut v["states"][0]["input"]["plant"];
    *input = json!(if input == "u" { "v" } else { "u" });
    put(dir.path(), "bundle.json", &v);
    let sim = symctl(dir.path(), &["simulate", "--controller", "bundle.json", "--steps", "3"]);
    assert_eq!(sim.code, 3, "{}", sim.stderr);
    assert!(sim.stderr.contains("disagrees"));
}

#[test]
fn uncovered_observer_successor_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path(), branching());
    let mut oabs = system();
    oabs["states"] = json!(["a", "m"]);
    oabs["trans"] = json!({"a|u": ["m"], "a|v": ["m"], "m|u": ["a", "m"], "m|v": ["m"]});
    put(dir.path(), "oabs.json", &oabs);
    let out = symctl(dir.path(), SYNTH);
    assert!(out.stderr.contains("not a bisimulation"), "{}", out.stderr);
    assert_eq!(out.code, 3, "{}", out.stderr);
    assert!(out.stderr.contains("synthesis"), "{}", out.stderr);
}

#[test]
fn failing_side_condition_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path(), system());
    // Drop the plant's `b` from the control relation, so `a --u--> b` has
    // no related successor.
    let mut rel = identity(0.0);
    rel["entries"].as_array_mut().unwrap().retain(|e| e["x2"] != "b");
    put(dir.path(), "id_partial.json", &rel);
    let mut args = SYNTH.to_vec();
    let i = args.iter().position(|a| *a == "--rel-c").unwrap();
    args[i + 1] = "id_partial.json";
    let out = symctl(dir.path(), &args);
    assert_eq!(out.code, 1, "{}", out.stderr);
    assert!(out.stderr.contains("verification"), "{}", out.stderr);
}

#[test]
fn check_reports_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path(), system());
    let ok = symctl(dir.path(), &["check-asr", "--left", "sys.json", "--right", "sys.json", "--relation", "id.json"]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    let v: Value = serde_json::from_str(&ok.stdout).unwrap();
    assert_eq!(v["holds"], true);
    assert_eq!(v["counterexample"], Value::Null);

    let sr = symctl(dir.path(), &["check-sr", "--left", "plant.json", "--right", "oabs.json", "--relation", "rel_o.json"]);
    assert_eq!(sr.code, 0, "{}", sr.stderr);

    let mut rel = identity(0.0);
    rel["entries"].as_array_mut().unwrap().retain(|e| e["x1"] != "c");
    put(dir.path(), "partial.json", &rel);
    let bad = symctl(dir.path(), &["check-sr", "--left", "sys.json", "--right", "sys.json", "--relation", "partial.json"]);
    assert_eq!(bad.code, 1);
    let v: Value = serde_json::from_str(&bad.stdout).unwrap();
    assert_eq!(v["holds"], false);
    assert_eq!(v["counterexample"]["condition"], "step");
}

#[test]
fn malformed_inputs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path(), system());
    let d = dir.path();

    let mut sys = system();
    sys["trans"]["a|u"] = json!(["q"]);
    put(d, "bad.json", &sys);
    let out = symctl(d, &["lift", "--system", "bad.json"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains(r#"trans["a|u"][0]: unknown state "q""#), "{}", out.stderr);

    fs::write(d.join("broken.json"), "{").unwrap();
    assert_eq!(symctl(d, &["lift", "--system", "broken.json"]).code, 2);
    assert_eq!(symctl(d, &["lift", "--system", "missing.json"]).code, 2);
    assert_eq!(symctl(d, &["lift"]).code, 2);

    let mut rel = identity(0.1);
    rel["entries"][0]["gauge"] = json!(0.05);
    put(d, "low.json", &rel);
    let out = symctl(d, &["check-asr", "--left", "sys.json", "--right", "sys.json", "--relation", "low.json"]);
    assert_eq!(out.code, 2, "{}", out.stderr);

    let out = symctl(d, &["check-asr", "--left", "sys.json", "--right", "sys.json", "--relation", "id.json", "--kappa", "1"]);
    assert_eq!(out.code, 2);
    let out = symctl(d, &["compose", "--left", "sys.json", "--right", "sys.json", "--relation", "id.json", "--params", "0,1,0"]);
    assert_eq!(out.code, 2, "{}", out.stderr);
    let out = symctl(d, &["observer", "--plant", "builtin:case", "--oabs", "oabs.json"]);
    assert_eq!(out.code, 2);
}

#[test]
fn compose_lift_and_observer_on_files() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path(), system());
    let d = dir.path();

    let out = symctl(d, &["compose", "--left", "sys.json", "--right", "sys.json", "--relation", "id.json", "--params", "0,0,0"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["vacuous"], false);
    assert_eq!(v["states"].as_array().unwrap().len(), 3);

    let full = symctl(d, &["lift", "--system", "sys.json"]);
    let max = symctl(d, &["lift", "--system", "sys.json", "--maximal"]);
    assert_eq!((full.code, max.code), (0, 0));
    let count = |s: &str| serde_json::from_str::<Value>(s).unwrap()["legend"].as_array().unwrap().len();
    assert!(count(&max.stdout) <= count(&full.stdout));
    assert!(count(&full.stdout) <= 7);

    let obs = symctl(
        d,
        &["observer", "--plant", "plant.json", "--oabs", "oabs.json", "--relation", "rel_o.json", "--params", "0,0,0"],
    );
    assert_eq!(obs.code, 0, "{}", obs.stderr);
    let v: Value = serde_json::from_str(&obs.stdout).unwrap();
    let legend = v["legend"].as_array().unwrap();
    assert_eq!(legend[0]["candidates"][0]["state"], "a");
}

#[test]
fn builtin_parts_export_and_repro_trace_parses() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for part in ["spec", "cabs", "oabs", "plant", "relations"] {
        let out = symctl(d, &["export", "--builtin", "case", "--part", part, "--depth", "2"]);
        assert_eq!(out.code, 0, "{part}: {}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        if part == "relations" {
            assert_eq!(v["params_c"]["kappa"].to_string(), "0.005");
        } else {
            assert!(!v["states"].as_array().unwrap().is_empty());
        }
    }

    let out = symctl(d, &["repro", "--out", "r", "--steps", "8", "--seed", "2"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("composite parameters: (0.055, 0.5, 0)"));
    let rows = read_case(fs::File::open(d.join("r/trace.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 9);

    let sim = symctl(d, &["simulate", "--controller", "r/controller.json", "--steps", "8", "--seed", "2"]);
    assert_eq!(sim.code, 0, "{}", sim.stderr);
    assert_eq!(sim.stdout, fs::read_to_string(d.join("r/trace.csv")).unwrap());

    fs::write(d.join("drops.txt"), "# input measurement\n0 0\n1 0\n0 1\n").unwrap();
    let sim = symctl(d, &["simulate", "--controller", "r/controller.json", "--steps", "4", "--dropouts", "drops.txt"]);
    assert_eq!(sim.code, 0, "{}", sim.stderr);
    let rows = read_case(sim.stdout.as_bytes()).unwrap();
    assert!(!rows[1].state.xi3 && rows[2].state.xi3 && rows[3].state.xi4);

    fs::write(d.join("twice.txt"), "1 0\n1 0\n").unwrap();
    let sim = symctl(d, &["simulate", "--controller", "r/controller.json", "--steps", "4", "--dropouts", "twice.txt"]);
    assert_eq!(sim.code, 2);

    let out = symctl(d, &["repro", "--out", "r", "--steps", "0"]);
    assert_eq!(out.code, 0);
    assert!(!d.join("r/trace.csv").exists());
}
