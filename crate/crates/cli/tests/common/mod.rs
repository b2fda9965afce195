#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn dynkin(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dynkin").chain(args.iter().copied());
    let code = dynkin_cli::run(argv, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

pub fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two players on a binary depth-1 tree with constant X, Q, Y and the given child probabilities.
pub fn small_game(p: (f64, f64), x: f64, q: f64, y: f64) -> Value {
    let row = |v: f64| json!([[v, v, v], [v, v, v]]);
    json!({
        "horizon": 1,
        "players": 2,
        "nodes": [
            {"id": 0, "parent": null, "p": 1.0},
            {"id": 1, "parent": 0, "p": p.0},
            {"id": 2, "parent": 0, "p": p.1}
        ],
        "processes": {"X": row(x), "Q": row(q), "Y": row(y)}
    })
}

/// Horizon 2, but node 2 is a leaf at depth 1.
pub fn uneven_game() -> Value {
    let row = |v: f64| json!([[v, v, v, v], [v, v, v, v]]);
    json!({
        "horizon": 2,
        "players": 2,
        "nodes": [
            {"id": 0, "parent": null, "p": 1.0},
            {"id": 1, "parent": 0, "p": 0.5},
            {"id": 2, "parent": 0, "p": 0.5},
            {"id": 3, "parent": 1, "p": 1.0}
        ],
        "processes": {"X": row(0.5), "Q": row(1.0), "Y": row(1.0)}
    })
}
