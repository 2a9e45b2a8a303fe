#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn schema(name: &str) -> serde_json::Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn run(command: &str, cfg: &str, extra: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_eisenhart"))
        .arg(command)
        .arg(config(cfg))
        .args(extra)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn json(run: &Run) -> serde_json::Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stdout))
}

/// Validation errors of `instance` against the named schema.
pub fn schema_errors(name: &str, instance: &serde_json::Value) -> Vec<String> {
    let v = jsonschema::validator_for(&schema(name)).expect("schema compiles");
    v.iter_errors(instance).map(|e| format!("{e} at {}", e.instance_path())).collect()
}
