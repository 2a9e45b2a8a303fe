mod common;

use common::{json, run, schema_errors};

const CASES: &[(&str, &str, &[&str])] = &[
    ("flatness", "flatness_ho.toml", &[]),
    ("curvature", "curvature_ho.toml", &[]),
    ("hill-solve", "hill.toml", &[]),
    ("map-build", "map_ho_const.toml", &[]),
    ("map-verify", "map_galilean.toml", &[]),
    ("classical-sim", "classical_ho.toml", &["--set", "output.format=\"json\""]),
    ("quantum-sim", "quantum_galilean.toml", &["--set", "grid.n=512", "--set", "time.steps=256"]),
    ("action-check", "action_ho.toml", &[]),
];

#[test]
fn outputs_match_published_schemas() {
    for (command, cfg, extra) in CASES {
        let r = run(command, cfg, extra);
        assert_eq!(r.code, 0, "{command}: {}", r.stderr);
        let errs = schema_errors(command, &json(&r));
        assert!(errs.is_empty(), "{command}: {errs:?}");
    }
}

#[test]
fn configs_match_config_schema() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let value: serde_json::Value = toml::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let errs = schema_errors("config", &value);
        assert!(errs.is_empty(), "{}: {errs:?}", path.display());
    }
    let bad = serde_json::json!({ "potential": { "V": "x" }, "colour": 1 });
    assert!(!schema_errors("config", &bad).is_empty());
}

#[test]
fn exit_codes() {
    let r = run("flatness", "flatness_ho.toml", &["--set", "potential.V=x^3"]);
    assert_eq!(r.code, 1);
    assert_eq!(json(&r)["verdict"], "not_conformally_flat");

    let r = run("flatness", "flatness_ho.toml", &["--set", "potential.V=0.5*x^^2"]);
    assert_eq!(r.code, 2);
    let e = json(&r);
    assert!(schema_errors("error", &e).is_empty());
    assert!(e["error"]["message"].as_str().unwrap().contains("position 6"));

    let r = run("flatness", "flatness_ho.toml", &["--set", "potentail.V=x"]);
    assert_eq!(r.code, 2);

    let r = run("classical-sim", "classical_ho.toml", &["--set", "omega=1/cos(t)^2", "--set", "time.t1=3.0"]);
    assert_eq!(r.code, 3, "{}", r.stdout);
    assert_eq!(json(&r)["error"]["kind"], "runtime");

    let missing = std::process::Command::new(env!("CARGO_BIN_EXE_eisenhart"))
        .args(["flatness", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn map_build_descriptor_satisfies_relations() {
    let r = run("map-build", "map_ho_const.toml", &["--set", "tolerances.verify=1e-9"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let out = json(&r);
    assert!(out["verification"]["max"].as_f64().unwrap() < 1e-9);
    // samples carry the closed-form Niederer data
    for s in out["descriptor"]["samples"].as_array().unwrap() {
        let (t, tau, omega) = (s["t"].as_f64().unwrap(), s["tau"].as_f64().unwrap(), s["omega"].as_f64().unwrap());
        assert!((tau - t.tan()).abs() < 1e-12);
        assert!((omega - 1.0 / t.cos().powi(2)).abs() < 1e-9 * omega);
    }
}

#[test]
fn classical_csv_summary() {
    let r = run("classical-sim", "classical_ho.toml", &[]);
    assert_eq!(r.code, 0);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("t,x_newton,x_projected,null_norm"));
    let summary = r.stdout.lines().last().unwrap();
    let dx: f64 = summary
        .split_whitespace()
        .find_map(|w| w.strip_prefix("max_abs_dx="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dx < 1e-6, "{summary}");
    for row in r.stdout.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 4);
        assert!((cols[1] - cols[0].cos()).abs() < 1e-6);
    }
}

#[test]
fn quantum_galilean_residual_under_gate() {
    let r = run("quantum-sim", "quantum_galilean.toml", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let d = &json(&r)["diagnostics"];
    assert!(d["residual"].as_f64().unwrap() < 1e-2);
    assert!(d["oracle_l2_error"].as_f64().unwrap() < 1e-3);
    assert!((d["norm"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn output_path_is_honoured() {
    let dir = std::env::temp_dir().join(format!("eisenhart-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("out.json");
    let set = format!("output.path=\"{}\"", target.display());
    let r = run("hill-solve", "hill.toml", &["--set", &set]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert!(schema_errors("hill-solve", &written).is_empty());
    std::fs::remove_dir_all(dir).unwrap();
}
