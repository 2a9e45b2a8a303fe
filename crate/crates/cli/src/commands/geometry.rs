use eisenhart::geometry::{build_metric, is_flat, sample_points, Curvature, TensorField};
use eisenhart::schwarzian::{hill_options, solve_hill, solve_hill_with, HillSolution, ScalarFn};
use eisenhart::{Bindings, Expr};
use serde::Serialize;
use serde_json::json;

use super::{json_only, json_outcome, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, Exit};

/// Number of points at which `curvature` evaluates each component.
const DUMP_POINTS: usize = 5;

pub fn cmd_flatness(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    json_only(cfg, "flatness")?;
    let v = cfg.potential_expr()?;
    let omega = cfg.omega_expr()?;
    let report = is_flat(&v, &omega, &cfg.bindings(), &cfg.zero_test(seed)).map_err(CliError::runtime)?;
    let verdict = if report.flat {
        "flat"
    } else if report.conformally_flat.holds {
        "conformally_flat"
    } else {
        "not_conformally_flat"
    };
    let out = json!({
        "command": "flatness",
        "potential": v.to_string(),
        "omega": omega.to_string(),
        "seed": seed,
        "verdict": verdict,
        "report": report,
    });
    json_outcome(&out, Exit::verdict(report.flat))
}

#[derive(Serialize)]
struct Component {
    index: Vec<usize>,
    expr: String,
    values: Vec<f64>,
}

fn dump(field: &TensorField, points: &[Bindings]) -> Result<Vec<Component>, CliError> {
    field
        .nonzero()
        .into_iter()
        .map(|index| {
            let e = field.get(&index);
            let values = points
                .iter()
                .map(|b| e.eval(b))
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::runtime)?;
            Ok(Component {
                expr: e.to_string(),
                index,
                values,
            })
        })
        .collect()
}

pub fn cmd_curvature(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    json_only(cfg, "curvature")?;
    let v = cfg.potential_expr()?;
    let omega = cfg.omega_expr()?;
    let metric = build_metric(&v, &omega).map_err(CliError::runtime)?;
    let curv = Curvature::compute(&metric);
    let mut test = cfg.zero_test(seed);
    test.samples = DUMP_POINTS;
    let params = cfg.bindings();
    let (points, _) = sample_points(&test, &params, |b| omega.eval(b).is_ok_and(|w| w > 0.0))
        .map_err(CliError::runtime)?;
    let coords: Vec<[f64; 2]> = points
        .iter()
        .map(|b| [b.var(eisenhart::Var::X).unwrap_or(0.0), b.var(eisenhart::Var::T).unwrap_or(0.0)])
        .collect();
    let scalar = points
        .iter()
        .map(|b| curv.scalar.eval(b))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::runtime)?;
    let out = json!({
        "command": "curvature",
        "potential": v.to_string(),
        "omega": omega.to_string(),
        "coordinates": ["t", "u", "x"],
        "points": coords,
        "christoffel": dump(&curv.christoffel, &points)?,
        "riemann": dump(&curv.riemann, &points)?,
        "ricci": dump(&curv.ricci, &points)?,
        "scalar": { "expr": curv.scalar.to_string(), "values": scalar },
        "cotton": dump(&curv.cotton, &points)?,
    });
    json_outcome(&out, Exit::Pass)
}

fn hill_from_config(cfg: &RunConfig, range: (f64, f64)) -> Result<(String, HillSolution), CliError> {
    let tol = cfg.tolerances.integrator;
    if let Some(w) = &cfg.frequency {
        let w = cfg.expr("frequency", w)?;
        let sol = solve_hill(&w, &cfg.bindings(), range, tol).map_err(CliError::runtime)?;
        return Ok((format!("omega(t) = {w}"), sol));
    }
    let spec = cfg.potential_spec()?;
    let a: Expr = spec.a.clone();
    let params = cfg.bindings();
    a.eval(&params.at_xt(0.0, 0.0)).map_err(CliError::runtime)?;
    let omega_sq: ScalarFn = std::sync::Arc::new(move |t| 2.0 * a.eval(&params.at_xt(0.0, t)).unwrap_or(f64::NAN));
    let sol = solve_hill_with(omega_sq, range, &hill_options(tol)).map_err(CliError::runtime)?;
    Ok((format!("omega(t)^2 = 2*({})", spec.a), sol))
}

pub fn cmd_hill(cfg: &RunConfig, _seed: u64) -> Result<Outcome, CliError> {
    json_only(cfg, "hill-solve")?;
    let time = cfg.time()?;
    let (label, sol) = hill_from_config(cfg, (time.t0, time.t1))?;
    let po = sol.phi_omega();
    let patch = po.patch();
    let samples: Vec<_> = (0..=time.steps)
        .map(|i| {
            let t = time.t0 + (time.t1 - time.t0) * i as f64 / time.steps as f64;
            let [u1, du1, u2, du2] = sol.state(t);
            json!({
                "t": t, "u1": u1, "du1": du1, "u2": u2, "du2": du2,
                "phi": po.phi(t).ok(),
                "omega": po.omega(t).ok(),
            })
        })
        .collect();
    let drift = sol.wronskian_drift();
    let out = json!({
        "command": "hill-solve",
        "equation": label,
        "range": [time.t0, time.t1],
        "patch": patch,
        "wronskian_drift": drift,
        "samples": samples,
    });
    json_outcome(&out, Exit::verdict(drift < 1e-8))
}
