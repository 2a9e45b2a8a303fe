use std::fmt::Write as _;

use eisenhart::dynamics::{action_equivalence, compare_projection, newton_trajectory, GeodesicOptions, ProjectionSetup};
use eisenhart::quantum::{
    crank_nicolson, eval_free_packet, free_to_potential_at, map_free_to_potential, schrodinger_residual,
    FreePacket, WaveGrid, DEFAULT_BOX, DEFAULT_N,
};
use serde_json::json;

use super::{build_map, json_outcome, Outcome};
use crate::config::{Format, InitialCfg, RunConfig};
use crate::error::{CliError, Exit};

fn initial(cfg: &RunConfig) -> Result<InitialCfg, CliError> {
    cfg.initial
        .ok_or_else(|| CliError::Config("missing [initial] section (x0, v0, m)".into()))
}

pub fn cmd_classical(cfg: &RunConfig, _seed: u64) -> Result<Outcome, CliError> {
    let v = cfg.potential_expr()?;
    let omega = cfg.omega_expr()?;
    let init = initial(cfg)?;
    let time = cfg.time()?;
    let params = cfg.bindings();
    let setup = ProjectionSetup {
        potential: &v,
        omega: &omega,
        params: &params,
        x0: init.x0,
        v0: init.v0,
        t_range: (time.t0, time.t1),
        m: init.m,
    };
    let opts = GeodesicOptions {
        tol: cfg.tolerances.integrator,
        ..Default::default()
    };
    let rows = compare_projection(&setup, time.steps + 1, &opts).map_err(CliError::runtime)?;
    let max_dx = rows.iter().map(|r| (r.x_newton - r.x_projected).abs()).fold(0.0, f64::max);
    let max_norm = rows.iter().map(|r| r.null_norm.abs()).fold(0.0, f64::max);
    let exit = Exit::verdict(max_dx < cfg.tolerances.gate);
    match cfg.format(Format::Csv) {
        Format::Csv => {
            let mut body = String::from("t,x_newton,x_projected,null_norm\n");
            for r in &rows {
                let _ = writeln!(body, "{},{},{},{}", r.t, r.x_newton, r.x_projected, r.null_norm);
            }
            let _ = writeln!(body, "# max_abs_dx={max_dx:e} max_abs_null_norm={max_norm:e}");
            Ok(Outcome { body, exit })
        }
        Format::Json => {
            let out = json!({
                "command": "classical-sim",
                "potential": v.to_string(),
                "omega": omega.to_string(),
                "rows": rows,
                "summary": { "max_abs_dx": max_dx, "max_abs_null_norm": max_norm },
            });
            json_outcome(&out, exit)
        }
    }
}

pub fn cmd_quantum(cfg: &RunConfig, _seed: u64) -> Result<Outcome, CliError> {
    super::json_only(cfg, "quantum-sim")?;
    let (map, spec) = build_map(cfg)?;
    let time = cfg.time()?;
    let pk = cfg.packet.unwrap_or(crate::config::PacketCfg { x0: 0.0, p0: 0.0, s: 1.0 });
    let pk = FreePacket::new(pk.x0, pk.p0, pk.s).map_err(CliError::config)?;
    let (x_min, x_max, n) = cfg
        .grid
        .map(|g| (g.x_min, g.x_max, g.n))
        .unwrap_or((DEFAULT_BOX.0, DEFAULT_BOX.1, DEFAULT_N));
    let v = spec.potential();
    let params = cfg.bindings();
    let free = |tau: f64, xi: f64| eval_free_packet(&pk, tau, xi);
    let at = |t: f64| map_free_to_potential(&map, &free, t, (x_min, x_max, n)).map_err(CliError::runtime);

    let wave = at(time.t1)?;
    let dt = (time.t1 - time.t0) / time.steps as f64;
    let residual = {
        let slice = |t: f64| {
            WaveGrid::from_fn(x_min, x_max, n, t, |x| free_to_potential_at(&map, &free, t, x))
                .map_err(CliError::runtime)
        };
        let (a, c) = (slice(time.t1 - dt)?, slice(time.t1 + dt)?);
        schrodinger_residual([&a, &wave, &c], &v, &params).map_err(CliError::runtime)?
    };
    let start = at(time.t0)?;
    let cn = crank_nicolson(&start, &v, &params, time.t1, time.steps).map_err(CliError::runtime)?;
    let oracle = cn.grid.l2_distance(&wave).map_err(CliError::runtime)?;
    let norm = wave.norm_sq();
    let ok = residual < cfg.tolerances.residual_gate && oracle < cfg.tolerances.oracle_gate && !cn.leaked;
    let values: Vec<[f64; 2]> = wave.values.iter().map(|z| [z.re, z.im]).collect();
    let out = json!({
        "family": map.family(),
        "t": time.t1,
        "grid": { "x_min": x_min, "x_max": x_max, "n": n },
        "values": values,
        "diagnostics": {
            "residual": residual,
            "norm": norm,
            "oracle_l2_error": oracle,
            "edge_amplitude": cn.edge_amplitude,
        },
    });
    json_outcome(&out, Exit::verdict(ok))
}

pub fn cmd_action(cfg: &RunConfig, _seed: u64) -> Result<Outcome, CliError> {
    super::json_only(cfg, "action-check")?;
    let (map, spec) = build_map(cfg)?;
    let init = initial(cfg)?;
    let time = cfg.time()?;
    let path = newton_trajectory(
        &spec.potential(),
        &cfg.bindings(),
        init.x0,
        init.v0,
        (time.t0, time.t1),
        cfg.tolerances.integrator.min(1e-12),
    )
    .map_err(CliError::runtime)?;
    let report = action_equivalence(&spec, &map, &path, time.t0, time.t1).map_err(CliError::runtime)?;
    let passed = report.residual.abs() < cfg.tolerances.gate;
    let out = json!({
        "command": "action-check",
        "family": map.family(),
        "potential": spec.potential().to_string(),
        "interval": [time.t0, time.t1],
        "report": report,
        "passed": passed,
    });
    json_outcome(&out, Exit::verdict(passed))
}
