use std::collections::BTreeMap;

use eisenhart::flatmap::{
    build_map_general, equation_residuals, map_ho_const, map_ho_timedep, map_identity, map_linear_galilean,
    map_linear_mobius, verify_map, FlatteningMap, GeneralOptions, HChoice, MapFamily, MobiusParams, PotentialSpec,
    VerifyOptions,
};
use eisenhart::Expr;
use serde_json::json;

use super::{json_only, json_outcome, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, Exit};

/// Margin added around the configured time range for ODE-built maps.
const RANGE_MARGIN: f64 = 0.5;

fn allowed(family: MapFamily) -> &'static [&'static str] {
    match family {
        MapFamily::Identity => &[],
        MapFamily::HoConst => &["omega0", "c1", "c2", "c3"],
        MapFamily::HoTimedep => &["h0", "h1", "t_min", "t_max"],
        MapFamily::General => &["h0", "h1", "p0", "t_min", "t_max"],
        MapFamily::LinearMobius => &["k", "c", "d", "c1", "c2", "t_min", "t_max"],
        MapFamily::LinearGalilean => &["h0", "h1", "t_min", "t_max"],
    }
}

struct Params<'a>(&'a BTreeMap<String, f64>);

impl Params<'_> {
    fn get(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    fn required(&self, key: &str) -> Result<f64, CliError> {
        self.0
            .get(key)
            .copied()
            .ok_or_else(|| CliError::Config(format!("map.parameters.{key} is required")))
    }
}

fn range(cfg: &RunConfig, p: &Params<'_>) -> (f64, f64) {
    let (t0, t1) = cfg.time.map(|t| (t.t0, t.t1)).unwrap_or((-1.0, 1.0));
    (
        p.get("t_min", t0.min(0.0) - RANGE_MARGIN),
        p.get("t_max", t1.max(0.0) + RANGE_MARGIN),
    )
}

fn linear_coefficient(cfg: &RunConfig) -> Result<(Expr, PotentialSpec), CliError> {
    let spec = cfg.potential_spec()?;
    if !spec.a.is_zero() || !spec.c.is_zero() {
        return Err(CliError::Config("linear families need potential.B only (a = C = 0)".into()));
    }
    let b = spec.b.clone();
    Ok((b.clone(), PotentialSpec::linear(b).map_err(CliError::config)?.with_params(cfg.bindings())))
}

/// The configured map and the potential it flattens.
pub fn build_map(cfg: &RunConfig) -> Result<(FlatteningMap, PotentialSpec), CliError> {
    let m = cfg
        .map
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [map] section".into()))?;
    let ok = allowed(m.family);
    if let Some(bad) = m.parameters.keys().find(|k| !ok.contains(&k.as_str())) {
        return Err(CliError::Config(format!(
            "map.parameters.{bad} is not a parameter of {} (expected one of {ok:?})",
            m.family.name()
        )));
    }
    let p = Params(&m.parameters);
    let tol = cfg.tolerances.integrator;
    let params = cfg.bindings();
    let rt = CliError::runtime;
    Ok(match m.family {
        MapFamily::Identity => (map_identity(), PotentialSpec::free()),
        MapFamily::HoConst => {
            let w = p.required("omega0")?;
            let map = map_ho_const(w, p.get("c1", 0.0), p.get("c2", 0.0), p.get("c3", 0.0)).map_err(rt)?;
            (map, PotentialSpec::oscillator(w))
        }
        MapFamily::HoTimedep => {
            let text = cfg
                .frequency
                .as_ref()
                .ok_or_else(|| CliError::Config("ho_timedep needs `frequency`".into()))?;
            let w = cfg.expr("frequency", text)?;
            let h = HChoice::Ivp {
                h0: p.get("h0", 0.0),
                h1: p.get("h1", 0.0),
            };
            let map = map_ho_timedep(&w, &params, h, range(cfg, &p), tol).map_err(rt)?;
            let a = eisenhart::expr::mul(Expr::constant(0.5), eisenhart::expr::powi(w, 2));
            let spec = PotentialSpec::new(a, Expr::zero(), Expr::zero()).map_err(rt)?;
            (map, spec.with_params(params))
        }
        MapFamily::General => {
            let spec = cfg.potential_spec()?;
            let opts = GeneralOptions {
                h0: p.get("h0", 0.0),
                h1: p.get("h1", 0.0),
                p0: p.get("p0", 0.0),
                tol,
                ..Default::default()
            };
            (build_map_general(&spec, range(cfg, &p), &opts).map_err(rt)?, spec)
        }
        MapFamily::LinearMobius => {
            let (b, spec) = linear_coefficient(cfg)?;
            let mp = MobiusParams {
                k: p.required("k")?,
                c: p.required("c")?,
                d: p.get("d", 0.0),
                c1: p.get("c1", 0.0),
                c2: p.get("c2", 0.0),
            };
            let (mut lo, mut hi) = range(cfg, &p);
            if mp.c != 0.0 {
                let pole = -mp.d / mp.c;
                if mp.c > 0.0 && !m.parameters.contains_key("t_max") {
                    hi = hi.min(pole);
                } else if mp.c < 0.0 && !m.parameters.contains_key("t_min") {
                    lo = lo.max(pole);
                }
            }
            (map_linear_mobius(&b, &params, mp, (lo, hi), tol).map_err(rt)?, spec)
        }
        MapFamily::LinearGalilean => {
            let (b, spec) = linear_coefficient(cfg)?;
            let h = (p.get("h0", 0.0), p.get("h1", 0.0));
            (map_linear_galilean(&b, &params, h, range(cfg, &p), tol).map_err(rt)?, spec)
        }
    })
}

fn verify_options(cfg: &RunConfig, seed: u64) -> VerifyOptions {
    VerifyOptions {
        samples: cfg.tolerances.samples.min(1000),
        seed,
        tol: cfg.tolerances.verify,
        ..Default::default()
    }
}

pub fn cmd_map(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    json_only(cfg, "map-build")?;
    let (map, spec) = build_map(cfg)?;
    let n = cfg.time.map(|t| t.steps + 1).unwrap_or(21);
    let descriptor = map.descriptor(n).map_err(CliError::runtime)?;
    let verify = verify_map(&map, &spec, &verify_options(cfg, seed)).map_err(CliError::runtime)?;
    let out = json!({
        "command": "map-build",
        "potential": spec.potential().to_string(),
        "descriptor": descriptor,
        "verification": verify,
    });
    json_outcome(&out, Exit::verdict(verify.passed))
}

pub fn cmd_map_verify(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    json_only(cfg, "map-verify")?;
    let (map, spec) = build_map(cfg)?;
    let opts = verify_options(cfg, seed);
    let verify = verify_map(&map, &spec, &opts).map_err(CliError::runtime)?;
    let eqs = equation_residuals(&map, &spec, &opts).map_err(CliError::runtime)?;
    let eq_ok = eqs.h_equation < opts.tol && eqs.p_equation < opts.tol;
    let out = json!({
        "command": "map-verify",
        "family": map.family(),
        "parameters": map.parameters(),
        "potential": spec.potential().to_string(),
        "relations": verify,
        "equations": eqs,
        "passed": verify.passed && eq_ok,
    });
    json_outcome(&out, Exit::verdict(verify.passed && eq_ok))
}
