use std::collections::BTreeMap;
use std::path::Path;

use eisenhart::flatmap::{MapFamily, PotentialSpec};
use eisenhart::geometry::ZeroTest;
use eisenhart::numeric::sampling::SampleBox;
use eisenhart::{parse, Bindings, Expr};
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialCfg>,
    /// Conformal factor `Ω(t)`.
    pub omega: Option<String>,
    /// Oscillator frequency `ω(t)` for `hill-solve` and `ho_timedep` maps.
    pub frequency: Option<String>,
    /// Named constants usable in every expression.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub map: Option<MapCfg>,
    pub grid: Option<GridCfg>,
    pub time: Option<TimeCfg>,
    #[serde(default)]
    pub tolerances: TolerancesCfg,
    #[serde(default)]
    pub output: OutputCfg,
    pub seed: Option<u64>,
    pub initial: Option<InitialCfg>,
    pub packet: Option<PacketCfg>,
    pub sample_box: Option<SampleBox>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialCfg {
    #[serde(rename = "V")]
    pub v: Option<String>,
    pub a: Option<String>,
    #[serde(rename = "B")]
    pub b: Option<String>,
    #[serde(rename = "C")]
    pub c: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapCfg {
    pub family: MapFamily,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeCfg {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesCfg {
    pub samples: usize,
    pub zero: f64,
    pub riemann: f64,
    pub omega_max: f64,
    pub integrator: f64,
    pub verify: f64,
    pub gate: f64,
    pub residual_gate: f64,
    pub oracle_gate: f64,
}

impl Default for TolerancesCfg {
    fn default() -> Self {
        TolerancesCfg {
            samples: 200,
            zero: 1e-9,
            riemann: 1e-8,
            omega_max: 1e6,
            integrator: 1e-10,
            verify: 1e-6,
            gate: 1e-6,
            residual_gate: 1e-2,
            oracle_gate: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    pub path: Option<String>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCfg {
    pub x0: f64,
    #[serde(default)]
    pub v0: f64,
    #[serde(default = "one")]
    pub m: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketCfg {
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub p0: f64,
    #[serde(default = "one")]
    pub s: f64,
}

/// Read a TOML or JSON file (by extension, JSON if it starts with `{`).
pub fn load_value(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Apply `key.path=value`; the value is read as a TOML literal, or as a bare
/// string when it is not one.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{assignment}`")))?;
    let value = toml::from_str::<BTreeMap<String, Value>>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut m| m.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.trim().split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("empty key segment in `{key}`")));
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("`{key}`: `{part}` is not inside a table")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

pub fn from_value(v: Value) -> Result<RunConfig, CliError> {
    serde_json::from_value(v).map_err(CliError::config)
}

impl RunConfig {
    pub fn bindings(&self) -> Bindings {
        self.params
            .iter()
            .fold(Bindings::new(), |b, (k, v)| b.with_param(k.clone(), *v))
    }

    pub fn expr(&self, field: &str, text: &str) -> Result<Expr, CliError> {
        let names: Vec<&str> = self.params.keys().map(String::as_str).collect();
        parse(text, &names).map_err(|e| {
            let pos = e.position();
            CliError::Config(format!("{field}: {e}\n  {text}\n  {}^", " ".repeat(pos.min(text.len()))))
        })
    }

    pub fn potential_cfg(&self) -> Result<&PotentialCfg, CliError> {
        self.potential
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [potential] section".into()))
    }

    /// `V` as written, or assembled from `a x² + B x + C`.
    pub fn potential_expr(&self) -> Result<Expr, CliError> {
        let p = self.potential_cfg()?;
        match (&p.v, p.a.is_some() || p.b.is_some() || p.c.is_some()) {
            (Some(_), true) => Err(CliError::Config("potential: give either V or a/B/C, not both".into())),
            (Some(v), false) => self.expr("potential.V", v),
            (None, true) => Ok(self.potential_spec()?.potential()),
            (None, false) => Err(CliError::Config("potential: V or a/B/C required".into())),
        }
    }

    /// Coefficient form; requires `a`, `B`, `C` (missing ones are zero).
    pub fn potential_spec(&self) -> Result<PotentialSpec, CliError> {
        let p = self.potential_cfg()?;
        if p.v.is_some() {
            return Err(CliError::Config("this command needs potential as a/B/C coefficients".into()));
        }
        let coef = |name: &str, s: &Option<String>| match s {
            Some(s) => self.expr(&format!("potential.{name}"), s),
            None => Ok(Expr::zero()),
        };
        let spec = PotentialSpec::new(coef("a", &p.a)?, coef("B", &p.b)?, coef("C", &p.c)?).map_err(CliError::config)?;
        Ok(spec.with_params(self.bindings()))
    }

    pub fn omega_expr(&self) -> Result<Expr, CliError> {
        match &self.omega {
            Some(s) => self.expr("omega", s),
            None => Ok(Expr::one()),
        }
    }

    pub fn time(&self) -> Result<TimeCfg, CliError> {
        let t = self.time.ok_or_else(|| CliError::Config("missing [time] section".into()))?;
        if !(t.t1 > t.t0) || t.steps == 0 {
            return Err(CliError::Config(format!("time: need t0 < t1 and steps > 0, got {t:?}")));
        }
        Ok(t)
    }

    pub fn zero_test(&self, seed: u64) -> ZeroTest {
        let tol = &self.tolerances;
        ZeroTest {
            samples: tol.samples,
            tol: tol.zero,
            riemann_tol: tol.riemann,
            sample_box: self.sample_box.unwrap_or_default(),
            seed,
            omega_max: tol.omega_max,
        }
    }

    pub fn format(&self, default: Format) -> Format {
        self.output.format.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_keys() {
        let mut v = serde_json::json!({ "potential": { "V": "x" } });
        apply_override(&mut v, "potential.V=0.5*x^2").unwrap();
        apply_override(&mut v, "tolerances.zero=1e-8").unwrap();
        apply_override(&mut v, "seed=7").unwrap();
        assert_eq!(v["potential"]["V"], "0.5*x^2");
        assert_eq!(v["tolerances"]["zero"], 1e-8);
        assert_eq!(v["seed"], 7);
        assert!(apply_override(&mut v, "novalue").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(from_value(serde_json::json!({ "potentail": {} })).is_err());
        assert!(from_value(serde_json::json!({ "grid": { "x_min": 0, "x_max": 1, "n": 20, "dx": 1 } })).is_err());
    }

    #[test]
    fn parse_errors_point_at_the_column() {
        let cfg = RunConfig::default();
        let e = cfg.expr("potential.V", "0.5*x^^2").unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        assert!(e.to_string().contains("position"));
    }
}
