//! Randomized zero tests for conformal flatness and flatness.
//!
//! An expression is declared zero when it evaluates below a tolerance at
//! every one of `samples` seeded random points of a sample box. Points where
//! evaluation fails (or where the conformal factor is non-positive or larger
//! than `omega_max`) are rejected; if too many are rejected the box is halved
//! about its center and sampling restarts.

use serde::{Deserialize, Serialize};

use crate::expr::{div, mul, powi, sub, Bindings, Expr, Var};
use crate::numeric::sampling::{rng, SampleBox};

use super::curvature::riemann;
use super::{build_metric, GeometryError};

const MAX_SHRINKS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroTest {
    pub samples: usize,
    pub tol: f64,
    pub riemann_tol: f64,
    pub sample_box: SampleBox,
    pub seed: u64,
    pub omega_max: f64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest {
            samples: 200,
            tol: 1e-9,
            riemann_tol: 1e-8,
            sample_box: SampleBox::default(),
            seed: 0,
            omega_max: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub samples: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub tol: f64,
    pub holds: bool,
}

impl ConditionReport {
    fn from_values(condition: &str, values: &[f64], tol: f64) -> Self {
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mean_abs = values.iter().map(|v| v.abs()).sum::<f64>() / values.len().max(1) as f64;
        ConditionReport {
            condition: condition.to_string(),
            samples: values.len(),
            max_abs,
            mean_abs,
            tol,
            holds: max_abs < tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub conformally_flat: ConditionReport,
    pub flatness: ConditionReport,
    pub riemann: ConditionReport,
    pub sample_box: SampleBox,
    pub flat: bool,
}

/// Draw `test.samples` accepted points, shrinking the box on heavy rejection.
pub fn sample_points<F>(
    test: &ZeroTest,
    params: &Bindings,
    mut accept: F,
) -> Result<(Vec<Bindings>, SampleBox), GeometryError>
where
    F: FnMut(&Bindings) -> bool,
{
    let mut sample_box = test.sample_box;
    let mut attempts = 0;
    for _ in 0..=MAX_SHRINKS {
        let mut r = rng(test.seed);
        let mut pts = Vec::with_capacity(test.samples);
        let budget = 4 * test.samples.max(1);
        for _ in 0..budget {
            let (x, t) = sample_box.draw(&mut r);
            let b = params.at_xt(x, t);
            attempts += 1;
            if accept(&b) {
                pts.push(b);
                if pts.len() == test.samples {
                    return Ok((pts, sample_box));
                }
            }
        }
        log::debug!("sample box {sample_box:?} rejected too many points, shrinking");
        sample_box = sample_box.shrunk();
    }
    Err(GeometryError::EvaluationDomain { attempts })
}

fn third_x(v: &Expr) -> Expr {
    v.diff(Var::X).diff(Var::X).diff(Var::X)
}

/// Vanishing of `∂³V/∂x³`, equivalent to vanishing of the Cotton tensor.
pub fn is_conformally_flat(
    v: &Expr,
    params: &Bindings,
    test: &ZeroTest,
) -> Result<ConditionReport, GeometryError> {
    let d3 = third_x(v);
    let (pts, _) = sample_points(test, params, |b| d3.eval(b).is_ok())?;
    let values: Vec<f64> = pts.iter().map(|b| d3.eval(b)).collect::<Result<_, _>>()?;
    Ok(ConditionReport::from_values("d3V/dx3 = 0", &values, test.tol))
}

/// `∂²V/∂x² − Ω⁻²((Ω/2)Ω_tt − ¾Ω_t²)`, which vanishes iff the lifted metric
/// with conformal factor `Ω(t)` is flat (given conformal flatness).
pub fn flatness_residual(v: &Expr, omega: &Expr) -> Expr {
    let wt = omega.diff(Var::T);
    let wtt = wt.diff(Var::T);
    let bracket = sub(
        mul(mul(Expr::constant(0.5), omega.clone()), wtt),
        mul(Expr::constant(0.75), powi(wt, 2)),
    );
    sub(v.diff(Var::X).diff(Var::X), div(bracket, powi(omega.clone(), 2)))
}

/// Flatness of the lifted metric with conformal factor `omega`, cross-checked
/// against all 81 Riemann components of the full metric.
pub fn is_flat(
    v: &Expr,
    omega: &Expr,
    params: &Bindings,
    test: &ZeroTest,
) -> Result<FlatnessReport, GeometryError> {
    let metric = build_metric(v, omega)?;
    let riem = riemann(&metric);
    let cond = flatness_residual(v, omega);
    let d3 = third_x(v);
    let (pts, sample_box) = sample_points(test, params, |b| {
        let ok_omega = matches!(omega.eval(b), Ok(w) if w > 0.0 && w <= test.omega_max);
        ok_omega && cond.eval(b).is_ok() && d3.eval(b).is_ok() && riem.eval(b).is_ok()
    })?;
    let mut d3v = Vec::with_capacity(pts.len());
    let mut condv = Vec::with_capacity(pts.len());
    let mut riemv = Vec::with_capacity(pts.len());
    for b in &pts {
        d3v.push(d3.eval(b)?);
        condv.push(cond.eval(b)?);
        riemv.push(riem.eval(b)?.into_iter().fold(0.0f64, |m, r| m.max(r.abs())));
    }
    let conformally_flat = ConditionReport::from_values("d3V/dx3 = 0", &d3v, test.tol);
    let flatness = ConditionReport::from_values("flatness condition", &condv, test.tol);
    let riemann = ConditionReport::from_values("all Riemann components", &riemv, test.riemann_tol);
    let flat = flatness.holds && riemann.holds;
    Ok(FlatnessReport {
        conformally_flat,
        flatness,
        riemann,
        sample_box,
        flat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s, &[]).unwrap()
    }

    #[test]
    fn conformal_flatness_examples() {
        let b = Bindings::new();
        let t = ZeroTest::default();
        assert!(is_conformally_flat(&p("0.5*x^2"), &b, &t).unwrap().holds);
        assert!(!is_conformally_flat(&p("x^3"), &b, &t).unwrap().holds);
        assert!(is_conformally_flat(&p("sin(t)*x^2 + exp(t)*x"), &b, &t).unwrap().holds);
    }

    #[test]
    fn flatness_examples() {
        let b = Bindings::new();
        let t = ZeroTest::default();
        let r = is_flat(&p("0.5*x^2"), &p("1/cos(t)^2"), &b, &t).unwrap();
        assert!(r.flat, "{r:?}");
        assert!(!is_flat(&p("0.5*x^2"), &p("1"), &b, &t).unwrap().flat);
        assert!(is_flat(&p("0"), &p("1"), &b, &t).unwrap().flat);
    }

    #[test]
    fn log_potential_shrinks_or_rejects() {
        // log(x) is undefined on half the default box; sampling still succeeds
        let r = is_conformally_flat(&p("log(x)"), &Bindings::new(), &ZeroTest::default()).unwrap();
        assert!(!r.holds);
        let err = is_conformally_flat(&p("sqrt(-1 - x^2)"), &Bindings::new(), &ZeroTest::default());
        assert!(matches!(err, Err(GeometryError::EvaluationDomain { .. })));
    }
}
