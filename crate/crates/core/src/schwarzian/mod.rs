//! Schwarzian derivative and the Hill-equation route from a frequency
//! profile to the conformal factor.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{div, mul, powi, sub, Bindings, EvalError, Expr, Var};
use crate::numeric::ode::{OdeError, OdeOptions, TwoSided};
use crate::numeric::roots::bisect;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchwarzianError {
    #[error("integrator failure: {0}")]
    Integrator(#[from] OdeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("time range [{lo}, {hi}] must contain 0")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("t = {t} is outside the coordinate patch ({lo}, {hi}) bounded by zeros of u2")]
    DomainClipped { t: f64, lo: f64, hi: f64 },
}

/// `S = Φ'''/Φ' − (3/2)(Φ''/Φ')²`.
pub fn schwarzian_derivative(phi: &Expr, v: Var) -> Expr {
    let d1 = phi.diff(v);
    let d2 = d1.diff(v);
    let d3 = d2.diff(v);
    sub(
        div(d3, d1.clone()),
        mul(Expr::constant(1.5), powi(div(d2, d1), 2)),
    )
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Turn an expression in `t` into a callable, failing early if it cannot be
/// evaluated at `t = 0`.
pub fn expr_fn(e: &Expr, params: &Bindings) -> Result<ScalarFn, EvalError> {
    let e = e.clone();
    let mut b = params.clone();
    b.set(Var::T, 0.0);
    b.set(Var::X, 0.0);
    e.eval(&b)?;
    Ok(Arc::new(move |t| {
        let mut b = b.clone();
        b.set(Var::T, t);
        e.eval(&b).unwrap_or(f64::NAN)
    }))
}

/// Solutions `u1, u2` of `u'' + ω²(t)u = 0` with `u1(0)=0, u1'(0)=1,
/// u2(0)=1, u2'(0)=0`, held as dense output.
#[derive(Clone)]
pub struct HillSolution {
    omega_sq: ScalarFn,
    sol: TwoSided,
    wronskian_drift: f64,
}

impl fmt::Debug for HillSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HillSolution")
            .field("range", &self.range())
            .field("wronskian_drift", &self.wronskian_drift)
            .finish()
    }
}

/// Default integrator settings for Hill solves.
pub fn hill_options(tol: f64) -> OdeOptions {
    OdeOptions::with_tol(tol).max_step(0.05)
}

/// Solve the Hill equation for a frequency expression `ω(t)`.
pub fn solve_hill(
    omega: &Expr,
    params: &Bindings,
    t_range: (f64, f64),
    tol: f64,
) -> Result<HillSolution, SchwarzianError> {
    let w = expr_fn(omega, params)?;
    let omega_sq: ScalarFn = Arc::new(move |t| w(t).powi(2));
    solve_hill_with(omega_sq, t_range, &hill_options(tol))
}

/// Solve the Hill equation for a callable `ω²(t)`, which may change sign.
pub fn solve_hill_with(
    omega_sq: ScalarFn,
    (lo, hi): (f64, f64),
    opts: &OdeOptions,
) -> Result<HillSolution, SchwarzianError> {
    if !(lo <= 0.0 && 0.0 <= hi) {
        return Err(SchwarzianError::InvalidRange { lo, hi });
    }
    let w2 = omega_sq.clone();
    let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
        let k = w2(t);
        dy[0] = y[1];
        dy[1] = -k * y[0];
        dy[2] = y[3];
        dy[3] = -k * y[2];
    };
    let sol = TwoSided::solve(rhs, 0.0, &[0.0, 1.0, 1.0, 0.0], lo, hi, opts)?;
    let wronskian_drift = sol
        .step_points()
        .iter()
        .map(|(_, y)| (y[2] * y[1] - y[0] * y[3] - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(HillSolution {
        omega_sq,
        sol,
        wronskian_drift,
    })
}

impl HillSolution {
    pub fn range(&self) -> (f64, f64) {
        (self.sol.lo(), self.sol.hi())
    }

    /// `[u1, u1', u2, u2']` at `t`.
    pub fn state(&self, t: f64) -> [f64; 4] {
        let mut s = [0.0; 4];
        self.sol.eval_into(t, &mut s);
        s
    }

    pub fn u1(&self, t: f64) -> f64 {
        self.state(t)[0]
    }

    pub fn u2(&self, t: f64) -> f64 {
        self.state(t)[2]
    }

    pub fn wronskian(&self, t: f64) -> f64 {
        let [u1, d1, u2, d2] = self.state(t);
        u2 * d1 - u1 * d2
    }

    /// Largest `|W − 1|` over the accepted integration steps.
    pub fn wronskian_drift(&self) -> f64 {
        self.wronskian_drift
    }

    pub fn omega_sq(&self, t: f64) -> f64 {
        (self.omega_sq)(t)
    }

    /// Accepted step points `(t, [u1, u1', u2, u2'])`.
    pub fn step_points(&self) -> Vec<(f64, Vec<f64>)> {
        self.sol.step_points()
    }

    /// `(Φ, Ω)` on the patch around `t = 0` where `u2 > 0`.
    pub fn phi_omega(&self) -> PhiOmega {
        let patch = positive_patch(&self.sol, 2);
        PhiOmega {
            hill: self.clone(),
            patch,
        }
    }
}

/// The maximal interval around `t = 0` on which a component stays positive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Patch {
    pub lo: f64,
    pub hi: f64,
    /// Whether `lo`/`hi` are zeros of the component rather than the edge of
    /// the integrated range.
    pub lo_is_zero: bool,
    pub hi_is_zero: bool,
}

impl Patch {
    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi || (t == self.lo && !self.lo_is_zero) || (t == self.hi && !self.hi_is_zero)
    }
}

/// Scan accepted steps outward from 0 and refine the first sign change of
/// component `idx` by bisection on the dense output.
pub fn positive_patch(sol: &TwoSided, idx: usize) -> Patch {
    let pts = sol.step_points();
    let comp = |t: f64| sol.eval(t)[idx];
    let start = pts.partition_point(|(t, _)| *t < 0.0);
    let mut hi = (sol.hi(), false);
    for w in pts[start..].windows(2) {
        if w[1].1[idx] <= 0.0 {
            hi = (bisect(comp, w[0].0, w[1].0, 1e-15), true);
            break;
        }
    }
    let mut lo = (sol.lo(), false);
    for w in pts[..=start.min(pts.len() - 1)].windows(2).rev() {
        if w[0].1[idx] <= 0.0 {
            lo = (bisect(comp, w[0].0, w[1].0, 1e-15), true);
            break;
        }
    }
    Patch {
        lo: lo.0,
        hi: hi.0,
        lo_is_zero: lo.1,
        hi_is_zero: hi.1,
    }
}

/// `Φ = u1/u2` and `Ω = Φ' = 1/u2²` restricted to their coordinate patch.
#[derive(Debug, Clone)]
pub struct PhiOmega {
    hill: HillSolution,
    patch: Patch,
}

impl PhiOmega {
    pub fn patch(&self) -> Patch {
        self.patch
    }

    pub fn hill(&self) -> &HillSolution {
        &self.hill
    }

    fn check(&self, t: f64) -> Result<[f64; 4], SchwarzianError> {
        if self.patch.contains(t) {
            Ok(self.hill.state(t))
        } else {
            Err(SchwarzianError::DomainClipped {
                t,
                lo: self.patch.lo,
                hi: self.patch.hi,
            })
        }
    }

    pub fn phi(&self, t: f64) -> Result<f64, SchwarzianError> {
        let s = self.check(t)?;
        Ok(s[0] / s[2])
    }

    /// `Ω(t) = 1/u2²`.
    pub fn omega(&self, t: f64) -> Result<f64, SchwarzianError> {
        let s = self.check(t)?;
        Ok(1.0 / (s[2] * s[2]))
    }

    /// `Φ'` from the tabulated state via the Wronskian form `W/u2²`.
    pub fn phi_prime(&self, t: f64) -> Result<f64, SchwarzianError> {
        let [u1, d1, u2, d2] = self.check(t)?;
        Ok((u2 * d1 - u1 * d2) / (u2 * u2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn s_at(phi: &str, t: f64) -> f64 {
        let s = schwarzian_derivative(&parse(phi, &[]).unwrap(), Var::T);
        s.eval(&Bindings::new().with(Var::T, t)).unwrap()
    }

    #[test]
    fn closed_form_schwarzians() {
        for &t in &[-0.7, 0.1, 0.9] {
            assert!(s_at("(2*t + 1)/(t + 1)", t).abs() < 1e-10);
            assert!((s_at("tan(t)", t) - 2.0).abs() < 1e-10);
            assert!((s_at("exp(t)", t) + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_frequency_hill() {
        let h = solve_hill(&Expr::one(), &Bindings::new(), (-1.5, 1.5), 1e-10).unwrap();
        assert!((h.u2(FRAC_PI_3) - 0.5).abs() < 1e-8);
        assert!(h.wronskian_drift() < 1e-8);
        let po = h.phi_omega();
        assert!((po.phi(0.5).unwrap() - 0.5f64.tan()).abs() < 1e-8);
        assert!((po.omega(0.5).unwrap() - 1.0 / 0.5f64.cos().powi(2)).abs() < 1e-8);
    }

    #[test]
    fn patch_is_clipped_at_zeros_of_cos() {
        let h = solve_hill(&Expr::one(), &Bindings::new(), (-3.0, 3.0), 1e-10).unwrap();
        let p = h.phi_omega().patch();
        assert!(p.lo_is_zero && p.hi_is_zero);
        assert!((p.hi - FRAC_PI_2).abs() < 1e-9);
        assert!((p.lo + FRAC_PI_2).abs() < 1e-9);
        assert!(matches!(
            h.phi_omega().phi(2.0),
            Err(SchwarzianError::DomainClipped { .. })
        ));
    }

    #[test]
    fn free_hill_is_linear() {
        let h = solve_hill(&Expr::zero(), &Bindings::new(), (-5.0, 5.0), 1e-10).unwrap();
        let po = h.phi_omega();
        assert!(!po.patch().lo_is_zero && !po.patch().hi_is_zero);
        for &t in &[-4.0, 1.0, 5.0] {
            assert!((h.u1(t) - t).abs() < 1e-12);
            assert!((h.u2(t) - 1.0).abs() < 1e-12);
            assert!((po.omega(t).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_range_without_origin() {
        let e = solve_hill(&Expr::one(), &Bindings::new(), (0.5, 1.0), 1e-10).unwrap_err();
        assert!(matches!(e, SchwarzianError::InvalidRange { .. }));
    }
}
