//! ODE-built maps for an arbitrary admissible potential.
//!
//! Everything is integrated in `t` from `t = 0`: the Hill pair `u1, u2`
//! (with `ω² = 2a`), `H(t) = h(τ(t))` from `Ḧ + 2aH = −B` and
//! `P(t) = p(τ(t))` from `Ṗ = −½Ḣ² + aH² + BH + C`. These are the `h` and
//! `p` equations rewritten with `dτ = Ω dt`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{mul, powi, Bindings, Expr};
use crate::numeric::ode::{OdeOptions, TwoSided};
use crate::numeric::roots::invert_increasing;
use crate::schwarzian::{expr_fn, positive_patch, Patch};

use super::{FlatteningMap, Interval, MapError, MapFamily, MapKernel, MapPoint, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneralOptions {
    /// `h(0)`.
    pub h0: f64,
    /// `dh/dτ` at `τ = 0`.
    pub h1: f64,
    /// `p(0)`.
    pub p0: f64,
    pub tol: f64,
    pub max_step: f64,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        GeneralOptions {
            h0: 0.0,
            h1: 0.0,
            p0: 0.0,
            tol: 1e-12,
            max_step: 0.02,
        }
    }
}

/// `h` for the time-dependent oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HChoice {
    Zero,
    Ivp { h0: f64, h1: f64 },
}

#[derive(Debug)]
struct GeneralKernel {
    /// State `[u1, u1', u2, u2', H, H', P]` over `t`.
    sol: TwoSided,
    patch: Patch,
}

impl GeneralKernel {
    fn state(&self, t: f64) -> [f64; 7] {
        let mut y = [0.0; 7];
        self.sol.eval_into(t, &mut y);
        y
    }

    fn phi(&self, t: f64) -> f64 {
        let y = self.state(t);
        y[0] / y[2]
    }
}

impl MapKernel for GeneralKernel {
    fn t_of_tau(&self, tau: f64) -> f64 {
        let guess = tau.atan().clamp(self.patch.lo, self.patch.hi);
        invert_increasing(
            |t| self.phi(t),
            |t| {
                let y = self.state(t);
                1.0 / (y[2] * y[2])
            },
            tau,
            self.patch.lo,
            self.patch.hi,
            guess,
        )
    }

    fn tau_of_t(&self, t: f64) -> f64 {
        self.phi(t)
    }

    fn point(&self, tau: f64) -> MapPoint {
        let t = self.t_of_tau(tau);
        let [_, _, u2, du2, h, dh, p] = self.state(t);
        MapPoint {
            tau,
            t,
            omega: 1.0 / (u2 * u2),
            omega_tau: -2.0 * du2 / u2,
            h,
            h_tau: dh * u2 * u2,
            p,
        }
    }
}

fn tau_interval(k: &GeneralKernel) -> Interval {
    let end = |t: f64, is_zero: bool, sign: f64| {
        if is_zero {
            sign * f64::INFINITY
        } else {
            k.phi(t)
        }
    };
    Interval {
        lo: end(k.patch.lo, k.patch.lo_is_zero, -1.0),
        hi: end(k.patch.hi, k.patch.hi_is_zero, 1.0),
        lo_open: k.patch.lo_is_zero,
        hi_open: k.patch.hi_is_zero,
    }
}

fn build(
    spec: &PotentialSpec,
    t_range: (f64, f64),
    opts: &GeneralOptions,
    family: MapFamily,
    mut parameters: BTreeMap<String, f64>,
) -> Result<FlatteningMap, MapError> {
    let (lo, hi) = t_range;
    if !(lo <= 0.0 && 0.0 <= hi) {
        return Err(MapError::InvalidParameter(format!("t range [{lo}, {hi}] must contain 0")));
    }
    let af = expr_fn(&spec.a, &spec.params)?;
    let bf = expr_fn(&spec.b, &spec.params)?;
    let cf = expr_fn(&spec.c, &spec.params)?;
    let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
        let (a, b, c) = (af(t), bf(t), cf(t));
        let w2 = 2.0 * a;
        dy[0] = y[1];
        dy[1] = -w2 * y[0];
        dy[2] = y[3];
        dy[3] = -w2 * y[2];
        dy[4] = y[5];
        dy[5] = -w2 * y[4] - b;
        dy[6] = -0.5 * y[5] * y[5] + a * y[4] * y[4] + b * y[4] + c;
    };
    let ode = OdeOptions::with_tol(opts.tol).max_step(opts.max_step);
    let y0 = [0.0, 1.0, 1.0, 0.0, opts.h0, opts.h1, opts.p0];
    let sol = TwoSided::solve(rhs, 0.0, &y0, lo, hi, &ode)?;
    let patch = positive_patch(&sol, 2);
    let kernel = GeneralKernel { sol, patch };
    let tau_domain = tau_interval(&kernel);
    let t_domain = Interval {
        lo: patch.lo,
        hi: patch.hi,
        lo_open: patch.lo_is_zero,
        hi_open: patch.hi_is_zero,
    };
    let shrink = |end: f64, is_zero: bool| if is_zero { 0.8 * end } else { end };
    let window = (
        kernel.phi(shrink(patch.lo, patch.lo_is_zero)),
        kernel.phi(shrink(patch.hi, patch.hi_is_zero)),
    );
    parameters.insert("h0".into(), opts.h0);
    parameters.insert("h1".into(), opts.h1);
    parameters.insert("p0".into(), opts.p0);
    Ok(FlatteningMap::from_kernel(
        family,
        parameters,
        Arc::new(kernel),
        tau_domain,
        t_domain,
        window,
    ))
}

/// Map for any admissible `spec` on the patch around `t = 0` inside `t_range`.
pub fn build_map_general(
    spec: &PotentialSpec,
    t_range: (f64, f64),
    opts: &GeneralOptions,
) -> Result<FlatteningMap, MapError> {
    build(spec, t_range, opts, MapFamily::General, BTreeMap::new())
}

/// Time-dependent oscillator `½ω(t)²x²`; `HChoice::Zero` is the Arnold map.
pub fn map_ho_timedep(
    omega: &Expr,
    params: &Bindings,
    h_choice: HChoice,
    t_range: (f64, f64),
    tol: f64,
) -> Result<FlatteningMap, MapError> {
    let a = mul(Expr::constant(0.5), powi(omega.clone(), 2));
    let spec = PotentialSpec::new(a, Expr::zero(), Expr::zero())?.with_params(params.clone());
    let (h0, h1) = match h_choice {
        HChoice::Zero => (0.0, 0.0),
        HChoice::Ivp { h0, h1 } => (h0, h1),
    };
    let opts = GeneralOptions {
        h0,
        h1,
        tol,
        ..Default::default()
    };
    build(&spec, t_range, &opts, MapFamily::HoTimedep, BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatmap::{map_ho_const, PotentialSpec};

    #[test]
    fn zero_potential_gives_identity() {
        let m = build_map_general(&PotentialSpec::free(), (-2.0, 2.0), &GeneralOptions::default()).unwrap();
        for &(xi, tau) in &[(0.3, -1.5), (-0.7, 0.4), (1.0, 2.0)] {
            let (t, x) = m.to_original(xi, tau).unwrap();
            assert!((t - tau).abs() < 1e-12 && (x - xi).abs() < 1e-12);
            assert!(m.f3(xi, tau).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn unit_oscillator_matches_closed_form() {
        let g = build_map_general(&PotentialSpec::oscillator(1.0), (-2.0, 2.0), &GeneralOptions::default()).unwrap();
        let c = map_ho_const(1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(g.t_domain().hi_open && (g.t_domain().hi - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        for &tau in &[-3.0, -0.5, 0.0, 0.8, 2.5] {
            let a = g.point(tau).unwrap();
            let b = c.point(tau).unwrap();
            assert!((a.t - b.t).abs() < 1e-8, "{a:?} {b:?}");
            assert!((a.omega - b.omega).abs() < 1e-8 * b.omega);
            assert!((a.omega_tau - b.omega_tau).abs() < 1e-8 * b.omega);
            for &xi in &[-1.0, 0.5] {
                assert!((g.f3(xi, tau).unwrap() - c.f3(xi, tau).unwrap()).abs() < 1e-8);
            }
        }
    }
}
