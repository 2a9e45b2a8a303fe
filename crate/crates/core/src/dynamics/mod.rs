//! Newtonian trajectories, geodesics of the lifted metric and the action
//! identity between a potential and the free particle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Bindings, EvalError, Expr, Var};
use crate::flatmap::{FlatteningMap, MapError, PotentialSpec};
use crate::geometry::{christoffel, EisenhartMetric, GeometryError, TensorField, DIM};
use crate::numeric::ode::{solve, solve_until, DenseSolution, OdeError, OdeOptions};
use crate::numeric::quad::integrate;
use crate::numeric::roots::invert_increasing;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("degenerate metric: Omega({t}) = {omega}")]
    DegenerateMetric { t: f64, omega: f64 },
    #[error("m must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("integrator failure: {0}")]
    Integrator(#[from] OdeError),
    #[error("norm drift {drift:e} exceeds {limit:e}")]
    NormDriftExceeded { drift: f64, limit: f64 },
    #[error("t = {t} not reached by the geodesic (stopped at {reached})")]
    NotReached { t: f64, reached: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Dense solution `[x, ẋ]` of `ẍ = −∂V/∂x` over `t`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    sol: DenseSolution,
}

impl Trajectory {
    pub fn t_range(&self) -> (f64, f64) {
        (self.sol.lo(), self.sol.hi())
    }

    pub fn x(&self, t: f64) -> f64 {
        self.sol.component(t, 0)
    }

    pub fn v(&self, t: f64) -> f64 {
        self.sol.component(t, 1)
    }

    /// `n` evenly spaced samples `(t, x)` over the range.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = (self.sol.t_start(), self.sol.t_end());
        (0..n)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64;
                (t, self.x(t))
            })
            .collect()
    }
}

fn eval_at(e: &Expr, params: &Bindings, x: f64, t: f64) -> f64 {
    e.eval(&params.at_xt(x, t)).unwrap_or(f64::NAN)
}

pub fn newton_trajectory(
    v: &Expr,
    params: &Bindings,
    x0: f64,
    v0: f64,
    (t0, t1): (f64, f64),
    tol: f64,
) -> Result<Trajectory, DynamicsError> {
    let force = v.diff(Var::X);
    force.eval(&params.at_xt(x0, t0))?;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -eval_at(&force, params, y[0], t);
    };
    let sol = solve(rhs, t0, &[x0, v0], t1, &OdeOptions::with_tol(tol).max_step(0.05))?;
    Ok(Trajectory { sol })
}

/// Point and tangent of a lifted curve in `(t, u, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub position: [f64; DIM],
    pub velocity: [f64; DIM],
    pub affine: f64,
}

/// Lift Newtonian initial data to a null geodesic: `ṫ = m/Ω(t0)`,
/// `ẋ = v0 ṫ`, `u̇` from the null condition, `u(t0) = 0`.
pub fn lift_initial_data(
    v: &Expr,
    omega: &Expr,
    params: &Bindings,
    x0: f64,
    v0: f64,
    t0: f64,
    m: f64,
) -> Result<GeodesicState, DynamicsError> {
    lift_with_norm(v, omega, params, x0, v0, t0, m, 0.0)
}

/// Build the lifted metric and lift `(x0, v0)` at `t0`.
pub fn build_and_lift(
    v: &Expr,
    omega: &Expr,
    params: &Bindings,
    x0: f64,
    v0: f64,
    t0: f64,
    m: f64,
) -> Result<(EisenhartMetric, GeodesicState), DynamicsError> {
    let metric = crate::geometry::build_metric(v, omega)?;
    let s0 = lift_initial_data(v, omega, params, x0, v0, t0, m)?;
    Ok((metric, s0))
}

/// As [`lift_initial_data`] for the timelike branch `g(ẋ, ẋ) = −M²`; `v` is
/// then the metric potential `U`. Only used to confirm `M`-independence.
#[allow(clippy::too_many_arguments)]
pub(crate) fn lift_with_norm(
    v: &Expr,
    omega: &Expr,
    params: &Bindings,
    x0: f64,
    v0: f64,
    t0: f64,
    m: f64,
    mass_sq: f64,
) -> Result<GeodesicState, DynamicsError> {
    if !(m > 0.0) {
        return Err(DynamicsError::NonPositiveScale(m));
    }
    let b = params.at_xt(x0, t0);
    let w = omega.eval(&b)?;
    if !(w > 0.0) {
        return Err(DynamicsError::DegenerateMetric { t: t0, omega: w });
    }
    let pot = v.eval(&b)?;
    let td = m / w;
    let xd = v0 * td;
    // Ω(−2Uṫ² + 2ṫu̇ + ẋ²) = −M²
    let ud = (-mass_sq / w + 2.0 * pot * td * td - xd * xd) / (2.0 * td);
    Ok(GeodesicState {
        position: [t0, 0.0, x0],
        velocity: [td, ud, xd],
        affine: 0.0,
    })
}

/// Geodesic integrated in the affine parameter, state `[t, u, x, ṫ, u̇, ẋ]`.
#[derive(Debug, Clone)]
pub struct Geodesic {
    sol: DenseSolution,
    norm_drift: f64,
}

impl Geodesic {
    pub fn state(&self, s: f64) -> GeodesicState {
        let y = self.sol.eval(s);
        GeodesicState {
            position: [y[0], y[1], y[2]],
            velocity: [y[3], y[4], y[5]],
            affine: s,
        }
    }

    pub fn affine_range(&self) -> (f64, f64) {
        (self.sol.lo(), self.sol.hi())
    }

    /// Largest `|g(ẋ, ẋ) − g(ẋ, ẋ)|₀` over accepted steps.
    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }

    pub fn t_range(&self) -> (f64, f64) {
        let (a, b) = self.affine_range();
        let (ta, tb) = (self.sol.component(a, 0), self.sol.component(b, 0));
        (ta.min(tb), ta.max(tb))
    }

    /// Affine parameter at which the curve reaches time `t` (`t` is
    /// monotone along the curve since `ṫ = m/Ω > 0`).
    pub fn affine_at_t(&self, t: f64) -> Result<f64, DynamicsError> {
        let (lo, hi) = self.t_range();
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return Err(DynamicsError::NotReached { t, reached: hi });
        }
        let (a, b) = self.affine_range();
        let s0 = self.sol.t_start();
        let guess = s0 + (t - self.sol.component(s0, 0)) / self.sol.component(s0, 3);
        Ok(invert_increasing(
            |s| self.sol.component(s, 0),
            |s| self.sol.component(s, 3),
            t,
            a,
            b,
            guess,
        ))
    }

    /// Projected `x(t)`.
    pub fn x_at_t(&self, t: f64) -> Result<f64, DynamicsError> {
        Ok(self.state(self.affine_at_t(t)?).position[2])
    }
}

fn metric_norm(metric: &EisenhartMetric, params: &Bindings, y: &[f64]) -> f64 {
    let b = params.at_xt(y[2], y[0]);
    metric
        .inner(&b, &[y[3], y[4], y[5]], &[y[3], y[4], y[5]])
        .unwrap_or(f64::NAN)
}

fn geodesic_rhs<'a>(
    gamma: &'a TensorField,
    params: &'a Bindings,
) -> impl FnMut(f64, &[f64], &mut [f64]) + 'a {
    move |_s, y, dy| {
        let b = params.at_xt(y[2], y[0]);
        let vel = [y[3], y[4], y[5]];
        for mu in 0..DIM {
            dy[mu] = vel[mu];
            let mut acc = 0.0;
            for nu in 0..DIM {
                for la in 0..DIM {
                    let g = gamma.get(&[mu, nu, la]);
                    if !g.is_zero() {
                        acc += g.eval(&b).unwrap_or(f64::NAN) * vel[nu] * vel[la];
                    }
                }
            }
            dy[DIM + mu] = -acc;
        }
    }
}

/// Options for geodesic integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicOptions {
    pub tol: f64,
    pub max_step: f64,
    /// Allowed drift of `g(ẋ, ẋ)` from its initial value.
    pub norm_limit: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            tol: 1e-11,
            max_step: 0.02,
            norm_limit: 1e-8,
        }
    }
}

fn finish(
    metric: &EisenhartMetric,
    params: &Bindings,
    sol: DenseSolution,
    opts: &GeodesicOptions,
) -> Result<Geodesic, DynamicsError> {
    let steps = sol.steps();
    let n0 = metric_norm(metric, params, &steps[0].1);
    let norm_drift = steps
        .iter()
        .map(|(_, y)| (metric_norm(metric, params, y) - n0).abs())
        .fold(0.0, f64::max);
    if !(norm_drift <= opts.norm_limit) {
        return Err(DynamicsError::NormDriftExceeded {
            drift: norm_drift,
            limit: opts.norm_limit,
        });
    }
    Ok(Geodesic { sol, norm_drift })
}

fn initial_vector(s0: &GeodesicState) -> Vec<f64> {
    let mut y = s0.position.to_vec();
    y.extend_from_slice(&s0.velocity);
    y
}

/// Integrate `ẍ^μ + Γ^μ_{νλ}ẋ^νẋ^λ = 0` over an affine interval.
pub fn integrate_geodesic(
    metric: &EisenhartMetric,
    params: &Bindings,
    s0: &GeodesicState,
    affine_end: f64,
    opts: &GeodesicOptions,
) -> Result<Geodesic, DynamicsError> {
    let gamma = christoffel(metric);
    let ode = OdeOptions::with_tol(opts.tol).max_step(opts.max_step);
    let sol = solve(geodesic_rhs(&gamma, params), s0.affine, &initial_vector(s0), affine_end, &ode)?;
    finish(metric, params, sol, opts)
}

/// Integrate until the coordinate time reaches `t_end`.
pub fn integrate_geodesic_to_time(
    metric: &EisenhartMetric,
    params: &Bindings,
    s0: &GeodesicState,
    t_end: f64,
    opts: &GeodesicOptions,
) -> Result<Geodesic, DynamicsError> {
    let gamma = christoffel(metric);
    let ode = OdeOptions::with_tol(opts.tol).max_step(opts.max_step);
    let td = s0.velocity[0];
    // generous affine budget; the stop condition ends the run
    let budget = s0.affine + 1e3 * ((t_end - s0.position[0]) / td).abs().max(1.0);
    let sol = solve_until(
        geodesic_rhs(&gamma, params),
        s0.affine,
        &initial_vector(s0),
        budget,
        &ode,
        |_, y| y[0] >= t_end,
    )?;
    let reached = sol.component(sol.t_end(), 0);
    if reached < t_end {
        return Err(DynamicsError::NotReached { t: t_end, reached });
    }
    finish(metric, params, sol, opts)
}

/// One row of a projection comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSample {
    pub t: f64,
    pub x_newton: f64,
    pub x_projected: f64,
    pub null_norm: f64,
}

/// Newtonian data and the lift it is compared against.
#[derive(Debug, Clone)]
pub struct ProjectionSetup<'a> {
    pub potential: &'a Expr,
    pub omega: &'a Expr,
    pub params: &'a Bindings,
    pub x0: f64,
    pub v0: f64,
    pub t_range: (f64, f64),
    pub m: f64,
}

/// Lift `(x0, v0)` at `t_range.0`, integrate the null geodesic until
/// `t_range.1`, and tabulate its projection against `newton_trajectory` at
/// `n` uniform times.
pub fn compare_projection(
    setup: &ProjectionSetup<'_>,
    n: usize,
    opts: &GeodesicOptions,
) -> Result<Vec<ProjectionSample>, DynamicsError> {
    let (t0, t1) = setup.t_range;
    let newton = newton_trajectory(setup.potential, setup.params, setup.x0, setup.v0, (t0, t1), opts.tol)?;
    let (metric, s0) =
        build_and_lift(setup.potential, setup.omega, setup.params, setup.x0, setup.v0, t0, setup.m)?;
    let geo = integrate_geodesic_to_time(&metric, setup.params, &s0, t1, opts)?;
    (0..n)
        .map(|i| {
            let t = t0 + (t1 - t0) * i as f64 / (n.max(2) - 1) as f64;
            let s = geo.affine_at_t(t)?;
            let st = geo.state(s);
            let b = setup.params.at_xt(st.position[2], st.position[0]);
            Ok(ProjectionSample {
                t,
                x_newton: newton.x(t),
                x_projected: st.position[2],
                null_norm: metric.inner(&b, &st.velocity, &st.velocity)?,
            })
        })
        .collect()
}

/// Both sides of the action identity `S_V = S_free − Δf3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionReport {
    pub s_v: f64,
    pub s_free: f64,
    pub delta_f3: f64,
    /// `S_V − S_free + Δf3`.
    pub residual: f64,
}

/// Evaluate both actions along `path` between `t_i` and `t_f`.
pub fn action_equivalence(
    spec: &PotentialSpec,
    map: &FlatteningMap,
    path: &Trajectory,
    t_i: f64,
    t_f: f64,
) -> Result<ActionReport, DynamicsError> {
    map.tau_of_t(t_i)?;
    map.tau_of_t(t_f)?;
    let lagrangian = |t: f64| {
        let (x, v) = (path.x(t), path.v(t));
        0.5 * v * v - spec.v(x, t).unwrap_or(f64::NAN)
    };
    let s_v = integrate(lagrangian, t_i, t_f, 1e-13, 1e-13).value;

    // free side integrated in t using dτ = Ω dt
    let free = |t: f64| {
        let tau = map.tau_of_t(t).expect("inside domain");
        let pt = map.point(tau).expect("inside domain");
        let (x, v) = (path.x(t), path.v(t));
        let sq = pt.omega.sqrt();
        let dxi = (v / pt.omega - pt.h_tau) * sq + (x - pt.h) * pt.omega_tau / (2.0 * sq);
        0.5 * dxi * dxi * pt.omega
    };
    let s_free = integrate(free, t_i, t_f, 1e-13, 1e-13).value;

    let f3_at = |t: f64| -> Result<f64, MapError> {
        let (tau, xi) = map.to_flat(t, path.x(t))?;
        map.f3(xi, tau)
    };
    let delta_f3 = f3_at(t_f)? - f3_at(t_i)?;
    Ok(ActionReport {
        s_v,
        s_free,
        delta_f3,
        residual: s_v - s_free + delta_f3,
    })
}
