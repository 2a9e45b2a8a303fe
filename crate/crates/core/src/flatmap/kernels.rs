use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{Bindings, Expr, Var};
use crate::numeric::ode::{solve, DenseSolution, OdeOptions, TwoSided};
use crate::schwarzian::{expr_fn, ScalarFn};

use super::{FlatteningMap, Interval, MapError, MapFamily, MapKernel, MapPoint};

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[derive(Debug)]
struct IdentityKernel;

impl MapKernel for IdentityKernel {
    fn t_of_tau(&self, tau: f64) -> f64 {
        tau
    }
    fn tau_of_t(&self, t: f64) -> f64 {
        t
    }
    fn point(&self, tau: f64) -> MapPoint {
        MapPoint {
            tau,
            t: tau,
            omega: 1.0,
            omega_tau: 0.0,
            h: 0.0,
            h_tau: 0.0,
            p: 0.0,
        }
    }
}

/// `τ = t, ξ = x, v = u`.
pub fn map_identity() -> FlatteningMap {
    let all = Interval::open(f64::NEG_INFINITY, f64::INFINITY);
    FlatteningMap::from_kernel(
        MapFamily::Identity,
        BTreeMap::new(),
        Arc::new(IdentityKernel),
        all,
        all,
        (-1.0, 1.0),
    )
}

#[derive(Debug)]
struct HoConstKernel {
    w0: f64,
    c1: f64,
    c2: f64,
    c3: f64,
}

impl MapKernel for HoConstKernel {
    fn t_of_tau(&self, tau: f64) -> f64 {
        (self.w0 * tau).atan() / self.w0
    }

    fn tau_of_t(&self, t: f64) -> f64 {
        (self.w0 * t).tan() / self.w0
    }

    fn point(&self, tau: f64) -> MapPoint {
        let HoConstKernel { w0, c1, c2, c3 } = *self;
        let wt = w0 * tau;
        let omega = 1.0 + wt * wt;
        let s = omega.sqrt();
        MapPoint {
            tau,
            t: self.t_of_tau(tau),
            omega,
            omega_tau: 2.0 * w0 * wt,
            h: (c1 + c2 * wt) / s,
            h_tau: (c2 - c1 * wt) * w0 / (omega * s),
            p: ((c1 * c1 - c2 * c2) * w0 * wt - 2.0 * c1 * c2 * w0) / (2.0 * omega) + c3,
        }
    }
}

/// Closed-form map for `V = ½ω₀²x²` on `|t| < π/(2ω₀)`.
pub fn map_ho_const(omega0: f64, c1: f64, c2: f64, c3: f64) -> Result<FlatteningMap, MapError> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(MapError::InvalidParameter(format!("omega0 must be positive, got {omega0}")));
    }
    let half = FRAC_PI_2 / omega0;
    let w = (0.4 * std::f64::consts::PI).tan() / omega0;
    let w = w.min(2.0);
    Ok(FlatteningMap::from_kernel(
        MapFamily::HoConst,
        params(&[("omega0", omega0), ("c1", c1), ("c2", c2), ("c3", c3)]),
        Arc::new(HoConstKernel { w0: omega0, c1, c2, c3 }),
        Interval::open(f64::NEG_INFINITY, f64::INFINITY),
        Interval::open(-half, half),
        (-w, w),
    ))
}

/// Galilean branch: `Ω = 1`, `τ = t`, `h'' = −B`.
#[derive(Debug)]
enum GalileanKernel {
    Constant { g: f64, h0: f64, h1: f64 },
    /// State `[h, h', ∫₀^τ h'²]`.
    Numeric(TwoSided),
}

impl MapKernel for GalileanKernel {
    fn t_of_tau(&self, tau: f64) -> f64 {
        tau
    }

    fn tau_of_t(&self, t: f64) -> f64 {
        t
    }

    fn point(&self, tau: f64) -> MapPoint {
        let (h, hd, q) = match self {
            GalileanKernel::Constant { g, h0, h1 } => (
                -0.5 * g * tau * tau + h1 * tau + h0,
                -g * tau + h1,
                g * g * tau.powi(3) / 3.0 - g * h1 * tau * tau + h1 * h1 * tau,
            ),
            GalileanKernel::Numeric(sol) => {
                let mut y = [0.0; 3];
                sol.eval_into(tau, &mut y);
                (y[0], y[1], y[2])
            }
        };
        MapPoint {
            tau,
            t: tau,
            omega: 1.0,
            omega_tau: 0.0,
            h,
            h_tau: hd,
            p: -h * hd + 0.5 * q,
        }
    }
}

/// Galilean map for `V = B(t)x` with `h(0) = h0`, `h'(0) = h1`.
///
/// A `B` free of `t` uses the closed form; otherwise `h` is integrated over
/// `t_range`, which must contain 0.
pub fn map_linear_galilean(
    b: &Expr,
    params_b: &Bindings,
    (h0, h1): (f64, f64),
    t_range: (f64, f64),
    tol: f64,
) -> Result<FlatteningMap, MapError> {
    let mut p = params(&[("h0", h0), ("h1", h1)]);
    if !b.depends_on(Var::T) {
        let g = b.eval(&params_b.at_xt(0.0, 0.0))?;
        p.insert("g".into(), g);
        let all = Interval::open(f64::NEG_INFINITY, f64::INFINITY);
        return Ok(FlatteningMap::from_kernel(
            MapFamily::LinearGalilean,
            p,
            Arc::new(GalileanKernel::Constant { g, h0, h1 }),
            all,
            all,
            (t_range.0.max(-1.0), t_range.1.min(2.0)),
        ));
    }
    let (lo, hi) = t_range;
    if !(lo <= 0.0 && 0.0 <= hi) {
        return Err(MapError::InvalidParameter(format!("t range [{lo}, {hi}] must contain 0")));
    }
    let bf = expr_fn(b, params_b)?;
    let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -bf(t);
        dy[2] = y[1] * y[1];
    };
    let opts = OdeOptions::with_tol(tol).max_step(0.05);
    let sol = TwoSided::solve(rhs, 0.0, &[h0, h1, 0.0], lo, hi, &opts)?;
    let dom = Interval::closed(lo, hi);
    Ok(FlatteningMap::from_kernel(
        MapFamily::LinearGalilean,
        p,
        Arc::new(GalileanKernel::Numeric(sol)),
        dom,
        dom,
        (lo, hi),
    ))
}

/// Möbius data for the `c ≠ 0` linear branch; `k = ad − bc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusParams {
    pub k: f64,
    pub c: f64,
    pub d: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Inner integrals in `σ = 1/τ`, based at `σ = 0` (`τ = ∞`, `t = −d/c`):
/// `J1' = −B`, `J2' = −J1`, and `Q` with `p = −Q`.
#[derive(Debug)]
enum MobiusIntegrals {
    Constant(f64),
    /// State `[J1, J2, Q]` over `σ`.
    Numeric(DenseSolution),
}

#[derive(Debug)]
struct MobiusKernel {
    m: MobiusParams,
    ints: MobiusIntegrals,
}

impl MobiusKernel {
    fn t_hat(m: &MobiusParams, sigma: f64) -> f64 {
        -m.k * sigma / (m.c * m.c) - m.d / m.c
    }

    fn integrals(&self, sigma: f64) -> (f64, f64, f64) {
        let MobiusParams { k, c, c1, c2, .. } = self.m;
        match &self.ints {
            MobiusIntegrals::Constant(g) => {
                let alpha = k * k * g / c.powi(4);
                let s = sigma;
                let q = -(c * c / (2.0 * k)) * (c1 * c1 * s + c1 * alpha * s * s + alpha * alpha * s.powi(3) / 3.0)
                    + (k * g / (c * c)) * (c2 * s - 0.5 * c1 * s * s - alpha * s.powi(3) / 6.0);
                (-g * s, 0.5 * g * s * s, q)
            }
            MobiusIntegrals::Numeric(sol) => {
                let mut y = [0.0; 3];
                sol.eval_into(sigma, &mut y);
                (y[0], y[1], y[2])
            }
        }
    }
}

impl MapKernel for MobiusKernel {
    fn t_of_tau(&self, tau: f64) -> f64 {
        Self::t_hat(&self.m, 1.0 / tau)
    }

    fn tau_of_t(&self, t: f64) -> f64 {
        let MobiusParams { k, c, d, .. } = self.m;
        -k / (c * (c * t + d))
    }

    fn point(&self, tau: f64) -> MapPoint {
        let MobiusParams { k, c, c1, c2, .. } = self.m;
        let sigma = 1.0 / tau;
        let (j1, j2, q) = self.integrals(sigma);
        let kk = k * k / c.powi(4);
        MapPoint {
            tau,
            t: self.t_of_tau(tau),
            omega: c * c * tau * tau / k,
            omega_tau: 2.0 * c * c * tau / k,
            h: -kk * j2 - c1 * sigma + c2,
            h_tau: sigma * sigma * (c1 - kk * j1),
            p: -q,
        }
    }
}

/// Möbius linear branch for `V = B(t)x`: `t = −k/(c²τ) − d/c`, `Ω = c²τ²/k`.
///
/// The map lives on the side `cτ > 0`, i.e. `t < −d/c` for `c > 0` and
/// `t > −d/c` for `c < 0`. Integration constants are fixed at `τ = ∞`.
/// A `B` free of `t` uses closed forms; otherwise the integrals are computed
/// from `t = −d/c` out to the far end of `t_range`, which must lie on the
/// valid side.
pub fn map_linear_mobius(
    b: &Expr,
    params_b: &Bindings,
    m: MobiusParams,
    t_range: (f64, f64),
    tol: f64,
) -> Result<FlatteningMap, MapError> {
    if m.c == 0.0 || !m.c.is_finite() {
        return Err(MapError::InvalidParameter("c must be nonzero (use the Galilean branch for c = 0)".into()));
    }
    if !(m.k > 0.0) {
        return Err(MapError::InvalidParameter(format!("k = ad - bc must be positive for Omega > 0, got {}", m.k)));
    }
    let t_sing = -m.d / m.c;
    let side = m.c.signum();
    let p = params(&[("k", m.k), ("c", m.c), ("d", m.d), ("c1", m.c1), ("c2", m.c2)]);
    let valid = |t: f64| side * (t_sing - t) > 0.0;
    let (lo, hi) = t_range;
    if !(valid(lo) && valid(hi)) || lo > hi {
        return Err(MapError::DomainClipped {
            coord: "t",
            value: if valid(lo) { hi } else { lo },
            lo: if side > 0.0 { f64::NEG_INFINITY } else { t_sing },
            hi: if side > 0.0 { t_sing } else { f64::INFINITY },
        });
    }
    let tau_of = |t: f64| -m.k / (m.c * (m.c * t + m.d));
    let (wa, wb) = (tau_of(lo), tau_of(hi));
    let window = (wa.min(wb), wa.max(wb));
    let side_tau = if side > 0.0 {
        Interval::open(0.0, f64::INFINITY)
    } else {
        Interval::open(f64::NEG_INFINITY, 0.0)
    };
    let side_t = if side > 0.0 {
        Interval::open(f64::NEG_INFINITY, t_sing)
    } else {
        Interval::open(t_sing, f64::INFINITY)
    };

    if !b.depends_on(Var::T) {
        let g = b.eval(&params_b.at_xt(0.0, 0.0))?;
        let mut p = p;
        p.insert("g".into(), g);
        return Ok(FlatteningMap::from_kernel(
            MapFamily::LinearMobius,
            p,
            Arc::new(MobiusKernel {
                m,
                ints: MobiusIntegrals::Constant(g),
            }),
            side_tau,
            side_t,
            window,
        ));
    }

    let bf: ScalarFn = expr_fn(b, &params_b.at_xt(0.0, t_sing))?;
    let MobiusParams { k, c, c1, c2, .. } = m;
    let kk = k * k / c.powi(4);
    let rhs = move |s: f64, y: &[f64], dy: &mut [f64]| {
        let bt = bf(MobiusKernel::t_hat(&m, s));
        let a = c1 - kk * y[0];
        let h = c2 - c1 * s - kk * y[1];
        dy[0] = -bt;
        dy[1] = -y[0];
        dy[2] = -(c * c / (2.0 * k)) * a * a + (k / (c * c)) * bt * h;
    };
    // σ runs from 0 (t = −d/c) to the far end of the requested range
    let sigma_far = 1.0 / window.0.abs().min(window.1.abs());
    let sigma_end = side * sigma_far;
    let opts = OdeOptions::with_tol(tol).max_step(0.05 * sigma_far.max(1e-3));
    let sol = solve(rhs, 0.0, &[0.0, 0.0, 0.0], sigma_end, &opts)?;
    let tau_dom = if side > 0.0 {
        Interval {
            lo: 1.0 / sigma_far,
            hi: f64::INFINITY,
            lo_open: false,
            hi_open: true,
        }
    } else {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: -1.0 / sigma_far,
            lo_open: true,
            hi_open: false,
        }
    };
    let t_far = MobiusKernel::t_hat(&m, sigma_end);
    let t_dom = if side > 0.0 {
        Interval {
            lo: t_far,
            hi: t_sing,
            lo_open: false,
            hi_open: true,
        }
    } else {
        Interval {
            lo: t_sing,
            hi: t_far,
            lo_open: true,
            hi_open: false,
        }
    };
    Ok(FlatteningMap::from_kernel(
        MapFamily::LinearMobius,
        p,
        Arc::new(MobiusKernel {
            m,
            ints: MobiusIntegrals::Numeric(sol),
        }),
        tau_dom,
        t_dom,
        window,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ho_const_example_point() {
        let m = map_ho_const(1.0, 0.0, 0.0, 0.0).unwrap();
        let (t, x) = m.to_original(1.0, 1.0).unwrap();
        assert!((t - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((x - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((m.f3(1.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ho_const_small_frequency_is_near_identity() {
        let m = map_ho_const(1e-6, 0.0, 0.0, 0.0).unwrap();
        for &(xi, t) in &[(0.5, -0.9), (-1.0, 0.3), (0.2, 0.99)] {
            let tau = m.tau_of_t(t).unwrap();
            assert!((tau - t).abs() < 1e-9);
            let (_, x) = m.to_original(xi, tau).unwrap();
            assert!((x - xi).abs() < 1e-9);
            assert!(m.f3(xi, tau).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn galilean_constant_example() {
        let m = map_linear_galilean(&Expr::one(), &Bindings::new(), (0.0, 0.0), (-1.0, 3.0), 1e-10).unwrap();
        let (t, x) = m.to_original(0.7, 2.0).unwrap();
        assert_eq!(t, 2.0);
        assert!((x - (0.7 - 2.0)).abs() < 1e-15);
        assert!((m.f3(0.7, 2.0).unwrap() - (2.0 * 0.7 - 8.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn mobius_constant_example() {
        let mp = MobiusParams {
            k: 1.0,
            c: 1.0,
            d: 0.0,
            c1: 0.0,
            c2: 0.0,
        };
        let m = map_linear_mobius(&Expr::one(), &Bindings::new(), mp, (-2.0, -0.5), 1e-10).unwrap();
        for &xi in &[-0.4, 0.0, 1.3] {
            let (t, x) = m.to_original(xi, 1.0).unwrap();
            assert!((t + 1.0).abs() < 1e-15);
            assert!((x - (xi - 0.5)).abs() < 1e-15);
            let f3 = m.f3(xi, 1.0).unwrap();
            assert!((f3 - (xi * xi / 2.0 - xi + 1.0 / 3.0)).abs() < 1e-14);
        }
        assert!(matches!(m.point(-1.0), Err(MapError::DomainClipped { .. })));
    }

    #[test]
    fn mobius_numeric_matches_closed_form_for_constant_b() {
        let mp = MobiusParams {
            k: 2.0,
            c: 0.7,
            d: 0.3,
            c1: 0.4,
            c2: -0.2,
        };
        let closed = map_linear_mobius(&Expr::constant(1.3), &Bindings::new(), mp, (-3.0, -1.0), 1e-12).unwrap();
        // constant in value but formally t-dependent, so the quadrature path runs
        let b = crate::expr::parse("1.3*cos(t)^2 + 1.3*sin(t)^2", &[]).unwrap();
        let num = map_linear_mobius(&b, &Bindings::new(), mp, (-3.0, -1.0), 1e-12).unwrap();
        let (lo, hi) = num.window();
        for i in 0..=10 {
            let tau = lo + (hi - lo) * i as f64 / 10.0;
            let a = closed.point(tau).unwrap();
            let n = num.point(tau).unwrap();
            assert!((a.h - n.h).abs() < 1e-9, "{a:?} {n:?}");
            assert!((a.h_tau - n.h_tau).abs() < 1e-9);
            assert!((a.p - n.p).abs() < 1e-9);
        }
    }
}
