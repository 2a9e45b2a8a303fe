//! Numerical check of the five flatness relations of a map, and of the
//! `h` and `p` equations, by central differences at random `(ξ, τ)`.

use serde::{Deserialize, Serialize};

use crate::numeric::fd;
use crate::numeric::sampling::{rng, uniform};

use super::{FlatteningMap, MapError, PotentialSpec};

/// Fourth-order central difference refined by one Richardson step.
fn deriv<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    fd::richardson(|s| fd::d1(&f, x, s), h, 4)
}

pub const RELATION_NAMES: [&str; 5] = [
    "df1/dxi - 1/sqrt(Omega)",
    "df2/dtau - 1/Omega",
    "df2/dxi",
    "(df1/dtau)^2 + (2/Omega) df3/dtau - 2V/Omega^2",
    "sqrt(Omega) df1/dtau + df3/dxi",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub xi_range: (f64, f64),
    /// Defaults to the map's own window.
    pub tau_window: Option<(f64, f64)>,
    /// Finite-difference step in both `ξ` and `τ`.
    pub step: f64,
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 100,
            seed: 0,
            xi_range: (-1.0, 1.0),
            tau_window: None,
            step: 1e-3,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub relations: Vec<String>,
    /// Largest absolute residual of each relation.
    pub max_residuals: Vec<f64>,
    pub samples: usize,
    pub max: f64,
    pub tol: f64,
    pub passed: bool,
}

fn sample_taus(map: &FlatteningMap, opts: &VerifyOptions) -> Vec<(f64, f64)> {
    let (lo, hi) = opts.tau_window.unwrap_or(map.window());
    let margin = 3.0 * opts.step;
    let mut r = rng(opts.seed);
    (0..opts.samples)
        .map(|_| {
            let xi = uniform(&mut r, opts.xi_range);
            let tau = uniform(&mut r, (lo + margin, hi - margin));
            (xi, tau)
        })
        .collect()
}

/// Max residual of each relation over `opts.samples` random points.
pub fn verify_map(
    map: &FlatteningMap,
    spec: &PotentialSpec,
    opts: &VerifyOptions,
) -> Result<VerifyReport, MapError> {
    let hs = opts.step;
    let mut worst = [0.0f64; 5];
    for (xi, tau) in sample_taus(map, opts) {
        // domain checks up front so the stencils can unwrap
        for k in -3..=3 {
            map.point(tau + k as f64 * hs)?;
        }
        let f1 = |x: f64, s: f64| map.f1(x, s).expect("checked");
        let f2 = |x: f64, s: f64| map.f2(x, s).expect("checked");
        let f3 = |x: f64, s: f64| map.f3(x, s).expect("checked");
        let pt = map.point(tau)?;
        let w = pt.omega;
        let d1_xi = deriv(|x| f1(x, tau), xi, hs);
        let d1_tau = deriv(|s| f1(xi, s), tau, hs);
        let d2_xi = deriv(|x| f2(x, tau), xi, hs);
        let d2_tau = deriv(|s| f2(xi, s), tau, hs);
        let d3_xi = deriv(|x| f3(x, tau), xi, hs);
        let d3_tau = deriv(|s| f3(xi, s), tau, hs);
        let v = spec.v(f1(xi, tau), pt.t)?;
        let r = [
            d1_xi - 1.0 / w.sqrt(),
            d2_tau - 1.0 / w,
            d2_xi,
            d1_tau * d1_tau + 2.0 / w * d3_tau - 2.0 * v / (w * w),
            w.sqrt() * d1_tau + d3_xi,
        ];
        for (m, x) in worst.iter_mut().zip(r) {
            *m = m.max(x.abs());
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    Ok(VerifyReport {
        relations: RELATION_NAMES.iter().map(|s| s.to_string()).collect(),
        max_residuals: worst.to_vec(),
        samples: opts.samples,
        max,
        tol: opts.tol,
        passed: max < opts.tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationReport {
    pub h_equation: f64,
    pub p_equation: f64,
    pub samples: usize,
}

/// Residuals of `h_ττ + (Ω_τ/Ω)h_τ + S h/(2Ω²) + B/Ω² = 0` and
/// `p_τ = −(Ω/2)h_τ² + S h²/(4Ω) + (B h + C)/Ω`, with `S = 4a`.
pub fn equation_residuals(
    map: &FlatteningMap,
    spec: &PotentialSpec,
    opts: &VerifyOptions,
) -> Result<EquationReport, MapError> {
    let hs = opts.step;
    let mut worst_h = 0.0f64;
    let mut worst_p = 0.0f64;
    for (_, tau) in sample_taus(map, opts) {
        for k in -3..=3 {
            map.point(tau + k as f64 * hs)?;
        }
        let pt = map.point(tau)?;
        let (a, b, c) = spec.coefficients(pt.t)?;
        let s = 4.0 * a;
        let w = pt.omega;
        let h_tt = deriv(|x| map.point(x).expect("checked").h_tau, tau, hs);
        let p_t = deriv(|x| map.point(x).expect("checked").p, tau, hs);
        let rh = h_tt + pt.omega_tau / w * pt.h_tau + s * pt.h / (2.0 * w * w) + b / (w * w);
        let rp = p_t - (-0.5 * w * pt.h_tau * pt.h_tau + s * pt.h * pt.h / (4.0 * w) + (b * pt.h + c) / w);
        worst_h = worst_h.max(rh.abs());
        worst_p = worst_p.max(rp.abs());
    }
    Ok(EquationReport {
        h_equation: worst_h,
        p_equation: worst_p,
        samples: opts.samples,
    })
}
