//! Flattening coordinate maps `(τ, v, ξ) → (t, u, x)` for the admissible
//! family `V = a(t)x² + B(t)x + C(t)`.
//!
//! Every map has the shape
//! `x = ξ/√Ω + h(τ)`, `t = t(τ)`, `u = v + f3(ξ, τ)` with
//! `f3 = ξ²Ω_τ/(4Ω) − √Ω h_τ ξ + p(τ)`; a kernel supplies
//! `t(τ), Ω, Ω_τ, h, h_τ, p` and everything else is assembled here.

mod general;
mod kernels;
mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{add, mul, powi, Bindings, EvalError, Expr, Var};
use crate::numeric::ode::OdeError;
use crate::schwarzian::SchwarzianError;

pub use general::{build_map_general, map_ho_timedep, GeneralOptions, HChoice};
pub use kernels::{map_ho_const, map_identity, map_linear_galilean, map_linear_mobius, MobiusParams};
pub use verify::{equation_residuals, verify_map, EquationReport, VerifyOptions, VerifyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("{coord} = {value} is outside the map domain ({lo}, {hi})")]
    DomainClipped {
        coord: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid potential: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Hill(#[from] SchwarzianError),
    #[error("integrator failure: {0}")]
    Integrator(#[from] OdeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `V(x, t) = a(t)x² + B(t)x + C(t)` with bound parameters.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub params: Bindings,
}

impl PotentialSpec {
    pub fn new(a: Expr, b: Expr, c: Expr) -> Result<Self, MapError> {
        for (name, e) in [("a", &a), ("B", &b), ("C", &c)] {
            if e.depends_on(Var::X) || e.depends_on(Var::Tau) {
                return Err(MapError::InvalidSpec(format!("{name} must depend on t only")));
            }
        }
        Ok(PotentialSpec {
            a,
            b,
            c,
            params: Bindings::new(),
        })
    }

    pub fn with_params(mut self, params: Bindings) -> Self {
        self.params = params;
        self
    }

    /// Constant-frequency oscillator `½ω₀²x²`.
    pub fn oscillator(omega0: f64) -> Self {
        PotentialSpec::new(Expr::constant(0.5 * omega0 * omega0), Expr::zero(), Expr::zero())
            .expect("constants are admissible")
    }

    /// Linear potential `B(t)·x`.
    pub fn linear(b: Expr) -> Result<Self, MapError> {
        PotentialSpec::new(Expr::zero(), b, Expr::zero())
    }

    pub fn free() -> Self {
        PotentialSpec::oscillator(0.0)
    }

    pub fn potential(&self) -> Expr {
        add(
            add(mul(self.a.clone(), powi(Expr::x(), 2)), mul(self.b.clone(), Expr::x())),
            self.c.clone(),
        )
    }

    pub fn coefficients(&self, t: f64) -> Result<(f64, f64, f64), EvalError> {
        let b = self.params.at_xt(0.0, t);
        Ok((self.a.eval(&b)?, self.b.eval(&b)?, self.c.eval(&b)?))
    }

    pub fn v(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        let (a, b, c) = self.coefficients(t)?;
        Ok(a * x * x + b * x + c)
    }
}

/// Which construction produced a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapFamily {
    Identity,
    General,
    HoConst,
    HoTimedep,
    LinearMobius,
    LinearGalilean,
}

impl MapFamily {
    pub fn name(self) -> &'static str {
        match self {
            MapFamily::Identity => "identity",
            MapFamily::General => "general",
            MapFamily::HoConst => "ho_const",
            MapFamily::HoTimedep => "ho_timedep",
            MapFamily::LinearMobius => "linear_mobius",
            MapFamily::LinearGalilean => "linear_galilean",
        }
    }
}

/// Everything a map needs at one value of `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub tau: f64,
    pub t: f64,
    pub omega: f64,
    /// `dΩ/dτ`.
    pub omega_tau: f64,
    pub h: f64,
    /// `dh/dτ`.
    pub h_tau: f64,
    pub p: f64,
}

/// The `τ`-dependent data of one map family.
pub trait MapKernel: Send + Sync + fmt::Debug {
    fn t_of_tau(&self, tau: f64) -> f64;
    fn tau_of_t(&self, t: f64) -> f64;
    fn point(&self, tau: f64) -> MapPoint;
}

/// Interval with per-end openness; open ends are coordinate singularities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }
}

/// A flattening map together with its validity domain.
#[derive(Debug, Clone)]
pub struct FlatteningMap {
    family: MapFamily,
    parameters: BTreeMap<String, f64>,
    kernel: Arc<dyn MapKernel>,
    tau_domain: Interval,
    t_domain: Interval,
    window: (f64, f64),
}

impl FlatteningMap {
    /// `window` is a finite `τ` range inside the domain used for sampling.
    pub fn from_kernel(
        family: MapFamily,
        parameters: BTreeMap<String, f64>,
        kernel: Arc<dyn MapKernel>,
        tau_domain: Interval,
        t_domain: Interval,
        window: (f64, f64),
    ) -> Self {
        FlatteningMap {
            family,
            parameters,
            kernel,
            tau_domain,
            t_domain,
            window,
        }
    }

    pub fn family(&self) -> MapFamily {
        self.family
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn tau_domain(&self) -> Interval {
        self.tau_domain
    }

    pub fn t_domain(&self) -> Interval {
        self.t_domain
    }

    /// Finite `τ` window used for randomized checks and descriptors.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    fn check_tau(&self, tau: f64) -> Result<(), MapError> {
        if self.tau_domain.contains(tau) {
            Ok(())
        } else {
            Err(MapError::DomainClipped {
                coord: "tau",
                value: tau,
                lo: self.tau_domain.lo,
                hi: self.tau_domain.hi,
            })
        }
    }

    fn check_t(&self, t: f64) -> Result<(), MapError> {
        if self.t_domain.contains(t) {
            Ok(())
        } else {
            Err(MapError::DomainClipped {
                coord: "t",
                value: t,
                lo: self.t_domain.lo,
                hi: self.t_domain.hi,
            })
        }
    }

    pub fn point(&self, tau: f64) -> Result<MapPoint, MapError> {
        self.check_tau(tau)?;
        Ok(self.kernel.point(tau))
    }

    pub fn t_of_tau(&self, tau: f64) -> Result<f64, MapError> {
        self.check_tau(tau)?;
        Ok(self.kernel.t_of_tau(tau))
    }

    pub fn tau_of_t(&self, t: f64) -> Result<f64, MapError> {
        self.check_t(t)?;
        Ok(self.kernel.tau_of_t(t))
    }

    pub fn omega_at_t(&self, t: f64) -> Result<f64, MapError> {
        let tau = self.tau_of_t(t)?;
        Ok(self.kernel.point(tau).omega)
    }

    pub fn h(&self, tau: f64) -> Result<f64, MapError> {
        Ok(self.point(tau)?.h)
    }

    pub fn p(&self, tau: f64) -> Result<f64, MapError> {
        Ok(self.point(tau)?.p)
    }

    pub fn f1(&self, xi: f64, tau: f64) -> Result<f64, MapError> {
        Ok(f1_at(&self.point(tau)?, xi))
    }

    pub fn f2(&self, _xi: f64, tau: f64) -> Result<f64, MapError> {
        self.t_of_tau(tau)
    }

    pub fn f3(&self, xi: f64, tau: f64) -> Result<f64, MapError> {
        Ok(f3_at(&self.point(tau)?, xi))
    }

    /// `(ξ, τ) → (t, x)`.
    pub fn to_original(&self, xi: f64, tau: f64) -> Result<(f64, f64), MapError> {
        let pt = self.point(tau)?;
        Ok((pt.t, f1_at(&pt, xi)))
    }

    /// `(t, x) → (τ, ξ)`.
    pub fn to_flat(&self, t: f64, x: f64) -> Result<(f64, f64), MapError> {
        let tau = self.tau_of_t(t)?;
        let pt = self.kernel.point(tau);
        Ok((tau, xi_at(&pt, x)))
    }

    /// Map descriptor with `n` samples evenly spaced over the window.
    pub fn descriptor(&self, n: usize) -> Result<MapDescriptor, MapError> {
        let (lo, hi) = self.window;
        let samples = (0..n)
            .map(|i| {
                let tau = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
                let pt = self.point(tau)?;
                Ok(MapSample {
                    t: pt.t,
                    tau,
                    omega: pt.omega,
                    h: pt.h,
                    p: pt.p,
                })
            })
            .collect::<Result<_, MapError>>()?;
        Ok(MapDescriptor {
            family: self.family,
            parameters: self.parameters.clone(),
            domain: MapDomain {
                t: self.t_domain,
                tau: self.tau_domain,
            },
            samples,
        })
    }
}

pub fn f1_at(pt: &MapPoint, xi: f64) -> f64 {
    xi / pt.omega.sqrt() + pt.h
}

pub fn f3_at(pt: &MapPoint, xi: f64) -> f64 {
    xi * xi * pt.omega_tau / (4.0 * pt.omega) - pt.omega.sqrt() * pt.h_tau * xi + pt.p
}

pub fn xi_at(pt: &MapPoint, x: f64) -> f64 {
    (x - pt.h) * pt.omega.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDomain {
    pub t: Interval,
    pub tau: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSample {
    pub t: f64,
    pub tau: f64,
    pub omega: f64,
    pub h: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDescriptor {
    pub family: MapFamily,
    pub parameters: BTreeMap<String, f64>,
    pub domain: MapDomain,
    pub samples: Vec<MapSample>,
}
