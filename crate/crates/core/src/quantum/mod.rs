//! Wave functions on uniform grids, their transport between the free particle
//! and an admissible potential, and the finite-difference checks used to
//! validate the transport. Units are `ħ = m = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Bindings, EvalError, Expr, Var};
use crate::flatmap::{f1_at, f3_at, FlatteningMap, MapError};
use crate::numeric::quad::integrate;

mod propagate;

pub use propagate::{crank_nicolson, CnResult, DEFAULT_BOX, DEFAULT_N};

/// A wave function as a function of `(time, space)`.
pub type WaveFn<'a> = &'a dyn Fn(f64, f64) -> Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid packet: width must be positive, got {0}")]
    InvalidPacket(f64),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Uniform grid `x_i = x_min + i·dx`, `i < n`, carrying values at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveGrid {
    pub fn zeros(x_min: f64, x_max: f64, n: usize, time: f64) -> Result<Self, QuantumError> {
        if n < 16 {
            return Err(QuantumError::InvalidGrid(format!("n = {n} < 16")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(QuantumError::InvalidGrid(format!("[{x_min}, {x_max}]")));
        }
        Ok(WaveGrid {
            x_min,
            x_max,
            n,
            values: vec![Complex64::new(0.0, 0.0); n],
            time,
        })
    }

    /// Sample `f(time, x)` on the grid.
    pub fn from_fn(
        x_min: f64,
        x_max: f64,
        n: usize,
        time: f64,
        f: impl Fn(f64) -> Result<Complex64, QuantumError>,
    ) -> Result<Self, QuantumError> {
        let mut g = Self::zeros(x_min, x_max, n, time)?;
        for i in 0..n {
            g.values[i] = f(g.x(i))?;
        }
        Ok(g)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    /// Trapezoid `∫|φ|² dx`.
    pub fn norm_sq(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let ends = self.values[0].norm_sqr() + self.values[self.n - 1].norm_sqr();
        (s - 0.5 * ends) * self.dx()
    }

    /// Trapezoid L² distance to a grid with the same layout.
    pub fn l2_distance(&self, other: &WaveGrid) -> Result<f64, QuantumError> {
        self.check_layout(other)?;
        let h = self.dx();
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| {
                let w = if i == 0 || i == self.n - 1 { 0.5 } else { 1.0 };
                w * (a - b).norm_sqr()
            })
            .sum();
        Ok((s * h).sqrt())
    }

    fn check_layout(&self, other: &WaveGrid) -> Result<(), QuantumError> {
        if self.n != other.n || self.x_min != other.x_min || self.x_max != other.x_max {
            return Err(QuantumError::GridMismatch(format!(
                "[{}, {}]/{} vs [{}, {}]/{}",
                self.x_min, self.x_max, self.n, other.x_min, other.x_max, other.n
            )));
        }
        Ok(())
    }
}

/// Gaussian free packet centred at `x0` with momentum `p0` and width `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreePacket {
    pub x0: f64,
    pub p0: f64,
    pub s: f64,
}

impl FreePacket {
    pub fn new(x0: f64, p0: f64, s: f64) -> Result<Self, QuantumError> {
        if !(s > 0.0) {
            return Err(QuantumError::InvalidPacket(s));
        }
        Ok(FreePacket { x0, p0, s })
    }
}

impl Default for FreePacket {
    fn default() -> Self {
        FreePacket {
            x0: 0.0,
            p0: 0.0,
            s: 1.0,
        }
    }
}

/// Spreading Gaussian solving `iφ_τ = −½φ_ξξ`.
pub fn eval_free_packet(pk: &FreePacket, tau: f64, xi: f64) -> Complex64 {
    let i = Complex64::i();
    let s2 = pk.s * pk.s;
    let spread = Complex64::new(1.0, tau / (2.0 * s2));
    let d = xi - pk.x0 - pk.p0 * tau;
    let amp = (2.0 * std::f64::consts::PI * s2).powf(-0.25) / spread.sqrt();
    let arg = -d * d / (4.0 * s2 * spread) + i * (pk.p0 * (xi - pk.x0) - 0.5 * pk.p0 * pk.p0 * tau);
    amp * arg.exp()
}

/// `φ_V(t, x) = Ω^{1/4} e^{−i f3(τ, ξ)} φ_free(τ, ξ)` at one point.
pub fn free_to_potential_at(
    map: &FlatteningMap,
    phi_free: WaveFn<'_>,
    t: f64,
    x: f64,
) -> Result<Complex64, QuantumError> {
    let (tau, xi) = map.to_flat(t, x)?;
    let pt = map.point(tau)?;
    let phase = Complex64::from_polar(pt.omega.powf(0.25), -f3_at(&pt, xi));
    Ok(phase * phi_free(tau, xi))
}

/// Inverse of [`free_to_potential_at`] at one point `(τ, ξ)`.
pub fn potential_to_free_at(
    map: &FlatteningMap,
    phi_v: WaveFn<'_>,
    tau: f64,
    xi: f64,
) -> Result<Complex64, QuantumError> {
    let pt = map.point(tau)?;
    let x = f1_at(&pt, xi);
    let phase = Complex64::from_polar(pt.omega.powf(-0.25), f3_at(&pt, xi));
    Ok(phase * phi_v(pt.t, x))
}

/// Push a free solution to the potential side on the grid `x ∈ [x_min, x_max]`
/// at time `t`.
pub fn map_free_to_potential(
    map: &FlatteningMap,
    phi_free: WaveFn<'_>,
    t: f64,
    (x_min, x_max, n): (f64, f64, usize),
) -> Result<WaveGrid, QuantumError> {
    WaveGrid::from_fn(x_min, x_max, n, t, |x| free_to_potential_at(map, phi_free, t, x))
}

/// Pull a potential-side solution back to the free side on the grid
/// `ξ ∈ [xi_min, xi_max]` at local time `τ`.
pub fn map_potential_to_free(
    map: &FlatteningMap,
    phi_v: WaveFn<'_>,
    tau: f64,
    (xi_min, xi_max, n): (f64, f64, usize),
) -> Result<WaveGrid, QuantumError> {
    WaveGrid::from_fn(xi_min, xi_max, n, tau, |xi| potential_to_free_at(map, phi_v, tau, xi))
}

/// Discrete L² norm of `iφ_t + ½φ_xx − Vφ` over interior points, from three
/// equally spaced slices.
pub fn schrodinger_residual(
    series: [&WaveGrid; 3],
    v: &Expr,
    params: &Bindings,
) -> Result<f64, QuantumError> {
    let [prev, cur, next] = series;
    cur.check_layout(prev)?;
    cur.check_layout(next)?;
    let dt = 0.5 * (next.time - prev.time);
    let gap = (cur.time - prev.time) - (next.time - cur.time);
    if !(dt > 0.0) || gap.abs() > 1e-12 * dt.max(1.0) {
        return Err(QuantumError::GridMismatch(format!(
            "times {}, {}, {} are not equally spaced",
            prev.time, cur.time, next.time
        )));
    }
    let h = cur.dx();
    let i = Complex64::i();
    let mut sum = 0.0;
    for k in 1..cur.n - 1 {
        let phi = cur.values[k];
        let lap = (cur.values[k + 1] - 2.0 * phi + cur.values[k - 1]) / (h * h);
        let dphi = (next.values[k] - prev.values[k]) / (2.0 * dt);
        let pot = v.eval(&params.at_xt(cur.x(k), cur.time))?;
        sum += (i * dphi + 0.5 * lap - pot * phi).norm_sqr();
    }
    Ok((sum * h).sqrt())
}

/// Least-squares slope of `log r` against `log h`.
pub fn convergence_slope(levels: &[(f64, f64)]) -> f64 {
    let n = levels.len() as f64;
    let (sx, sy) = levels
        .iter()
        .fold((0.0, 0.0), |(a, b), &(h, r)| (a + h.ln(), b + r.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = levels.iter().fold((0.0, 0.0), |(a, b), &(h, r)| {
        let dx = h.ln() - mx;
        (a + dx * (r.ln() - my), b + dx * dx)
    });
    num / den
}

/// Residuals of a solution candidate under simultaneous refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    /// `(h, residual)` per level, coarsest first.
    pub levels: Vec<(f64, f64)>,
    pub slope: f64,
}

/// Sample `phi` at `t − Δ, t, t + Δ` on grids of `n0, 2n0 − 1, …` points with
/// `Δ` halved alongside `h`, and fit the convergence slope.
pub fn residual_study(
    phi: &dyn Fn(f64, f64) -> Result<Complex64, QuantumError>,
    v: &Expr,
    params: &Bindings,
    t: f64,
    (x_min, x_max): (f64, f64),
    n0: usize,
    dt0: f64,
    levels: usize,
) -> Result<RefinementStudy, QuantumError> {
    let mut out = Vec::with_capacity(levels);
    let (mut n, mut dt) = (n0, dt0);
    for _ in 0..levels {
        let slice = |time: f64| WaveGrid::from_fn(x_min, x_max, n, time, |x| phi(time, x));
        let (a, b, c) = (slice(t - dt)?, slice(t)?, slice(t + dt)?);
        let r = schrodinger_residual([&a, &b, &c], v, params)?;
        out.push((b.dx(), r));
        n = 2 * n - 1;
        dt *= 0.5;
    }
    let slope = convergence_slope(&out);
    Ok(RefinementStudy { levels: out, slope })
}

/// Max over `points` of the massless wave operator on the lifted metric,
/// written as `√Ω Φ_xx + 2√Ω V Φ_uu + (√Ω)_t Φ_u + 2√Ω Φ_tu`, for
/// `Φ = Ω^{−1/4} e^{iu} φ`. `∂_u` acts as `i`; `t` and `x` derivatives are
/// central differences with step `h`.
pub fn kg_reduction_check(
    v: &Expr,
    omega: &Expr,
    params: &Bindings,
    phi: WaveFn<'_>,
    points: &[(f64, f64)],
    h: f64,
) -> Result<f64, QuantumError> {
    let omega_t = omega.diff(Var::T);
    let i = Complex64::i();
    let field = |t: f64, x: f64| -> Result<Complex64, QuantumError> {
        let w = omega.eval(&params.at_xt(x, t))?;
        Ok(w.powf(-0.25) * phi(t, x))
    };
    let mut worst: f64 = 0.0;
    for &(t, x) in points {
        let b = params.at_xt(x, t);
        let w = omega.eval(&b)?;
        let sq = w.sqrt();
        let sq_t = omega_t.eval(&b)? / (2.0 * sq);
        let pot = v.eval(&b)?;
        let f = field(t, x)?;
        let f_xx = (field(t, x + h)? - 2.0 * f + field(t, x - h)?) / (h * h);
        let f_t = (field(t + h, x)? - field(t - h, x)?) / (2.0 * h);
        let r = sq * f_xx - 2.0 * sq * pot * f + i * sq_t * f + 2.0 * i * sq * f_t;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// `(∫|φ_free(τ, ξ)|² dξ, ∫|φ_V(t(τ), x)|² dx)` with the `x` range the image
/// of `ξ ∈ [xi_min, xi_max]`.
pub fn norm_transport_check(
    map: &FlatteningMap,
    phi_free: WaveFn<'_>,
    tau: f64,
    (xi_min, xi_max): (f64, f64),
) -> Result<(f64, f64), QuantumError> {
    let pt = map.point(tau)?;
    let free = integrate(|xi| phi_free(tau, xi).norm_sqr(), xi_min, xi_max, 1e-14, 1e-13).value;
    let (x_lo, x_hi) = (f1_at(&pt, xi_min), f1_at(&pt, xi_max));
    // evaluate φ_V through the pointwise map at the matched slice
    let pushed = |x: f64| {
        let xi = crate::flatmap::xi_at(&pt, x);
        let phase = Complex64::from_polar(pt.omega.powf(0.25), -f3_at(&pt, xi));
        (phase * phi_free(tau, xi)).norm_sqr()
    };
    let v = integrate(pushed, x_lo, x_hi, 1e-14, 1e-13).value;
    Ok((free, v))
}
