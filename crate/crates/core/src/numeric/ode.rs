//! Dormand–Prince 5(4) integrator with embedded error control and the
//! standard fourth-order continuous extension for dense output.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),
    #[error("right-hand side is not finite at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; `None` means the whole interval.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            max_step: None,
            max_steps: 1_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }

    pub fn max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    h: f64,
    /// Five coefficient vectors of the continuous extension, flattened.
    rcont: Vec<f64>,
}

impl Segment {
    fn hi(&self) -> f64 {
        self.t0.max(self.t0 + self.h)
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let n = out.len();
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        for i in 0..n {
            out[i] = r[i]
                + theta
                    * (r[n + i]
                        + theta1 * (r[2 * n + i] + theta * (r[3 * n + i] + theta1 * r[4 * n + i])));
        }
    }
}

/// Dense solution of one integration run (either direction).
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    t_start: f64,
    t_end: f64,
    y_start: Vec<f64>,
    /// Sorted by increasing start time.
    segments: Vec<Segment>,
    steps: Vec<(f64, Vec<f64>)>,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Where integration stopped; differs from the requested end when a stop
    /// condition fired.
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn lo(&self) -> f64 {
        self.t_start.min(self.t_end)
    }

    pub fn hi(&self) -> f64 {
        self.t_start.max(self.t_end)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo() && t <= self.hi()
    }

    /// Accepted step points `(t, y)` in integration order, including the start.
    pub fn steps(&self) -> &[(f64, Vec<f64>)] {
        &self.steps
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        if self.segments.is_empty() {
            out.copy_from_slice(&self.y_start);
            return;
        }
        let idx = self
            .segments
            .partition_point(|s| s.hi() < t)
            .min(self.segments.len() - 1);
        self.segments[idx].eval_into(t, out);
    }

    /// Interpolated state; clamps silently outside the integrated range.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn component(&self, t: f64, i: usize) -> f64 {
        self.eval(t)[i]
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], o: &OdeOptions) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = o.atol + o.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn solve<F>(f: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<DenseSolution, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    solve_until(f, t0, y0, t1, opts, |_, _| false)
}

/// Like [`solve`], but stops after the first accepted step for which
/// `stop(t, y)` returns true.
pub fn solve_until<F, S>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<DenseSolution, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> bool,
{
    let n = y0.len();
    let mut sol = DenseSolution {
        dim: n,
        t_start: t0,
        t_end: t0,
        y_start: y0.to_vec(),
        segments: Vec::new(),
        steps: vec![(t0, y0.to_vec())],
    };
    if t1 == t0 {
        return Ok(sol);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let hmax = opts.max_step.unwrap_or(span).min(span);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];

    f(t, &y, &mut k1);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::NonFinite { t });
    }

    // Initial step guess (Hairer & Wanner, II.4).
    let mut h = {
        let d0 = error_norm(&y, &y, &y, opts);
        let d1 = error_norm(&k1, &y, &y, opts);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(hmax);
        for i in 0..n {
            ytmp[i] = y[i] + dir * h0 * k1[i];
        }
        f(t + dir * h0, &ytmp, &mut k2);
        for i in 0..n {
            err[i] = (k2[i] - k1[i]) / h0;
        }
        let d2 = error_norm(&err, &y, &y, opts);
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1).min(hmax)
    };

    let mut nsteps = 0usize;
    let mut reject_streak = false;
    loop {
        if nsteps >= opts.max_steps {
            return Err(OdeError::TooManySteps(opts.max_steps));
        }
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t });
        }
        let hs = dir * h;

        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + hs, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i]
                + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + hs, &ynew, &mut k7);
        for i in 0..n {
            err[i] = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let finite = ynew.iter().chain(k7.iter()).all(|v| v.is_finite());
        let en = if finite {
            error_norm(&err, &y, &ynew, opts)
        } else {
            f64::INFINITY
        };

        if en <= 1.0 {
            let mut rcont = vec![0.0; 5 * n];
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                rcont[i] = y[i];
                rcont[n + i] = ydiff;
                rcont[2 * n + i] = bspl;
                rcont[3 * n + i] = ydiff - hs * k7[i] - bspl;
                rcont[4 * n + i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            sol.segments.push(Segment { t0: t, h: hs, rcont });
            t = if last { t1 } else { t + hs };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            sol.steps.push((t, y.clone()));
            nsteps += 1;

            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            let fac = if reject_streak { fac.min(1.0) } else { fac };
            reject_streak = false;
            h = (h * fac).min(hmax);

            if last || stop(t, &y) {
                break;
            }
        } else {
            reject_streak = true;
            let fac = if en.is_finite() {
                (0.9 * en.powf(-0.2)).clamp(0.1, 1.0)
            } else {
                0.1
            };
            h *= fac;
        }
    }

    sol.t_end = t;
    if dir < 0.0 {
        sol.segments.reverse();
    }
    Ok(sol)
}

/// Solution integrated both ways from an interior starting point.
#[derive(Debug, Clone)]
pub struct TwoSided {
    t0: f64,
    backward: DenseSolution,
    forward: DenseSolution,
}

impl TwoSided {
    /// Integrate from `t0` down to `lo` and up to `hi`.
    pub fn solve<F>(
        mut f: F,
        t0: f64,
        y0: &[f64],
        lo: f64,
        hi: f64,
        opts: &OdeOptions,
    ) -> Result<TwoSided, OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        debug_assert!(lo <= t0 && t0 <= hi);
        let backward = solve(&mut f, t0, y0, lo, opts)?;
        let forward = solve(&mut f, t0, y0, hi, opts)?;
        Ok(TwoSided {
            t0,
            backward,
            forward,
        })
    }

    pub fn lo(&self) -> f64 {
        self.backward.lo()
    }

    pub fn hi(&self) -> f64 {
        self.forward.hi()
    }

    pub fn dim(&self) -> usize {
        self.forward.dim()
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        if t >= self.t0 {
            self.forward.eval_into(t, out)
        } else {
            self.backward.eval_into(t, out)
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out);
        out
    }

    /// Accepted step points over the whole range, sorted by `t`.
    pub fn step_points(&self) -> Vec<(f64, Vec<f64>)> {
        let mut pts: Vec<_> = self.backward.steps().iter().rev().cloned().collect();
        pts.extend(self.forward.steps().iter().skip(1).cloned());
        pts
    }
}
