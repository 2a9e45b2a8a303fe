use num_complex::Complex64;

use super::{QuantumError, WaveGrid};
use crate::expr::{Bindings, Expr};

pub const DEFAULT_BOX: (f64, f64) = (-20.0, 20.0);
pub const DEFAULT_N: usize = 2048;

/// Edge amplitude above which propagation is reported as leaking.
pub const LEAK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CnResult {
    pub grid: WaveGrid,
    /// Largest `|φ|` next to either wall over all steps.
    pub edge_amplitude: f64,
    pub leaked: bool,
}

/// Crank–Nicolson propagation of `iφ_t = −½φ_xx + Vφ` from `phi0.time` to
/// `t1` with homogeneous Dirichlet walls; `V` is sampled at step midpoints.
pub fn crank_nicolson(
    phi0: &WaveGrid,
    v: &Expr,
    params: &Bindings,
    t1: f64,
    steps: usize,
) -> Result<CnResult, QuantumError> {
    if steps == 0 {
        return Err(QuantumError::InvalidGrid("steps must be positive".into()));
    }
    let n = phi0.n;
    let m = n - 2;
    let h = phi0.dx();
    let dt = (t1 - phi0.time) / steps as f64;
    let i = Complex64::i();
    let off = -i * dt / (4.0 * h * h);

    let mut psi: Vec<Complex64> = phi0.values[1..n - 1].to_vec();
    let mut pot = vec![0.0; m];
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    let mut cprime = vec![Complex64::new(0.0, 0.0); m];
    let mut edge: f64 = psi[0].norm().max(psi[m - 1].norm());

    for k in 0..steps {
        let tm = phi0.time + (k as f64 + 0.5) * dt;
        for j in 0..m {
            pot[j] = v.eval(&params.at_xt(phi0.x(j + 1), tm))?;
        }
        // rhs = (I − iΔ/2 H)ψ
        for j in 0..m {
            let left = if j > 0 { psi[j - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if j + 1 < m { psi[j + 1] } else { Complex64::new(0.0, 0.0) };
            let diag = 1.0 - i * dt * 0.5 * (1.0 / (h * h) + pot[j]);
            rhs[j] = diag * psi[j] - off * (left + right);
        }
        // Thomas solve of (I + iΔ/2 H)ψ' = rhs
        let diag = |j: usize| 1.0 + i * dt * 0.5 * (1.0 / (h * h) + pot[j]);
        cprime[0] = off / diag(0);
        rhs[0] /= diag(0);
        for j in 1..m {
            let denom = diag(j) - off * cprime[j - 1];
            cprime[j] = off / denom;
            rhs[j] = (rhs[j] - off * rhs[j - 1]) / denom;
        }
        psi[m - 1] = rhs[m - 1];
        for j in (0..m - 1).rev() {
            psi[j] = rhs[j] - cprime[j] * psi[j + 1];
        }
        edge = edge.max(psi[0].norm()).max(psi[m - 1].norm());
    }

    let mut grid = WaveGrid::zeros(phi0.x_min, phi0.x_max, n, t1)?;
    grid.values[1..n - 1].copy_from_slice(&psi);
    let leaked = edge > LEAK_THRESHOLD;
    if leaked {
        log::warn!("boundary leak: edge amplitude {edge:e} exceeds {LEAK_THRESHOLD:e}");
    }
    Ok(CnResult {
        grid,
        edge_amplitude: edge,
        leaked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::quantum::{eval_free_packet, FreePacket};

    fn ground(t: f64, x: f64) -> Complex64 {
        Complex64::from_polar(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp(), -0.5 * t)
    }

    #[test]
    fn norm_is_conserved() {
        let pk = FreePacket::new(0.0, 1.0, 1.0).unwrap();
        let g0 = WaveGrid::from_fn(-20.0, 20.0, 512, 0.0, |x| Ok(eval_free_packet(&pk, 0.0, x))).unwrap();
        let v = parse("0.5*x^2 + 0.2*sin(t)*x", &[]).unwrap();
        let r = crank_nicolson(&g0, &v, &Bindings::new(), 1.0, 1000).unwrap();
        assert!((r.grid.norm_sq() - g0.norm_sq()).abs() < 1e-10);
        assert!(!r.leaked);
    }

    #[test]
    fn ground_state_is_stationary() {
        let g0 = WaveGrid::from_fn(-8.0, 8.0, 8193, 0.0, |x| Ok(ground(0.0, x))).unwrap();
        let v = parse("0.5*x^2", &[]).unwrap();
        let r = crank_nicolson(&g0, &v, &Bindings::new(), 1.0, 2000).unwrap();
        let dev = (0..g0.n)
            .map(|k| (r.grid.values[k].norm() - g0.values[k].norm()).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-6, "{dev:e}");
    }

    #[test]
    fn leak_is_flagged() {
        let pk = FreePacket::new(9.0, 0.0, 1.0).unwrap();
        let g0 = WaveGrid::from_fn(-10.0, 10.0, 256, 0.0, |x| Ok(eval_free_packet(&pk, 0.0, x))).unwrap();
        let r = crank_nicolson(&g0, &Expr::zero(), &Bindings::new(), 0.5, 50).unwrap();
        assert!(r.leaked);
    }
}
