//! Shared fixtures for the benchmarks.

use eisenhart::flatmap::map_linear_galilean;
use eisenhart::quantum::{eval_free_packet, map_free_to_potential, FreePacket, WaveGrid};
use eisenhart::{parse, Bindings, Expr};

pub fn expr(s: &str) -> Expr {
    parse(s, &[]).expect("fixture expression parses")
}

/// Quadratic potential with time-dependent coefficients.
pub fn quadratic_potential() -> Expr {
    expr("0.5*(1 + 0.3*sin(t))^2*x^2 + cos(t)*x + t^2")
}

/// Gaussian packet mapped onto `V = x` at `t = 0`.
pub fn linear_packet(n: usize) -> WaveGrid {
    let map = map_linear_galilean(&Expr::one(), &Bindings::new(), (0.0, 0.0), (-1.0, 2.0), 1e-12)
        .expect("galilean map builds");
    let packet = FreePacket::new(0.3, 0.5, 1.0).expect("valid packet");
    let free = |tau: f64, xi: f64| eval_free_packet(&packet, tau, xi);
    map_free_to_potential(&map, &free, 0.0, (-20.0, 20.0, n)).expect("grid builds")
}
