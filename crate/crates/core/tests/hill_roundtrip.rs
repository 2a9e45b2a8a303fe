use eisenhart::numeric::fd;
use eisenhart::schwarzian::solve_hill;
use eisenhart::{parse, Bindings};

fn max_roundtrip_error(omega: &str, range: (f64, f64)) -> f64 {
    let w = parse(omega, &[]).unwrap();
    let hill = solve_hill(&w, &Bindings::new(), range, 1e-12).unwrap();
    assert!(hill.wronskian_drift() < 1e-8);
    let po = hill.phi_omega();
    let patch = po.patch();
    let (lo, hi) = (0.8 * patch.lo, 0.8 * patch.hi);
    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        let t = lo + (hi - lo) * i as f64 / 40.0;
        let s = fd::richardson(
            |h| fd::schwarzian_from_derivative(|s| po.phi_prime(s).unwrap(), t, h),
            1e-2,
            4,
        );
        let target = 2.0 * hill.omega_sq(t);
        worst = worst.max((s - target).abs());
    }
    worst
}

#[test]
fn numeric_schwarzian_of_phi_recovers_twice_omega_squared() {
    for (w, range) in [
        ("1", (-1.4, 1.4)),
        ("1 + 0.3*sin(t)", (-1.2, 1.2)),
        ("exp(-t^2)", (-2.0, 2.0)),
    ] {
        let err = max_roundtrip_error(w, range);
        assert!(err < 1e-6, "omega = {w}: {err:e}");
    }
}

#[test]
fn tabulated_phi_schwarzian_unit_frequency() {
    let hill = solve_hill(&parse("1", &[]).unwrap(), &Bindings::new(), (-1.0, 1.0), 1e-12).unwrap();
    let po = hill.phi_omega();
    let s = fd::schwarzian_from_derivative(|t| po.phi_prime(t).unwrap(), 0.3, 1e-2);
    assert!((s - 2.0).abs() < 1e-6);
}
