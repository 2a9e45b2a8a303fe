use eisenhart::dynamics::{
    action_equivalence, build_and_lift, compare_projection, newton_trajectory, GeodesicOptions, ProjectionSample,
    ProjectionSetup,
};
use eisenhart::flatmap::{map_ho_const, map_ho_timedep, map_identity, map_linear_galilean, HChoice, PotentialSpec};
use eisenhart::{parse, Bindings, Expr};

fn p(s: &str) -> Expr {
    parse(s, &[]).unwrap()
}

fn run(v: &str, omega: &str, x0: f64, v0: f64, t_range: (f64, f64), m: f64) -> Vec<ProjectionSample> {
    let (v, omega, b) = (p(v), p(omega), Bindings::new());
    let setup = ProjectionSetup {
        potential: &v,
        omega: &omega,
        params: &b,
        x0,
        v0,
        t_range,
        m,
    };
    compare_projection(&setup, 101, &GeodesicOptions::default()).unwrap()
}

fn max_dev(rows: &[ProjectionSample], exact: impl Fn(f64) -> f64) -> f64 {
    rows.iter().map(|r| (r.x_projected - exact(r.t)).abs()).fold(0.0, f64::max)
}

#[test]
fn oscillator_projects_onto_cosine() {
    for omega in ["1", "1/cos(t)^2", "1+t^2"] {
        let rows = run("0.5*x^2", omega, 1.0, 0.0, (0.0, 1.0), 1.0);
        assert!(max_dev(&rows, f64::cos) < 1e-6, "omega = {omega}");
        assert!(rows.iter().all(|r| r.null_norm.abs() < 1e-8));
    }
}

#[test]
fn free_fall_projects_onto_parabola() {
    let rows = run("x", "1", 0.0, 0.0, (0.0, 1.0), 1.0);
    assert!(max_dev(&rows, |t| -0.5 * t * t) < 1e-6);
}

#[test]
fn time_dependent_oscillator_matches_newton() {
    let rows = run("0.5*(1+0.3*sin(t))^2*x^2", "1", 0.4, 0.2, (0.0, 1.5), 1.0);
    let dev = rows.iter().map(|r| (r.x_projected - r.x_newton).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-6, "{dev:e}");
    let rows = run("0.5*(1+0.3*sin(t))^2*x^2", "exp(0.2*t)", 0.4, 0.2, (0.0, 1.5), 1.0);
    let dev = rows.iter().map(|r| (r.x_projected - r.x_newton).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-6, "{dev:e}");
}

#[test]
fn projection_is_independent_of_m() {
    let base = run("0.5*x^2 + 0.1*t*x", "1/cos(t)^2", 0.7, -0.3, (0.0, 1.0), 1.0);
    for m in [0.5, 3.0] {
        let other = run("0.5*x^2 + 0.1*t*x", "1/cos(t)^2", 0.7, -0.3, (0.0, 1.0), m);
        let dev = base
            .iter()
            .zip(&other)
            .map(|(a, b)| (a.x_projected - b.x_projected).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-8, "m = {m}: {dev:e}");
    }
}

#[test]
fn lift_rejects_degenerate_omega() {
    assert!(build_and_lift(&p("0"), &p("t"), &Bindings::new(), 0.0, 0.0, 0.0, 1.0).is_err());
}

#[test]
fn action_identity_for_each_family() {
    let b = Bindings::new();
    // free particle, identity map
    let path = newton_trajectory(&p("0"), &b, 0.2, 0.8, (0.0, 1.0), 1e-12).unwrap();
    let r = action_equivalence(&PotentialSpec::free(), &map_identity(), &path, 0.0, 1.0).unwrap();
    assert!(r.residual.abs() < 1e-12 && r.delta_f3 == 0.0);

    // constant-frequency oscillator
    let path = newton_trajectory(&p("0.5*x^2"), &b, 1.0, 0.0, (0.0, 0.7), 1e-12).unwrap();
    let map = map_ho_const(1.0, 0.0, 0.0, 0.0).unwrap();
    let r = action_equivalence(&PotentialSpec::oscillator(1.0), &map, &path, 0.0, 0.7).unwrap();
    assert!(r.residual.abs() < 1e-6, "{r:?}");
    let map = map_ho_const(1.0, 1.0, 1.0, 0.0).unwrap();
    let r = action_equivalence(&PotentialSpec::oscillator(1.0), &map, &path, 0.0, 0.7).unwrap();
    assert!(r.residual.abs() < 1e-6, "{r:?}");

    // linear potential
    let path = newton_trajectory(&p("x"), &b, 0.0, 0.0, (0.0, 1.0), 1e-12).unwrap();
    let map = map_linear_galilean(&Expr::one(), &b, (0.0, 0.0), (-1.0, 2.0), 1e-12).unwrap();
    let spec = PotentialSpec::linear(Expr::one()).unwrap();
    let r = action_equivalence(&spec, &map, &path, 0.0, 1.0).unwrap();
    assert!(r.residual.abs() < 1e-6, "{r:?}");

    // time-dependent oscillator
    let w = p("1+0.3*sin(t)");
    let spec = PotentialSpec::new(p("0.5*(1+0.3*sin(t))^2"), Expr::zero(), Expr::zero()).unwrap();
    let path = newton_trajectory(&spec.potential(), &b, 0.5, 0.3, (-0.3, 0.6), 1e-12).unwrap();
    let map = map_ho_timedep(&w, &b, HChoice::Ivp { h0: 0.2, h1: -0.1 }, (-1.0, 1.0), 1e-12).unwrap();
    let r = action_equivalence(&spec, &map, &path, -0.3, 0.6).unwrap();
    assert!(r.residual.abs() < 1e-6, "{r:?}");
}
