use eisenhart::flatmap::{
    build_map_general, equation_residuals, map_ho_const, map_ho_timedep, map_identity, map_linear_galilean,
    map_linear_mobius, verify_map, FlatteningMap, GeneralOptions, HChoice, MobiusParams, PotentialSpec,
    VerifyOptions,
};
use eisenhart::{parse, Bindings, Expr};

fn opts(tol: f64) -> VerifyOptions {
    VerifyOptions {
        tol,
        ..Default::default()
    }
}

fn assert_verified(map: &FlatteningMap, spec: &PotentialSpec, tol: f64) {
    let r = verify_map(map, spec, &opts(tol)).unwrap();
    assert!(r.passed, "{:?}: {:?}", map.family(), r.max_residuals);
}

fn p(s: &str) -> Expr {
    parse(s, &[]).unwrap()
}

#[test]
fn closed_form_maps_pass_relations() {
    assert_verified(&map_ho_const(1.0, 0.0, 0.0, 0.0).unwrap(), &PotentialSpec::oscillator(1.0), 1e-9);
    assert_verified(&map_ho_const(1.0, 1.0, 1.0, 0.0).unwrap(), &PotentialSpec::oscillator(1.0), 1e-9);
    assert_verified(&map_ho_const(2.0, 0.3, -0.7, 1.5).unwrap(), &PotentialSpec::oscillator(2.0), 1e-9);
    let mob = MobiusParams {
        k: 1.0,
        c: 1.0,
        d: 0.0,
        c1: 0.0,
        c2: 0.0,
    };
    let spec_g = PotentialSpec::linear(Expr::one()).unwrap();
    let m = map_linear_mobius(&Expr::one(), &Bindings::new(), mob, (-2.0, -0.5), 1e-12).unwrap();
    assert_verified(&m, &spec_g, 1e-9);
    let g = map_linear_galilean(&Expr::one(), &Bindings::new(), (0.0, 0.0), (-1.0, 2.0), 1e-12).unwrap();
    assert_verified(&g, &spec_g, 1e-9);
    assert_verified(&map_identity(), &PotentialSpec::free(), 1e-12);
}

#[test]
fn ode_built_maps_pass_relations() {
    let w = p("1 + 0.3*sin(t)");
    let arnold = map_ho_timedep(&w, &Bindings::new(), HChoice::Zero, (-2.0, 2.0), 1e-12).unwrap();
    let spec = PotentialSpec::new(p("0.5*(1 + 0.3*sin(t))^2"), Expr::zero(), Expr::zero()).unwrap();
    assert_verified(&arnold, &spec, 1e-6);
    let with_h = map_ho_timedep(&w, &Bindings::new(), HChoice::Ivp { h0: 0.4, h1: -0.2 }, (-2.0, 2.0), 1e-12).unwrap();
    assert_verified(&with_h, &spec, 1e-6);

    let spec = PotentialSpec::new(p("0.5*exp(-t^2)"), p("sin(t)"), p("t^2")).unwrap();
    let opts_g = GeneralOptions {
        h0: 0.1,
        h1: 0.3,
        p0: -0.2,
        ..Default::default()
    };
    let general = build_map_general(&spec, (-1.5, 1.5), &opts_g).unwrap();
    assert_verified(&general, &spec, 1e-6);
    let eq = equation_residuals(&general, &spec, &VerifyOptions::default()).unwrap();
    assert!(eq.h_equation < 1e-7 && eq.p_equation < 1e-7, "{eq:?}");
}

#[test]
fn mobius_branch_cases() {
    let zero = MobiusParams {
        k: 1.5,
        c: 0.8,
        d: 0.2,
        c1: 0.0,
        c2: 0.0,
    };
    let pure = map_linear_mobius(&Expr::zero(), &Bindings::new(), zero, (-4.0, -1.0), 1e-12).unwrap();
    for &tau in &[0.4, 1.0, 3.0] {
        let pt = pure.point(tau).unwrap();
        assert_eq!((pt.h, pt.p), (0.0, 0.0));
    }
    assert_verified(&pure, &PotentialSpec::free(), 1e-8);

    let bt = p("t");
    let spec = PotentialSpec::linear(bt.clone()).unwrap();
    let mp = MobiusParams {
        c1: 0.3,
        c2: -0.1,
        ..zero
    };
    let m = map_linear_mobius(&bt, &Bindings::new(), mp, (-4.0, -1.0), 1e-12).unwrap();
    let eq = equation_residuals(&m, &spec, &VerifyOptions::default()).unwrap();
    assert!(eq.h_equation < 1e-6 && eq.p_equation < 1e-6, "{eq:?}");
    assert_verified(&m, &spec, 1e-6);

    // negative c: the map lives on t > -d/c
    let neg = MobiusParams { c: -0.8, ..mp };
    let m = map_linear_mobius(&bt, &Bindings::new(), neg, (1.0, 3.0), 1e-12).unwrap();
    assert_verified(&m, &spec, 1e-6);
    assert!(map_linear_mobius(&bt, &Bindings::new(), neg, (-1.0, 3.0), 1e-12).is_err());
}

#[test]
fn galilean_sine_forcing() {
    let b = p("sin(t)");
    let m = map_linear_galilean(&b, &Bindings::new(), (0.0, 1.0), (-2.0, 2.0), 1e-12).unwrap();
    for &tau in &[-1.7, -0.2, 0.9, 1.9] {
        let pt = m.point(tau).unwrap();
        assert!((pt.h - tau.sin()).abs() < 1e-10);
    }
    assert_verified(&m, &PotentialSpec::linear(b).unwrap(), 1e-8);
}

#[test]
fn cross_constructions_agree() {
    let sample = |m: &FlatteningMap, xi: f64, tau: f64| {
        let (t, x) = m.to_original(xi, tau).unwrap();
        (t, x, m.f3(xi, tau).unwrap())
    };
    let close = |a: (f64, f64, f64), b: (f64, f64, f64), tol: f64| {
        (a.0 - b.0).abs() < tol && (a.1 - b.1).abs() < tol && (a.2 - b.2).abs() < tol
    };

    let c = map_ho_const(1.0, 0.0, 0.0, 0.0).unwrap();
    let g = build_map_general(&PotentialSpec::oscillator(1.0), (-2.0, 2.0), &GeneralOptions::default()).unwrap();
    let a = map_ho_timedep(&Expr::one(), &Bindings::new(), HChoice::Zero, (-2.0, 2.0), 1e-12).unwrap();
    // nonzero constants: h(0) = c1, h'(0) = c2·ω₀, p(0) = c3 − c1c2ω₀
    let c11 = map_ho_const(1.0, 1.0, 1.0, 0.0).unwrap();
    let g11 = build_map_general(
        &PotentialSpec::oscillator(1.0),
        (-2.0, 2.0),
        &GeneralOptions {
            h0: 1.0,
            h1: 1.0,
            p0: -1.0,
            ..Default::default()
        },
    )
    .unwrap();
    for &(xi, tau) in &[(0.3, -1.2), (-0.8, 0.4), (1.0, 1.9)] {
        assert!(close(sample(&c, xi, tau), sample(&g, xi, tau), 1e-8));
        assert!(close(sample(&c, xi, tau), sample(&a, xi, tau), 1e-8));
        assert!(close(sample(&c11, xi, tau), sample(&g11, xi, tau), 1e-8));
    }

    let lin = build_map_general(&PotentialSpec::linear(Expr::constant(1.3)).unwrap(), (-1.0, 2.0), &GeneralOptions::default()).unwrap();
    let gal = map_linear_galilean(&Expr::constant(1.3), &Bindings::new(), (0.0, 0.0), (-1.0, 2.0), 1e-12).unwrap();
    for &(xi, tau) in &[(0.3, -0.9), (-0.8, 0.4), (1.0, 1.9)] {
        assert!(close(sample(&lin, xi, tau), sample(&gal, xi, tau), 1e-8));
    }
}

#[test]
fn inverse_round_trip_and_c3_shift() {
    let maps = [
        map_ho_const(1.3, 0.2, -0.4, 0.0).unwrap(),
        map_ho_timedep(&p("1 + 0.3*sin(t)"), &Bindings::new(), HChoice::Zero, (-2.0, 2.0), 1e-12).unwrap(),
        map_linear_galilean(&p("sin(t)"), &Bindings::new(), (0.0, 1.0), (-2.0, 2.0), 1e-12).unwrap(),
    ];
    for m in &maps {
        let (lo, hi) = m.window();
        for i in 0..=8 {
            let tau = lo + (hi - lo) * i as f64 / 8.0;
            let t = m.t_of_tau(tau).unwrap();
            assert!((m.tau_of_t(t).unwrap() - tau).abs() < 1e-9 * (1.0 + tau.abs()));
            for &xi in &[-1.0, 0.25] {
                let (t, x) = m.to_original(xi, tau).unwrap();
                let (tau2, xi2) = m.to_flat(t, x).unwrap();
                assert!((tau2 - tau).abs() < 1e-9 * (1.0 + tau.abs()) && (xi2 - xi).abs() < 1e-9);
            }
        }
    }
    let a = map_ho_const(1.0, 0.5, 0.2, 0.0).unwrap();
    let b = map_ho_const(1.0, 0.5, 0.2, 2.5).unwrap();
    for &(xi, tau) in &[(0.3, -1.2), (-0.8, 0.4)] {
        assert!((b.f3(xi, tau).unwrap() - a.f3(xi, tau).unwrap() - 2.5).abs() < 1e-14);
        assert_eq!(a.to_original(xi, tau).unwrap(), b.to_original(xi, tau).unwrap());
    }
}
