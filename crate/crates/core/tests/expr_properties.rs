use eisenhart::expr::{add, cos, div, exp, log, mul, neg, powi, sin, sqrt, sub, tan};
use eisenhart::{parse, Bindings, Expr, Var};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::x()),
        Just(Expr::t()),
        Just(Expr::param("a")),
        (-3.0..3.0f64).prop_map(|c| Expr::constant((c * 100.0).round() / 100.0)),
    ]
}

fn one_plus_sq(e: Expr) -> Expr {
    add(Expr::one(), powi(e, 2))
}

// Every constructor keeps evaluation inside its domain for finite inputs.
fn expr(depth: u32) -> BoxedStrategy<Expr> {
    if depth == 0 {
        return leaf().boxed();
    }
    let sub_e = expr(depth - 1);
    prop_oneof![
        1 => leaf(),
        2 => (sub_e.clone(), sub_e.clone()).prop_map(|(a, b)| add(a, b)),
        2 => (sub_e.clone(), sub_e.clone()).prop_map(|(a, b)| sub(a, b)),
        2 => (sub_e.clone(), sub_e.clone()).prop_map(|(a, b)| mul(a, b)),
        1 => (sub_e.clone(), sub_e.clone()).prop_map(|(a, b)| div(a, one_plus_sq(b))),
        1 => (sub_e.clone(), 0..4i32).prop_map(|(a, n)| powi(a, n)),
        1 => sub_e.clone().prop_map(neg),
        1 => sub_e.clone().prop_map(sin),
        1 => sub_e.clone().prop_map(cos),
        1 => sub_e.clone().prop_map(|a| tan(sin(a))),
        1 => sub_e.clone().prop_map(|a| exp(sin(a))),
        1 => sub_e.clone().prop_map(|a| log(one_plus_sq(a))),
        1 => sub_e.prop_map(|a| sqrt(one_plus_sq(a))),
    ]
    .boxed()
}

fn var() -> impl Strategy<Value = Var> {
    prop_oneof![Just(Var::X), Just(Var::T)]
}

fn bindings(x: f64, t: f64, a: f64) -> Bindings {
    Bindings::new().with(Var::X, x).with(Var::T, t).with_param("a", a)
}

// Five-point central difference in the chosen variable, Richardson
// extrapolated and refined until successive estimates settle.
fn five_point(e: &Expr, v: Var, x: f64, t: f64, a: f64) -> Option<f64> {
    let f = |s: f64| {
        let b = match v {
            Var::X => bindings(x + s, t, a),
            _ => bindings(x, t + s, a),
        };
        e.eval(&b).ok()
    };
    let d = |h: f64| Some((f(-2.0 * h)? - 8.0 * f(-h)? + 8.0 * f(h)? - f(2.0 * h)?) / (12.0 * h));
    let mut h = 1e-2;
    let mut prev = d(h)?;
    let mut best = prev;
    for _ in 0..14 {
        h *= 0.5;
        let cur = d(h)?;
        let next = (16.0 * cur - prev) / 15.0;
        if (next - best).abs() <= 1e-9 * (1.0 + next.abs()) {
            return Some(next);
        }
        best = next;
        prev = cur;
    }
    Some(best)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn derivative_matches_finite_difference(
        e in expr(6), v in var(),
        x in -1.5..1.5f64, t in -1.5..1.5f64, a in -1.5..1.5f64,
    ) {
        let value = e.eval(&bindings(x, t, a));
        prop_assume!(value.map(|y| y.abs() < 1e6).unwrap_or(false));
        let d = e.diff(v).eval(&bindings(x, t, a)).unwrap();
        prop_assume!(d.abs() < 1e6);
        let fd = five_point(&e, v, x, t, a).unwrap();
        prop_assert!((d - fd).abs() <= 1e-5 * (1.0 + d.abs()), "{e}: {d} vs {fd}");
    }

    #[test]
    fn derivative_is_linear(
        e1 in expr(4), e2 in expr(4), alpha in -3.0..3.0f64, v in var(),
        x in -1.5..1.5f64, t in -1.5..1.5f64, a in -1.5..1.5f64,
    ) {
        let b = bindings(x, t, a);
        let lhs = add(mul(Expr::constant(alpha), e1.clone()), e2.clone()).diff(v).eval(&b).unwrap();
        let rhs = alpha * e1.diff(v).eval(&b).unwrap() + e2.diff(v).eval(&b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn print_parse_round_trip(
        e in expr(6),
        x in -1.5..1.5f64, t in -1.5..1.5f64, a in -1.5..1.5f64,
    ) {
        let b = bindings(x, t, a);
        let back = parse(&e.to_string(), &["a"]).unwrap();
        let (u, w) = (e.eval(&b).unwrap(), back.eval(&b).unwrap());
        prop_assert!((u - w).abs() <= 1e-12 * (1.0 + u.abs()), "{e}: {u} vs {w}");
    }
}
