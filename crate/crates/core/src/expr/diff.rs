use super::{add, cos, div, mul, neg, powi, sin, sqrt, sub, Expr, Func, Node, Var};

pub(super) fn diff(e: &Expr, v: Var) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Param(_) => Expr::zero(),
        Node::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Neg(a) => neg(diff(a, v)),
        Node::Add(a, b) => add(diff(a, v), diff(b, v)),
        Node::Sub(a, b) => sub(diff(a, v), diff(b, v)),
        Node::Mul(a, b) => add(
            mul(diff(a, v), b.clone()),
            mul(a.clone(), diff(b, v)),
        ),
        Node::Div(a, b) => {
            let da = diff(a, v);
            let db = diff(b, v);
            if db.is_zero() {
                div(da, b.clone())
            } else {
                div(
                    sub(mul(da, b.clone()), mul(a.clone(), db)),
                    powi(b.clone(), 2),
                )
            }
        }
        Node::Pow(a, n) => {
            let da = diff(a, v);
            if da.is_zero() {
                return Expr::zero();
            }
            mul(mul(Expr::constant(*n as f64), powi(a.clone(), n - 1)), da)
        }
        Node::Call(f, a) => {
            let da = diff(a, v);
            if da.is_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Sin => cos(a.clone()),
                Func::Cos => neg(sin(a.clone())),
                Func::Tan => div(Expr::one(), powi(cos(a.clone()), 2)),
                Func::Exp => e.clone(),
                Func::Log => div(Expr::one(), a.clone()),
                Func::Sqrt => div(Expr::constant(0.5), sqrt(a.clone())),
            };
            mul(outer, da)
        }
    }
}
