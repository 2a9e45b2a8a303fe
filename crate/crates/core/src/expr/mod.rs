//! Closed-form scalar expressions over the variables `x`, `t`, `tau` and
//! late-bound named parameters.
//!
//! Expressions are immutable trees behind `Arc`, so cloning is cheap and a
//! parsed potential can be shared across threads and parameter sweeps.
//! Construction through the helper functions ([`add`], [`mul`], ...) folds
//! constants and applies the 0/1 identities; there is no general simplifier.

mod diff;
mod parser;
mod print;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use parser::{parse, ParseError};

/// Coordinate-like variables an expression may depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    T,
    Tau,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::T, Var::Tau];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::T => "t",
            Var::Tau => "tau",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "t" => Some(Var::T),
            "tau" => Some(Var::Tau),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Elementary unary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> Result<f64, EvalError> {
        let out = match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => {
                if v.cos() == 0.0 {
                    return Err(EvalError::Domain("tan at a pole".into()));
                }
                v.tan()
            }
            Func::Exp => v.exp(),
            Func::Log => {
                if v <= 0.0 {
                    return Err(EvalError::Domain(format!("log of non-positive value {v}")));
                }
                v.ln()
            }
            Func::Sqrt => {
                if v < 0.0 {
                    return Err(EvalError::Domain(format!("sqrt of negative value {v}")));
                }
                v.sqrt()
            }
        };
        Ok(out)
    }
}

/// Expression tree node.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Param(Arc<str>),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// Integer power; the exponent is always a literal.
    Pow(Expr, i32),
    Call(Func, Expr),
}

/// Shared, immutable expression.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
}

/// Values for variables and parameters.
///
/// Each name maps to exactly one value; rebinding a name replaces it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    vars: [Option<f64>; 3],
    params: BTreeMap<String, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: Var, value: f64) -> Self {
        self.set(var, value);
        self
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.set_param(name, value);
        self
    }

    pub fn set(&mut self, var: Var, value: f64) {
        self.vars[var as usize] = Some(value);
    }

    pub fn set_param(&mut self, name: impl Into<String>, value: f64) {
        self.params.insert(name.into(), value);
    }

    pub fn var(&self, var: Var) -> Option<f64> {
        self.vars[var as usize]
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, f64)> {
        self.params.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Shorthand for a binding of `(x, t)` on top of `self`'s parameters.
    pub fn at_xt(&self, x: f64, t: f64) -> Self {
        let mut b = self.clone();
        b.set(Var::X, x);
        b.set(Var::T, t);
        b
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::from_node(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_node(Node::Var(v))
    }

    pub fn x() -> Expr {
        Expr::var(Var::X)
    }

    pub fn t() -> Expr {
        Expr::var(Var::T)
    }

    pub fn tau() -> Expr {
        Expr::var(Var::Tau)
    }

    pub fn param(name: &str) -> Expr {
        Expr::from_node(Node::Param(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// True if `v` occurs anywhere in the tree.
    pub fn depends_on(&self, v: Var) -> bool {
        match self.node() {
            Node::Const(_) | Node::Param(_) => false,
            Node::Var(w) => *w == v,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.depends_on(v),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(v) || b.depends_on(v)
            }
        }
    }

    /// Names of the parameters referenced by the expression, sorted.
    pub fn param_names(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e.node() {
                Node::Const(_) | Node::Var(_) => {}
                Node::Param(p) => {
                    if !out.iter().any(|q| q.as_str() == &**p) {
                        out.push(p.to_string());
                    }
                }
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => walk(a, out),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) | Node::Param(_) => 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// IEEE double evaluation.
    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        let v = match self.node() {
            Node::Const(c) => *c,
            Node::Var(v) => b.var(*v).ok_or_else(|| EvalError::Unbound(v.name().into()))?,
            Node::Param(p) => b.param(p).ok_or_else(|| EvalError::Unbound(p.to_string()))?,
            Node::Neg(a) => -a.eval(b)?,
            Node::Add(l, r) => l.eval(b)? + r.eval(b)?,
            Node::Sub(l, r) => l.eval(b)? - r.eval(b)?,
            Node::Mul(l, r) => l.eval(b)? * r.eval(b)?,
            Node::Div(l, r) => {
                let num = l.eval(b)?;
                let den = r.eval(b)?;
                if den == 0.0 {
                    return Err(EvalError::Domain("division by zero".into()));
                }
                num / den
            }
            Node::Pow(a, n) => {
                let base = a.eval(b)?;
                if *n < 0 && base == 0.0 {
                    return Err(EvalError::Domain("negative power of zero".into()));
                }
                base.powi(*n)
            }
            Node::Call(f, a) => f.apply(a.eval(b)?)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Domain("non-finite result".into()))
        }
    }

    /// Exact derivative with respect to `v`, constant-folded.
    pub fn diff(&self, v: Var) -> Expr {
        diff::diff(self, v)
    }
}

// Constructors with constant folding and the 0/1 identities.

pub fn neg(a: Expr) -> Expr {
    match a.node() {
        Node::Const(c) => Expr::constant(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::from_node(Node::Neg(a)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::from_node(Node::Add(a, b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), _) if x == 0.0 => neg(b),
        _ => Expr::from_node(Node::Sub(a, b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) if x == 0.0 => Expr::zero(),
        (_, Some(y)) if y == 0.0 => Expr::zero(),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::from_node(Node::Mul(a, b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
        (Some(x), _) if x == 0.0 => Expr::zero(),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::from_node(Node::Div(a, b)),
    }
}

pub fn powi(base: Expr, n: i32) -> Expr {
    match (base.as_const(), n) {
        (_, 0) => Expr::one(),
        (_, 1) => base,
        (Some(c), _) if c != 0.0 || n > 0 => Expr::constant(c.powi(n)),
        _ => Expr::from_node(Node::Pow(base, n)),
    }
}

pub fn call(f: Func, a: Expr) -> Expr {
    if let Some(c) = a.as_const() {
        if let Ok(v) = f.apply(c) {
            if v.is_finite() {
                return Expr::constant(v);
            }
        }
    }
    Expr::from_node(Node::Call(f, a))
}

pub fn sin(a: Expr) -> Expr {
    call(Func::Sin, a)
}

pub fn cos(a: Expr) -> Expr {
    call(Func::Cos, a)
}

pub fn tan(a: Expr) -> Expr {
    call(Func::Tan, a)
}

pub fn exp(a: Expr) -> Expr {
    call(Func::Exp, a)
}

pub fn log(a: Expr) -> Expr {
    call(Func::Log, a)
}

pub fn sqrt(a: Expr) -> Expr {
    call(Func::Sqrt, a)
}

/// Raw constructors that skip folding. The parser uses these so the tree
/// mirrors the input text.
pub(crate) mod raw {
    use super::{Expr, Func, Node, Var};
    use std::sync::Arc;

    pub fn constant(c: f64) -> Expr {
        Expr::from_node(Node::Const(c))
    }
    pub fn var(v: Var) -> Expr {
        Expr::from_node(Node::Var(v))
    }
    pub fn param(p: &str) -> Expr {
        Expr::from_node(Node::Param(Arc::from(p)))
    }
    pub fn neg(a: Expr) -> Expr {
        Expr::from_node(Node::Neg(a))
    }
    pub fn binary(op: char, a: Expr, b: Expr) -> Expr {
        Expr::from_node(match op {
            '+' => Node::Add(a, b),
            '-' => Node::Sub(a, b),
            '*' => Node::Mul(a, b),
            '/' => Node::Div(a, b),
            _ => unreachable!("unknown binary operator {op}"),
        })
    }
    pub fn pow(a: Expr, n: i32) -> Expr {
        Expr::from_node(Node::Pow(a, n))
    }
    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::from_node(Node::Call(f, a))
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}
