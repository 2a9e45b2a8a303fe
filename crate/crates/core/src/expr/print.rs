use std::fmt;

use super::{Expr, Node};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if c.is_sign_negative() => NEG,
        Node::Const(_) | Node::Var(_) | Node::Param(_) | Node::Call(..) => ATOM,
        Node::Neg(_) => NEG,
        Node::Add(..) | Node::Sub(..) => ADD,
        Node::Mul(..) | Node::Div(..) => MUL,
        Node::Pow(..) => POW,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        f.write_str("(")?;
        write_expr(f, e)?;
        f.write_str(")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Const(c) => {
            if c.is_sign_negative() {
                write!(f, "-{}", -c)
            } else {
                write!(f, "{c}")
            }
        }
        Node::Var(v) => f.write_str(v.name()),
        Node::Param(p) => f.write_str(p),
        Node::Neg(a) => {
            f.write_str("-")?;
            write_at(f, a, NEG)
        }
        Node::Add(a, b) => {
            write_at(f, a, ADD)?;
            f.write_str(" + ")?;
            write_at(f, b, MUL)
        }
        Node::Sub(a, b) => {
            write_at(f, a, ADD)?;
            f.write_str(" - ")?;
            write_at(f, b, MUL)
        }
        Node::Mul(a, b) => {
            write_at(f, a, MUL)?;
            f.write_str("*")?;
            write_at(f, b, NEG)
        }
        Node::Div(a, b) => {
            write_at(f, a, MUL)?;
            f.write_str("/")?;
            write_at(f, b, NEG)
        }
        Node::Pow(a, n) => {
            write_at(f, a, ATOM)?;
            if *n < 0 {
                write!(f, "^({n})")
            } else {
                write!(f, "^{n}")
            }
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
