//! Eisenhart lift of one-dimensional time-dependent mechanics.
//!
//! Potentials are written as symbolic expressions in `x` and `t`; the lifted
//! three-dimensional metric, its curvature, explicit flattening maps, lifted
//! geodesics and the matching wave-function transport are built on top.

pub mod dynamics;
pub mod expr;
pub mod flatmap;
pub mod geometry;
pub mod numeric;
pub mod quantum;
pub mod schwarzian;

pub use expr::{parse, Bindings, EvalError, Expr, Func, ParseError, Var};
