//! The lifted metric in coordinates `(t, u, x)` and its curvature.

mod curvature;
mod flatness;
mod tensor;

use thiserror::Error;

use crate::expr::{div, mul, neg, sub, Bindings, EvalError, Expr, Var};

pub use curvature::{christoffel, cotton, ricci, riemann, scalar_curvature, Curvature};
pub use flatness::{
    flatness_residual, is_conformally_flat, is_flat, sample_points, ConditionReport, FlatnessReport,
    ZeroTest,
};
pub use tensor::{Symmetry, TensorField, Variance};

pub const DIM: usize = 3;
pub const T: usize = 0;
pub const U: usize = 1;
pub const X: usize = 2;
pub const COORD_NAMES: [&str; DIM] = ["t", "u", "x"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("conformal factor depends on x")]
    OmegaDependsOnX,
    #[error("{0} must not depend on tau")]
    DependsOnTau(&'static str),
    #[error("no safe sample box found after {attempts} candidate points")]
    EvaluationDomain { attempts: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Partial derivative with respect to coordinate `i`. Nothing depends on `u`.
pub fn partial(e: &Expr, i: usize) -> Expr {
    match i {
        T => e.diff(Var::T),
        U => Expr::zero(),
        X => e.diff(Var::X),
        _ => panic!("coordinate index {i} out of range"),
    }
}

/// `g = Ω (−2V dt² + 2 dt du + dx²)`.
#[derive(Debug, Clone)]
pub struct EisenhartMetric {
    omega: Expr,
    potential: Expr,
    g: [[Expr; DIM]; DIM],
    inv: [[Expr; DIM]; DIM],
    det: Expr,
}

pub fn build_metric(potential: &Expr, omega: &Expr) -> Result<EisenhartMetric, GeometryError> {
    if omega.depends_on(Var::X) {
        return Err(GeometryError::OmegaDependsOnX);
    }
    if omega.depends_on(Var::Tau) {
        return Err(GeometryError::DependsOnTau("conformal factor"));
    }
    if potential.depends_on(Var::Tau) {
        return Err(GeometryError::DependsOnTau("potential"));
    }
    let z = Expr::zero;
    let gtt = neg(mul(mul(Expr::constant(2.0), omega.clone()), potential.clone()));
    let g = [
        [gtt, omega.clone(), z()],
        [omega.clone(), z(), z()],
        [z(), z(), omega.clone()],
    ];
    let (inv, det) = adjugate_inverse(&g);
    Ok(EisenhartMetric {
        omega: omega.clone(),
        potential: potential.clone(),
        g,
        inv,
        det,
    })
}

fn minor(g: &[[Expr; DIM]; DIM], r: usize, c: usize) -> Expr {
    let rows: Vec<usize> = (0..DIM).filter(|&i| i != r).collect();
    let cols: Vec<usize> = (0..DIM).filter(|&j| j != c).collect();
    sub(
        mul(g[rows[0]][cols[0]].clone(), g[rows[1]][cols[1]].clone()),
        mul(g[rows[0]][cols[1]].clone(), g[rows[1]][cols[0]].clone()),
    )
}

fn adjugate_inverse(g: &[[Expr; DIM]; DIM]) -> ([[Expr; DIM]; DIM], Expr) {
    let cof = |r: usize, c: usize| {
        let m = minor(g, r, c);
        if (r + c) % 2 == 1 {
            neg(m)
        } else {
            m
        }
    };
    let det = (0..DIM).fold(Expr::zero(), |acc, c| acc + mul(g[0][c].clone(), cof(0, c)));
    let inv = std::array::from_fn(|i| std::array::from_fn(|j| div(cof(j, i), det.clone())));
    (inv, det)
}

impl EisenhartMetric {
    pub fn omega(&self) -> &Expr {
        &self.omega
    }

    pub fn potential(&self) -> &Expr {
        &self.potential
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.g[i][j]
    }

    pub fn inverse(&self, i: usize, j: usize) -> &Expr {
        &self.inv[i][j]
    }

    pub fn det(&self) -> &Expr {
        &self.det
    }

    pub fn eval(&self, b: &Bindings) -> Result<[[f64; DIM]; DIM], EvalError> {
        eval_matrix(&self.g, b)
    }

    pub fn eval_inverse(&self, b: &Bindings) -> Result<[[f64; DIM]; DIM], EvalError> {
        eval_matrix(&self.inv, b)
    }

    /// `g_{μν} a^μ b^ν` at a point.
    pub fn inner(&self, b: &Bindings, v: &[f64; DIM], w: &[f64; DIM]) -> Result<f64, EvalError> {
        let g = self.eval(b)?;
        let mut s = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                s += g[i][j] * v[i] * w[j];
            }
        }
        Ok(s)
    }
}

fn eval_matrix(m: &[[Expr; DIM]; DIM], b: &Bindings) -> Result<[[f64; DIM]; DIM], EvalError> {
    let mut out = [[0.0; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j] = m[i][j].eval(b)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn metric(v: &str, w: &str) -> EisenhartMetric {
        build_metric(&parse(v, &[]).unwrap(), &parse(w, &[]).unwrap()).unwrap()
    }

    #[test]
    fn minkowski_components() {
        let m = metric("0", "1");
        let g = m.eval(&Bindings::new().at_xt(0.3, 0.2)).unwrap();
        assert_eq!(g, [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    #[test]
    fn oscillator_components() {
        let m = metric("0.5*x^2", "1");
        let g = m.eval(&Bindings::new().at_xt(2.0, 0.0)).unwrap();
        assert_eq!(g[0][0], -4.0);
        assert_eq!(g[0][1], 1.0);
        assert_eq!(g[2][2], 1.0);
    }

    #[test]
    fn omega_must_not_depend_on_x() {
        let e = build_metric(&Expr::zero(), &parse("x*t", &[]).unwrap()).unwrap_err();
        assert_eq!(e, GeometryError::OmegaDependsOnX);
    }

    #[test]
    fn inverse_and_determinant() {
        let m = metric("sin(t)*x^2 + x*t", "1/cos(t)^2");
        for &(x, t) in &[(0.3, 0.2), (-0.8, 0.9), (1.5, -0.4)] {
            let b = Bindings::new().at_xt(x, t);
            let g = m.eval(&b).unwrap();
            let gi = m.eval_inverse(&b).unwrap();
            for i in 0..DIM {
                for j in 0..DIM {
                    let s: f64 = (0..DIM).map(|k| g[i][k] * gi[k][j]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((s - id).abs() < 1e-10);
                }
            }
            let w = 1.0 / t.cos().powi(2);
            assert!((m.det().eval(&b).unwrap() + w.powi(3)).abs() < 1e-10);
        }
    }
}
