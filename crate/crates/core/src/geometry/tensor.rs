use serde::{Deserialize, Serialize};

use crate::expr::{neg, Bindings, EvalError, Expr};

use super::DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variance {
    Upper,
    Lower,
}

/// Index-pair symmetry of a tensor, by slot position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

/// Dense tensor of rank `r` over the three lifted coordinates, one `Expr`
/// per component.
#[derive(Debug, Clone)]
pub struct TensorField {
    variances: Vec<Variance>,
    symmetries: Vec<Symmetry>,
    comps: Vec<Expr>,
}

impl TensorField {
    pub fn zeros(variances: Vec<Variance>, symmetries: Vec<Symmetry>) -> Self {
        let rank = variances.len();
        for s in &symmetries {
            let (a, b) = match *s {
                Symmetry::Symmetric(a, b) | Symmetry::Antisymmetric(a, b) => (a, b),
            };
            assert!(a < rank && b < rank && a != b, "bad symmetry slots {s:?}");
        }
        TensorField {
            variances,
            symmetries,
            comps: vec![Expr::zero(); DIM.pow(rank as u32)],
        }
    }

    pub fn rank(&self) -> usize {
        self.variances.len()
    }

    pub fn variances(&self) -> &[Variance] {
        &self.variances
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank(), "index arity");
        idx.iter().fold(0, |acc, &i| {
            assert!(i < DIM, "coordinate index {i} out of range");
            acc * DIM + i
        })
    }

    fn unoffset(&self, mut off: usize) -> Vec<usize> {
        let mut idx = vec![0; self.rank()];
        for slot in idx.iter_mut().rev() {
            *slot = off % DIM;
            off /= DIM;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.comps[self.offset(idx)]
    }

    /// Write one component together with all images under the declared
    /// symmetries. A component forced to equal its own negative is set to 0.
    pub fn set(&mut self, idx: &[usize], value: Expr) {
        let mut orbit: Vec<(Vec<usize>, bool)> = vec![(idx.to_vec(), false)];
        let mut k = 0;
        let mut degenerate = false;
        while k < orbit.len() {
            let (cur, flipped) = orbit[k].clone();
            for s in &self.symmetries {
                let (a, b, anti) = match *s {
                    Symmetry::Symmetric(a, b) => (a, b, false),
                    Symmetry::Antisymmetric(a, b) => (a, b, true),
                };
                let mut next = cur.clone();
                next.swap(a, b);
                let f = flipped ^ anti;
                match orbit.iter().find(|(i, _)| *i == next) {
                    Some((_, g)) if *g != f => degenerate = true,
                    Some(_) => {}
                    None => orbit.push((next, f)),
                }
            }
            k += 1;
        }
        for (i, flipped) in orbit {
            let off = self.offset(&i);
            self.comps[off] = if degenerate {
                Expr::zero()
            } else if flipped {
                neg(value.clone())
            } else {
                value.clone()
            };
        }
    }

    /// Indices of components that are not structurally zero.
    pub fn nonzero(&self) -> Vec<Vec<usize>> {
        (0..self.comps.len())
            .filter(|&o| !self.comps[o].is_zero())
            .map(|o| self.unoffset(o))
            .collect()
    }

    /// All index tuples in row-major order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        (0..self.comps.len()).map(|o| self.unoffset(o)).collect()
    }

    /// Numeric values of every component, row-major.
    pub fn eval(&self, b: &Bindings) -> Result<Vec<f64>, EvalError> {
        self.comps.iter().map(|c| c.eval(b)).collect()
    }

    pub fn eval_at(&self, idx: &[usize], b: &Bindings) -> Result<f64, EvalError> {
        self.get(idx).eval(b)
    }
}
