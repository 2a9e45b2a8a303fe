use crate::expr::{add, mul, sub, Expr};

use super::tensor::{Symmetry, TensorField, Variance};
use super::{partial, EisenhartMetric, DIM};

use Variance::{Lower, Upper};

fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
    terms.into_iter().fold(Expr::zero(), add)
}

/// `Γ^μ_{νλ} = ½ g^{μσ}(∂_ν g_{σλ} + ∂_λ g_{σν} − ∂_σ g_{νλ})`.
pub fn christoffel(m: &EisenhartMetric) -> TensorField {
    let dg: Vec<Vec<Vec<Expr>>> = (0..DIM)
        .map(|k| {
            (0..DIM)
                .map(|i| (0..DIM).map(|j| partial(m.component(i, j), k)).collect())
                .collect()
        })
        .collect();
    let mut gamma = TensorField::zeros(vec![Upper, Lower, Lower], vec![Symmetry::Symmetric(1, 2)]);
    for mu in 0..DIM {
        for nu in 0..DIM {
            for la in nu..DIM {
                let c = sum((0..DIM).map(|s| {
                    let bracket = sub(add(dg[nu][s][la].clone(), dg[la][s][nu].clone()), dg[s][nu][la].clone());
                    if bracket.is_zero() {
                        return Expr::zero();
                    }
                    mul(m.inverse(mu, s).clone(), bracket)
                }));
                gamma.set(&[mu, nu, la], mul(Expr::constant(0.5), c));
            }
        }
    }
    gamma
}

fn riemann_from(gamma: &TensorField) -> TensorField {
    let mut r = TensorField::zeros(vec![Upper, Lower, Lower, Lower], vec![]);
    for mu in 0..DIM {
        for nu in 0..DIM {
            for la in 0..DIM {
                for si in 0..DIM {
                    let d = sub(
                        partial(gamma.get(&[mu, nu, si]), la),
                        partial(gamma.get(&[mu, nu, la]), si),
                    );
                    let q = sum((0..DIM).map(|rho| {
                        sub(
                            mul(gamma.get(&[mu, la, rho]).clone(), gamma.get(&[rho, nu, si]).clone()),
                            mul(gamma.get(&[mu, si, rho]).clone(), gamma.get(&[rho, nu, la]).clone()),
                        )
                    }));
                    r.set(&[mu, nu, la, si], add(d, q));
                }
            }
        }
    }
    r
}

fn ricci_from(riemann: &TensorField) -> TensorField {
    let mut ric = TensorField::zeros(vec![Lower, Lower], vec![]);
    for nu in 0..DIM {
        for si in 0..DIM {
            ric.set(&[nu, si], sum((0..DIM).map(|mu| riemann.get(&[mu, nu, mu, si]).clone())));
        }
    }
    ric
}

fn scalar_from(m: &EisenhartMetric, ricci: &TensorField) -> Expr {
    sum((0..DIM).flat_map(|mu| {
        (0..DIM).map(move |nu| mul(m.inverse(mu, nu).clone(), ricci.get(&[nu, mu]).clone()))
    }))
}

/// `∇_λ R_{μν}` as a rank-3 tensor indexed `[λ, μ, ν]`.
fn nabla_ricci(gamma: &TensorField, ricci: &TensorField) -> TensorField {
    let mut n = TensorField::zeros(vec![Lower; 3], vec![]);
    for la in 0..DIM {
        for mu in 0..DIM {
            for nu in 0..DIM {
                let conn = sum((0..DIM).map(|rho| {
                    add(
                        mul(gamma.get(&[rho, la, mu]).clone(), ricci.get(&[rho, nu]).clone()),
                        mul(gamma.get(&[rho, la, nu]).clone(), ricci.get(&[mu, rho]).clone()),
                    )
                }));
                n.set(&[la, mu, nu], sub(partial(ricci.get(&[mu, nu]), la), conn));
            }
        }
    }
    n
}

/// `C_{μνλ} = ∇_λR_{μν} − ∇_νR_{μλ} + ¼(g_{μλ}∂_νR − g_{μν}∂_λR)`.
fn cotton_from(m: &EisenhartMetric, gamma: &TensorField, ricci: &TensorField, scalar: &Expr) -> TensorField {
    let nr = nabla_ricci(gamma, ricci);
    let dr: Vec<Expr> = (0..DIM).map(|i| partial(scalar, i)).collect();
    let mut c = TensorField::zeros(vec![Lower; 3], vec![]);
    for mu in 0..DIM {
        for nu in 0..DIM {
            for la in 0..DIM {
                let main = sub(nr.get(&[la, mu, nu]).clone(), nr.get(&[nu, mu, la]).clone());
                let trace = sub(
                    mul(m.component(mu, la).clone(), dr[nu].clone()),
                    mul(m.component(mu, nu).clone(), dr[la].clone()),
                );
                c.set(&[mu, nu, la], add(main, mul(Expr::constant(0.25), trace)));
            }
        }
    }
    c
}

pub fn riemann(m: &EisenhartMetric) -> TensorField {
    riemann_from(&christoffel(m))
}

pub fn ricci(m: &EisenhartMetric) -> TensorField {
    ricci_from(&riemann(m))
}

pub fn scalar_curvature(m: &EisenhartMetric) -> Expr {
    scalar_from(m, &ricci(m))
}

pub fn cotton(m: &EisenhartMetric) -> TensorField {
    Curvature::compute(m).cotton
}

/// Every curvature object of a metric, computed once.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub christoffel: TensorField,
    pub riemann: TensorField,
    pub ricci: TensorField,
    pub scalar: Expr,
    pub cotton: TensorField,
}

impl Curvature {
    pub fn compute(m: &EisenhartMetric) -> Self {
        let christoffel = christoffel(m);
        let riemann = riemann_from(&christoffel);
        let ricci = ricci_from(&riemann);
        let scalar = scalar_from(m, &ricci);
        let cotton = cotton_from(m, &christoffel, &ricci, &scalar);
        Curvature {
            christoffel,
            riemann,
            ricci,
            scalar,
            cotton,
        }
    }
}
