//! Central finite-difference stencils (fourth order unless noted).

pub fn d1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

pub fn d2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

pub fn d3<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 3.0 * h) - 8.0 * f(x - 2.0 * h) + 13.0 * f(x - h) - 13.0 * f(x + h)
        + 8.0 * f(x + 2.0 * h)
        - f(x + 3.0 * h))
        / (8.0 * h * h * h)
}

/// Second-order central first derivative.
pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Schwarzian derivative of a tabulated/callable function from its samples.
pub fn schwarzian<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let f1 = d1(&f, x, h);
    let f2 = d2(&f, x, h);
    let f3 = d3(&f, x, h);
    f3 / f1 - 1.5 * (f2 / f1).powi(2)
}

/// Schwarzian computed from samples of the first derivative `fp = f'`,
/// which needs one fewer numerical differentiation.
pub fn schwarzian_from_derivative<F: Fn(f64) -> f64>(fp: F, x: f64, h: f64) -> f64 {
    let f1 = fp(x);
    let f2 = d1(&fp, x, h);
    let f3 = d2(&fp, x, h);
    f3 / f1 - 1.5 * (f2 / f1).powi(2)
}

/// One Richardson step for an estimate `est(h)` with error `O(h^order)`.
pub fn richardson<E: Fn(f64) -> f64>(est: E, h: f64, order: i32) -> f64 {
    let k = 2f64.powi(order);
    (k * est(0.5 * h) - est(h)) / (k - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_sine() {
        let x = 0.7;
        assert!((d1(f64::sin, x, 1e-3) - x.cos()).abs() < 1e-12);
        assert!((d2(f64::sin, x, 1e-3) + x.sin()).abs() < 1e-8);
        assert!((d3(f64::sin, x, 1e-2) + x.cos()).abs() < 1e-6);
    }

    #[test]
    fn schwarzian_of_exp_is_minus_half() {
        assert!((schwarzian(f64::exp, 0.3, 1e-2) + 0.5).abs() < 1e-6);
        assert!((schwarzian_from_derivative(f64::exp, 0.3, 1e-3) + 0.5).abs() < 1e-8);
    }

    #[test]
    fn richardson_raises_order() {
        let sec2 = |t: f64| 1.0 / t.cos().powi(2);
        let plain = (schwarzian_from_derivative(sec2, 1.0, 0.02) - 2.0).abs();
        let extrap = (richardson(|h| schwarzian_from_derivative(sec2, 1.0, h), 0.02, 4) - 2.0).abs();
        assert!(extrap < plain / 100.0, "{plain:e} {extrap:e}");
    }
}
