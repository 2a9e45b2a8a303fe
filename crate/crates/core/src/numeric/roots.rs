/// Solve `f(x) = target` for increasing `f` on `[lo, hi]` by Newton steps
/// safeguarded with bisection. `df` is the derivative of `f`.
pub fn invert_increasing<F, D>(f: F, df: D, target: f64, lo: f64, hi: f64, guess: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut x = guess.clamp(a, b);
    for _ in 0..200 {
        let fx = f(x) - target;
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(d > 0.0) || !next.is_finite() || next <= a || next >= b {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) || b - a <= 0.0 {
            return next;
        }
        x = next;
    }
    x
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_tangent() {
        let x = invert_increasing(f64::tan, |x| 1.0 / x.cos().powi(2), 2.0, -1.5, 1.5, 0.0);
        assert!((x - 2f64.atan()).abs() < 1e-15);
    }

    #[test]
    fn bisects_cosine_zero() {
        let r = bisect(f64::cos, 0.0, 3.0, 1e-14);
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }
}
