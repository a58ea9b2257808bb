//! Finite-difference stencils.
//!
//! Steps are scale-aware: the step used at coordinate `x` is
//! `base * max(1, |x|)`.

/// Step scaled to the magnitude of `x`.
#[inline]
pub fn scaled_step(base: f64, x: f64) -> f64 {
    base * x.abs().max(1.0)
}

/// Second-order central difference of a scalar function of one variable.
pub fn central<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central difference with one Richardson extrapolation (steps `h` and `h/2`).
/// Truncation error is O(h^4).
pub fn richardson<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let d1 = central(&mut f, x, h);
    let d2 = central(&mut f, x, 0.5 * h);
    (4.0 * d2 - d1) / 3.0
}

/// Partial derivative of `f` with respect to component `i` of `x`.
pub fn partial<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], i: usize, base: f64) -> f64 {
    let h = scaled_step(base, x[i]);
    let mut y = x.to_vec();
    richardson(
        |xi| {
            y[i] = xi;
            let val = f(&y);
            y[i] = x[i];
            val
        },
        x[i],
        h,
    )
}

/// Gradient of `f` at `x`.
pub fn gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], base: f64) -> Vec<f64> {
    (0..x.len()).map(|i| partial(&f, x, i, base)).collect()
}

/// Jacobian `J[i][j] = d f_i / d x_j` of a vector function.
pub fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: F, x: &[f64], base: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let m = f(x).len();
    let mut jac = vec![vec![0.0; n]; m];
    let mut y = x.to_vec();
    for j in 0..n {
        let h = scaled_step(base, x[j]);
        let mut eval = |dx: f64| {
            y[j] = x[j] + dx;
            let r = f(&y);
            y[j] = x[j];
            r
        };
        let (p1, m1, p2, m2) = (eval(h), eval(-h), eval(0.5 * h), eval(-0.5 * h));
        for i in 0..m {
            let d1 = (p1[i] - m1[i]) / (2.0 * h);
            let d2 = (p2[i] - m2[i]) / h;
            jac[i][j] = (4.0 * d2 - d1) / 3.0;
        }
    }
    jac
}

/// Five-point first derivative, O(h^4).
pub fn five_point<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_beats_central_on_sine() {
        let x = 0.7_f64;
        let exact = x.cos();
        let plain = central(f64::sin, x, 1e-2);
        let rich = richardson(f64::sin, x, 1e-2);
        assert!((rich - exact).abs() < 1e-9);
        assert!((rich - exact).abs() < (plain - exact).abs());
    }

    #[test]
    fn gradient_of_quadratic_form() {
        let f = |q: &[f64]| q[0] * q[0] + 3.0 * q[0] * q[1] - q[1].powi(3);
        let g = gradient(f, &[1.5, -2.0], 1e-4);
        assert!((g[0] - (3.0 - 6.0)).abs() < 1e-9);
        assert!((g[1] - (4.5 - 12.0)).abs() < 1e-9);
    }

    #[test]
    fn jacobian_matches_analytic() {
        let f = |q: &[f64]| vec![q[0] * q[1], q[1].exp()];
        let j = jacobian(f, &[2.0, 0.5], 1e-4);
        assert!((j[0][0] - 0.5).abs() < 1e-10);
        assert!((j[0][1] - 2.0).abs() < 1e-10);
        assert!(j[1][0].abs() < 1e-12);
        assert!((j[1][1] - 0.5f64.exp()).abs() < 1e-9);
    }
}
