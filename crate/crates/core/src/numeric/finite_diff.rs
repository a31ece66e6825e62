//! Central finite differences, used as test oracles for analytic derivatives.

use std::ops::{Mul, Sub};

/// Second-order central gradient of `f` at `x` with step `h`.
pub fn finite_diff_gradient<T, F>(f: F, x: &[f64], h: f64) -> Vec<T>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(&[f64]) -> T,
{
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let fp = f(&p);
            p[i] = x[i] - h;
            let fm = f(&p);
            p[i] = x[i];
            (fp - fm) * (0.5 / h)
        })
        .collect()
}

/// Central second difference ∂_i ∂_k f (stencil radius 2h when i == k).
pub fn finite_diff_second<T, F>(f: F, x: &[f64], i: usize, k: usize, h: f64) -> T
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T> + std::ops::Add<Output = T>,
    F: Fn(&[f64]) -> T,
{
    let mut p = x.to_vec();
    let mut at = |di: f64, dk: f64| {
        p.copy_from_slice(x);
        p[i] += di;
        p[k] += dk;
        f(&p)
    };
    if i == k {
        let (a, b, c) = (at(h, 0.0), at(0.0, 0.0), at(-h, 0.0));
        (a + c - b * 2.0) * (1.0 / (h * h))
    } else {
        let (pp, pm, mp, mm) = (at(h, h), at(h, -h), at(-h, h), at(-h, -h));
        (pp - pm - mp + mm) * (0.25 / (h * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn square() {
        let g = finite_diff_gradient(|x: &[f64]| x[0] * x[0], &[3.0], 1e-4);
        assert!((g[0] - 6.0).abs() < 1e-7);
    }

    #[test]
    fn product() {
        let g = finite_diff_gradient(|x: &[f64]| x[0] * x[1], &[1.0, 2.0], 1e-4);
        assert!((g[0] - 2.0).abs() < 1e-7 && (g[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn complex_valued() {
        let g = finite_diff_gradient(|x: &[f64]| Complex64::new(x[0], x[1]).powi(2), &[0.5, 0.25], 1e-4);
        // d/dx z^2 = 2z, d/dy z^2 = 2iz
        let z = Complex64::new(0.5, 0.25);
        assert!((g[0] - 2.0 * z).norm() < 1e-7);
        assert!((g[1] - Complex64::i() * 2.0 * z).norm() < 1e-7);
    }

    #[test]
    fn mixed_second() {
        let f = |x: &[f64]| x[0].sin() * x[1].exp();
        let d = finite_diff_second(f, &[0.4, 0.2], 0, 1, 1e-4);
        assert!((d - 0.4f64.cos() * 0.2f64.exp()).abs() < 1e-6);
        let d = finite_diff_second(f, &[0.4, 0.2], 0, 0, 1e-4);
        assert!((d + 0.4f64.sin() * 0.2f64.exp()).abs() < 1e-6);
    }
}
