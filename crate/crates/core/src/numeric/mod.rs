//! Log-domain complex arithmetic, small LU, 2D quadrature, finite differences.

pub mod finite_diff;
pub mod logcomplex;
pub mod matrix;
pub mod quadrature;

pub use finite_diff::{finite_diff_gradient, finite_diff_second};
pub use logcomplex::{log_add_exp, log_sum, log_sum_exp, LogComplex};
pub use matrix::{lu_factor, ComplexMatrix, LuFactor};
pub use quadrature::{integrate2d, integrate2d_real, QuadratureGrid, Scheme};

use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 4096;

/// Cumulative table of ln k! for k = 0..=n.
pub fn log_factorials(n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    t.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        t.push(acc);
    }
    t
}

/// ln k!, from a cached table for small k and Stirling's series beyond.
pub fn ln_factorial(k: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    if k <= LN_FACT_TABLE {
        return TABLE.get_or_init(|| log_factorials(LN_FACT_TABLE))[k];
    }
    let n = k as f64;
    let r = 1.0 / n;
    n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln() + r / 12.0 - r.powi(3) / 360.0 + r.powi(5) / 1260.0
}

/// ln k! - (k ln k - k), accurate to a few ulps of the result.
pub fn stirling_remainder(k: usize) -> f64 {
    if k < 20 {
        let n = k as f64;
        let lead = if k == 0 { 0.0 } else { n * n.ln() - n };
        return ln_factorial(k) - lead;
    }
    let n = k as f64;
    let r = 1.0 / n;
    let r2 = r * r;
    0.5 * (2.0 * std::f64::consts::PI * n).ln() + r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// ln(x^k e^{-x} / k!) without forming the large parts separately.
pub fn ln_poisson(k: usize, x: f64) -> f64 {
    if k == 0 {
        return -x;
    }
    let n = k as f64;
    n * (x / n).ln() + (n - x) - stirling_remainder(k)
}
