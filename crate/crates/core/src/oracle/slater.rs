//! Reduced m-point densities of a Slater determinant of LLL orbitals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::orbital;
use crate::numeric::{ln_factorial, lu_factor, ComplexMatrix};
use crate::oracle::monomial::MonomialPolynomial;

fn check_args(ks: &[usize], m: usize) -> Result<()> {
    if m > ks.len() {
        return Err(Error::Usage(format!("{} points requested from a {}-particle state", m, ks.len())));
    }
    let mut sorted = ks.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::Usage("orbital indices must be distinct".into()));
    }
    Ok(())
}

/// γ¹(x, y) = Σ_k φ_k(x) conj(φ_k(y)).
pub fn one_body(b: f64, ks: &[usize], x: Complex64, y: Complex64) -> Complex64 {
    ks.iter().map(|&k| orbital(b, k, x) * orbital(b, k, y).conj()).sum()
}

/// γ^{(m)}(x; x) = det[γ¹(x_i, x_l)] / m!.
pub fn slater_density(b: f64, ks: &[usize], xs: &[Complex64]) -> Result<f64> {
    check_args(ks, xs.len())?;
    let m = xs.len();
    if m == 0 {
        return Ok(1.0);
    }
    let g = ComplexMatrix::from_fn(m, |i, l| one_body(b, ks, xs[i], xs[l]));
    let det = match lu_factor(&g) {
        Ok(f) => f.det().re().max(0.0),
        Err(_) => 0.0,
    };
    Ok(det / ln_factorial(m).exp())
}

/// The same density as C(N, m) ∫ |Φ_N|² over the last N - m variables,
/// with Φ_N = det[φ_{k_a}(x_i)] / √N! expanded into monomials.
pub fn slater_density_bruteforce(b: f64, ks: &[usize], xs: &[Complex64]) -> Result<f64> {
    check_args(ks, xs.len())?;
    let n = ks.len();
    if n > super::MAX_EXACT_BATH {
        return Err(Error::Resource(format!("brute-force Slater marginal limited to N <= {}", super::MAX_EXACT_BATH)));
    }
    let m = xs.len();
    let p = MonomialPolynomial::slater(ks);
    // orbital normalizations b^{k+1}/(π k!)
    let log_norm: f64 = ks
        .iter()
        .map(|&k| (k as f64 + 1.0) * b.ln() - std::f64::consts::PI.ln() - ln_factorial(k))
        .sum();
    let log_binom = ln_factorial(n) - ln_factorial(m) - ln_factorial(n - m);
    let gauss: f64 = xs.iter().map(|x| -b * x.norm_sqr()).sum();
    let marg = p.marginal_norm_sq(b, xs);
    Ok(marg * (log_norm - ln_factorial(n) + log_binom + gauss).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{kernel_eval, KernelSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_point_is_kernel_diagonal() {
        let x = c(0.4, -0.2);
        let d = slater_density(3.0, &[0, 1, 2], &[x]).unwrap();
        let k = kernel_eval(&KernelSpec::new(3.0, 3).unwrap(), x, x).re();
        assert!((d - k).abs() < 1e-14 * k);
    }

    #[test]
    fn coincident_points_vanish() {
        let x = c(0.1, 0.3);
        assert!(slater_density(3.0, &[0, 1, 2], &[x, x]).unwrap().abs() < 1e-15);
        assert_eq!(slater_density_bruteforce(3.0, &[0, 1, 2], &[x, x]).unwrap(), 0.0);
    }

    #[test]
    fn determinant_matches_bruteforce() {
        let xs = [c(0.31, -0.12), c(-0.45, 0.27)];
        for ks in [[0usize, 1, 2], [0, 2, 5]] {
            let a = slater_density(3.0, &ks, &xs).unwrap();
            let bf = slater_density_bruteforce(3.0, &ks, &xs).unwrap();
            assert!((a - bf).abs() < 1e-10 * a, "{ks:?}: {a} vs {bf}");
        }
    }

    #[test]
    fn full_density_matches_bruteforce() {
        let xs = [c(0.2, 0.1), c(-0.3, 0.4), c(0.5, -0.5)];
        let a = slater_density(2.0, &[0, 1, 2], &xs).unwrap();
        let bf = slater_density_bruteforce(2.0, &[0, 1, 2], &xs).unwrap();
        assert!((a - bf).abs() < 1e-10 * a);
    }

    #[test]
    fn too_many_points() {
        let xs = [c(0.0, 0.0); 3];
        assert!(matches!(slater_density(1.0, &[0, 1], &xs), Err(Error::Usage(_))));
    }
}
