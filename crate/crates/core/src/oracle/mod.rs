//! Independent ground truth: exact monomial-expansion integrals for tiny
//! systems, plasma Metropolis sampling, characteristic-polynomial moments,
//! Slater reduced densities, the bath-tracer delta interaction and the
//! emergent-potential energy identity.

pub mod charpoly;
pub mod delta;
pub mod energy;
pub mod mcmc;
pub mod monomial;
pub mod slater;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::HoleConfig;

pub use charpoly::{charpoly_moment_mc, CharpolyEstimate};
pub use delta::{delta_check, DeltaResiduals};
pub use energy::{energy_grid, energy_identity_check, EnergyResiduals};
pub use mcmc::{plasma_mcmc, plasma_mcmc_chains, plasma_mcmc_with, radial_density_check, PlasmaConfig, PlasmaRun, PlasmaSample};
pub use monomial::MonomialPolynomial;
pub use slater::{slater_density, slater_density_bruteforce};

pub const MAX_EXACT_BATH: usize = 4;
pub const MAX_EXACT_HOLES: usize = 2;

/// Ψ_qh(w; z) without its Gaussian factor: ∏_{k,j} (w_j - z_k) · Δ(z).
pub fn quasi_hole_polynomial(w: &[Complex64], n_bath: usize) -> MonomialPolynomial {
    let factor = monomial::hole_factor(w, 1);
    MonomialPolynomial::from_factors(&vec![factor; n_bath]).mul(&MonomialPolynomial::vandermonde(n_bath))
}

/// ln c_qh(w)^{-2} = ln ∫ |Ψ_qh(w; z)|² dz by exact term-wise integration.
pub fn partition_exact(cfg: &HoleConfig) -> Result<f64> {
    if cfg.n_bath > MAX_EXACT_BATH || cfg.n() > MAX_EXACT_HOLES {
        return Err(Error::Resource(format!(
            "monomial expansion limited to N <= {MAX_EXACT_BATH}, n <= {MAX_EXACT_HOLES} (got N = {}, n = {})",
            cfg.n_bath,
            cfg.n()
        )));
    }
    if !(cfg.b > 0.0) {
        return Err(Error::Usage(format!("b must be positive, got {}", cfg.b)));
    }
    Ok(quasi_hole_polynomial(&cfg.w, cfg.n_bath).log_gaussian_norm_sq(cfg.b))
}

/// Test function p(y - c) e^{-|y - c|²/(2σ²)} with p a holomorphic polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTest {
    pub center: Complex64,
    pub sigma: f64,
    /// Coefficients of p in powers of (y - c); empty means the zero function.
    pub coeffs: Vec<Complex64>,
}

impl GaussianTest {
    pub fn gaussian(center: Complex64, sigma: f64) -> Self {
        GaussianTest { center, sigma, coeffs: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn zero() -> Self {
        GaussianTest { center: Complex64::new(0.0, 0.0), sigma: 1.0, coeffs: Vec::new() }
    }

    fn poly(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn eval(&self, y: Complex64) -> Complex64 {
        let z = y - self.center;
        self.poly(z).0 * (-z.norm_sqr() / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// (∂_x, ∂_y) of the function at y.
    pub fn gradient(&self, y: Complex64) -> [Complex64; 2] {
        let z = y - self.center;
        let s2 = self.sigma * self.sigma;
        let g = (-z.norm_sqr() / (2.0 * s2)).exp();
        let (p, dp) = self.poly(z);
        let i = Complex64::i();
        [(dp - p * (z.re / s2)) * g, (i * dp - p * (z.im / s2)) * g]
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::partition::log_partition;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_hole_closed_form() {
        let v = partition_exact(&HoleConfig::with_b(vec![c(1.0, 0.0)], 1, 1.0)).unwrap();
        assert!((v.exp() - 2.0 * PI).abs() < 1e-14 * 2.0 * PI);
    }

    #[test]
    fn no_holes_appendix_value() {
        let v = partition_exact(&HoleConfig::with_b(vec![], 2, 2.0)).unwrap();
        assert!((v.exp() - PI * PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn matches_determinantal_formula() {
        let cfg = HoleConfig::with_b(vec![c(0.3, 0.4)], 2, 2.0);
        let exact = partition_exact(&cfg).unwrap();
        let formula = log_partition(&cfg).unwrap().log_value;
        assert!(((formula - exact).exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn size_guard() {
        let cfg = HoleConfig::new(vec![], 5);
        assert!(matches!(partition_exact(&cfg), Err(Error::Resource(_))));
        let cfg = HoleConfig::new(vec![c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0)], 2);
        assert!(matches!(partition_exact(&cfg), Err(Error::Resource(_))));
    }

    #[test]
    fn gaussian_test_gradient() {
        let u = GaussianTest { center: c(0.3, -0.1), sigma: 0.7, coeffs: vec![c(1.0, 0.5), c(-0.3, 0.2), c(0.1, 0.0)] };
        let y = c(0.2, 0.45);
        let h = 1e-6;
        let g = u.gradient(y);
        let fx = (u.eval(y + h) - u.eval(y - h)) / (2.0 * h);
        let fy = (u.eval(y + c(0.0, h)) - u.eval(y - c(0.0, h))) / (2.0 * h);
        assert!((g[0] - fx).norm() < 1e-8 && (g[1] - fy).norm() < 1e-8);
    }
}
