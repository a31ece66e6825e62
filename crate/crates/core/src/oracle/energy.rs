//! Energy identity for one tracer attached to a small bath:
//! ∫|(-i∇_y - q b y^⊥) Ψ_Φ|² = ∫|(-i∇ + A - q b y^⊥) Φ|² + ∫|Φ|² V,
//! with Ψ_Φ(y; x) = Φ(y) c_qh(y) Ψ_qh(y; x).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate2d_real, QuadratureGrid};
use crate::oracle::monomial::{hole_factor, hole_factor_derivative, MonomialPolynomial};
use crate::oracle::{quasi_hole_polynomial, GaussianTest, MAX_EXACT_BATH};
use crate::partition::HoleConfig;
use crate::potentials::emergent_field_derivative;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyResiduals {
    pub lhs: f64,
    pub rhs: f64,
    pub relative: f64,
}

/// Quadrature grid over the tracer position suited to a Gaussian Φ.
pub fn energy_grid(phi: &GaussianTest) -> QuadratureGrid {
    QuadratureGrid::cartesian(phi.center, 7.0 * phi.sigma, 14, 10)
}

/// ∂_w of ∏_k (w - z_k) Δ(z).
fn quasi_hole_derivative(w: Complex64, n_bath: usize) -> MonomialPolynomial {
    let f = hole_factor(&[w], 1);
    let df = hole_factor_derivative(&[w], 1, 0);
    let mut out = MonomialPolynomial::zero(n_bath);
    for k in 0..n_bath {
        let mut factors = vec![f.clone(); n_bath];
        factors[k] = df.clone();
        out = out.add(&MonomialPolynomial::from_factors(&factors));
    }
    out.mul(&MonomialPolynomial::vandermonde(n_bath))
}

/// ∫_x |(-i∇_y - q b y^⊥) Ψ_Φ(y; x)|² dx, exact in x.
fn lhs_density(n_bath: usize, b: f64, q: f64, phi: &GaussianTest, y: Complex64) -> f64 {
    let p = quasi_hole_polynomial(&[y], n_bath);
    let dp = quasi_hole_derivative(y, n_bath);
    let n2 = p.gaussian_inner(&p, b).re;
    let dn2 = dp.gaussian_inner(&dp, b).re;
    let g = p.gaussian_inner(&dp, b);
    let c = n2.powf(-0.5);
    // ∇ of c = (∫|Ψ_qh|²)^{-1/2}, using ∂_w ∫|Ψ_qh|² = ⟨Ψ_qh, ∂_w Ψ_qh⟩
    let dc = [-c.powi(3) * g.re, c.powi(3) * g.im];
    let f = phi.eval(y);
    let df = phi.gradient(y);
    let i = Complex64::i();
    let perp = [-y.im, y.re];
    let e = [Complex64::new(1.0, 0.0), i];
    (0..2)
        .map(|a| {
            let bvec = -i * df[a] - q * b * perp[a] * f;
            let s = c * bvec - i * f * dc[a];
            let t = -i * f * c * e[a];
            s.norm_sqr() * n2 + t.norm_sqr() * dn2 + 2.0 * (s.conj() * t * g).re
        })
        .sum()
}

fn rhs_density(n_bath: usize, b: f64, q: f64, phi: &GaussianTest, y: Complex64) -> Result<f64> {
    let f = phi.eval(y);
    if f.norm() == 0.0 {
        return Ok(0.0);
    }
    let field = emergent_field_derivative(&HoleConfig::with_b(vec![y], n_bath, b), 0)?;
    let df = phi.gradient(y);
    let perp = [-y.im, y.re];
    let i = Complex64::i();
    let kinetic: f64 = (0..2).map(|a| (-i * df[a] + (field.a[a] - q * b * perp[a]) * f).norm_sqr()).sum();
    Ok(kinetic + f.norm_sqr() * field.v)
}

/// Both sides of the identity for one tracer (cfg.w supplies only n = 1).
pub fn energy_identity_check(cfg: &HoleConfig, q: f64, phi: &GaussianTest, grid: &QuadratureGrid) -> Result<EnergyResiduals> {
    if cfg.n() != 1 {
        return Err(Error::Usage(format!("energy identity needs exactly one tracer, got {}", cfg.n())));
    }
    if cfg.n_bath > MAX_EXACT_BATH {
        return Err(Error::Resource(format!("energy identity limited to N <= {MAX_EXACT_BATH}")));
    }
    let (n, b) = (cfg.n_bath, cfg.b);
    let lhs = integrate2d_real(grid, |y| lhs_density(n, b, q, phi, y))?;
    let rhs_vals: Vec<Result<f64>> = grid.nodes.iter().map(|&y| rhs_density(n, b, q, phi, y)).collect();
    let mut rhs = 0.0;
    for (v, w) in rhs_vals.into_iter().zip(&grid.weights) {
        rhs += w * v?;
    }
    let relative = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { (lhs - rhs).abs() / lhs.abs().max(rhs.abs()) };
    Ok(EnergyResiduals { lhs, rhs, relative })
}
