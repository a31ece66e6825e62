//! The bath-tracer contact interaction δ: Ψ(y; x) ↦ Ψ(y; y) K_∞(x, y).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::{kernel_infty, orbital, KernelSpec};
use crate::numeric::{integrate2d_real, QuadratureGrid};
use crate::oracle::GaussianTest;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaResiduals {
    /// ⟨u⊗φ_k, δ u⊗φ_k⟩ by double quadrature.
    pub quadratic_form: f64,
    /// ∫ |u φ_k|² by quadrature.
    pub contact: f64,
    pub quadratic_residual: f64,
    /// sup |δ²Ψ - (b/π) δΨ| over the sample points.
    pub projector_residual: f64,
}

/// Applies δ to a two-body function.
pub fn delta_apply<F>(spec: &KernelSpec, psi: F) -> impl Fn(Complex64, Complex64) -> Complex64
where
    F: Fn(Complex64, Complex64) -> Complex64,
{
    let spec = *spec;
    move |y, x| psi(y, y) * kernel_infty(&spec, x, y).to_complex()
}

/// Checks the quadratic form and projector identities of δ on Ψ = u ⊗ φ_k.
pub fn delta_check(
    b: f64,
    k: usize,
    u: &GaussianTest,
    grid: &QuadratureGrid,
    points: &[(Complex64, Complex64)],
) -> Result<DeltaResiduals> {
    let spec = KernelSpec::new(b, 1)?;
    let uy: Vec<Complex64> = grid.nodes.iter().map(|&y| u.eval(y)).collect();
    let phi: Vec<Complex64> = grid.nodes.iter().map(|&x| orbital(b, k, x)).collect();
    // ∫ conj(φ_k(x)) K_∞(x, y) dx for every node y
    let inner = par::map_range(grid.len(), |iy| {
        if uy[iy].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let y = grid.nodes[iy];
        grid.nodes
            .iter()
            .zip(&grid.weights)
            .zip(&phi)
            .map(|((&x, &wx), p)| wx * p.conj() * kernel_infty(&spec, x, y).to_complex())
            .sum::<Complex64>()
    });
    let form: Complex64 = (0..grid.len())
        .map(|i| grid.weights[i] * uy[i].conj() * uy[i] * phi[i] * inner[i])
        .sum();
    let contact = integrate2d_real(grid, |x| (u.eval(x) * orbital(b, k, x)).norm_sqr())?;

    let psi = |y: Complex64, x: Complex64| u.eval(y) * orbital(b, k, x);
    let d1 = delta_apply(&spec, psi);
    let d2 = delta_apply(&spec, &d1);
    let s = b / std::f64::consts::PI;
    let projector = points
        .iter()
        .map(|&(y, x)| (d2(y, x) - s * d1(y, x)).norm())
        .fold(0.0, f64::max);

    Ok(DeltaResiduals {
        quadratic_form: form.re,
        contact,
        quadratic_residual: (form - contact).norm(),
        projector_residual: projector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn points() -> Vec<(Complex64, Complex64)> {
        vec![(c(0.1, 0.2), c(-0.3, 0.1)), (c(0.5, -0.4), c(0.2, 0.2)), (c(-0.2, 0.0), c(0.7, -0.6))]
    }

    #[test]
    fn zero_function() {
        let grid = QuadratureGrid::cartesian(c(0.0, 0.0), 2.5, 6, 8);
        let r = delta_check(4.0, 0, &GaussianTest::zero(), &grid, &points()).unwrap();
        assert_eq!(r.quadratic_residual, 0.0);
        assert_eq!(r.projector_residual, 0.0);
    }

    #[test]
    fn gaussian_ground_orbital() {
        let grid = QuadratureGrid::cartesian(c(0.0, 0.0), 2.5, 10, 8);
        let u = GaussianTest::gaussian(c(0.3, 0.0), 0.5);
        let r = delta_check(4.0, 0, &u, &grid, &points()).unwrap();
        assert!(r.quadratic_residual < 1e-8, "{r:?}");
        assert!(r.projector_residual < 1e-10, "{r:?}");
    }

    #[test]
    fn excited_orbital_with_polynomial_test() {
        let grid = QuadratureGrid::cartesian(c(0.0, 0.0), 2.5, 10, 8);
        let u = GaussianTest { center: c(-0.2, 0.1), sigma: 0.6, coeffs: vec![c(1.0, 0.0), c(0.5, -0.5)] };
        let r = delta_check(4.0, 2, &u, &grid, &points()).unwrap();
        assert!(r.quadratic_residual < 1e-8 * r.contact.max(1.0), "{r:?}");
    }
}
