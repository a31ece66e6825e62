//! Emergent vector and scalar potentials (A_j, V_j) felt by tracer j, by
//! exact differentiation of ln Υ and by the integral representation; the
//! short-range correction fields a, v; refined model fields; and the
//! regime-wise leading-order predictions.
//!
//! Planar vectors are `[x, y]`; the rotation x^⊥ = (-x₂, x₁) is
//! multiplication by i on the complex form.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::orbital;
use crate::numeric::QuadratureGrid;
use crate::par;
use crate::partition::{log_upsilon_derivative, upsilon, Conditional, HoleConfig, HoleDeriv};
use crate::regime::Regime;

pub type Vec2 = [f64; 2];

/// Separations below this are treated as coincident.
pub const MIN_SEPARATION: f64 = 1e-12;
/// Configurations with Υ below this are not evaluated.
pub const UPSILON_FLOOR: f64 = 1e-280;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Derivative,
    Integral,
    Prediction,
    Refined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmergentField {
    pub a: Vec2,
    pub v: f64,
    pub j: usize,
    pub method: Method,
}

fn vec2(z: Complex64) -> Vec2 {
    [z.re, z.im]
}

fn perp(z: Complex64) -> Complex64 {
    Complex64::i() * z
}

/// Σ_{ℓ≠j} (y_j - y_ℓ)^⊥ / |y_j - y_ℓ|².
pub fn ab_sum(w: &[Complex64], j: usize) -> Result<Vec2> {
    let mut s = Complex64::new(0.0, 0.0);
    for (l, wl) in w.iter().enumerate() {
        if l == j {
            continue;
        }
        let d = w[j] - wl;
        if d.norm() < MIN_SEPARATION {
            return Err(Error::Coincident(j.min(l), j.max(l)));
        }
        s += perp(d) / d.norm_sqr();
    }
    Ok(vec2(s))
}

/// Circulation of Σ_ℓ (y - y_ℓ)^⊥/|y - y_ℓ|² around a circle, by the
/// trapezoid rule in the angle.
pub fn ab_circulation(sources: &[Complex64], center: Complex64, radius: f64, nodes: usize) -> f64 {
    let dt = 2.0 * PI / nodes as f64;
    (0..nodes)
        .map(|k| {
            let t = k as f64 * dt;
            let y = center + Complex64::from_polar(radius, t);
            let tangent = Complex64::from_polar(radius, t) * Complex64::i();
            let f: Complex64 = sources.iter().map(|s| perp(y - s) / (y - s).norm_sqr()).sum();
            (f.re * tangent.re + f.im * tangent.im) * dt
        })
        .sum()
}

fn check_index(cfg: &HoleConfig, j: usize) -> Result<()> {
    if j >= cfg.n() {
        return Err(Error::Usage(format!("tracer index {} out of range for {} holes", j + 1, cfg.n())));
    }
    Ok(())
}

/// A_j = b y_j^⊥ - Σ_{ℓ≠j} AB + Im((1,i)ᵀ ∂_{w_j} ln Υ),
/// V_j = 2b + 2 ∂_{w̄_j} ∂_{w_j} ln Υ (b = N in the droplet scaling).
pub fn emergent_field_derivative(cfg: &HoleConfig, j: usize) -> Result<EmergentField> {
    check_index(cfg, j)?;
    cfg.check_separated(MIN_SEPARATION)?;
    let u = upsilon(cfg);
    if u < UPSILON_FLOOR {
        return Err(Error::Degenerate(u));
    }
    let dz = HoleDeriv { hole: j, holomorphic: true };
    let dzb = HoleDeriv { hole: j, holomorphic: false };
    let g = log_upsilon_derivative(cfg, &[dz])?;
    let lap = log_upsilon_derivative(cfg, &[dzb, dz])?;
    let ab = ab_sum(&cfg.w, j)?;
    let base = perp(cfg.w[j]) * cfg.b;
    Ok(EmergentField {
        a: [base.re - ab[0] + g.im, base.im - ab[1] + g.re],
        v: 2.0 * cfg.b + 2.0 * lap.re,
        j,
        method: Method::Derivative,
    })
}

/// Quadrature rules for the integral route.
#[derive(Clone, Debug)]
pub struct IntegralGrids {
    /// Single integrals over z (centred on the tracer by default).
    pub single: QuadratureGrid,
    /// One factor of the double integral over (z, ζ).
    pub double: QuadratureGrid,
}

/// Node budget for one factor of the double integral.
pub const DOUBLE_GRID_BUDGET: usize = 64 * 64;

impl IntegralGrids {
    /// Polar rule centred at w_j for the single integrals and a 64×64
    /// Gauss–Legendre square for the double integral, both covering radius
    /// 1 + 8/√b around the droplet.
    pub fn for_tracer(cfg: &HoleConfig, j: usize) -> Self {
        let reach = 1.0 + 8.0 / cfg.b.sqrt();
        let ell = 1.0 / cfg.b.sqrt();
        let single = QuadratureGrid::polar_hybrid(
            cfg.w[j],
            1e-8,
            0.5 * ell,
            cfg.w[j].norm() + reach,
            24,
            0.5 * ell,
            8,
            64,
        );
        let double = QuadratureGrid::cartesian(Complex64::new(0.0, 0.0), reach, 8, 8);
        IntegralGrids { single, double }
    }
}

/// Fields from the integral representation, written with the conditional
/// kernel L(z, ζ) = K(z, ζ) - Θ(ζ, z | w) and g(z) = 1/(w_j - z):
/// A_j = Im((1,i)ᵀ ∫ L(z,z) g(z) dz)·(N/b),
/// V_j = 2(N/b)[∫ L(z,z)|g|² dz - (N/b)∬ |L(z,ζ)|² g(z) ḡ(ζ) dz dζ].
/// Both integrands are bounded: L(·,ζ) vanishes at every hole.
pub fn emergent_field_integral(cfg: &HoleConfig, j: usize, grids: &IntegralGrids) -> Result<EmergentField> {
    check_index(cfg, j)?;
    cfg.check_separated(MIN_SEPARATION)?;
    let u = upsilon(cfg);
    if u < UPSILON_FLOOR {
        return Err(Error::Degenerate(u));
    }
    if grids.double.len() > DOUBLE_GRID_BUDGET {
        return Err(Error::Resource(format!(
            "double-integral grid has {} nodes per factor, budget is {}",
            grids.double.len(),
            DOUBLE_GRID_BUDGET
        )));
    }
    let cond = Conditional::new(cfg)?;
    let wj = cfg.w[j];
    let ratio = cfg.n_bath as f64 / cfg.b;

    // single integrals
    let single = par::map(&grids.single.nodes, |z| {
        let d = wj - z;
        if d.norm() == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let l = cond.density(*z);
        (l / d, l / d.norm_sqr())
    });
    let mut ia = Complex64::new(0.0, 0.0);
    let mut iv = 0.0;
    for ((a, v), wt) in single.iter().zip(&grids.single.weights) {
        ia += a * wt;
        iv += v * wt;
    }

    // double integral, kernel through the orbital expansion K = Σ φ_k φ̄_k
    let nodes = &grids.double.nodes;
    let spec = cfg.spec();
    let phis: Vec<Vec<Complex64>> = par::map(nodes, |z| (0..spec.m).map(|k| orbital(spec.b, k, *z)).collect());
    let nus = cond.nu_table(nodes);
    let minv = cond.inverse();
    // L(z, ζ) = Σ_k φ_k(z) φ̄_k(ζ) - Σ_{ik} ν̄_i(z) M⁻¹_{ik} ν_k(ζ), with ν_i(z) = K(w_i, z)
    let left: Vec<Vec<Complex64>> = nus
        .iter()
        .map(|nu| {
            let n = nu.len();
            (0..n).map(|k| (0..n).map(|i| nu[i].conj() * minv[(i, k)]).sum()).collect()
        })
        .collect();
    let gs: Vec<Complex64> = nodes.iter().map(|z| Complex64::new(1.0, 0.0) / (wj - z)).collect();
    let rows = par::map_range(nodes.len(), |a| {
        let za = &phis[a];
        let la = &left[a];
        let mut acc = Complex64::new(0.0, 0.0);
        for bidx in 0..nodes.len() {
            let zb = &phis[bidx];
            let mut l: Complex64 = za.iter().zip(zb).map(|(p, q)| p * q.conj()).sum();
            l -= la.iter().zip(&nus[bidx]).map(|(p, q)| p * q).sum::<Complex64>();
            acc += l.norm_sqr() * gs[bidx].conj() * grids.double.weights[bidx];
        }
        acc * gs[a] * grids.double.weights[a]
    });
    let idouble: Complex64 = rows.iter().sum();

    let a = perp_im(ia);
    Ok(EmergentField {
        a: [ratio * a[0], ratio * a[1]],
        v: 2.0 * ratio * (iv - ratio * idouble.re),
        j,
        method: Method::Integral,
    })
}

/// Im((1, i)ᵀ c) = (Im c, Re c).
fn perp_im(c: Complex64) -> [f64; 2] {
    [c.im, c.re]
}

/// a(y) = y^⊥ / (e^{|y|²} - 1).
pub fn correction_a(y: Vec2) -> Result<Vec2> {
    let t = y[0] * y[0] + y[1] * y[1];
    if t == 0.0 {
        return Err(Error::Domain("a(y) is singular at y = 0".into()));
    }
    let f = if t > 1.0 {
        let u = (-t).exp();
        u / (1.0 - u)
    } else {
        1.0 / t.exp_m1()
    };
    Ok([-y[1] * f, y[0] * f])
}

/// v(y) = 2(1 - (1 - |y|²) e^{|y|²}) / (e^{|y|²} - 1)², with v(0) = 1.
pub fn correction_v(y: Vec2) -> f64 {
    let t = y[0] * y[0] + y[1] * y[1];
    if t < 1e-4 {
        return 1.0 - t / 3.0 + t * t * t / 90.0;
    }
    if t > 1.0 {
        // multiply through by e^{-2t}
        let u = (-t).exp();
        return 2.0 * u * (t - 1.0 + u) / ((1.0 - u) * (1.0 - u));
    }
    // numerator written as t·(e^t - 1) - (e^t - 1 - t)
    let e = t.exp_m1();
    let mut h = 0.0;
    let mut term = t;
    for k in 2..40 {
        term *= t / k as f64;
        h += term;
        if term < 1e-17 * h {
            break;
        }
    }
    2.0 * (t * e - h) / (e * e)
}

/// Refined fields
/// 𝐕_j = 2N - Σ_{ℓ≠j} N v(√N (y_ℓ - y_j)),
/// 𝐀_j = N y_j^⊥ - Σ_{ℓ≠j} [(y_j - y_ℓ)^⊥/|y_j - y_ℓ|² - √N a(√N (y_j - y_ℓ))],
/// with N read as the field strength b.
pub fn refined_fields(cfg: &HoleConfig, j: usize) -> Result<EmergentField> {
    check_index(cfg, j)?;
    let n = cfg.b;
    let sn = n.sqrt();
    let ab = ab_sum(&cfg.w, j)?;
    let mut a = vec2(perp(cfg.w[j]) * n);
    a[0] -= ab[0];
    a[1] -= ab[1];
    let mut v = 2.0 * n;
    for (l, wl) in cfg.w.iter().enumerate() {
        if l == j {
            continue;
        }
        let d = (cfg.w[j] - wl) * sn;
        let c = correction_a([d.re, d.im])?;
        a[0] += sn * c[0];
        a[1] += sn * c[1];
        v -= n * correction_v([d.re, d.im]);
    }
    Ok(EmergentField { a, v, j, method: Method::Refined })
}

/// Leading-order fields: (N y_j^⊥ - AB, 2N) without merging; for a merging
/// pair the pair members gain √N a(√N (y_j - y_partner)) in A and their V
/// becomes N(2 - v(√N s)).
pub fn asymptotic_prediction(cfg: &HoleConfig, j: usize, regime: &Regime) -> Result<EmergentField> {
    check_index(cfg, j)?;
    let n = cfg.b;
    let ab = ab_sum(&cfg.w, j)?;
    let base = perp(cfg.w[j]) * n;
    let mut a = [base.re - ab[0], base.im - ab[1]];
    let mut v = 2.0 * n;
    match regime {
        Regime::NoMerging => {}
        Regime::SingleMerging(p, q) => {
            let partner = if j == *p {
                Some(*q)
            } else if j == *q {
                Some(*p)
            } else {
                None
            };
            if let Some(l) = partner {
                let sn = n.sqrt();
                let d = (cfg.w[j] - cfg.w[l]) * sn;
                let c = correction_a([d.re, d.im])?;
                a[0] += sn * c[0];
                a[1] += sn * c[1];
                v = n * (2.0 - correction_v([d.re, d.im]));
            }
        }
        other => return Err(Error::Usage(format!("no field prediction in regime {other}"))),
    }
    Ok(EmergentField { a, v, j, method: Method::Prediction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{finite_diff_gradient, integrate2d_real};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn centred_single_hole() {
        for n in [1, 4, 32] {
            let f = emergent_field_derivative(&HoleConfig::new(vec![c(0.0, 0.0)], n), 0).unwrap();
            assert!(f.a[0].abs() < 1e-12 && f.a[1].abs() < 1e-12);
            assert!((f.v - 2.0 * n as f64).abs() < 1e-10 * n as f64);
        }
    }

    #[test]
    fn gradient_matches_finite_differences_of_log_upsilon() {
        // Im((1,i)ᵀ ∂ ln Υ) = ∇^⊥ ln Υ / 2
        let cfg = HoleConfig::new(vec![c(0.15, -0.1), c(-0.2, 0.2), c(0.3, 0.25)], 8);
        let f = emergent_field_derivative(&cfg, 0).unwrap();
        let g = finite_diff_gradient(
            |p: &[f64]| {
                let mut w = cfg.w.clone();
                w[0] = c(p[0], p[1]);
                crate::partition::log_upsilon(&HoleConfig::new(w, 8))
            },
            &[cfg.w[0].re, cfg.w[0].im],
            1e-6,
        );
        let ab = ab_sum(&cfg.w, 0).unwrap();
        let expect = [-8.0 * cfg.w[0].im - ab[0] - 0.5 * g[1], 8.0 * cfg.w[0].re - ab[1] + 0.5 * g[0]];
        assert!((f.a[0] - expect[0]).abs() < 1e-6 && (f.a[1] - expect[1]).abs() < 1e-6);
    }

    #[test]
    fn laplacian_outside_the_droplet() {
        // the hole at |w| ≈ 1.6 has a tiny diagonal entry; V = 2b + Δ ln Υ / 2
        let w = vec![c(0.47, 0.76), c(1.03, 1.28), c(0.17, 0.17), c(0.76, -0.17)];
        let log_u = |y: Complex64| {
            let mut v = w.clone();
            v[1] = y;
            crate::partition::log_upsilon(&HoleConfig::new(v, 64))
        };
        let h = 1e-3;
        let y = w[1];
        let lap = (log_u(y + h) + log_u(y - h) + log_u(y + c(0.0, h)) + log_u(y - c(0.0, h)) - 4.0 * log_u(y)) / (h * h);
        let f = emergent_field_derivative(&HoleConfig::new(w.clone(), 64), 1).unwrap();
        assert!((f.v - (128.0 + 0.5 * lap)).abs() < 1e-3 * 128.0, "{} vs {}", f.v, 128.0 + 0.5 * lap);
    }

    #[test]
    fn prediction_arithmetic() {
        let cfg = HoleConfig::new(vec![c(0.3, 0.0), c(-0.3, 0.0)], 100);
        let p = asymptotic_prediction(&cfg, 0, &Regime::NoMerging).unwrap();
        assert!(p.a[0].abs() < 1e-12);
        assert!((p.a[1] - (30.0 - 0.6 / 0.36)).abs() < 1e-12);
        assert_eq!(p.v, 200.0);
    }

    #[test]
    fn spectator_keeps_bulk_value() {
        let cfg = HoleConfig::new(vec![c(0.0, 0.0), c(0.05, 0.0), c(-0.5, 0.2)], 256);
        let p = asymptotic_prediction(&cfg, 2, &Regime::SingleMerging(0, 1)).unwrap();
        assert_eq!(p.v, 512.0);
    }

    #[test]
    fn merging_prediction_tends_to_no_merging() {
        let n: f64 = 256.0;
        let far = 8.0 / n.sqrt();
        let cfg = HoleConfig::new(vec![c(0.0, 0.0), c(far, 0.0)], 256);
        let m = asymptotic_prediction(&cfg, 1, &Regime::SingleMerging(0, 1)).unwrap();
        let f = asymptotic_prediction(&cfg, 1, &Regime::NoMerging).unwrap();
        assert!((m.v - f.v).abs() < 1e-20 * n * 1e6);
        assert!((m.a[1] - f.a[1]).abs() < 1e-20);
    }

    #[test]
    fn correction_values() {
        let a = correction_a([3.0, 0.0]).unwrap();
        assert_eq!(a[0], 0.0);
        assert!((a[1] - 3.0 / (9f64.exp() - 1.0)).abs() < 1e-18);
        assert!((a[1] - 3.70275107838555e-4).abs() < 1e-17);
        assert!(correction_a([0.0, 0.0]).is_err());
        assert_eq!(correction_v([0.0, 0.0]), 1.0);
        let e1 = std::f64::consts::E - 1.0;
        assert!((correction_v([1.0, 0.0]) - 2.0 / (e1 * e1)).abs() < 1e-15);
    }

    #[test]
    fn correction_v_matches_high_precision_values() {
        // (|y|, v) from a 40-digit evaluation, covering every branch
        let table = [
            (0.001, 0.99999966666666666668),
            (0.05, 0.99916666684027773903),
            (0.0999, 0.99667334104457160169),
            (0.1001, 0.99666000784457125248),
            (0.5, 0.91683989105872977502),
            (0.99, 0.68341316156660289231),
            (1.0, 0.67739377467693178912),
            (1.01, 0.67133771345958494247),
            (2.0, 0.11472893894859410263),
            (5.0, 6.6662130553717473705e-10),
        ];
        for (r, v) in table {
            let got = correction_v([0.0, r]);
            assert!((got - v).abs() < 2e-15 * v, "|y|={r}: {got} vs {v}");
        }
        assert!(correction_v([27.0, 0.0]) < 1e-300);
    }

    #[test]
    fn correction_v_total_mass() {
        // ∫ v dy/π = ∫_0^∞ v(√t) dt, which is 2: v = -Δ ln(1 - e^{-|y|²})/2
        // and ln(1 - e^{-r²}) ~ 2 ln r carries flux 4π at the origin
        let (x, w) = crate::numeric::quadrature::composite_gl(0.0, 80.0, 80, 12);
        let s: f64 = x.iter().zip(&w).map(|(t, w)| w * correction_v([t.sqrt(), 0.0])).sum();
        assert!((s - 2.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn correction_a_close_to_vortex() {
        // sup_r r (1/r² - 1/(e^{r²} - 1)) ≈ 0.4910683 at r ≈ 1.5751614
        let r = 1.57516144690888355;
        let a = correction_a([r, 0.0]).unwrap();
        assert!(((1.0 / r - a[1]) - 0.49106833984169204).abs() < 1e-15);
    }

    #[test]
    fn refined_trivial_cases() {
        let cfg = HoleConfig::new(vec![c(0.2, -0.1)], 64);
        let f = refined_fields(&cfg, 0).unwrap();
        assert_eq!(f.v, 128.0);
        assert!((f.a[0] - 6.4).abs() < 1e-14 && (f.a[1] - 12.8).abs() < 1e-14);
        let s = 1.0 / 16.0;
        let cfg = HoleConfig::new(vec![c(0.0, 0.0), c(s, 0.0)], 256);
        let f = refined_fields(&cfg, 0).unwrap();
        let e1 = std::f64::consts::E - 1.0;
        assert!((f.v - 256.0 * (2.0 - 2.0 / (e1 * e1))).abs() < 1e-10);
    }

    #[test]
    fn circulation_counts_enclosed_fluxes() {
        let src = [c(0.1, 0.0), c(-0.2, 0.1), c(1.5, 1.5)];
        let k = ab_circulation(&src, c(0.0, 0.0), 0.8, 2048);
        assert!((k - 4.0 * PI).abs() < 1e-8, "{k}");
    }

    #[test]
    fn integral_route_single_hole_at_origin() {
        let cfg = HoleConfig::new(vec![c(0.0, 0.0)], 6);
        let grids = IntegralGrids::for_tracer(&cfg, 0);
        let f = emergent_field_integral(&cfg, 0, &grids).unwrap();
        assert!(f.a[0].abs() < 1e-9 && f.a[1].abs() < 1e-9);
        let d = emergent_field_derivative(&cfg, 0).unwrap();
        assert!((f.v - d.v).abs() < 1e-6 * 6.0, "{} vs {}", f.v, d.v);
    }

    #[test]
    fn integral_route_matches_derivative_route() {
        let cfg = HoleConfig::new(vec![c(0.3, 0.1), c(-0.25, -0.2)], 6);
        let grids = IntegralGrids::for_tracer(&cfg, 0);
        let f = emergent_field_integral(&cfg, 0, &grids).unwrap();
        let d = emergent_field_derivative(&cfg, 0).unwrap();
        assert!((f.a[0] - d.a[0]).abs() < 1e-7 && (f.a[1] - d.a[1]).abs() < 1e-7, "{:?} vs {:?}", f.a, d.a);
        assert!((f.v - d.v).abs() < 1e-5, "{} vs {}", f.v, d.v);
    }

    #[test]
    fn theta_mass_is_hole_count() {
        let cfg = HoleConfig::new(vec![c(0.3, 0.1), c(-0.25, -0.2)], 8);
        let cond = Conditional::new(&cfg).unwrap();
        let grid = QuadratureGrid::cartesian(c(0.0, 0.0), 1.0 + 8.0 / 8f64.sqrt(), 12, 10);
        let m = integrate2d_real(&grid, |z| cond.theta(z)).unwrap();
        assert!((m - 2.0).abs() / 2.0 < 1e-6, "{m}");
    }
}
