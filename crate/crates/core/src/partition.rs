//! Quasi-hole partition function c_qh(w)^{-2} and the remainder determinant
//! Υ(w) = det[(π/b) K_{N+n}(w_i, w_k)], with its derivatives and the
//! Schur-complement densities Θ.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_derivative, kernel_eval, kernel_tail, DerivOrder, KernelSpec, Which};
use crate::numeric::{ln_factorial, lu_factor, ComplexMatrix, LuFactor};
use crate::regime::Regime;

/// Hole positions w (also read as points y ∈ R²), bath size N and field b.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleConfig {
    pub w: Vec<Complex64>,
    pub n_bath: usize,
    pub b: f64,
}

impl HoleConfig {
    /// Configuration in the droplet scaling b = N.
    pub fn new(w: Vec<Complex64>, n_bath: usize) -> Self {
        HoleConfig { w, n_bath, b: n_bath as f64 }
    }

    pub fn with_b(w: Vec<Complex64>, n_bath: usize, b: f64) -> Self {
        HoleConfig { w, n_bath, b }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    /// Kernel K_{N+n} at this configuration's b.
    pub fn spec(&self) -> KernelSpec {
        KernelSpec { b: self.b, m: self.n_bath + self.n() }
    }

    /// Error on the first pair of exactly coincident points.
    pub fn check_distinct(&self) -> Result<()> {
        self.check_separated(0.0)
    }

    /// Error on the first pair closer than `min_sep`.
    pub fn check_separated(&self, min_sep: f64) -> Result<()> {
        for i in 0..self.n() {
            for k in i + 1..self.n() {
                if (self.w[i] - self.w[k]).norm() <= min_sep {
                    return Err(Error::Coincident(i, k));
                }
            }
        }
        Ok(())
    }
}

/// The four parts of ln c_qh^{-2}: ln Γ_N^n + b Σ|w_j|² - 2 ln|Δ(w)| + ln Υ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub log_value: f64,
    pub log_gamma: f64,
    pub gaussian: f64,
    pub vandermonde: f64,
    pub log_upsilon: f64,
}

/// (π/b) K(w_i, w_k) over the given points.
fn scaled_kernel_matrix(spec: &KernelSpec, pts: &[Complex64]) -> ComplexMatrix {
    let s = PI / spec.b;
    ComplexMatrix::from_fn(pts.len(), |i, k| {
        if i == k {
            // (π/b) K(w,w) = e^{-b|w|²} e_M(b|w|²), real by construction
            Complex64::new(s * kernel_eval(spec, pts[i], pts[i]).re(), 0.0)
        } else {
            s * kernel_eval(spec, pts[i], pts[k]).to_complex()
        }
    })
}

fn upsilon_of(spec: &KernelSpec, pts: &[Complex64]) -> f64 {
    if pts.is_empty() {
        return 1.0;
    }
    match lu_factor(&scaled_kernel_matrix(spec, pts)) {
        Ok(f) => f.det().re().max(0.0),
        Err(_) => 0.0,
    }
}

fn log_upsilon_of(spec: &KernelSpec, pts: &[Complex64]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    match lu_factor(&scaled_kernel_matrix(spec, pts)) {
        Ok(f) => {
            let d = f.det();
            if d.phase.cos() <= 0.0 {
                f64::NEG_INFINITY
            } else {
                d.log_mag
            }
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Υ_N(w) ∈ [0, 1]; zero when two points coincide.
pub fn upsilon(cfg: &HoleConfig) -> f64 {
    upsilon_of(&cfg.spec(), &cfg.w)
}

/// ln Υ_N(w); -∞ when the matrix is numerically singular.
pub fn log_upsilon(cfg: &HoleConfig) -> f64 {
    log_upsilon_of(&cfg.spec(), &cfg.w)
}

/// Υ with extra points appended, using the same kernel K_{N+n}:
/// Υ(w, z) = det[(π/b) K_{N+n}] over w ∪ z.
pub fn upsilon_extended(cfg: &HoleConfig, extra: &[Complex64]) -> f64 {
    let pts: Vec<Complex64> = cfg.w.iter().chain(extra).copied().collect();
    upsilon_of(&cfg.spec(), &pts)
}

/// One Wirtinger derivative with respect to a hole position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HoleDeriv {
    pub hole: usize,
    /// ∂_{w_j} if true, ∂_{w̄_j} otherwise.
    pub holomorphic: bool,
}

/// Entry-wise derivative of the scaled kernel matrix under the given hole
/// derivatives. Entry (i, k) depends on w_i through the z slot of
/// K(z, w) and on w_k through the w slot.
fn matrix_derivative(cfg: &HoleConfig, ops: &[HoleDeriv]) -> Result<ComplexMatrix> {
    let spec = cfg.spec();
    let n = cfg.n();
    let s = PI / spec.b;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            // enumerate slot assignments; an op acts on entry (i,k) only through
            // the slots whose point is its hole
            let mut orders: Vec<[u8; 4]> = vec![[0; 4]];
            for op in ops {
                let mut next = Vec::new();
                for a in &orders {
                    if op.hole == i {
                        let mut b = *a;
                        b[if op.holomorphic { 1 } else { 0 }] += 1;
                        next.push(b);
                    }
                    if op.hole == k {
                        let mut b = *a;
                        b[if op.holomorphic { 3 } else { 2 }] += 1;
                        next.push(b);
                    }
                }
                orders = next;
            }
            if orders.is_empty() {
                continue;
            }
            let mut v = Complex64::new(0.0, 0.0);
            // K_∞(w, w) = b/π is constant, so inside the droplet the diagonal
            // derivative is minus that of the omitted tail, summed without
            // cancellation; outside, the truncated part is the small one
            let via_tail = i == k
                && !ops.is_empty()
                && kernel_tail(&spec, cfg.w[i], cfg.w[i], DerivOrder::ZERO)?.log_mag
                    < kernel_eval(&spec, cfg.w[i], cfg.w[i]).log_mag;
            if via_tail {
                for a in &orders {
                    v -= kernel_tail(&spec, cfg.w[i], cfg.w[k], DerivOrder(*a))?.to_complex();
                }
            } else {
                for a in &orders {
                    v += kernel_derivative(&spec, cfg.w[i], cfg.w[k], DerivOrder(*a), Which::Truncated)?;
                }
            }
            out[(i, k)] = s * v;
        }
    }
    Ok(out)
}

fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.dim();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

/// Factorization of the scaled kernel matrix, rejecting coincident points.
fn factor(cfg: &HoleConfig) -> Result<LuFactor> {
    cfg.check_distinct()?;
    lu_factor(&scaled_kernel_matrix(&cfg.spec(), &cfg.w)).map_err(|_| Error::Degenerate(upsilon(cfg)))
}

/// Derivatives of ln Υ by Jacobi's formula for up to two hole derivatives:
/// D ln det M = tr(M⁻¹ DM),
/// D₁D₂ ln det M = tr(M⁻¹ D₁D₂M) - tr(M⁻¹ D₁M M⁻¹ D₂M).
pub fn log_upsilon_derivative(cfg: &HoleConfig, ops: &[HoleDeriv]) -> Result<Complex64> {
    if ops.len() > 2 {
        return Err(Error::Usage("at most two hole derivatives are supported".into()));
    }
    if let Some(op) = ops.iter().find(|o| o.hole >= cfg.n()) {
        return Err(Error::Usage(format!("hole index {} out of range", op.hole)));
    }
    let lu = factor(cfg)?;
    let inv = lu.inverse();
    Ok(match ops {
        [] => Complex64::new(log_upsilon(cfg), 0.0),
        [d] => trace_product(&inv, &matrix_derivative(cfg, &[*d])?),
        [d1, d2] => {
            let m12 = matrix_derivative(cfg, &[*d1, *d2])?;
            let a = inv.mul(&matrix_derivative(cfg, &[*d1])?);
            let b = inv.mul(&matrix_derivative(cfg, &[*d2])?);
            trace_product(&inv, &m12) - trace_product(&a, &b)
        }
        _ => unreachable!(),
    })
}

/// ∂_w^α ∂_w̄^β Υ for per-hole orders with |α| + |β| ≤ 2, via Jacobi's
/// formula applied to Υ = det M.
pub fn upsilon_derivative(cfg: &HoleConfig, alpha: &[u8], beta: &[u8]) -> Result<Complex64> {
    if alpha.len() != cfg.n() || beta.len() != cfg.n() {
        return Err(Error::Usage("derivative orders must have one entry per hole".into()));
    }
    let mut ops = Vec::new();
    for (j, (&a, &b)) in alpha.iter().zip(beta).enumerate() {
        ops.extend(std::iter::repeat(HoleDeriv { hole: j, holomorphic: true }).take(a as usize));
        ops.extend(std::iter::repeat(HoleDeriv { hole: j, holomorphic: false }).take(b as usize));
    }
    if ops.len() > 2 {
        return Err(Error::Usage(format!("total derivative order {} exceeds 2", ops.len())));
    }
    if ops.is_empty() {
        return Ok(Complex64::new(upsilon(cfg), 0.0));
    }
    let lu = factor(cfg)?;
    let ups = lu.det().re();
    let inv = lu.inverse();
    let t1 = trace_product(&inv, &matrix_derivative(cfg, &ops[..1])?);
    if ops.len() == 1 {
        return Ok(ups * t1);
    }
    let t2 = trace_product(&inv, &matrix_derivative(cfg, &ops[1..])?);
    let m12 = matrix_derivative(cfg, &ops)?;
    let a = inv.mul(&matrix_derivative(cfg, &ops[..1])?);
    let b = inv.mul(&matrix_derivative(cfg, &ops[1..])?);
    Ok(ups * (trace_product(&inv, &m12) + t1 * t2 - trace_product(&a, &b)))
}

/// ln Γ_N^n = ln N! + N ln π + Σ_{k=1}^{N+n-1} ln k! + (n - (N+n)(N+n+1)/2) ln b.
pub fn log_gamma_prefactor(n_bath: usize, n: usize, b: f64) -> f64 {
    let m = n_bath + n;
    let sum: f64 = (1..m).map(ln_factorial).sum();
    let expo = n as f64 - (m * (m + 1)) as f64 / 2.0;
    ln_factorial(n_bath) + n_bath as f64 * PI.ln() + sum + expo * b.ln()
}

/// ln |Δ(w)| = Σ_{i<j} ln|w_j - w_i|.
pub fn log_vandermonde(w: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            s += (w[j] - w[i]).norm().ln();
        }
    }
    s
}

/// ln c_qh(w)^{-2} = ln Γ_N^n + b Σ|w_j|² - 2 ln|Δ(w)| + ln Υ_N(w).
pub fn log_partition(cfg: &HoleConfig) -> Result<PartitionValue> {
    cfg.check_distinct()?;
    let log_gamma = log_gamma_prefactor(cfg.n_bath, cfg.n(), cfg.b);
    let gaussian = cfg.b * cfg.w.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let vandermonde = -2.0 * log_vandermonde(&cfg.w);
    let log_upsilon = log_upsilon(cfg);
    if log_upsilon == f64::NEG_INFINITY {
        return Err(Error::Degenerate(0.0));
    }
    Ok(PartitionValue {
        log_value: log_gamma + gaussian + vandermonde + log_upsilon,
        log_gamma,
        gaussian,
        vandermonde,
        log_upsilon,
    })
}

/// Conditional kernel after conditioning on holes at w:
/// L(z, ζ) = K(z, ζ) - Σ_{ik} K(z, w_i) (M⁻¹)_{ik} K(w_k, ζ), with the
/// unscaled matrix M = [K(w_i, w_k)].
pub struct Conditional {
    spec: KernelSpec,
    w: Vec<Complex64>,
    inv: ComplexMatrix,
}

impl Conditional {
    pub fn new(cfg: &HoleConfig) -> Result<Self> {
        if cfg.n() == 0 {
            return Err(Error::Usage("conditioning needs at least one hole".into()));
        }
        let lu = factor(cfg)?;
        // factor() works with (π/b)K; rescale the inverse to the bare kernel
        let mut inv = lu.inverse();
        let s = PI / cfg.b;
        for i in 0..cfg.n() {
            for k in 0..cfg.n() {
                inv[(i, k)] *= s;
            }
        }
        Ok(Conditional { spec: cfg.spec(), w: cfg.w.clone(), inv })
    }

    /// Inverse of the bare kernel matrix [K(w_i, w_k)].
    pub fn inverse(&self) -> &ComplexMatrix {
        &self.inv
    }

    fn nu(&self, z: Complex64) -> Vec<Complex64> {
        // ν_i(z) = K(w_i, z)
        self.w.iter().map(|wi| kernel_eval(&self.spec, *wi, z).to_complex()).collect()
    }

    /// Θ(ζ, z | w) = ν(z)* M⁻¹ ν(ζ).
    pub fn theta_polarized(&self, zeta: Complex64, z: Complex64) -> Complex64 {
        let nz = self.nu(z);
        let nzeta = self.nu(zeta);
        self.quad(&nz, &nzeta)
    }

    fn quad(&self, left: &[Complex64], right: &[Complex64]) -> Complex64 {
        let n = self.w.len();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                s += left[i].conj() * self.inv[(i, k)] * right[k];
            }
        }
        s
    }

    /// Θ(z | w) = ν(z)* M⁻¹ ν(z), real and in [0, K(z,z)].
    pub fn theta(&self, z: Complex64) -> f64 {
        let nz = self.nu(z);
        self.quad(&nz, &nz).re
    }

    /// L(z, ζ) = K(z, ζ) - Θ(ζ, z | w).
    pub fn kernel(&self, z: Complex64, zeta: Complex64) -> Complex64 {
        kernel_eval(&self.spec, z, zeta).to_complex() - self.theta_polarized(zeta, z)
    }

    /// L(z, z) = K(z, z) - Θ(z | w) ≥ 0.
    pub fn density(&self, z: Complex64) -> f64 {
        kernel_eval(&self.spec, z, z).re() - self.theta(z)
    }

    /// Values of L(z, ·) and L(·, ·) along a list of points, reusing ν.
    pub fn nu_table(&self, pts: &[Complex64]) -> Vec<Vec<Complex64>> {
        pts.iter().map(|p| self.nu(*p)).collect()
    }

    /// L(z, ζ) from precomputed ν(z), ν(ζ).
    pub fn kernel_from(&self, z: Complex64, zeta: Complex64, nz: &[Complex64], nzeta: &[Complex64]) -> Complex64 {
        kernel_eval(&self.spec, z, zeta).to_complex() - self.quad(nz, nzeta)
    }
}

pub fn theta(cfg: &HoleConfig, z: Complex64) -> Result<f64> {
    Ok(Conditional::new(cfg)?.theta(z))
}

pub fn theta_polarized(cfg: &HoleConfig, zeta: Complex64, z: Complex64) -> Result<Complex64> {
    Ok(Conditional::new(cfg)?.theta_polarized(zeta, z))
}

/// Leading-order Υ: 1 without merging, 1 - e^{-b s²} for a merging pair at
/// separation s.
pub fn upsilon_prediction(cfg: &HoleConfig, regime: &Regime) -> Result<f64> {
    match regime {
        Regime::NoMerging => Ok(1.0),
        Regime::SingleMerging(i, k) => {
            let s2 = (cfg.w[*i] - cfg.w[*k]).norm_sqr();
            Ok(-(-cfg.b * s2).exp_m1())
        }
        other => Err(Error::Usage(format!("no Υ prediction in regime {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::finite_diff_gradient;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_cfg(rng: &mut ChaCha8Rng, n: usize, n_bath: usize, r: f64) -> HoleConfig {
        let w = (0..n).map(|_| Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))).collect();
        HoleConfig::new(w, n_bath)
    }

    #[test]
    fn single_hole_at_origin() {
        for n in [1, 5, 64] {
            let u = upsilon(&HoleConfig::new(vec![c(0.0, 0.0)], n));
            assert!((u - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn repeated_points_vanish() {
        let cfg = HoleConfig::new(vec![c(0.2, 0.1), c(-0.3, 0.0), c(0.2, 0.1)], 8);
        assert_eq!(upsilon(&cfg), 0.0);
        assert_eq!(log_partition(&cfg).unwrap_err(), Error::Coincident(0, 2));
        assert!(matches!(upsilon_derivative(&cfg, &[1, 0, 0], &[0, 0, 0]), Err(Error::Coincident(0, 2))));
    }

    #[test]
    fn bounded_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let cfg = random_cfg(&mut rng, 3, 12, 1.3);
            let u = upsilon(&cfg);
            assert!((0.0..=1.0 + 1e-14).contains(&u));
        }
    }

    #[test]
    fn closed_form_single_bath_particle() {
        // N = 1, n = 1: c^{-2} = ∫|w-z|² e^{-b|z|²} dz = (π/b)(|w|² + 1/b)
        for (b, w) in [(1.0, 1.0), (2.0, 0.5)] {
            let cfg = HoleConfig::with_b(vec![c(w, 0.0)], 1, b);
            let v = log_partition(&cfg).unwrap();
            let exact = (PI / b) * (w * w + 1.0 / b);
            assert!((v.log_value.exp() - exact).abs() < 1e-13 * exact);
            let sum = v.log_gamma + v.gaussian + v.vandermonde + v.log_upsilon;
            assert!((sum - v.log_value).abs() < 1e-12);
        }
        let v = log_partition(&HoleConfig::with_b(vec![c(1.0, 0.0)], 1, 1.0)).unwrap();
        assert!((v.log_value.exp() - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn no_hole_normalization() {
        let v = log_partition(&HoleConfig::with_b(vec![], 2, 2.0)).unwrap();
        assert!((v.log_value.exp() - PI * PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn gamma_ratios() {
        // Γ_{N-1}^{n+1}/Γ_N^n = b/(Nπ) and Γ_{N-2}^{n+2}/Γ_N^n = b²/(N(N-1)π²)
        let (n_bath, n, b) = (9usize, 2usize, 3.7);
        let g = log_gamma_prefactor(n_bath, n, b);
        let r1 = log_gamma_prefactor(n_bath - 1, n + 1, b) - g;
        let r2 = log_gamma_prefactor(n_bath - 2, n + 2, b) - g;
        let nb = n_bath as f64;
        assert!((r1 - (b / (nb * PI)).ln()).abs() < 1e-12);
        assert!((r2 - (b * b / (nb * (nb - 1.0) * PI * PI)).ln()).abs() < 1e-12);
    }

    #[test]
    fn first_derivative_matches_finite_differences() {
        let cfg = HoleConfig::new(vec![c(0.21, -0.13), c(-0.05, 0.3)], 16);
        let f = |p: &[f64]| {
            let mut w = cfg.w.clone();
            w[0] = c(p[0], p[1]);
            upsilon(&HoleConfig::new(w, 16))
        };
        let g = finite_diff_gradient(f, &[cfg.w[0].re, cfg.w[0].im], 1e-6);
        let d = upsilon_derivative(&cfg, &[1, 0], &[0, 0]).unwrap();
        let fd = c(0.5 * g[0], -0.5 * g[1]);
        assert!((d - fd).norm() / d.norm() < 1e-6, "{d} vs {fd}");
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let cfg = HoleConfig::new(vec![c(0.21, -0.13), c(-0.05, 0.3)], 16);
        // ∂_{w̄_1} ∂_{w_1} Υ = Δ_{w_1} Υ / 4, and the mixed ∂_{w_1} ∂_{w_2} Υ
        let lap = crate::numeric::finite_diff_second(
            |p: &[f64]| upsilon(&HoleConfig::new(vec![c(p[0], p[1]), cfg.w[1]], 16)),
            &[cfg.w[0].re, cfg.w[0].im],
            0,
            0,
            1e-4,
        ) + crate::numeric::finite_diff_second(
            |p: &[f64]| upsilon(&HoleConfig::new(vec![c(p[0], p[1]), cfg.w[1]], 16)),
            &[cfg.w[0].re, cfg.w[0].im],
            1,
            1,
            1e-4,
        );
        let d = upsilon_derivative(&cfg, &[1, 0], &[1, 0]).unwrap();
        assert!((d.re - 0.25 * lap).abs() / d.norm() < 1e-5 && d.im.abs() < 1e-10 * d.norm());

        let f = |p: &[f64]| upsilon(&HoleConfig::new(vec![c(p[0], p[1]), c(p[2], p[3])], 16));
        let p = [cfg.w[0].re, cfg.w[0].im, cfg.w[1].re, cfg.w[1].im];
        let h = 1e-4;
        let fxx = crate::numeric::finite_diff_second(f, &p, 0, 2, h);
        let fxy = crate::numeric::finite_diff_second(f, &p, 0, 3, h);
        let fyx = crate::numeric::finite_diff_second(f, &p, 1, 2, h);
        let fyy = crate::numeric::finite_diff_second(f, &p, 1, 3, h);
        // ∂_{w_1}∂_{w_2} = (∂x1 - i∂y1)(∂x2 - i∂y2)/4
        let fd = 0.25 * c(fxx - fyy, -(fxy + fyx));
        let d = upsilon_derivative(&cfg, &[1, 1], &[0, 0]).unwrap();
        assert!((d - fd).norm() / d.norm() < 1e-5, "{d} vs {fd}");
    }

    #[test]
    fn log_derivative_matches_upsilon_derivative() {
        let cfg = HoleConfig::new(vec![c(0.1, 0.2), c(-0.2, -0.1), c(0.25, -0.2)], 8);
        let u = upsilon(&cfg);
        let d = upsilon_derivative(&cfg, &[0, 1, 0], &[0, 0, 0]).unwrap();
        let l = log_upsilon_derivative(&cfg, &[HoleDeriv { hole: 1, holomorphic: true }]).unwrap();
        assert!((d / u - l).norm() < 1e-12 * l.norm().max(1.0));
    }

    #[test]
    fn theta_at_hole_is_diagonal() {
        let cfg = HoleConfig::new(vec![c(0.3, 0.1), c(-0.2, 0.25)], 8);
        let t = theta(&cfg, cfg.w[0]).unwrap();
        let k = kernel_eval(&cfg.spec(), cfg.w[0], cfg.w[0]).re();
        assert!((t - k).abs() < 1e-12 * k);
    }

    #[test]
    fn schur_complement_reproduces_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let cfg = random_cfg(&mut rng, 2, 8, 0.9);
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let cond = Conditional::new(&cfg).unwrap();
            let lhs = upsilon_extended(&cfg, &[z]);
            let rhs = (PI / cfg.b) * upsilon(&cfg) * cond.density(z);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs() + 1e-15, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn polarized_cauchy_schwarz() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = random_cfg(&mut rng, 3, 10, 0.8);
        let cond = Conditional::new(&cfg).unwrap();
        for _ in 0..20 {
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let zeta = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let p = cond.theta_polarized(zeta, z).norm_sqr();
            assert!(p <= cond.theta(z) * cond.theta(zeta) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn predictions() {
        let cfg = HoleConfig::new(vec![c(0.0, 0.0), c(1.0 / 16.0, 0.0)], 256);
        let p = upsilon_prediction(&cfg, &Regime::SingleMerging(0, 1)).unwrap();
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(upsilon_prediction(&cfg, &Regime::NoMerging).unwrap(), 1.0);
        assert!(upsilon_prediction(&cfg, &Regime::Remainder).is_err());
    }
}
