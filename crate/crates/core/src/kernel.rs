//! Truncated correlation kernel K_M and Bergman kernel K_∞ of the lowest
//! Landau level with field strength b:
//!
//! K_M(z,w) = Σ_{j<M} b^{j+1}/(π j!) (z w̄)^j e^{-b(|z|²+|w|²)/2}.
//!
//! Sums are evaluated around their largest term so that nothing overflows;
//! truncated kernels switch to `K_∞ - tail` when the direct sum would lose
//! precision to cancellation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate2d, ln_factorial, ln_poisson, log_sum, LogComplex, QuadratureGrid};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub b: f64,
    /// Number of orbitals kept: K_M sums j = 0..M-1.
    pub m: usize,
}

impl KernelSpec {
    pub fn new(b: f64, m: usize) -> Result<Self> {
        if !(b > 0.0) || m == 0 {
            return Err(Error::Usage(format!("kernel needs b > 0 and M >= 1 (b = {b}, M = {m})")));
        }
        Ok(KernelSpec { b, m })
    }
}

/// Derivative orders in (z̄, z, w̄, w).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivOrder(pub [u8; 4]);

impl DerivOrder {
    pub const ZERO: DerivOrder = DerivOrder([0; 4]);
    pub const MAX_TOTAL: u32 = 4;

    pub fn new(zbar: u8, z: u8, wbar: u8, w: u8) -> Result<Self> {
        let d = DerivOrder([zbar, z, wbar, w]);
        d.check()?;
        Ok(d)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&a| a as u32).sum()
    }

    fn check(&self) -> Result<()> {
        if self.total() > Self::MAX_TOTAL {
            return Err(Error::Usage(format!("derivative order {:?} exceeds total 4", self.0)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Truncated,
    Infinite,
}

fn binom(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn falling(m: usize, k: u8) -> f64 {
    if (k as usize) > m {
        return 0.0;
    }
    (0..k as usize).fold(1.0, |acc, i| acc * (m - i) as f64)
}

fn cpow(z: Complex64, e: i32) -> Complex64 {
    if e == 0 {
        Complex64::new(1.0, 0.0)
    } else if z.re == 0.0 && z.im == 0.0 && e > 0 {
        Complex64::new(0.0, 0.0)
    } else {
        z.powi(e)
    }
}

/// Below this the scaled base term is dropped (peak term has modulus 1).
const NEGLIGIBLE: f64 = 1e-22;

/// e^{-|x|} Σ_{j ∈ [lo, hi)} (x^j/j!) P_j(z) Q_j(w) with x = b z w̄, where
/// P_j, Q_j are the polynomial factors produced by differentiating
/// z^j e^{-b|z|²/2} and w̄^j e^{-b|w|²/2}. Returns the sum and ln Σ|terms|.
fn term_sum(b: f64, z: Complex64, w: Complex64, a: [u8; 4], lo: usize, hi: Option<usize>) -> (LogComplex, f64) {
    let [a1, a2, a3, a4] = a;
    // ∂_z̄^{a1} then ∂_z^{a2}: Σ_k C(a2,k) (j+a1)_k z^{j+a1-k} (-b z̄/2)^{a2-k}
    let pz: Vec<(u8, Complex64)> = (0..=a2)
        .map(|k| (k, binom(a2, k) * cpow(z, a1 as i32 - k as i32) * cpow(-0.5 * b * z.conj(), (a2 - k) as i32)))
        .collect();
    let qw: Vec<(u8, Complex64)> = (0..=a3)
        .map(|k| (k, binom(a3, k) * cpow(w.conj(), a4 as i32 - k as i32) * cpow(-0.5 * b * w, (a3 - k) as i32)))
        .collect();
    let poly = |j: usize| -> Complex64 {
        let p: Complex64 = pz
            .iter()
            .filter(|(k, _)| falling(j + a1 as usize, *k) != 0.0)
            .map(|(k, c)| c * falling(j + a1 as usize, *k))
            .sum();
        if p.re == 0.0 && p.im == 0.0 {
            return p;
        }
        let q: Complex64 = qw
            .iter()
            .filter(|(k, _)| falling(j + a4 as usize, *k) != 0.0)
            .map(|(k, c)| c * falling(j + a4 as usize, *k))
            .sum();
        p * q
    };

    let ax = b * z.norm() * w.norm();
    let theta = z.arg() - w.arg();
    let x = Complex64::from_polar(ax, theta);
    if hi.is_some_and(|h| h <= lo) {
        return (LogComplex::ZERO, f64::NEG_INFINITY);
    }
    if ax == 0.0 {
        if lo > 0 {
            return (LogComplex::ZERO, f64::NEG_INFINITY);
        }
        let t = poly(0);
        return (LogComplex::from_complex(t), t.norm().ln());
    }
    if !ax.is_finite() {
        return (LogComplex::ZERO, f64::NEG_INFINITY);
    }

    let last = hi.map(|h| h - 1).unwrap_or(usize::MAX);
    let p = (ax.floor() as usize).clamp(lo, last);
    let log_peak = ln_poisson(p, ax);
    let s_p = Complex64::from_polar(1.0, p as f64 * theta);

    let mut acc = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let mut add = |s: Complex64, j: usize| {
        let t = s * poly(j);
        acc += t;
        mag += t.norm();
    };
    add(s_p, p);
    let mut s = s_p;
    let mut j = p;
    while j < last {
        s = s * x / (j + 1) as f64;
        j += 1;
        add(s, j);
        if j as f64 > ax && s.norm() < NEGLIGIBLE {
            break;
        }
    }
    let mut s = s_p;
    let mut j = p;
    while j > lo {
        s = s * j as f64 / x;
        j -= 1;
        add(s, j);
        if (j as f64) < ax && s.norm() < NEGLIGIBLE {
            break;
        }
    }
    (LogComplex::from_complex(acc).scale_log(log_peak), mag.ln() + log_peak)
}

/// (b/π) e^{-b(|z|²+|w|²)/2 + b|z||w|} (-b/2)^{a1+a4} as a LogComplex.
fn prefactor(b: f64, z: Complex64, w: Complex64, a: [u8; 4]) -> LogComplex {
    let e = (a[0] + a[3]) as f64;
    let d = z.norm() - w.norm();
    LogComplex::new((b / PI).ln() - 0.5 * b * d * d + e * (0.5 * b).ln(), e * PI)
}

fn series(b: f64, z: Complex64, w: Complex64, a: [u8; 4], lo: usize, hi: Option<usize>) -> (LogComplex, f64) {
    let (s, mag) = term_sum(b, z, w, a, lo, hi);
    let pre = prefactor(b, z, w, a);
    (s * pre, mag + pre.log_mag)
}

/// ∂^α K_∞ in closed form: K_∞ = (b/π) e^E with E = -(b/2)(z z̄ + w w̄) + b z w̄,
/// each derivative acting as D(P e^E) = (DP + P·DE) e^E. Returns the value
/// and ln of the sum of monomial magnitudes (for error estimates).
fn infinite_derivative(b: f64, z: Complex64, w: Complex64, a: [u8; 4]) -> (LogComplex, f64) {
    type Poly = Vec<([u8; 4], Complex64)>;
    let c = |v: f64| Complex64::new(v, 0.0);
    // DE for the variables (z̄, z, w̄, w)
    let de: [Poly; 4] = [
        vec![([0, 1, 0, 0], c(-0.5 * b))],
        vec![([1, 0, 0, 0], c(-0.5 * b)), ([0, 0, 1, 0], c(b))],
        vec![([0, 0, 0, 1], c(-0.5 * b)), ([0, 1, 0, 0], c(b))],
        vec![([0, 0, 1, 0], c(-0.5 * b))],
    ];
    let mut poly: Poly = vec![([0; 4], c(1.0))];
    for (v, &count) in a.iter().enumerate() {
        for _ in 0..count {
            let mut next: Poly = Vec::new();
            let mut push = |e: [u8; 4], k: Complex64| {
                if let Some(t) = next.iter_mut().find(|(f, _)| *f == e) {
                    t.1 += k;
                } else {
                    next.push((e, k));
                }
            };
            for (e, k) in &poly {
                if e[v] > 0 {
                    let mut d = *e;
                    d[v] -= 1;
                    push(d, k * e[v] as f64);
                }
                for (f, l) in &de[v] {
                    let g = [e[0] + f[0], e[1] + f[1], e[2] + f[2], e[3] + f[3]];
                    push(g, k * l);
                }
            }
            poly = next;
        }
    }
    let vars = [z.conj(), z, w.conj(), w];
    let mut val = c(0.0);
    let mut mag = 0.0;
    for (e, k) in &poly {
        let t = (0..4).fold(*k, |acc, i| acc * cpow(vars[i], e[i] as i32));
        val += t;
        mag += t.norm();
    }
    let base = kernel_infty_raw(b, z, w);
    (LogComplex::from_complex(val) * base, mag.ln() + base.log_mag)
}

fn kernel_infty_raw(b: f64, z: Complex64, w: Complex64) -> LogComplex {
    let zw = z * w.conj();
    LogComplex::new((b / PI).ln() - 0.5 * b * (z - w).norm_sqr(), b * zw.im)
}

/// K_∞(z,w) = (b/π) e^{-(b/2)(|z|²+|w|²-2 z w̄)}.
pub fn kernel_infty(spec: &KernelSpec, z: Complex64, w: Complex64) -> LogComplex {
    kernel_infty_raw(spec.b, z, w)
}

/// Below this estimated relative error the direct sum is accepted without
/// trying the `K_∞ - tail` route.
const ACCEPT_REL: f64 = 1e-13;

fn truncated(spec: &KernelSpec, z: Complex64, w: Complex64, a: [u8; 4]) -> LogComplex {
    let (head, head_mag) = series(spec.b, z, w, a, 0, Some(spec.m));
    let head_err = f64::EPSILON * head_mag.exp();
    if head_err <= ACCEPT_REL * head.abs() {
        return head;
    }
    let (tail, tail_mag) = series(spec.b, z, w, a, spec.m, None);
    let (inf, inf_mag) = infinite_derivative(spec.b, z, w, a);
    // compare in log form to stay safe from overflow
    let log_head_err = head_mag;
    let log_tail_err = crate::numeric::log_add_exp(tail_mag, inf_mag);
    if log_head_err <= log_tail_err {
        return head;
    }
    log_sum(&[inf, -tail]).expect("non-empty")
}

/// K_M(z, w) in log form.
pub fn kernel_eval(spec: &KernelSpec, z: Complex64, w: Complex64) -> LogComplex {
    truncated(spec, z, w, [0; 4])
}

/// ∂^α K_M or ∂^α K_∞ by term-wise differentiation, in log form.
pub fn kernel_derivative_log(
    spec: &KernelSpec,
    z: Complex64,
    w: Complex64,
    order: DerivOrder,
    which: Which,
) -> Result<LogComplex> {
    order.check()?;
    Ok(match which {
        Which::Truncated => truncated(spec, z, w, order.0),
        Which::Infinite => infinite_derivative(spec.b, z, w, order.0).0,
    })
}

/// ∂^α K_M or ∂^α K_∞ as an ordinary complex number.
pub fn kernel_derivative(
    spec: &KernelSpec,
    z: Complex64,
    w: Complex64,
    order: DerivOrder,
    which: Which,
) -> Result<Complex64> {
    kernel_derivative_log(spec, z, w, order, which).map(|v| v.to_complex())
}

/// ∂^α (K_∞ - K_M), summed directly over the omitted orbitals j ≥ M.
pub fn kernel_tail(spec: &KernelSpec, z: Complex64, w: Complex64, order: DerivOrder) -> Result<LogComplex> {
    order.check()?;
    Ok(series(spec.b, z, w, order.0, spec.m, None).0)
}

fn phi(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        x - x.ln() - 1.0
    }
}

/// ln of the bound (1/π)√(5N/(4π)) (1-|z w̄|)^{-1} e^{-N(φ(|z|²)+φ(|w|²))/2}
/// on |K_∞ - K_{N+n}| at b = N, with φ(x) = x - ln x - 1.
pub fn kernel_tail_log_bound(n_bath: usize, z: Complex64, w: Complex64) -> Result<f64> {
    let r = (z * w.conj()).norm();
    if r >= 1.0 {
        return Err(Error::Domain(format!("tail bound needs |z w̄| < 1, got {r}")));
    }
    let n = n_bath as f64;
    let expo = -0.5 * n * (phi(z.norm_sqr()) + phi(w.norm_sqr()));
    Ok(-PI.ln() + 0.5 * (5.0 * n / (4.0 * PI)).ln() - (1.0 - r).ln() + expo)
}

pub fn kernel_tail_bound(n_bath: usize, z: Complex64, w: Complex64) -> Result<f64> {
    kernel_tail_log_bound(n_bath, z, w).map(f64::exp)
}

/// Orbital φ_k(z) = b^{(k+1)/2} / √(π k!) z^k e^{-b|z|²/2}.
pub fn orbital(b: f64, k: usize, z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return if k == 0 { Complex64::new((b / PI).sqrt(), 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let lz = LogComplex::from_complex(z);
    let lm = 0.5 * (k as f64 + 1.0) * b.ln() - 0.5 * (PI.ln() + ln_factorial(k)) + k as f64 * lz.log_mag
        - 0.5 * b * z.norm_sqr();
    LogComplex::new(lm, k as f64 * lz.phase).to_complex()
}

/// |∫ K_M(z,x) K_M(x,w) dx - K_M(z,w)| / |K_M(z,w)|.
pub fn reproducing_residual(spec: &KernelSpec, z: Complex64, w: Complex64, grid: &QuadratureGrid) -> Result<f64> {
    let lhs = integrate2d(grid, |x| (kernel_eval(spec, z, x) * kernel_eval(spec, x, w)).to_complex())?;
    let rhs = kernel_eval(spec, z, w).to_complex();
    Ok((lhs - rhs).norm() / rhs.norm())
}

/// ∫ K_M(x,x) dx.
pub fn kernel_trace(spec: &KernelSpec, grid: &QuadratureGrid) -> Result<f64> {
    integrate2d(grid, |x| kernel_eval(spec, x, x).to_complex()).map(|c| c.re)
}

/// ∬ |K_M(x,y)|² dx dy on the product grid. Since K_M(x,y) = Σ_j φ_j(x) conj(φ_j(y)),
/// the double sum equals Σ_{j,k} |Σ_x w_x φ_j(x) conj(φ_k(x))|², which costs
/// O(nodes·M²) instead of O(nodes²·M).
pub fn kernel_hilbert_schmidt(spec: &KernelSpec, grid: &QuadratureGrid) -> Result<f64> {
    const CHUNK: usize = 256;
    let m = spec.m;
    let chunks: Vec<usize> = (0..grid.nodes.len()).step_by(CHUNK).collect();
    let partial = par::map(&chunks, |&start| {
        let mut gram = vec![Complex64::new(0.0, 0.0); m * m];
        let mut phi = vec![Complex64::new(0.0, 0.0); m];
        let end = (start + CHUNK).min(grid.nodes.len());
        for (x, w) in grid.nodes[start..end].iter().zip(&grid.weights[start..end]) {
            for (j, p) in phi.iter_mut().enumerate() {
                *p = orbital(spec.b, j, *x);
            }
            for j in 0..m {
                let a = phi[j] * w;
                for k in 0..m {
                    gram[j * m + k] += a * phi[k].conj();
                }
            }
        }
        gram
    });
    let mut gram = vec![Complex64::new(0.0, 0.0); m * m];
    for g in &partial {
        for (t, v) in gram.iter_mut().zip(g) {
            *t += v;
        }
    }
    let hs: f64 = gram.iter().map(|g| g.norm_sqr()).sum();
    if !hs.is_finite() {
        return Err(Error::Precision("non-finite Hilbert-Schmidt sum".into()));
    }
    Ok(hs)
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

    /// Direct sum with plain floats and its condition number Σ|t| / |Σt|.
    fn naive(b: f64, m: usize, z: Complex64, w: Complex64) -> (Complex64, f64) {
        let mut t = c(b / PI, 0.0);
        let mut s = c(0.0, 0.0);
        let mut a = 0.0;
        for j in 0..m {
            s += t;
            a += t.norm();
            t = t * b * z * w.conj() / (j + 1) as f64;
        }
        (s * (-0.5 * b * (z.norm_sqr() + w.norm_sqr())).exp(), a / s.norm())
    }

    #[test]
    fn origin_is_b_over_pi() {
        let spec = KernelSpec::new(7.0, 5).unwrap();
        let v = kernel_eval(&spec, c(0.0, 0.0), c(0.0, 0.0));
        assert!((v.to_complex() - c(7.0 / PI, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let b = rng.gen_range(0.5..20.0);
            let m = rng.gen_range(1..30);
            let z = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let w = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let (e, cond) = naive(b, m, z, w);
            if cond > 10.0 {
                continue;
            }
            let a = kernel_eval(&KernelSpec::new(b, m).unwrap(), z, w).to_complex();
            assert!((a - e).norm() <= 1e-12 * e.norm(), "{a} vs {e}");
        }
    }

    #[test]
    fn matches_high_precision_values() {
        // (b, M, z, w, ln|K|, arg K) from a 700-digit evaluation of the sum
        let table = [
            (1024.0, 1100, c(0.5, 0.1), c(-0.45, 0.2), -461.41325808024994708, 2.3164473723100754462),
            (16.0, 10, c(0.9, 0.0), c(-0.9, 0.0), -1.6240310276437424835, PI),
            (64.0, 70, c(0.3, 0.6), c(-0.5, -0.4), -23.286104386896104678, 1.8740624806541353103),
            (256.0, 256, c(1.3, 0.2), c(1.1, -0.3), -27.051156570872808277, -0.58942278355579880223),
            (100.0, 40, c(0.2, 0.7), c(-0.1, -0.6), -0.97343163538807639625, -1.3249608064781588434),
            (1024.0, 1030, c(0.99, 0.05), c(-0.2, 0.97), 0.69297213055587106622, -1.079043050791981104),
        ];
        for (b, m, z, w, lm, ph) in table {
            let k = kernel_eval(&KernelSpec::new(b, m).unwrap(), z, w);
            let rel = ((k / LogComplex::new(lm, ph)).to_complex() - 1.0).norm();
            assert!(rel < 1e-12, "b={b} M={m}: {rel:e}");
        }
    }

    #[test]
    fn infinite_modulus() {
        let spec = KernelSpec::new(16.0, 1).unwrap();
        let v = kernel_infty(&spec, c(0.3, 0.0), c(0.4, 0.0));
        assert!((v.abs() - 16.0 / PI * (-0.08f64).exp()).abs() < 1e-14 * v.abs());
        let v = kernel_infty(&KernelSpec::new(4.0, 1).unwrap(), c(0.5, 0.0), c(0.0, 0.0));
        assert!((v.log_mag - ((4.0 / PI).ln() - 0.5)).abs() < 1e-15 && v.phase == 0.0);
    }

    #[test]
    fn large_truncation_is_stable() {
        // inside the droplet K_M ≈ K_∞; far apart points need the tail route
        let spec = KernelSpec::new(1024.0, 1100);
        let spec = spec.unwrap();
        let z = c(0.5, 0.1);
        let w = c(-0.45, 0.2);
        let k = kernel_eval(&spec, z, w);
        let inf = kernel_infty(&spec, z, w);
        let tail = kernel_tail(&spec, z, w, DerivOrder::ZERO).unwrap();
        assert!(tail.log_mag < inf.log_mag - 30.0);
        assert!((k.log_mag - inf.log_mag).abs() < 1e-12);
    }

    #[test]
    fn derivative_zero_order_matches_eval() {
        let spec = KernelSpec::new(16.0, 18).unwrap();
        let (z, w) = (c(0.3, -0.2), c(0.1, 0.4));
        let d = kernel_derivative(&spec, z, w, DerivOrder::ZERO, Which::Truncated).unwrap();
        assert!((d - kernel_eval(&spec, z, w).to_complex()).norm() < 1e-13 * d.norm());
    }

    #[test]
    fn unsupported_order_rejected() {
        assert!(DerivOrder::new(2, 2, 1, 0).is_err());
        let spec = KernelSpec::new(1.0, 1).unwrap();
        let bad = DerivOrder([3, 2, 0, 0]);
        assert!(kernel_derivative(&spec, c(0.0, 0.0), c(0.0, 0.0), bad, Which::Infinite).is_err());
    }

    /// Wirtinger derivatives by finite differences over (Re z, Im z, Re w, Im w).
    fn fd_wirtinger(f: impl Fn(&[f64]) -> Complex64, p: &[f64; 4], h: f64) -> [Complex64; 4] {
        let g = finite_diff_gradient(f, p, h);
        let i = Complex64::i();
        [
            0.5 * (g[0] + i * g[1]),
            0.5 * (g[0] - i * g[1]),
            0.5 * (g[2] + i * g[3]),
            0.5 * (g[2] - i * g[3]),
        ]
    }

    #[test]
    fn diagonal_derivative_of_infinite_vanishes() {
        // d/dz K_∞(z, z) = (∂_z + ∂_w) K_∞ at z = w, and K_∞(z,z) = b/π
        let spec = KernelSpec::new(6.0, 1).unwrap();
        let z = c(0.4, -0.3);
        let dz = kernel_derivative(&spec, z, z, DerivOrder([0, 1, 0, 0]), Which::Infinite).unwrap();
        let dw = kernel_derivative(&spec, z, z, DerivOrder([0, 0, 0, 1]), Which::Infinite).unwrap();
        assert!((dz + dw).norm() < 1e-13);
        let f = |p: &[f64]| kernel_infty(&spec, c(p[0], p[1]), c(p[0], p[1])).to_complex();
        let g = finite_diff_gradient(f, &[z.re, z.im], 1e-5);
        assert!(g[0].norm() < 1e-7 && g[1].norm() < 1e-7);
    }

    #[test]
    fn first_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for which in [Which::Truncated, Which::Infinite] {
            for _ in 0..5 {
                let spec = KernelSpec::new(16.0, 16).unwrap();
                let z = c(rng.gen_range(-0.9..0.9), rng.gen_range(-0.6..0.6));
                let w = c(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
                let p = [z.re, z.im, w.re, w.im];
                let f = |q: &[f64]| {
                    let (z, w) = (c(q[0], q[1]), c(q[2], q[3]));
                    match which {
                        Which::Truncated => kernel_eval(&spec, z, w).to_complex(),
                        Which::Infinite => kernel_infty(&spec, z, w).to_complex(),
                    }
                };
                let fd = fd_wirtinger(f, &p, 1e-5);
                for v in 0..4 {
                    let mut a = [0u8; 4];
                    a[v] = 1;
                    let d = kernel_derivative(&spec, z, w, DerivOrder(a), which).unwrap();
                    let scale = d.norm().max(1e-3 * spec.b);
                    assert!((d - fd[v]).norm() / scale < 1e-6, "{which:?} v={v} {d} vs {}", fd[v]);
                }
            }
        }
    }

    #[test]
    fn mixed_second_derivative_matches_finite_differences() {
        // ∂_z ∂_w̄ K_M: difference the analytic ∂_w̄ along z
        let spec = KernelSpec::new(16.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let z = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let w = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let g = |q: &[f64]| {
                kernel_derivative(&spec, c(q[0], q[1]), w, DerivOrder([0, 0, 1, 0]), Which::Truncated).unwrap()
            };
            let fd = finite_diff_gradient(g, &[z.re, z.im], 1e-5);
            let fd_dz = 0.5 * (fd[0] - Complex64::i() * fd[1]);
            let d = kernel_derivative(&spec, z, w, DerivOrder([0, 1, 1, 0]), Which::Truncated).unwrap();
            assert!((d - fd_dz).norm() / d.norm().max(1.0) < 1e-6, "{d} vs {fd_dz}");
        }
    }

    #[test]
    fn tail_equals_difference() {
        let spec = KernelSpec::new(8.0, 10).unwrap();
        let (z, w) = (c(0.7, 0.2), c(0.6, -0.1));
        for a in [[0, 0, 0, 0], [0, 1, 0, 0], [1, 0, 0, 1], [0, 1, 1, 0]] {
            let o = DerivOrder(a);
            let t = kernel_tail(&spec, z, w, o).unwrap().to_complex();
            let d = kernel_derivative(&spec, z, w, o, Which::Infinite).unwrap()
                - kernel_derivative(&spec, z, w, o, Which::Truncated).unwrap();
            assert!((t - d).norm() < 1e-11 * (1.0 + t.norm()), "{a:?}: {t} vs {d}");
        }
    }

    #[test]
    fn tail_bound_examples() {
        assert!(kernel_tail_log_bound(64, c(0.0, 0.0), c(0.0, 0.0)).unwrap() == f64::NEG_INFINITY);
        assert!(kernel_tail_bound(64, c(1.0, 0.0), c(1.0, 0.0)).is_err());
        let z = c(0.9, 0.0);
        let spec = KernelSpec::new(64.0, 64).unwrap();
        let tail = kernel_tail(&spec, z, z, DerivOrder::ZERO).unwrap();
        assert!(tail.log_mag <= kernel_tail_log_bound(64, z, z).unwrap());
    }

    #[test]
    fn orbitals_sum_to_kernel() {
        let (b, m) = (3.0, 6);
        let (z, w) = (c(0.4, 0.3), c(-0.2, 0.5));
        let s: Complex64 = (0..m).map(|k| orbital(b, k, z) * orbital(b, k, w).conj()).sum();
        let k = kernel_eval(&KernelSpec::new(b, m).unwrap(), z, w).to_complex();
        assert!((s - k).norm() < 1e-14 * k.norm().max(1.0));
    }

    #[test]
    fn reproducing_small() {
        let spec = KernelSpec::new(4.0, 4).unwrap();
        let grid = QuadratureGrid::cartesian(c(0.0, 0.0), 5.0, 10, 10);
        let r = reproducing_residual(&spec, c(0.0, 0.0), c(0.0, 0.0), &grid).unwrap();
        assert!(r < 1e-8, "{r}");
        let t = kernel_trace(&spec, &grid).unwrap();
        assert!((t - 4.0).abs() / 4.0 < 1e-8);
    }

    #[test]
    fn circular_law_density() {
        let spec = KernelSpec::new(256.0, 256).unwrap();
        for k in 0..=40 {
            let z = Complex64::from_polar(0.8 * k as f64 / 40.0, 0.3 * k as f64);
            let d = PI * kernel_eval(&spec, z, z).re() / 256.0;
            assert!((d - 1.0).abs() < 1e-3);
        }
    }
}
