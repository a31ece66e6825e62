//! Sparse multivariate polynomials in z₁..z_N with exact Gaussian-moment
//! integration, ∫ z^a z̄^c e^{-b|z|²} dz = δ_{ac} π a!/b^{a+1}.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::numeric::{ln_factorial, log_sum_exp};

/// Univariate polynomial, coefficient of z^d at index d.
pub type Univariate = Vec<Complex64>;

pub fn univariate_mul(a: &[Complex64], b: &[Complex64]) -> Univariate {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

/// ∏_j (w_j - z)^p as a polynomial in z.
pub fn hole_factor(w: &[Complex64], p: u32) -> Univariate {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for wj in w {
        for _ in 0..p {
            out = univariate_mul(&out, &[*wj, Complex64::new(-1.0, 0.0)]);
        }
    }
    out
}

/// ∂_{w_j} ∏_i (w_i - z)^p as a polynomial in z.
pub fn hole_factor_derivative(w: &[Complex64], p: u32, j: usize) -> Univariate {
    if p == 0 {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(p as f64, 0.0)];
    for (i, wi) in w.iter().enumerate() {
        let pow = if i == j { p - 1 } else { p };
        for _ in 0..pow {
            out = univariate_mul(&out, &[*wi, Complex64::new(-1.0, 0.0)]);
        }
    }
    out
}

/// log of the Gaussian moment π β!/b^{β+1}.
fn log_moment(beta: u16, b: f64) -> f64 {
    PI.ln() + ln_factorial(beta as usize) - (beta as f64 + 1.0) * b.ln()
}

/// Sign-tracked permutations of 0..n (Heap's algorithm).
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![(a.clone(), 1.0)];
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialPolynomial {
    vars: usize,
    terms: BTreeMap<Vec<u16>, Complex64>,
}

impl MonomialPolynomial {
    pub fn zero(vars: usize) -> Self {
        MonomialPolynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Complex64)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, degrees: Vec<u16>, c: Complex64) {
        assert_eq!(degrees.len(), self.vars);
        *self.terms.entry(degrees).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    /// Largest exponent of any single variable.
    pub fn max_degree(&self) -> u16 {
        self.terms.keys().flat_map(|d| d.iter().copied()).max().unwrap_or(0)
    }

    /// det[z_i^{k_a}] over i, a by the Leibniz formula. With k = 0..N-1 this
    /// is the Vandermonde ∏_{i<l} (z_l - z_i).
    pub fn slater(ks: &[usize]) -> Self {
        let n = ks.len();
        let mut p = Self::zero(n);
        for (perm, sign) in permutations(n) {
            let deg = perm.iter().map(|&a| ks[a] as u16).collect();
            p.add_term(deg, Complex64::new(sign, 0.0));
        }
        p
    }

    pub fn vandermonde(n: usize) -> Self {
        Self::slater(&(0..n).collect::<Vec<_>>())
    }

    /// ∏_k f_k(z_k) for univariate factors, one per variable.
    pub fn from_factors(factors: &[Univariate]) -> Self {
        let vars = factors.len();
        let mut p = Self::constant(vars, Complex64::new(1.0, 0.0));
        for (k, f) in factors.iter().enumerate() {
            let mut next = Self::zero(vars);
            for (deg, c) in &p.terms {
                for (d, fc) in f.iter().enumerate() {
                    if *fc == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut nd = deg.clone();
                    nd[k] += d as u16;
                    next.add_term(nd, c * fc);
                }
            }
            p = next;
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        let mut out = Self::zero(self.vars);
        for (da, ca) in &self.terms {
            for (db, cb) in &other.terms {
                let deg = da.iter().zip(db).map(|(x, y)| x + y).collect();
                out.add_term(deg, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        MonomialPolynomial {
            vars: self.vars,
            terms: self.terms.iter().map(|(d, c)| (d.clone(), c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(d.clone(), *c);
        }
        out
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.vars);
        self.terms
            .iter()
            .map(|(deg, c)| deg.iter().zip(z).fold(*c, |acc, (&d, zk)| acc * zk.powu(d as u32)))
            .sum()
    }

    /// ln ∫ |P|² ∏_k e^{-b|z_k|²} dz, summed term by term in the log domain.
    pub fn log_gaussian_norm_sq(&self, b: f64) -> f64 {
        let logs: Vec<f64> = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(deg, c)| 2.0 * c.norm().ln() + deg.iter().map(|&d| log_moment(d, b)).sum::<f64>())
            .collect();
        if logs.is_empty() {
            return f64::NEG_INFINITY;
        }
        log_sum_exp(&logs)
    }

    /// ∫ P̄ Q ∏_k e^{-b|z_k|²} dz.
    pub fn gaussian_inner(&self, other: &Self, b: f64) -> Complex64 {
        assert_eq!(self.vars, other.vars);
        self.terms
            .iter()
            .filter_map(|(deg, c)| {
                other.terms.get(deg).map(|d| {
                    let m: f64 = deg.iter().map(|&k| log_moment(k, b)).sum();
                    c.conj() * d * m.exp()
                })
            })
            .sum()
    }

    /// ∫ |P(x, z')|² ∏ e^{-b|z'|²} dz' over the trailing variables z', with
    /// the leading variables fixed at `x` (no Gaussian weight on those).
    pub fn marginal_norm_sq(&self, b: f64, x: &[Complex64]) -> f64 {
        let m = x.len();
        assert!(m <= self.vars);
        let mut groups: BTreeMap<&[u16], Complex64> = BTreeMap::new();
        for (deg, c) in &self.terms {
            let head = deg[..m].iter().zip(x).fold(*c, |acc, (&d, xk)| acc * xk.powu(d as u32));
            *groups.entry(&deg[m..]).or_insert(Complex64::new(0.0, 0.0)) += head;
        }
        groups
            .iter()
            .map(|(tail, c)| c.norm_sqr() * tail.iter().map(|&d| log_moment(d, b)).sum::<f64>().exp())
            .sum()
    }
}
