use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::{case_rng, log_log_slope, uniform_in_disk, CaseInfo, RegimeClassifier, VerificationReport};
use crate::kernel::{kernel_tail, kernel_tail_log_bound, DerivOrder, KernelSpec};
use crate::numeric::{ln_factorial, log_sum_exp};
use crate::par;

const TAG: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelSuiteParams {
    pub n_list: Vec<usize>,
    /// Number of holes n; the kernel is K_{N+n}.
    pub holes: usize,
    pub kappa: f64,
    pub samples: usize,
    /// Fraction of the samples placed on the diagonal at the shrunk-disk rim.
    pub rim_fraction: f64,
    pub max_order: u32,
}

impl Default for KernelSuiteParams {
    fn default() -> Self {
        KernelSuiteParams { n_list: vec![64, 128, 256], holes: 0, kappa: 2.0, samples: 1000, rim_fraction: 0.1, max_order: 2 }
    }
}

fn orders(total: u32) -> Vec<DerivOrder> {
    let mut out = Vec::new();
    for a in 0..=total {
        for b in 0..=total - a {
            for c in 0..=total - a - b {
                let d = total - a - b - c;
                out.push(DerivOrder([a as u8, b as u8, c as u8, d as u8]));
            }
        }
    }
    out
}

/// (b/π) e^{-b|z|²} Σ_{j ≥ M} (b|z|²)^j / j!, summed term by term.
fn diagonal_tail_direct(b: f64, m: usize, z: Complex64) -> f64 {
    let x = b * z.norm_sqr();
    let logs: Vec<f64> = (m..m + 2000).map(|j| j as f64 * x.ln() - ln_factorial(j) - x).collect();
    (b / std::f64::consts::PI).ln() + log_sum_exp(&logs)
}

struct PairResult {
    sup: Vec<f64>,
    bound_ratio: f64,
}

pub fn run_kernel_suite(p: &KernelSuiteParams, seed: u64) -> Result<VerificationReport> {
    let cl = RegimeClassifier::new(p.kappa, 1.0);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut sups: Vec<Vec<f64>> = vec![Vec::new(); p.max_order as usize + 1];
    for (ni, &n_bath) in p.n_list.iter().enumerate() {
        let delta = cl.delta(n_bath);
        let r = 1.0 - delta;
        let spec = KernelSpec::new(n_bath as f64, n_bath + p.holes)?;
        let mut rng = case_rng(seed, TAG, ni as u32);
        let rim = (p.rim_fraction * p.samples as f64).round() as usize;
        let pairs: Vec<(Complex64, Complex64)> = (0..p.samples)
            .map(|i| {
                if i < rim {
                    let z = Complex64::from_polar(r, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
                    (z, z)
                } else {
                    (uniform_in_disk(&mut rng, r), uniform_in_disk(&mut rng, r))
                }
            })
            .collect();
        let all_orders: Vec<Vec<DerivOrder>> = (0..=p.max_order).map(orders).collect();
        let results: Vec<Result<PairResult>> = par::map(&pairs, |&(z, w)| {
            let mut sup = Vec::new();
            let mut tail0 = f64::NEG_INFINITY;
            for (a, os) in all_orders.iter().enumerate() {
                let mut m = f64::NEG_INFINITY;
                for o in os {
                    let t = kernel_tail(&spec, z, w, *o)?.log_mag;
                    m = m.max(t);
                    if a == 0 {
                        tail0 = t;
                    }
                }
                sup.push(m);
            }
            let bound = kernel_tail_log_bound(n_bath, z, w)?;
            Ok(PairResult { sup, bound_ratio: (tail0 - bound).exp() })
        });
        let results: Vec<PairResult> = results.into_iter().collect::<Result<_>>()?;
        let info = CaseInfo::new(format!("kernel-N{n_bath}"), n_bath, p.holes, p.kappa, f64::NAN, "shrunk-disk");
        let worst = results.iter().map(|r| r.bound_ratio).fold(0.0, f64::max);
        rows.push(info.bound("tail/bound ratio", worst, 1.0));
        for a in 0..=p.max_order as usize {
            let s = results.iter().map(|r| r.sup[a]).fold(f64::NEG_INFINITY, f64::max).exp();
            sups[a].push(s);
            notes.push(format!("N = {n_bath}, |alpha| = {a}: sup |d(K_inf - K)| = {s:.6e}"));
        }

        // diagonal cross-check against a direct tail summation
        let z = pairs[0].0;
        let lib = kernel_tail(&spec, z, z, DerivOrder::ZERO)?;
        let direct = diagonal_tail_direct(spec.b, spec.m, z);
        rows.push(info.tolerance("diagonal tail vs direct sum", (lib.log_mag - direct).exp_m1().abs(), 0.0, 1e-10));
    }
    if p.n_list.len() >= 2 {
        let ns: Vec<f64> = p.n_list.iter().map(|&n| n as f64).collect();
        for (a, s) in sups.iter().enumerate() {
            let slope = log_log_slope(&ns, s);
            let bound = 1.0 + a as f64 - 2.0 * p.kappa * p.kappa + 0.5;
            let info = CaseInfo::new(format!("kernel-slope-a{a}"), *p.n_list.last().unwrap(), p.holes, p.kappa, f64::NAN, "shrunk-disk");
            rows.push(info.signed_bound(&format!("decay slope |alpha|={a}"), slope, bound));
        }
    }
    Ok(VerificationReport::new("kernel", seed, rows, notes))
}
