use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::{case_rng, uniform_in_disk, CaseInfo, ReportRow, RowMode, VerificationReport};
use crate::numeric::QuadratureGrid;
use crate::oracle::mcmc::{plasma_mcmc, radial_density_check, PlasmaConfig};
use crate::oracle::{
    charpoly_moment_mc, delta_check, energy_grid, energy_identity_check, partition_exact, slater_density,
    slater_density_bruteforce, GaussianTest,
};
use crate::par;
use crate::partition::{log_partition, HoleConfig};

const TAG: u32 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSuiteParams {
    /// Seeded hole configurations per (N, n, b) partition case.
    pub partition_configs: usize,
    pub partition_tol: f64,
    /// Thinned samples per characteristic-polynomial case.
    pub charpoly_samples: usize,
    pub energy_tol: f64,
    pub slater_points: usize,
    pub plasma_sweeps: usize,
    pub plasma_bins: usize,
    pub plasma_l1: f64,
}

impl Default for OracleSuiteParams {
    fn default() -> Self {
        OracleSuiteParams {
            partition_configs: 20,
            partition_tol: 1e-10,
            charpoly_samples: 10_000,
            energy_tol: 1e-5,
            slater_points: 5,
            plasma_sweeps: 100_000,
            plasma_bins: 30,
            plasma_l1: 0.05,
        }
    }
}

fn partition_rows(p: &OracleSuiteParams, seed: u64) -> Vec<ReportRow> {
    let mut cases = Vec::new();
    for n_bath in 1..=3usize {
        for n in 0..=2usize {
            for b in [1.0, n_bath as f64, 2.5] {
                let reps = if n == 0 { 1 } else { p.partition_configs };
                for c in 0..reps {
                    cases.push((cases.len(), n_bath, n, b, c));
                }
            }
        }
    }
    par::map(&cases, |&(id, n_bath, n, b, c)| {
        let mut rng = case_rng(seed, TAG, id as u32);
        let w: Vec<Complex64> = (0..n).map(|_| uniform_in_disk(&mut rng, 1.0)).collect();
        let cfg = HoleConfig::with_b(w, n_bath, b);
        let info = CaseInfo::new(format!("partition-N{n_bath}-n{n}-b{b}-{c}"), n_bath, n, f64::NAN, f64::NAN, "exact");
        match (log_partition(&cfg), partition_exact(&cfg)) {
            (Ok(f), Ok(e)) => info.tolerance("log_partition vs monomial expansion (rel)", (f.log_value - e).exp_m1().abs(), 0.0, p.partition_tol),
            _ => info.failed("log_partition vs monomial expansion (rel)", p.partition_tol, RowMode::Tolerance),
        }
    })
}

fn charpoly_rows(p: &OracleSuiteParams, seed: u64) -> Vec<ReportRow> {
    let mut rng = case_rng(seed, TAG, 900_000);
    let w8: Vec<Complex64> = (0..2).map(|_| uniform_in_disk(&mut rng, 0.6)).collect();
    let cases = [(1usize, vec![Complex64::new(0.7, 0.0)]), (8, w8)];
    cases
        .iter()
        .enumerate()
        .map(|(k, (n_bath, w))| {
            let b = *n_bath as f64;
            let cfg = HoleConfig::with_b(w.clone(), *n_bath, b);
            let mut mc = PlasmaConfig::new(*n_bath, b, vec![], 0, seed.wrapping_add(k as u64));
            mc.steps = mc.burn_in + p.charpoly_samples * mc.thin;
            let info = CaseInfo::new(format!("charpoly-N{n_bath}-n{}", w.len()), *n_bath, w.len(), f64::NAN, f64::NAN, "mc");
            match charpoly_moment_mc(&cfg, &mc) {
                Ok(est) => info.bound("|MC - exact| / SE", est.z_score.abs(), 3.0),
                Err(_) => info.failed("|MC - exact| / SE", 3.0, RowMode::Bound),
            }
        })
        .collect()
}

fn energy_rows(p: &OracleSuiteParams, seed: u64) -> Vec<ReportRow> {
    let mut rng = case_rng(seed, TAG, 910_000);
    let c2 = uniform_in_disk(&mut rng, 0.3);
    let cases = [
        (1usize, 1.0, GaussianTest::gaussian(Complex64::new(0.3, 0.0), 0.5)),
        (2, 1.0, GaussianTest::gaussian(c2, 0.4)),
        (2, 2.0, GaussianTest::gaussian(c2, 0.4)),
    ];
    par::map(&cases, |(n_bath, q, phi)| {
        let cfg = HoleConfig::with_b(vec![Complex64::new(0.0, 0.0)], *n_bath, *n_bath as f64);
        let info = CaseInfo::new(format!("energy-N{n_bath}-q{q}"), *n_bath, 1, f64::NAN, f64::NAN, "exact");
        match energy_identity_check(&cfg, *q, phi, &energy_grid(phi)) {
            Ok(r) => info.bound("energy identity relative residual", r.relative, p.energy_tol),
            Err(_) => info.failed("energy identity relative residual", p.energy_tol, RowMode::Bound),
        }
    })
}

fn slater_delta_rows(p: &OracleSuiteParams, seed: u64) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    let mut rng = case_rng(seed, TAG, 920_000);
    let info = CaseInfo::new("slater-N3-m2", 3, 0, f64::NAN, f64::NAN, "exact");
    let mut worst: f64 = 0.0;
    for _ in 0..p.slater_points {
        let xs = [uniform_in_disk(&mut rng, 1.0), uniform_in_disk(&mut rng, 1.0)];
        match (slater_density(3.0, &[0, 1, 2], &xs), slater_density_bruteforce(3.0, &[0, 1, 2], &xs)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / a.abs().max(b.abs())),
            _ => worst = f64::NAN,
        }
    }
    rows.push(info.bound("determinant vs brute-force marginal (rel)", worst, 1e-10));

    let info = CaseInfo::new("delta-b4-k0", 0, 1, f64::NAN, f64::NAN, "exact");
    let points: Vec<(Complex64, Complex64)> =
        (0..10).map(|_| (uniform_in_disk(&mut rng, 1.0), uniform_in_disk(&mut rng, 1.0))).collect();
    let grid = QuadratureGrid::cartesian(Complex64::new(0.0, 0.0), 2.5, 10, 8);
    match delta_check(4.0, 0, &GaussianTest::gaussian(Complex64::new(0.3, 0.0), 0.5), &grid, &points) {
        Ok(r) => {
            rows.push(info.bound("delta quadratic-form residual", r.quadratic_residual, 1e-8));
            rows.push(info.bound("delta projector residual", r.projector_residual, 1e-10));
        }
        Err(_) => rows.push(info.failed("delta quadratic-form residual", 1e-8, RowMode::Bound)),
    }
    rows
}

fn plasma_rows(p: &OracleSuiteParams, seed: u64) -> Vec<ReportRow> {
    let info = CaseInfo::new("plasma-N16", 16, 0, f64::NAN, f64::NAN, "mc");
    let cfg = PlasmaConfig::new(16, 16.0, vec![], p.plasma_sweeps, seed);
    let res = plasma_mcmc(&cfg).and_then(|run| radial_density_check(&cfg, &run.samples, p.plasma_bins));
    match res {
        Ok(r) => vec![info.bound("radial density L1 distance", r.l1, p.plasma_l1)],
        Err(_) => vec![info.failed("radial density L1 distance", p.plasma_l1, RowMode::Bound)],
    }
}

pub fn run_oracle_suite(p: &OracleSuiteParams, seed: u64) -> Result<VerificationReport> {
    let mut rows = partition_rows(p, seed);
    rows.extend(charpoly_rows(p, seed));
    rows.extend(energy_rows(p, seed));
    rows.extend(slater_delta_rows(p, seed));
    rows.extend(plasma_rows(p, seed));
    Ok(VerificationReport::new("oracle", seed, rows, Vec::new()))
}
