//! Regime classification and reproducible verification suites.

mod field_map;
mod global;
mod kernel_suite;
mod oracle_suite;
mod regime_suites;
mod volume;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::oracle::mcmc::stream_rng;
use crate::partition::HoleConfig;
use crate::regime::Regime;

pub use field_map::{field_map, FieldMapRow};
pub use global::{run_global_suite, GlobalSuiteParams};
pub use kernel_suite::{run_kernel_suite, KernelSuiteParams};
pub use oracle_suite::{run_oracle_suite, OracleSuiteParams};
pub use regime_suites::{run_potential_suite, run_upsilon_suite, PotentialSuiteParams, UpsilonSuiteParams};
pub use volume::{remainder_volume, VolumeEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassifier {
    pub kappa: f64,
    pub gamma: f64,
}

impl Default for RegimeClassifier {
    fn default() -> Self {
        RegimeClassifier { kappa: 2.0, gamma: 1.0 }
    }
}

impl RegimeClassifier {
    pub fn new(kappa: f64, gamma: f64) -> Self {
        RegimeClassifier { kappa, gamma }
    }

    /// δ_N = κ √(ln N / N).
    pub fn delta(&self, n_bath: usize) -> f64 {
        let n = n_bath.max(1) as f64;
        self.kappa * (n.ln() / n).sqrt()
    }

    /// Threshold equalities go to the more singular regime.
    pub fn classify(&self, cfg: &HoleConfig) -> Regime {
        let delta = self.delta(cfg.n_bath);
        if cfg.w.iter().any(|y| y.norm() > 1.0 - delta) {
            return Regime::OutsideDroplet;
        }
        let mut close = Vec::new();
        for i in 0..cfg.n() {
            for k in i + 1..cfg.n() {
                if (cfg.w[i] - cfg.w[k]).norm() <= 2.0 * delta {
                    close.push((i, k));
                }
            }
        }
        match close.as_slice() {
            [] => Regime::NoMerging,
            [(i, k)] => {
                let floor = (cfg.n_bath.max(1) as f64).powf(-1.0 - self.gamma);
                if (cfg.w[*i] - cfg.w[*k]).norm_sqr() > floor {
                    Regime::SingleMerging(*i, *k)
                } else {
                    Regime::Remainder
                }
            }
            _ => Regime::Remainder,
        }
    }
}

pub fn classify(cfg: &HoleConfig, kappa: f64, gamma: f64) -> Regime {
    RegimeClassifier::new(kappa, gamma).classify(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowMode {
    /// pass iff measured ≤ bound
    Bound,
    /// pass iff |measured - predicted| ≤ bound
    Tolerance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case_id: String,
    pub n_bath: usize,
    pub n: usize,
    pub kappa: f64,
    pub gamma: f64,
    pub regime: String,
    pub quantity: String,
    pub measured: f64,
    pub predicted: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
    pub mode: RowMode,
}

/// Case-independent columns shared by the rows of one case.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseInfo {
    pub case_id: String,
    pub n_bath: usize,
    pub n: usize,
    pub kappa: f64,
    pub gamma: f64,
    pub regime: String,
}

impl CaseInfo {
    pub fn new(case_id: impl Into<String>, n_bath: usize, n: usize, kappa: f64, gamma: f64, regime: impl Into<String>) -> Self {
        CaseInfo { case_id: case_id.into(), n_bath, n, kappa, gamma, regime: regime.into() }
    }

    fn row(&self, quantity: &str, measured: f64, predicted: f64, bound: f64, ratio: f64, mode: RowMode) -> ReportRow {
        ReportRow {
            case_id: self.case_id.clone(),
            n_bath: self.n_bath,
            n: self.n,
            kappa: self.kappa,
            gamma: self.gamma,
            regime: self.regime.clone(),
            quantity: quantity.to_string(),
            measured,
            predicted,
            bound,
            ratio,
            // NaN ratios fail
            pass: ratio <= 1.0,
            mode,
        }
    }

    pub fn bound(&self, quantity: &str, measured: f64, bound: f64) -> ReportRow {
        let ratio = if bound > 0.0 {
            measured / bound
        } else if measured <= bound {
            0.0
        } else {
            f64::INFINITY
        };
        self.row(quantity, measured, f64::NAN, bound, ratio, RowMode::Bound)
    }

    /// measured ≤ bound for quantities of either sign (slopes); the ratio is
    /// 1 + (measured - bound).
    pub fn signed_bound(&self, quantity: &str, measured: f64, bound: f64) -> ReportRow {
        self.row(quantity, measured, f64::NAN, bound, 1.0 + (measured - bound), RowMode::Bound)
    }

    pub fn tolerance(&self, quantity: &str, measured: f64, predicted: f64, tol: f64) -> ReportRow {
        let ratio = (measured - predicted).abs() / tol;
        self.row(quantity, measured, predicted, tol, ratio, RowMode::Tolerance)
    }

    /// A row for a computation that errored: recorded as a failure.
    pub fn failed(&self, quantity: &str, bound: f64, mode: RowMode) -> ReportRow {
        self.row(quantity, f64::NAN, f64::NAN, bound, f64::NAN, mode)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub rows: usize,
    pub failures: usize,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub summary: ReportSummary,
    /// Free-form diagnostics (rejection counts, fitted constants).
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(suite: &str, seed: u64, rows: Vec<ReportRow>, notes: Vec<String>) -> Self {
        let failures = rows.iter().filter(|r| !r.pass).count();
        let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        VerificationReport {
            suite: suite.to_string(),
            seed,
            summary: ReportSummary { rows: rows.len(), failures, max_ratio },
            rows,
            notes,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failures == 0
    }

    /// Rows whose quantity starts with `prefix`.
    pub fn rows_for<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.quantity.starts_with(prefix))
    }
}

/// RNG for one case of one suite; suites use distinct tags.
pub(crate) fn case_rng(seed: u64, suite_tag: u32, case: u32) -> ChaCha8Rng {
    stream_rng(seed, ((suite_tag as u64) << 32) | case as u64)
}

pub(crate) fn uniform_in_disk<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn threshold_arithmetic() {
        let cl = RegimeClassifier::default();
        // 2δ_256 = 0.589, so 0.5 is a close pair
        let near = HoleConfig::new(vec![c(0.0, 0.0), c(0.5, 0.0)], 256);
        assert_eq!(cl.classify(&near), Regime::SingleMerging(0, 1));
        let far = HoleConfig::new(vec![c(0.0, 0.0), c(0.6, 0.0)], 256);
        assert_eq!(cl.classify(&far), Regime::NoMerging);
    }

    #[test]
    fn microscopic_pair_is_single_merging() {
        let s = 1.0 / 16.0;
        let cfg = HoleConfig::new(vec![c(0.1, 0.0), c(0.1 + s, 0.0)], 256);
        assert_eq!(classify(&cfg, 2.0, 1.0), Regime::SingleMerging(0, 1));
        let tiny = HoleConfig::new(vec![c(0.1, 0.0), c(0.1 + 1e-4, 0.0)], 256);
        assert_eq!(classify(&tiny, 2.0, 1.0), Regime::Remainder);
    }

    #[test]
    fn two_close_pairs_are_remainder() {
        let cfg = HoleConfig::new(vec![c(-0.5, 0.0), c(-0.45, 0.0), c(0.45, 0.0), c(0.5, 0.0)], 256);
        assert_eq!(classify(&cfg, 2.0, 1.0), Regime::Remainder);
        let three = HoleConfig::new(vec![c(-0.5, 0.0), c(-0.45, 0.0), c(0.5, 0.0)], 256);
        assert_eq!(classify(&three, 2.0, 1.0), Regime::SingleMerging(0, 1));
    }

    #[test]
    fn outside_droplet() {
        let cfg = HoleConfig::new(vec![c(0.0, 0.95)], 256);
        assert_eq!(classify(&cfg, 2.0, 1.0), Regime::OutsideDroplet);
    }

    #[test]
    fn exact_threshold_goes_to_merging() {
        let cl = RegimeClassifier::default();
        let d = cl.delta(256);
        let cfg = HoleConfig::new(vec![c(0.0, 0.0), c(2.0 * d, 0.0)], 256);
        assert!(matches!(cl.classify(&cfg), Regime::SingleMerging(..)));
    }

    #[test]
    fn report_flags() {
        let info = CaseInfo::new("x", 4, 1, 2.0, 1.0, "no-merging");
        assert!(info.bound("q", 0.5, 1.0).pass);
        assert!(!info.bound("q", 1.5, 1.0).pass);
        assert!(info.tolerance("q", 1.0 + 1e-7, 1.0, 1e-6).pass);
        assert!(!info.failed("q", 1.0, RowMode::Bound).pass);
        assert!(info.bound("q", 0.0, 0.0).pass);
        let rep = VerificationReport::new("s", 1, vec![info.bound("q", 0.5, 1.0), info.bound("q", 2.0, 1.0)], vec![]);
        assert_eq!(rep.summary.failures, 1);
        assert_eq!(rep.summary.max_ratio, 2.0);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [64.0, 128.0, 256.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-7.0)).collect();
        assert!((log_log_slope(&x, &y) + 7.0).abs() < 1e-12);
    }
}
