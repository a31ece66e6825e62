use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{case_rng, uniform_in_disk, CaseInfo, RegimeClassifier, ReportRow, RowMode, VerificationReport};
use crate::par;
use crate::partition::{upsilon, upsilon_prediction, HoleConfig};
use crate::potentials::{
    asymptotic_prediction, correction_a, correction_v, emergent_field_derivative, emergent_field_integral, IntegralGrids,
};
use crate::regime::Regime;

const UPSILON_TAG: u32 = 2;
const POTENTIAL_TAG: u32 = 3;
const MAX_TRIES: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UpsilonSuiteParams {
    pub n_list: Vec<usize>,
    pub holes: usize,
    pub kappa: f64,
    pub gamma: f64,
    /// No-merging configurations per N.
    pub configs: usize,
    /// Points of the single-merging separation sweep per N.
    pub sweep_points: usize,
    pub no_merging_tol: f64,
    pub merging_tol: f64,
}

impl Default for UpsilonSuiteParams {
    fn default() -> Self {
        UpsilonSuiteParams {
            n_list: vec![128, 256],
            holes: 2,
            kappa: 2.0,
            gamma: 1.0,
            configs: 10,
            sweep_points: 12,
            no_merging_tol: 1e-6,
            merging_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PotentialSuiteParams {
    pub n_list: Vec<usize>,
    pub holes: usize,
    pub kappa: f64,
    pub gamma: f64,
    pub configs: usize,
    pub field_tol: f64,
    /// Bath size of the merging sweep.
    pub sweep_n: usize,
    pub sweep_points: usize,
    /// Largest √N s at which the correction profiles are compared.
    pub sweep_t_max: f64,
    pub profile_tol: f64,
    /// Cross-method comparison (derivative vs integral route).
    pub cross_n: usize,
    pub cross_kappa: f64,
    pub cross_configs: usize,
}

impl Default for PotentialSuiteParams {
    fn default() -> Self {
        PotentialSuiteParams {
            n_list: vec![128, 256],
            holes: 2,
            kappa: 2.0,
            gamma: 1.0,
            configs: 10,
            field_tol: 1e-5,
            sweep_n: 512,
            sweep_points: 12,
            sweep_t_max: 2.0,
            profile_tol: 0.01,
            cross_n: 32,
            cross_kappa: 1.0,
            cross_configs: 10,
        }
    }
}

/// Holes uniform in the shrunk disk, rejected until the classifier agrees.
pub(crate) fn sample_in_regime<F>(
    rng: &mut ChaCha8Rng,
    cl: &RegimeClassifier,
    n_bath: usize,
    holes: usize,
    accept: F,
) -> Result<HoleConfig>
where
    F: Fn(&Regime) -> bool,
{
    let r = 1.0 - cl.delta(n_bath);
    for _ in 0..MAX_TRIES {
        let cfg = HoleConfig::new((0..holes).map(|_| uniform_in_disk(rng, r)).collect(), n_bath);
        if accept(&cl.classify(&cfg)) {
            return Ok(cfg);
        }
    }
    Err(Error::Resource(format!("no configuration found in the requested regime for N = {n_bath}, n = {holes}")))
}

/// A pair at separation s around a random centre, further holes placed so
/// that the configuration is single-merging on the pair (0, 1).
fn merging_config(rng: &mut ChaCha8Rng, cl: &RegimeClassifier, n_bath: usize, holes: usize, s: f64) -> Option<HoleConfig> {
    let r = 1.0 - cl.delta(n_bath);
    for _ in 0..1000 {
        let c = uniform_in_disk(rng, (r - s / 2.0).max(0.0) * 0.5);
        let dir = Complex64::from_polar(0.5 * s, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
        let mut w = vec![c - dir, c + dir];
        for _ in 2..holes {
            w.push(uniform_in_disk(rng, r));
        }
        let cfg = HoleConfig::new(w, n_bath);
        if cl.classify(&cfg) == Regime::SingleMerging(0, 1) {
            return Some(cfg);
        }
    }
    None
}

/// Whether n ≥ 2 holes fit in the shrunk disk at mutual distance ≥ 2δ_N
/// (two antipodal holes need 2(1 - δ) ≥ 2δ).
pub(crate) fn no_merging_possible(cl: &RegimeClassifier, n_bath: usize, holes: usize) -> bool {
    holes < 2 || cl.delta(n_bath) <= 0.5
}

fn log_spaced(hi: f64, lo: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![hi];
    }
    (0..points).map(|i| (hi.ln() + (lo.ln() - hi.ln()) * i as f64 / (points - 1) as f64).exp()).collect()
}

pub fn run_upsilon_suite(p: &UpsilonSuiteParams, seed: u64) -> Result<VerificationReport> {
    let cl = RegimeClassifier::new(p.kappa, p.gamma);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (ni, &n_bath) in p.n_list.iter().enumerate() {
        if !no_merging_possible(&cl, n_bath, p.holes) {
            notes.push(format!("N = {n_bath}: no-merging set empty for n = {} at kappa = {}, skipped", p.holes, p.kappa));
            continue;
        }
        let cases: Vec<Result<ReportRow>> = par::map_range(p.configs, |c| {
            let mut rng = case_rng(seed, UPSILON_TAG, (ni * 10_000 + c) as u32);
            let cfg = sample_in_regime(&mut rng, &cl, n_bath, p.holes, |r| *r == Regime::NoMerging)?;
            let info = CaseInfo::new(format!("upsilon-N{n_bath}-nm{c}"), n_bath, p.holes, p.kappa, p.gamma, "no-merging");
            Ok(info.tolerance("Upsilon", upsilon(&cfg), 1.0, p.no_merging_tol))
        });
        for r in cases {
            rows.push(r?);
        }

        let delta = cl.delta(n_bath);
        let s_lo = (n_bath as f64).powf(-(1.0 + p.gamma) / 2.0);
        let sweep = log_spaced(4.0 * delta, s_lo, p.sweep_points);
        let mut skipped = 0;
        for (k, s) in sweep.iter().enumerate() {
            let mut rng = case_rng(seed, UPSILON_TAG, (ni * 10_000 + 5_000 + k) as u32);
            let Some(cfg) = merging_config(&mut rng, &cl, n_bath, p.holes, *s) else {
                skipped += 1;
                continue;
            };
            let regime = cl.classify(&cfg);
            let info = CaseInfo::new(format!("upsilon-N{n_bath}-sweep{k}"), n_bath, p.holes, p.kappa, p.gamma, regime.to_string());
            let pred = upsilon_prediction(&cfg, &regime)?;
            rows.push(info.tolerance(&format!("Upsilon s={s:.6e}"), upsilon(&cfg), pred, p.merging_tol));
        }
        if skipped > 0 {
            notes.push(format!("N = {n_bath}: {skipped} sweep separations not single-merging (s > 2 delta_N), skipped"));
        }
    }
    Ok(VerificationReport::new("upsilon", seed, rows, notes))
}

fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

pub fn run_potential_suite(p: &PotentialSuiteParams, seed: u64) -> Result<VerificationReport> {
    let cl = RegimeClassifier::new(p.kappa, p.gamma);
    let mut rows = Vec::new();
    let mut notes = Vec::new();

    for (ni, &n_bath) in p.n_list.iter().enumerate() {
        if !no_merging_possible(&cl, n_bath, p.holes) {
            notes.push(format!("N = {n_bath}: no-merging set empty for n = {} at kappa = {}, skipped", p.holes, p.kappa));
            continue;
        }
        let nf = n_bath as f64;
        let cases: Vec<Result<Vec<ReportRow>>> = par::map_range(p.configs, |c| {
            let mut rng = case_rng(seed, POTENTIAL_TAG, (ni * 10_000 + c) as u32);
            let cfg = sample_in_regime(&mut rng, &cl, n_bath, p.holes, |r| *r == Regime::NoMerging)?;
            let info = CaseInfo::new(format!("potential-N{n_bath}-nm{c}"), n_bath, p.holes, p.kappa, p.gamma, "no-merging");
            let mut out = Vec::new();
            for j in 0..cfg.n() {
                let f = emergent_field_derivative(&cfg, j)?;
                let pr = asymptotic_prediction(&cfg, j, &Regime::NoMerging)?;
                let da = norm2([f.a[0] - pr.a[0], f.a[1] - pr.a[1]]) / nf;
                out.push(info.bound(&format!("|A_{} - pred|/N", j + 1), da, p.field_tol));
                out.push(info.bound(&format!("|V_{} - 2N|/N", j + 1), (f.v - pr.v).abs() / nf, p.field_tol));
            }
            Ok(out)
        });
        for r in cases {
            rows.extend(r?);
        }
    }

    // merging sweep: correction profiles in t = √N s
    if p.sweep_points > 0 {
        let n_bath = p.sweep_n;
        let nf = n_bath as f64;
        let sn = nf.sqrt();
        let t_lo = nf.powf(-p.gamma / 2.0);
        let mut ts = log_spaced(p.sweep_t_max, t_lo, p.sweep_points);
        ts.push(1.0);
        let cases: Vec<Result<Vec<ReportRow>>> = par::map_range(ts.len(), |k| {
            let t = ts[k];
            let s = t / sn;
            let mut rng = case_rng(seed, POTENTIAL_TAG, (900_000 + k) as u32);
            let cfg = merging_config(&mut rng, &cl, n_bath, p.holes, s)
                .ok_or_else(|| Error::Resource(format!("no single-merging configuration at s = {s}")))?;
            let regime = cl.classify(&cfg);
            let id = if k + 1 == ts.len() { "potential-merge-s1".to_string() } else { format!("potential-merge{k}") };
            let info = CaseInfo::new(id, n_bath, p.holes, p.kappa, p.gamma, regime.to_string());
            let f = emergent_field_derivative(&cfg, 0)?;
            let base = asymptotic_prediction(&cfg, 0, &Regime::NoMerging)?;
            let y = cfg.w[0] - cfg.w[1];
            let a = correction_a([sn * y.re, sn * y.im])?;
            let d = [(f.a[0] - base.a[0]) / sn, (f.a[1] - base.a[1]) / sn];
            let a_ratio = (d[0] * a[0] + d[1] * a[1]) / (a[0] * a[0] + a[1] * a[1]);
            let v_ratio = (2.0 * nf - f.v) / nf / correction_v([sn * y.re, sn * y.im]);
            Ok(vec![
                info.tolerance(&format!("a profile ratio t={t:.6e}"), a_ratio, 1.0, p.profile_tol),
                info.tolerance(&format!("v profile ratio t={t:.6e}"), v_ratio, 1.0, p.profile_tol),
            ])
        });
        for r in cases {
            rows.extend(r?);
        }
    }

    // derivative route vs integral route
    if p.cross_configs > 0 {
        let ccl = RegimeClassifier::new(p.cross_kappa, p.gamma);
        let n_bath = p.cross_n;
        let nf = n_bath as f64;
        for c in 0..p.cross_configs {
            let mut rng = case_rng(seed, POTENTIAL_TAG, (950_000 + c) as u32);
            let cfg = sample_in_regime(&mut rng, &ccl, n_bath, p.holes, |r| *r == Regime::NoMerging)?;
            let info = CaseInfo::new(format!("cross-N{n_bath}-{c}"), n_bath, p.holes, p.cross_kappa, p.gamma, "no-merging");
            for j in 0..cfg.n() {
                let d = emergent_field_derivative(&cfg, j)?;
                match emergent_field_integral(&cfg, j, &IntegralGrids::for_tracer(&cfg, j)) {
                    Ok(i) => {
                        let da = norm2([d.a[0] - i.a[0], d.a[1] - i.a[1]]);
                        rows.push(info.bound(&format!("cross |A_{} deriv - integral|", j + 1), da, 1e-6 * nf));
                        rows.push(info.bound(&format!("cross |V_{} deriv - integral|", j + 1), (d.v - i.v).abs(), 1e-4 * nf));
                    }
                    Err(e) => {
                        notes.push(format!("cross case {c}, j = {}: {e}", j + 1));
                        rows.push(info.failed(&format!("cross |A_{} deriv - integral|", j + 1), 1e-6 * nf, RowMode::Bound));
                    }
                }
            }
        }
    }
    Ok(VerificationReport::new("potentials", seed, rows, notes))
}
