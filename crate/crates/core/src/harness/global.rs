use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{case_rng, uniform_in_disk, CaseInfo, RegimeClassifier, VerificationReport};
use crate::par;
use crate::partition::HoleConfig;
use crate::potentials::emergent_field_derivative;

const TAG: u32 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalSuiteParams {
    pub n_bath: usize,
    pub holes: usize,
    pub configs: usize,
    /// Every k-th configuration gets a forced close pair.
    pub merger_every: usize,
    pub inner_radius: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub a_const: f64,
    pub v_const: f64,
    pub droplet_const: f64,
}

impl Default for GlobalSuiteParams {
    fn default() -> Self {
        GlobalSuiteParams {
            n_bath: 64,
            holes: 4,
            configs: 500,
            merger_every: 3,
            inner_radius: 0.8,
            kappa: 2.0,
            gamma: 1.0,
            a_const: 10.0,
            v_const: 10.0,
            droplet_const: 10.0,
        }
    }
}

#[derive(Default)]
struct ConfigStats {
    a_max: f64,
    v_max: f64,
    v_neg: f64,
    droplet_max: f64,
    non_finite: usize,
    rejected: bool,
    regime: String,
}

/// Holes uniform in the unit disk; on merger configurations hole 2 is put
/// at a log-uniform distance in [1/N, 2δ_N] from hole 1.
fn sample_config<R: Rng>(rng: &mut R, p: &GlobalSuiteParams, cl: &RegimeClassifier, merger: bool) -> HoleConfig {
    let mut w: Vec<Complex64> = (0..p.holes).map(|_| uniform_in_disk(rng, 1.0)).collect();
    if merger && p.holes >= 2 {
        let lo = (1.0 / p.n_bath as f64).ln();
        let hi = (2.0 * cl.delta(p.n_bath)).ln();
        let s = rng.gen_range(lo..hi).exp();
        w[1] = w[0] + Complex64::from_polar(s, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
    }
    HoleConfig::new(w, p.n_bath)
}

pub fn run_global_suite(p: &GlobalSuiteParams, seed: u64) -> Result<VerificationReport> {
    let cl = RegimeClassifier::new(p.kappa, p.gamma);
    let nf = p.n_bath as f64;
    let stats: Vec<ConfigStats> = par::map_range(p.configs, |c| {
        let mut rng = case_rng(seed, TAG, c as u32);
        let merger = p.merger_every > 0 && c % p.merger_every == 0;
        let cfg = sample_config(&mut rng, p, &cl, merger);
        let mut st = ConfigStats { regime: cl.classify(&cfg).label().to_string(), ..Default::default() };
        for j in 0..cfg.n() {
            match emergent_field_derivative(&cfg, j) {
                Ok(f) => {
                    if !(f.a[0].is_finite() && f.a[1].is_finite() && f.v.is_finite()) {
                        st.non_finite += 1;
                        continue;
                    }
                    st.a_max = st.a_max.max(f.a[0].hypot(f.a[1]) / nf);
                    st.v_max = st.v_max.max(f.v / nf.powf(1.5));
                    st.v_neg = st.v_neg.max(-f.v / nf.powf(1.5));
                    let y = cfg.w[j];
                    if y.norm() <= p.inner_radius {
                        let d = (f.a[0] + nf * y.im).hypot(f.a[1] - nf * y.re) / nf.sqrt();
                        st.droplet_max = st.droplet_max.max(d);
                    }
                }
                Err(Error::Degenerate(_)) | Err(Error::Coincident(..)) => {
                    st.rejected = true;
                    return st;
                }
                Err(_) => st.non_finite += 1,
            }
        }
        st
    });
    let kept: Vec<&ConfigStats> = stats.iter().filter(|s| !s.rejected).collect();
    let info = CaseInfo::new("global", p.n_bath, p.holes, p.kappa, p.gamma, "all");
    let max = |f: fn(&ConfigStats) -> f64| kept.iter().map(|s| f(s)).fold(0.0, f64::max);
    let rows = vec![
        info.bound("max |A_j|/N", max(|s| s.a_max), p.a_const),
        info.bound("max V_j/N^1.5", max(|s| s.v_max), p.v_const),
        info.bound("max -V_j/N^1.5", max(|s| s.v_neg), 0.0),
        info.bound(&format!("max |A_j - N y_j^perp|/sqrt(N), |y_j| <= {}", p.inner_radius), max(|s| s.droplet_max), p.droplet_const),
        info.bound("non-finite fields", kept.iter().map(|s| s.non_finite).sum::<usize>() as f64, 0.0),
    ];
    let mut notes = vec![format!("{} of {} configurations rejected (Upsilon below floor)", stats.len() - kept.len(), stats.len())];
    for label in ["outside-droplet", "no-merging", "single-merging", "remainder"] {
        notes.push(format!("{label}: {} configurations", kept.iter().filter(|s| s.regime == label).count()));
    }
    Ok(VerificationReport::new("global", seed, rows, notes))
}
