use serde::{Deserialize, Serialize};

use crate::harness::{case_rng, uniform_in_disk, RegimeClassifier};
use crate::partition::HoleConfig;
use crate::regime::Regime;

const TAG: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub delta: f64,
    /// Fraction of uniform configurations in the shrunk disk that are remainder.
    pub fraction: f64,
    pub std_error: f64,
    /// fraction / δ_N⁴
    pub constant: f64,
    /// Lebesgue volume of the remainder set in R^{2n} divided by δ_N⁴.
    pub lebesgue_constant: f64,
}

/// Monte Carlo size of the remainder set with holes uniform in the shrunk disk.
pub fn remainder_volume(n_bath: usize, holes: usize, cl: &RegimeClassifier, samples: usize, seed: u64) -> VolumeEstimate {
    let delta = cl.delta(n_bath);
    let r = 1.0 - delta;
    let mut rng = case_rng(seed, TAG, 0);
    let mut hits = 0usize;
    for _ in 0..samples {
        let cfg = HoleConfig::new((0..holes).map(|_| uniform_in_disk(&mut rng, r)).collect(), n_bath);
        if cl.classify(&cfg) == Regime::Remainder {
            hits += 1;
        }
    }
    let f = hits as f64 / samples as f64;
    let d4 = delta.powi(4);
    let domain = (std::f64::consts::PI * r * r).powi(holes as i32);
    VolumeEstimate {
        delta,
        fraction: f,
        std_error: (f * (1.0 - f) / samples as f64).sqrt(),
        constant: f / d4,
        lebesgue_constant: f * domain / d4,
    }
}
