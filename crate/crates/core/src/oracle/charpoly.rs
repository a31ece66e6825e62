//! Monte Carlo estimate of E_N[∏_j |Q_N(w_j)|²] with Q_N(w) = ∏_k (w - z_k)
//! under the Ginibre law, against the exact ratio c_qh(∅)² c_qh(w)^{-2}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::oracle::mcmc::{plasma_mcmc_with, PlasmaConfig};
use crate::partition::{log_partition, HoleConfig};

const BATCHES: usize = 50;
const MIN_EFFECTIVE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharpolyEstimate {
    pub log_estimate: f64,
    /// ln of the batch-means standard error of the (linear) estimate.
    pub log_std_error: f64,
    pub log_exact: f64,
    pub samples: usize,
    pub effective_samples: f64,
    /// (estimate - exact) / standard error.
    pub z_score: f64,
}

/// Log-domain mean of e^{X_s} with a batch-means standard error.
pub fn log_mean_with_error(xs: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < MIN_EFFECTIVE as usize {
        return Err(Error::Precision(format!("{n} samples, need at least {MIN_EFFECTIVE}")));
    }
    let shift = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ys: Vec<f64> = xs.iter().map(|x| (x - shift).exp()).collect();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let per = n / BATCHES;
    let bm: Vec<f64> = (0..BATCHES).map(|b| ys[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64).collect();
    let bmean = bm.iter().sum::<f64>() / BATCHES as f64;
    let bvar = bm.iter().map(|y| (y - bmean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    let se2 = bvar / BATCHES as f64;
    let effective = if se2 > 0.0 { var / se2 } else { n as f64 };
    Ok((shift + mean.ln(), shift + 0.5 * se2.ln(), effective))
}

pub fn charpoly_moment_mc(cfg: &HoleConfig, mcmc: &PlasmaConfig) -> Result<CharpolyEstimate> {
    if mcmc.n_bath != cfg.n_bath || mcmc.b != cfg.b {
        return Err(Error::Usage("sampler and hole configuration disagree on N or b".into()));
    }
    if mcmc.mu != 1 {
        return Err(Error::Usage("the moment identity holds for the Ginibre law (μ = 1)".into()));
    }
    // sample the no-hole density regardless of what the sampler config carries
    let plain = PlasmaConfig { holes: Vec::new(), ..mcmc.clone() };
    let mut xs = Vec::with_capacity(plain.sample_count());
    plasma_mcmc_with(&plain, |s| {
        let x: f64 = cfg.w.iter().flat_map(|w| s.positions.iter().map(move |z| 2.0 * (w - z).norm().ln())).sum();
        xs.push(x);
    })?;
    let (log_est, log_se, effective) = log_mean_with_error(&xs)?;
    if effective < MIN_EFFECTIVE {
        return Err(Error::Precision(format!("only {effective:.1} effective samples")));
    }
    let empty = HoleConfig::with_b(Vec::new(), cfg.n_bath, cfg.b);
    let log_exact = log_partition(cfg)?.log_value - log_partition(&empty)?.log_value;
    let z_score = (1.0 - (log_exact - log_est).exp()) / (log_se - log_est).exp();
    Ok(CharpolyEstimate {
        log_estimate: log_est,
        log_std_error: log_se,
        log_exact,
        samples: xs.len(),
        effective_samples: effective,
        z_score,
    })
}

/// ln E[e^X] by plain log-sum-exp, for callers that need no error bar.
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    log_sum_exp(xs) - (xs.len() as f64).ln()
}
