//! Metropolis sampling of the plasma density
//! L(z) = -b Σ|z_k|² + 2μ Σ_{i<k} ln|z_i - z_k| + 2p Σ_{k,j} ln|z_k - w_j|.

use std::io::{self, Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_eval, KernelSpec};
use crate::numeric::quadrature::gauss_legendre;
use crate::par;

pub const DEFAULT_BURN_IN: usize = 1000;
pub const DEFAULT_THIN: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlasmaConfig {
    pub n_bath: usize,
    pub p: u32,
    pub mu: u32,
    pub b: f64,
    pub holes: Vec<Complex64>,
    /// Total sweeps, burn-in included. One sweep proposes a move for every particle.
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub proposal_scale: f64,
    pub seed: u64,
}

impl PlasmaConfig {
    /// p = μ = 1 with the default burn-in, thinning and proposal scale 1/√b.
    pub fn new(n_bath: usize, b: f64, holes: Vec<Complex64>, steps: usize, seed: u64) -> Self {
        PlasmaConfig {
            n_bath,
            p: 1,
            mu: 1,
            b,
            holes,
            steps,
            burn_in: DEFAULT_BURN_IN.min(steps / 2),
            thin: DEFAULT_THIN,
            proposal_scale: 1.0 / b.sqrt(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_bath == 0 {
            return Err(Error::Usage("plasma needs at least one particle".into()));
        }
        if self.steps <= self.burn_in {
            return Err(Error::Usage(format!("steps ({}) must exceed burn-in ({})", self.steps, self.burn_in)));
        }
        if !(self.proposal_scale > 0.0) || !(self.b > 0.0) || self.thin == 0 {
            return Err(Error::Usage("proposal scale, b and thinning must be positive".into()));
        }
        Ok(())
    }

    /// Number of samples a run emits.
    pub fn sample_count(&self) -> usize {
        (self.steps - self.burn_in) / self.thin
    }

    /// Whether the target is the Ginibre law, so that K_N(z,z)/N is exact.
    pub fn is_ginibre(&self) -> bool {
        self.p == 1 && self.mu == 1 && self.holes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlasmaSample {
    pub positions: Vec<Complex64>,
    pub log_density: f64,
    pub sweep: usize,
    /// Acceptance rate over post-burn-in proposals so far.
    pub acceptance_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub seed: u64,
    pub stream: u64,
    pub proposed: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlasmaRun {
    pub samples: Vec<PlasmaSample>,
    pub diagnostics: ChainDiagnostics,
}

/// Independent ChaCha stream for (seed, stream id).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn log_density(cfg: &PlasmaConfig, z: &[Complex64]) -> f64 {
    let mut l = -cfg.b * z.iter().map(|x| x.norm_sqr()).sum::<f64>();
    for i in 0..z.len() {
        for k in i + 1..z.len() {
            l += 2.0 * cfg.mu as f64 * (z[i] - z[k]).norm().ln();
        }
        for w in &cfg.holes {
            l += 2.0 * cfg.p as f64 * (z[i] - w).norm().ln();
        }
    }
    l
}

/// L(z with z_k replaced by `new`) - L(z); -∞ onto a coincidence.
pub fn delta_log_density(cfg: &PlasmaConfig, z: &[Complex64], k: usize, new: Complex64) -> f64 {
    let old = z[k];
    let mut d = -cfg.b * (new.norm_sqr() - old.norm_sqr());
    let mut pair = 0.0;
    for (i, zi) in z.iter().enumerate() {
        if i != k {
            pair += (new - zi).norm().ln() - (old - zi).norm().ln();
        }
    }
    let mut hole = 0.0;
    for w in &cfg.holes {
        hole += (new - w).norm().ln() - (old - w).norm().ln();
    }
    d += 2.0 * cfg.mu as f64 * pair + 2.0 * cfg.p as f64 * hole;
    if d.is_nan() {
        f64::NEG_INFINITY
    } else {
        d
    }
}

fn run_chain<F: FnMut(&PlasmaSample)>(cfg: &PlasmaConfig, stream: u64, mut visit: F) -> Result<ChainDiagnostics> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, stream);
    let radius = (cfg.n_bath as f64 / cfg.b).sqrt();
    let mut z: Vec<Complex64> = (0..cfg.n_bath)
        .map(|_| Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), 2.0 * std::f64::consts::PI * rng.gen::<f64>()))
        .collect();
    let mut l = log_density(cfg, &z);
    let (mut proposed, mut accepted) = (0u64, 0u64);
    for sweep in 0..cfg.steps {
        for k in 0..cfg.n_bath {
            let ex: f64 = rng.sample(StandardNormal);
            let ey: f64 = rng.sample(StandardNormal);
            let new = z[k] + Complex64::new(ex, ey) * cfg.proposal_scale;
            let d = delta_log_density(cfg, &z, k, new);
            let u: f64 = rng.gen();
            let accept = d >= 0.0 || u < d.exp();
            if accept {
                z[k] = new;
                l += d;
            }
            if sweep >= cfg.burn_in {
                proposed += 1;
                accepted += accept as u64;
            }
        }
        if sweep >= cfg.burn_in && (sweep + 1 - cfg.burn_in) % cfg.thin == 0 {
            visit(&PlasmaSample {
                positions: z.clone(),
                log_density: l,
                sweep,
                acceptance_rate: accepted as f64 / proposed as f64,
            });
        }
    }
    let rate = accepted as f64 / proposed as f64;
    let warning = if !(0.05..=0.95).contains(&rate) {
        Some(format!("acceptance rate {rate:.3} outside [0.05, 0.95]; retune proposal_scale"))
    } else {
        None
    };
    Ok(ChainDiagnostics { seed: cfg.seed, stream, proposed, accepted, acceptance_rate: rate, warning })
}

/// Streams thinned samples of one chain to `visit`.
pub fn plasma_mcmc_with<F: FnMut(&PlasmaSample)>(cfg: &PlasmaConfig, visit: F) -> Result<ChainDiagnostics> {
    run_chain(cfg, 0, visit)
}

pub fn plasma_mcmc(cfg: &PlasmaConfig) -> Result<PlasmaRun> {
    let mut samples = Vec::with_capacity(cfg.sample_count());
    let diagnostics = run_chain(cfg, 0, |s| samples.push(s.clone()))?;
    Ok(PlasmaRun { samples, diagnostics })
}

/// Independent chains on streams 0..chains, run in parallel.
pub fn plasma_mcmc_chains(cfg: &PlasmaConfig, chains: usize) -> Result<Vec<PlasmaRun>> {
    par::map_range(chains, |c| {
        let mut samples = Vec::with_capacity(cfg.sample_count());
        run_chain(cfg, c as u64, |s| samples.push(s.clone())).map(|diagnostics| PlasmaRun { samples, diagnostics })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialCheck {
    /// Bin edges in r; the last bin collects everything beyond the final edge.
    pub edges: Vec<f64>,
    pub empirical: Vec<f64>,
    pub exact: Vec<f64>,
    pub l1: f64,
}

/// Mass of (1/N) ∫ 2πr K_N(r, r) dr over [r0, r1].
fn exact_radial_mass(spec: &KernelSpec, n_bath: usize, r0: f64, r1: f64) -> f64 {
    let (x, w) = gauss_legendre(24);
    let h = 0.5 * (r1 - r0);
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| {
            let r = r0 + h * (xi + 1.0);
            let z = Complex64::new(r, 0.0);
            wi * h * 2.0 * std::f64::consts::PI * r * kernel_eval(spec, z, z).re()
        })
        .sum::<f64>()
        / n_bath as f64
}

/// Binned L¹ distance between the empirical law of |z| and the exact
/// one-particle profile K_N(z,z)/N (Ginibre targets only).
pub fn radial_density_check(cfg: &PlasmaConfig, samples: &[PlasmaSample], bins: usize) -> Result<RadialCheck> {
    if !cfg.is_ginibre() {
        return Err(Error::Usage("exact radial profile only known for p = μ = 1 without holes".into()));
    }
    if samples.is_empty() || bins == 0 {
        return Err(Error::Usage("need samples and at least one bin".into()));
    }
    let spec = KernelSpec::new(cfg.b, cfg.n_bath)?;
    let r_max = 1.5 * (cfg.n_bath as f64 / cfg.b).sqrt();
    let edges: Vec<f64> = (0..=bins).map(|i| r_max * i as f64 / bins as f64).collect();
    let mut exact: Vec<f64> = edges.windows(2).map(|e| exact_radial_mass(&spec, cfg.n_bath, e[0], e[1])).collect();
    exact.push((1.0 - exact.iter().sum::<f64>()).max(0.0));
    let mut counts = vec![0.0; bins + 1];
    let mut total = 0.0;
    for s in samples {
        for z in &s.positions {
            let r = z.norm();
            let idx = ((r / r_max) * bins as f64).floor() as usize;
            counts[idx.min(bins)] += 1.0;
            total += 1.0;
        }
    }
    let empirical: Vec<f64> = counts.iter().map(|c| c / total).collect();
    let l1 = empirical.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum();
    Ok(RadialCheck { edges, empirical, exact, l1 })
}

/// Binary dump: little-endian u64 N, then per sample 2N f64 (re, im per particle).
pub fn write_dump<W: Write>(mut out: W, n_bath: usize, samples: &[PlasmaSample]) -> io::Result<()> {
    out.write_all(&(n_bath as u64).to_le_bytes())?;
    for s in samples {
        for z in &s.positions {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    out.flush()
}

pub fn read_dump<R: Read>(mut input: R) -> io::Result<Vec<Vec<Complex64>>> {
    let mut head = [0u8; 8];
    input.read_exact(&mut head)?;
    let n = u64::from_le_bytes(head) as usize;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let record = 16 * n;
    if n == 0 || bytes.len() % record != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "truncated plasma dump"));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().unwrap());
    Ok(bytes
        .chunks(record)
        .map(|rec| rec.chunks(16).map(|p| Complex64::new(f(&p[..8]), f(&p[8..]))).collect())
        .collect())
}
