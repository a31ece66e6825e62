use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Subcommand, ValueEnum};
use num_complex::Complex64;
use qhflux_core::harness::{
    GlobalSuiteParams, KernelSuiteParams, OracleSuiteParams, PotentialSuiteParams, UpsilonSuiteParams,
};
use qhflux_core::kernel::DerivOrder;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Everything needed to reproduce one invocation; echoed as config.json.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate K_{N+n}(z, w), K_inf(z, w) and their difference
    Kernel(KernelArgs),
    /// Upsilon and the partition function at a hole configuration
    Upsilon(UpsilonArgs),
    /// Emergent potentials A_j, V_j with the regime-wise prediction
    Potentials(PotentialArgs),
    /// Tabulate A_j, V_j while hole j moves over a grid
    FieldMap(FieldMapArgs),
    /// Metropolis sampling of the plasma density
    Mcmc(McmcArgs),
    /// Monte Carlo characteristic-polynomial moment against the exact ratio
    Charpoly(CharpolyArgs),
    /// Closed-form partition function against the monomial-expansion oracle
    Oracle(OracleArgs),
    /// Run verification suites and write one report per suite
    Verify(VerifyArgs),
    /// Summarize report CSV files written by `verify`
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Upsilon(_) => "upsilon",
            Command::Potentials(_) => "potentials",
            Command::FieldMap(_) => "field-map",
            Command::Mcmc(_) => "mcmc",
            Command::Charpoly(_) => "charpoly",
            Command::Oracle(_) => "oracle",
            Command::Verify(_) => "verify",
            Command::Report(_) => "report",
        }
    }
}

fn default_kappa() -> f64 {
    2.0
}

fn default_gamma() -> f64 {
    1.0
}

fn default_j() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct KernelArgs {
    /// Bath size N
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_bath: usize,
    /// Number of holes n; the kernel is truncated at N + n terms
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub holes: usize,
    /// Field strength (defaults to N)
    #[arg(long)]
    #[serde(default)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z: ComplexArg,
    #[arg(long, allow_hyphen_values = true)]
    pub w: ComplexArg,
    /// Derivative orders in (zbar, z, wbar, w)
    #[arg(long, default_value = "0,0,0,0")]
    #[serde(default)]
    pub order: OrderArg,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct UpsilonArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_bath: usize,
    /// Hole positions, e.g. "0.3+0i,-0.3+0.1i"
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    #[serde(default)]
    pub holes: ComplexList,
    #[arg(long)]
    #[serde(default)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FieldMethod {
    #[default]
    Derivative,
    Integral,
    Both,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct PotentialArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_bath: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub holes: ComplexList,
    /// Tracer index, 1-based
    #[arg(long, default_value_t = 1)]
    #[serde(default = "default_j")]
    pub j: usize,
    #[arg(long)]
    #[serde(default)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = FieldMethod::Derivative)]
    #[serde(default)]
    pub method: FieldMethod,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct FieldMapArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_bath: usize,
    /// All holes; the entry at index j is replaced by the grid points
    #[arg(long, allow_hyphen_values = true)]
    pub holes: ComplexList,
    #[arg(long, default_value_t = 1)]
    #[serde(default = "default_j")]
    pub j: usize,
    #[arg(long)]
    #[serde(default)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Grid in x as "min:max:count"
    #[arg(long, allow_hyphen_values = true)]
    pub x: GridAxis,
    /// Grid in y as "min:max:count"
    #[arg(long, allow_hyphen_values = true)]
    pub y: GridAxis,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct McmcArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_bath: usize,
    #[arg(long)]
    #[serde(default)]
    pub b: Option<f64>,
    /// Hole charge p
    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub p: u32,
    /// Bath exponent mu
    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub mu: u32,
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    #[serde(default)]
    pub holes: ComplexList,
    /// Total sweeps per chain, burn-in included
    #[arg(long, default_value_t = 100_000)]
    pub sweeps: usize,
    /// Defaults to min(1000, sweeps / 2)
    #[arg(long)]
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    /// Gaussian proposal width (defaults to 1/sqrt(b))
    #[arg(long)]
    #[serde(default)]
    pub scale: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Radial histogram bins for the density check
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    /// Write every retained sample to this file
    #[arg(long)]
    #[serde(default)]
    pub dump: Option<PathBuf>,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CharpolyArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_bath: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub holes: ComplexList,
    #[arg(long)]
    #[serde(default)]
    pub b: Option<f64>,
    /// Thinned samples
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_bath: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    #[serde(default)]
    pub holes: ComplexList,
    #[arg(long)]
    #[serde(default)]
    pub b: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernel,
    Upsilon,
    Potentials,
    Global,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Kernel, Suite::Upsilon, Suite::Potentials, Suite::Global, Suite::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Upsilon => "upsilon",
            Suite::Potentials => "potentials",
            Suite::Global => "global",
            Suite::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Suites to run (comma-separated); all of them when omitted
    #[arg(long, value_enum, value_delimiter = ',')]
    #[serde(default)]
    pub suite: Vec<Suite>,
    /// Override kappa in every suite that has one
    #[arg(long)]
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Override gamma in every suite that has one
    #[arg(long)]
    #[serde(default)]
    pub gamma: Option<f64>,
    #[arg(skip)]
    #[serde(default)]
    pub kernel: KernelSuiteParams,
    #[arg(skip)]
    #[serde(default)]
    pub upsilon: UpsilonSuiteParams,
    #[arg(skip)]
    #[serde(default)]
    pub potentials: PotentialSuiteParams,
    #[arg(skip)]
    #[serde(default)]
    pub global: GlobalSuiteParams,
    #[arg(skip)]
    #[serde(default)]
    pub oracle: OracleSuiteParams,
}

impl VerifyArgs {
    pub fn suites(&self) -> Vec<Suite> {
        if self.suite.is_empty() {
            Suite::ALL.to_vec()
        } else {
            let mut s = self.suite.clone();
            s.sort();
            s.dedup();
            s
        }
    }

    /// Fold the kappa/gamma overrides into the per-suite parameters.
    pub fn resolved(&self) -> VerifyArgs {
        let mut v = self.clone();
        if let Some(k) = v.kappa.take() {
            v.kernel.kappa = k;
            v.upsilon.kappa = k;
            v.potentials.kappa = k;
            v.global.kappa = k;
        }
        if let Some(g) = v.gamma.take() {
            v.upsilon.gamma = g;
            v.potentials.gamma = g;
            v.global.gamma = g;
        }
        v
    }
}

impl Default for VerifyArgs {
    fn default() -> Self {
        VerifyArgs {
            suite: Vec::new(),
            kappa: None,
            gamma: None,
            kernel: KernelSuiteParams::default(),
            upsilon: UpsilonSuiteParams::default(),
            potentials: PotentialSuiteParams::default(),
            global: GlobalSuiteParams::default(),
            oracle: OracleSuiteParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Report CSV files, or directories whose *.csv files are read
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

/// A complex number written as `a+bi`, `a`, or `bi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexArg(pub Complex64);

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    let bad = || format!("invalid complex literal {s:?} (expected a+bi)");
    let num = |x: &str| -> Result<f64, String> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0));
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, num(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

impl FromStr for ComplexArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_complex(s).map(ComplexArg)
    }
}

impl fmt::Display for ComplexArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

impl Serialize for ComplexArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ComplexArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Comma-separated complex literals; the empty string is the empty list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexList(pub Vec<ComplexArg>);

impl ComplexList {
    pub fn points(&self) -> Vec<Complex64> {
        self.0.iter().map(|c| c.0).collect()
    }
}

impl FromStr for ComplexList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().is_empty() {
            return Ok(ComplexList::default());
        }
        s.split(',').map(str::parse).collect::<Result<_, _>>().map(ComplexList)
    }
}

impl fmt::Display for ComplexList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Derivative orders "zbar,z,wbar,w".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OrderArg(pub [u8; 4]);

impl OrderArg {
    pub fn order(self) -> DerivOrder {
        DerivOrder(self.0)
    }
}

impl FromStr for OrderArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("derivative order {s:?} needs four comma-separated entries"));
        }
        let mut o = [0u8; 4];
        for (slot, p) in o.iter_mut().zip(parts) {
            *slot = p.parse().map_err(|_| format!("invalid derivative order entry {p:?}"))?;
        }
        DerivOrder::new(o[0], o[1], o[2], o[3]).map_err(|e| e.to_string())?;
        Ok(OrderArg(o))
    }
}

impl fmt::Display for OrderArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "{a},{b},{c},{d}")
    }
}

impl Serialize for OrderArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for OrderArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Evenly spaced axis "min:max:count"; count 1 gives just min.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64).collect(),
        }
    }
}

impl FromStr for GridAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid grid axis {s:?} (expected min:max:count)");
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad());
        };
        let axis = GridAxis {
            min: lo.parse().map_err(|_| bad())?,
            max: hi.parse().map_err(|_| bad())?,
            count: n.parse().map_err(|_| bad())?,
        };
        if !(axis.min.is_finite() && axis.max.is_finite()) {
            return Err(bad());
        }
        Ok(axis)
    }
}

impl fmt::Display for GridAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

impl Serialize for GridAxis {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GridAxis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |s: &str| parse_complex(s).unwrap();
        assert_eq!(c("0.3+0i"), Complex64::new(0.3, 0.0));
        assert_eq!(c("-0.3-0.25i"), Complex64::new(-0.3, -0.25));
        assert_eq!(c("0.4"), Complex64::new(0.4, 0.0));
        assert_eq!(c("2i"), Complex64::new(0.0, 2.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("1e-3+2.5e+1i"), Complex64::new(1e-3, 25.0));
        assert_eq!(c("1+i"), Complex64::new(1.0, 1.0));
        for bad in ["", "abc", "1+2j", "1++2i", "i1"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn complex_display_round_trips() {
        for z in [Complex64::new(0.1, -0.2), Complex64::new(-1e-300, 3.0), Complex64::new(1.0 / 3.0, -0.0)] {
            let back = parse_complex(&format_complex(z)).unwrap();
            assert_eq!(back, z);
            assert_eq!(back.im.is_sign_negative(), z.im.is_sign_negative());
        }
    }

    #[test]
    fn lists_and_axes() {
        let l: ComplexList = "0.3+0i, -0.3+0.1i".parse().unwrap();
        assert_eq!(l.0.len(), 2);
        assert!("".parse::<ComplexList>().unwrap().0.is_empty());
        let a: GridAxis = "-0.5:0.5:3".parse().unwrap();
        assert_eq!(a.values(), vec![-0.5, 0.0, 0.5]);
        assert!("0:1:0".parse::<GridAxis>().unwrap().values().is_empty());
        assert!("0:1".parse::<GridAxis>().is_err());
        assert!("1,0,0".parse::<OrderArg>().is_err());
        assert!("3,2,0,0".parse::<OrderArg>().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = RunConfig {
            seed: 7,
            output_dir: Some("out".into()),
            format: Format::Csv,
            threads: Some(2),
            command: Command::Potentials(PotentialArgs {
                n_bath: 256,
                holes: "0.3+0i,-0.3+0i".parse().unwrap(),
                j: 1,
                b: None,
                kappa: 2.0,
                gamma: 1.0,
                method: FieldMethod::Both,
            }),
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);

        let verify = RunConfig { command: Command::Verify(VerifyArgs::default()), ..cfg };
        let text = serde_json::to_string(&verify).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), verify);
    }

    #[test]
    fn sparse_verify_config_gets_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"seed": 3, "output_dir": null, "format": "csv", "threads": null,
                "command": "verify", "params": {"suite": ["oracle"], "global": {"configs": 10}}}"#,
        )
        .unwrap();
        let Command::Verify(v) = cfg.command else { panic!() };
        assert_eq!(v.suites(), vec![Suite::Oracle]);
        assert_eq!(v.global.configs, 10);
        assert_eq!(v.global.n_bath, 64);
    }
}
