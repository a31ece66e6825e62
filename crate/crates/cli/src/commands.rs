use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qhflux_core::harness::{
    field_map, run_global_suite, run_kernel_suite, run_oracle_suite, run_potential_suite, run_upsilon_suite,
    RegimeClassifier, VerificationReport,
};
use qhflux_core::kernel::{kernel_derivative_log, kernel_tail, kernel_tail_bound, KernelSpec, Which};
use qhflux_core::numeric::LogComplex;
use qhflux_core::oracle::mcmc::{plasma_mcmc_chains, radial_density_check, write_dump, PlasmaConfig};
use qhflux_core::oracle::{charpoly_moment_mc, partition_exact};
use qhflux_core::partition::{log_partition, log_upsilon, upsilon, upsilon_prediction, HoleConfig};
use qhflux_core::potentials::{
    asymptotic_prediction, emergent_field_derivative, emergent_field_integral, EmergentField, IntegralGrids,
};
use qhflux_core::Error;
use serde::Serialize;

use crate::config::{
    CharpolyArgs, Command, FieldMapArgs, FieldMethod, KernelArgs, McmcArgs, OracleArgs, PotentialArgs, ReportArgs,
    RunConfig, UpsilonArgs, VerifyArgs, Suite,
};
use crate::output::{write_json_file, Cell, Table};

pub const DEFAULT_VERIFY_DIR: &str = "qhflux-out";

pub const REPORT_COLUMNS: [&str; 12] =
    ["case_id", "N", "n", "kappa", "gamma", "regime", "quantity", "measured", "predicted", "bound", "ratio", "pass"];

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 2.
    Usage(String),
    /// Anything else that stopped the run: exit code 1.
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(_) | Error::Domain(_) | Error::Coincident(..) | Error::Resource(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failed(format!("i/o error: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

/// Runs the configured command; Ok(false) means a verification row failed.
pub fn run(cfg: &RunConfig) -> Result<bool> {
    match &cfg.command {
        Command::Verify(args) => verify(cfg, args),
        Command::Report(args) => report(cfg, args),
        other => {
            let table = match other {
                Command::Kernel(a) => kernel(a)?,
                Command::Upsilon(a) => upsilon_cmd(a)?,
                Command::Potentials(a) => potentials(a)?,
                Command::FieldMap(a) => field_map_cmd(a)?,
                Command::Mcmc(a) => mcmc(a, cfg.seed)?,
                Command::Charpoly(a) => charpoly(a, cfg.seed)?,
                Command::Oracle(a) => oracle(a)?,
                Command::Verify(_) | Command::Report(_) => unreachable!(),
            };
            emit(cfg, other.name(), &table)?;
            Ok(true)
        }
    }
}

/// Writes to `<out>/<name>.<ext>` plus the config echo, or to stdout.
fn emit(cfg: &RunConfig, name: &str, table: &Table) -> Result<()> {
    match &cfg.output_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            table.write_file(&dir.join(format!("{name}.{}", cfg.format.extension())), cfg.format)?;
            write_json_file(&dir.join("config.json"), cfg)?;
        }
        None => {
            let stdout = io::stdout();
            table.write(stdout.lock(), cfg.format)?;
        }
    }
    Ok(())
}

fn hole_config(n_bath: usize, holes: Vec<Complex64>, b: Option<f64>) -> Result<HoleConfig> {
    let b = b.unwrap_or(n_bath as f64);
    if !(b > 0.0 && b.is_finite()) {
        return usage(format!("b must be positive, got {b}"));
    }
    if n_bath == 0 {
        return usage("N must be at least 1");
    }
    Ok(HoleConfig::with_b(holes, n_bath, b))
}

fn tracer_index(j: usize, n: usize) -> Result<usize> {
    if j == 0 || j > n {
        return usage(format!("tracer index j = {j} out of range 1..={n}"));
    }
    Ok(j - 1)
}

fn log_cells(x: LogComplex) -> Vec<Cell> {
    let z = x.to_complex();
    vec![z.re.into(), z.im.into(), x.abs().into(), x.log_mag.into()]
}

fn kernel(a: &KernelArgs) -> Result<Table> {
    let b = a.b.unwrap_or(a.n_bath as f64);
    let spec = KernelSpec::new(b, a.n_bath + a.holes)?;
    let (z, w, order) = (a.z.0, a.w.0, a.order.order());
    let mut t = Table::new(&["quantity", "re", "im", "abs", "log_abs"]);
    let mut row = |q: &str, x: LogComplex| {
        let mut r = vec![Cell::from(q)];
        r.extend(log_cells(x));
        t.push(r);
    };
    row("K_M", kernel_derivative_log(&spec, z, w, order, Which::Truncated)?);
    row("K_inf", kernel_derivative_log(&spec, z, w, order, Which::Infinite)?);
    row("K_inf - K_M", kernel_tail(&spec, z, w, order)?);
    // the certificate covers the undifferentiated kernel at b = N inside the unit disk
    let bound = if order.total() == 0 && b == a.n_bath as f64 {
        kernel_tail_bound(a.n_bath, z, w).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    t.push(vec!["tail bound".into(), f64::NAN.into(), f64::NAN.into(), bound.into(), bound.ln().into()]);
    Ok(t)
}

fn upsilon_cmd(a: &UpsilonArgs) -> Result<Table> {
    let cfg = hole_config(a.n_bath, a.holes.points(), a.b)?;
    let regime = RegimeClassifier::new(a.kappa, a.gamma).classify(&cfg);
    let u = upsilon(&cfg);
    let pred = upsilon_prediction(&cfg, &regime).unwrap_or(f64::NAN);
    let lp = log_partition(&cfg)?;
    let mut t = Table::new(&[
        "N", "n", "b", "regime", "upsilon", "log_upsilon", "predicted", "deviation", "log_partition",
    ]);
    t.push(vec![
        a.n_bath.into(),
        cfg.n().into(),
        cfg.b.into(),
        regime.to_string().into(),
        u.into(),
        log_upsilon(&cfg).into(),
        pred.into(),
        (u - pred).abs().into(),
        lp.log_value.into(),
    ]);
    Ok(t)
}

fn potentials(a: &PotentialArgs) -> Result<Table> {
    let cfg = hole_config(a.n_bath, a.holes.points(), a.b)?;
    let j = tracer_index(a.j, cfg.n())?;
    let regime = RegimeClassifier::new(a.kappa, a.gamma).classify(&cfg);
    let pred = asymptotic_prediction(&cfg, j, &regime).ok();
    let mut fields: Vec<(&str, EmergentField)> = Vec::new();
    if matches!(a.method, FieldMethod::Derivative | FieldMethod::Both) {
        fields.push(("derivative", emergent_field_derivative(&cfg, j)?));
    }
    if matches!(a.method, FieldMethod::Integral | FieldMethod::Both) {
        fields.push(("integral", emergent_field_integral(&cfg, j, &IntegralGrids::for_tracer(&cfg, j))?));
    }
    let mut t = Table::new(&[
        "method", "regime", "A_x", "A_y", "V", "predicted_A_x", "predicted_A_y", "predicted_V", "deviation_A",
        "deviation_V",
    ]);
    let (px, py, pv) = pred.map_or((f64::NAN, f64::NAN, f64::NAN), |p| (p.a[0], p.a[1], p.v));
    for (name, f) in fields {
        t.push(vec![
            name.into(),
            regime.to_string().into(),
            f.a[0].into(),
            f.a[1].into(),
            f.v.into(),
            px.into(),
            py.into(),
            pv.into(),
            (f.a[0] - px).hypot(f.a[1] - py).into(),
            (f.v - pv).abs().into(),
        ]);
    }
    Ok(t)
}

fn field_map_cmd(a: &FieldMapArgs) -> Result<Table> {
    let cfg = hole_config(a.n_bath, a.holes.points(), a.b)?;
    let j = tracer_index(a.j, cfg.n())?;
    let xs = a.x.values();
    let points: Vec<Complex64> =
        a.y.values().into_iter().flat_map(|y| xs.iter().map(move |&x| Complex64::new(x, y))).collect();
    let rows = field_map(&cfg, j, &points, &RegimeClassifier::new(a.kappa, a.gamma));
    let mut t = Table::new(&[
        "x", "y", "A_x", "A_y", "V", "regime", "predicted_A_x", "predicted_A_y", "predicted_V", "flagged",
    ]);
    for r in rows {
        t.push(vec![
            r.x.into(),
            r.y.into(),
            r.a_x.into(),
            r.a_y.into(),
            r.v.into(),
            r.regime.into(),
            r.predicted_a_x.into(),
            r.predicted_a_y.into(),
            r.predicted_v.into(),
            r.flagged.into(),
        ]);
    }
    Ok(t)
}

fn mcmc(a: &McmcArgs, seed: u64) -> Result<Table> {
    if a.chains == 0 {
        return usage("need at least one chain");
    }
    let b = a.b.unwrap_or(a.n_bath as f64);
    let mut cfg = PlasmaConfig::new(a.n_bath, b, a.holes.points(), a.sweeps, seed);
    cfg.p = a.p;
    cfg.mu = a.mu;
    cfg.thin = a.thin;
    if let Some(burn) = a.burn_in {
        cfg.burn_in = burn;
    }
    if let Some(s) = a.scale {
        cfg.proposal_scale = s;
    }
    let runs = plasma_mcmc_chains(&cfg, a.chains)?;
    let mut t = Table::new(&[
        "chain", "seed", "stream", "samples", "acceptance_rate", "mean_abs_z_sq", "radial_l1", "warning",
    ]);
    for (k, run) in runs.iter().enumerate() {
        let d = &run.diagnostics;
        let count = run.samples.len() * a.n_bath;
        let mean_r2 = run.samples.iter().flat_map(|s| s.positions.iter()).map(|z| z.norm_sqr()).sum::<f64>() / count as f64;
        let l1 = if cfg.is_ginibre() && !run.samples.is_empty() {
            radial_density_check(&cfg, &run.samples, a.bins)?.l1
        } else {
            f64::NAN
        };
        if let Some(w) = &d.warning {
            eprintln!("warning: chain {k}: {w}");
        }
        t.push(vec![
            k.into(),
            d.seed.into(),
            d.stream.into(),
            run.samples.len().into(),
            d.acceptance_rate.into(),
            mean_r2.into(),
            l1.into(),
            d.warning.clone().unwrap_or_default().into(),
        ]);
    }
    if let Some(path) = &a.dump {
        let samples: Vec<_> = runs.into_iter().flat_map(|r| r.samples).collect();
        let mut out = BufWriter::new(fs::File::create(path)?);
        write_dump(&mut out, a.n_bath, &samples)?;
        out.flush()?;
    }
    Ok(t)
}

fn charpoly(a: &CharpolyArgs, seed: u64) -> Result<Table> {
    let cfg = hole_config(a.n_bath, a.holes.points(), a.b)?;
    if a.thin == 0 {
        return usage("thinning must be positive");
    }
    let mut mc = PlasmaConfig::new(a.n_bath, cfg.b, Vec::new(), a.burn_in + a.samples * a.thin, seed);
    mc.burn_in = a.burn_in;
    mc.thin = a.thin;
    let est = charpoly_moment_mc(&cfg, &mc)?;
    let mut t = Table::new(&[
        "N", "n", "samples", "effective_samples", "estimate", "std_error", "exact", "z_score", "log_estimate",
        "log_exact",
    ]);
    t.push(vec![
        a.n_bath.into(),
        cfg.n().into(),
        est.samples.into(),
        est.effective_samples.into(),
        est.log_estimate.exp().into(),
        est.log_std_error.exp().into(),
        est.log_exact.exp().into(),
        est.z_score.into(),
        est.log_estimate.into(),
        est.log_exact.into(),
    ]);
    Ok(t)
}

fn oracle(a: &OracleArgs) -> Result<Table> {
    let cfg = hole_config(a.n_bath, a.holes.points(), a.b)?;
    let closed = log_partition(&cfg)?.log_value;
    let exact = partition_exact(&cfg)?;
    let mut t = Table::new(&["N", "n", "b", "log_partition", "log_partition_exact", "relative_error"]);
    t.push(vec![
        a.n_bath.into(),
        cfg.n().into(),
        cfg.b.into(),
        closed.into(),
        exact.into(),
        (closed - exact).exp_m1().abs().into(),
    ]);
    Ok(t)
}

fn report_table(rep: &VerificationReport) -> Table {
    let mut t = Table::new(&REPORT_COLUMNS);
    for r in &rep.rows {
        t.push(vec![
            r.case_id.clone().into(),
            r.n_bath.into(),
            r.n.into(),
            r.kappa.into(),
            r.gamma.into(),
            r.regime.clone().into(),
            r.quantity.clone().into(),
            r.measured.into(),
            r.predicted.into(),
            r.bound.into(),
            r.ratio.into(),
            r.pass.into(),
        ]);
    }
    t
}

#[derive(Serialize)]
struct SuiteSummary<'a> {
    suite: &'a str,
    rows: usize,
    failures: usize,
    max_ratio: f64,
    notes: &'a [String],
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    seed: u64,
    all_pass: bool,
    suites: Vec<SuiteSummary<'a>>,
}

fn run_suite(s: Suite, v: &VerifyArgs, seed: u64) -> Result<VerificationReport> {
    Ok(match s {
        Suite::Kernel => run_kernel_suite(&v.kernel, seed)?,
        Suite::Upsilon => run_upsilon_suite(&v.upsilon, seed)?,
        Suite::Potentials => run_potential_suite(&v.potentials, seed)?,
        Suite::Global => run_global_suite(&v.global, seed)?,
        Suite::Oracle => run_oracle_suite(&v.oracle, seed)?,
    })
}

fn verify(cfg: &RunConfig, args: &VerifyArgs) -> Result<bool> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_VERIFY_DIR));
    fs::create_dir_all(&dir)?;
    let params = args.resolved();
    let mut reports = Vec::new();
    for s in args.suites() {
        let rep = run_suite(s, &params, cfg.seed)?;
        report_table(&rep).write_file(&dir.join(format!("{}.{}", s.name(), cfg.format.extension())), cfg.format)?;
        println!(
            "{}: {} rows, {} failures, max ratio {}",
            s.name(),
            rep.summary.rows,
            rep.summary.failures,
            rep.summary.max_ratio
        );
        reports.push(rep);
    }
    let all_pass = reports.iter().all(|r| r.all_pass());
    let summary = VerifySummary {
        seed: cfg.seed,
        all_pass,
        suites: reports
            .iter()
            .map(|r| SuiteSummary {
                suite: &r.suite,
                rows: r.summary.rows,
                failures: r.summary.failures,
                max_ratio: r.summary.max_ratio,
                notes: &r.notes,
            })
            .collect(),
    };
    write_json_file(&dir.join("summary.json"), &summary)?;
    let mut echo = cfg.clone();
    echo.output_dir = Some(dir);
    write_json_file(&echo.output_dir.as_ref().unwrap().join("config.json"), &echo)?;
    Ok(all_pass)
}

fn csv_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return usage(format!("no such report file or directory: {}", p.display()));
        }
    }
    if files.is_empty() {
        return usage("no report CSV files found");
    }
    Ok(files)
}

struct FileSummary {
    rows: usize,
    failures: usize,
    max_ratio: f64,
}

fn summarize_csv(path: &Path) -> Result<FileSummary> {
    let bad = |m: String| CliError::Usage(format!("{}: {m}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column {name:?}")));
    let (ci, qi, mi, bi, ri, pi) = (col("case_id")?, col("quantity")?, col("measured")?, col("bound")?, col("ratio")?, col("pass")?);
    let mut s = FileSummary { rows: 0, failures: 0, max_ratio: 0.0 };
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let pass: bool = rec[pi].parse().map_err(|_| bad(format!("bad pass flag {:?}", &rec[pi])))?;
        let ratio: f64 = rec[ri].parse().map_err(|_| bad(format!("bad ratio {:?}", &rec[ri])))?;
        s.rows += 1;
        s.max_ratio = if ratio.is_nan() || s.max_ratio.is_nan() { f64::NAN } else { s.max_ratio.max(ratio) };
        if !pass {
            s.failures += 1;
            eprintln!("FAIL {}: {} {} measured {} bound {}", path.display(), &rec[ci], &rec[qi], &rec[mi], &rec[bi]);
        }
    }
    Ok(s)
}

fn report(cfg: &RunConfig, args: &ReportArgs) -> Result<bool> {
    let mut t = Table::new(&["file", "rows", "failures", "max_ratio"]);
    let mut ok = true;
    for f in csv_inputs(&args.inputs)? {
        let s = summarize_csv(&f)?;
        ok &= s.failures == 0;
        t.push(vec![f.display().to_string().into(), s.rows.into(), s.failures.into(), s.max_ratio.into()]);
    }
    emit(cfg, "report", &t)?;
    Ok(ok)
}
