//! The `xyprobe` command line.
//!
//! ```text
//! xyprobe gamma    --n-sites 8 --gamma 1 --lambda 0.5 --t 1 --bra 11 --ket 00
//! xyprobe sweep    --config run.conf --output surface.csv
//! xyprobe fidelity --lambda -2:2:201 --gamma 1
//! xyprobe validate --seed 0
//! xyprobe detect   --input surface.csv --axis lambda
//! ```
//!
//! Every flag mirrors a config key. Exit codes: 0 success, 1 usage or config
//! error, 2 a validation failure.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decoherence::BranchSpectra;
use crate::oracle::{oracle_gamma, oracle_tensor};
use crate::spectrum::{BranchIndex, ChainParams, CouplingParams};
use crate::sweep::{detect_critical, run_sweep_parallel, stability_from_rows, CriticalAxis, SweepRow};
use crate::{gamma_factor, gamma_tensor, C64};

pub use config::{parse_config, Command, ConfigError, Method, Origin, RunConfig, Settings};

/// Formula-vs-oracle agreement required by `validate`.
pub const VALIDATE_TOL: f64 = 1e-8;

pub const SWEEP_HEADER: &str = "lambda,gamma,t,concurrence,g00_01,g00_10,g00_11,g01_10,g01_11,g10_11";
pub const FIDELITY_HEADER: &str = "lambda,gamma,f00_01,f00_10,f00_11,f01_10,f01_11,f10_11";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{failed} of {total} validation cases failed")]
    ValidationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed { .. } => 2,
            _ => 1,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "xyprobe",
    version,
    about = "Two probe spins coupled to an XY chain: decoherence, concurrence, critical sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Print one decoherence-tensor entry as `re,im`.
    Gamma,
    /// Concurrence and |Γ| over a parameter grid, as CSV.
    Sweep,
    /// Branch ground-state overlaps over a (λ, γ) grid, as CSV.
    Fidelity,
    /// Compare the closed form against brute-force pair evolution on seeded random cases.
    Validate,
    /// Report concurrence peaks and steepest changes from a sweep CSV.
    Detect,
}

#[derive(Debug, Args)]
struct Opts {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    n_sites: Option<String>,
    /// Value or `min:max:points`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Value or `min:max:points`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Time: value or `min:max:points`.
    #[arg(long = "t", global = true, allow_hyphen_values = true)]
    time: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_a: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_b: Option<String>,
    /// plus_plus, phi_plus or psi_plus.
    #[arg(long, global = true)]
    initial: Option<String>,
    #[arg(long, global = true)]
    workers: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    output: Option<String>,
    #[arg(long, global = true)]
    input: Option<String>,
    /// Branch as two bits, e.g. `11`.
    #[arg(long, global = true)]
    bra: Option<String>,
    #[arg(long, global = true)]
    ket: Option<String>,
    /// lambda or gamma.
    #[arg(long, global = true)]
    axis: Option<String>,
    /// Number of random validation cases.
    #[arg(long, global = true)]
    cases: Option<String>,
    /// formula or oracle.
    #[arg(long, global = true)]
    method: Option<String>,
}

impl Opts {
    fn overrides(&self) -> [(&'static str, &Option<String>); 18] {
        [
            ("n_sites", &self.n_sites),
            ("lambda", &self.lambda),
            ("gamma", &self.gamma),
            ("t", &self.time),
            ("g", &self.g),
            ("h", &self.h),
            ("omega_a", &self.omega_a),
            ("omega_b", &self.omega_b),
            ("initial", &self.initial),
            ("workers", &self.workers),
            ("seed", &self.seed),
            ("output", &self.output),
            ("input", &self.input),
            ("bra", &self.bra),
            ("ket", &self.ket),
            ("axis", &self.axis),
            ("cases", &self.cases),
            ("method", &self.method),
        ]
    }
}

/// Parse `args` (program name first), run, and return the exit code.
/// Reports go to `out`, diagnostics to `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut settings = match &cli.opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Settings::parse(&text)?
        }
        None => Settings::default(),
    };
    for (key, value) in cli.opts.overrides() {
        if let Some(v) = value {
            settings.set_flag(key, v.clone())?;
        }
    }
    if let Some(cmd) = &cli.command {
        let name = match cmd {
            Cmd::Gamma => "gamma",
            Cmd::Sweep => "sweep",
            Cmd::Fidelity => "fidelity",
            Cmd::Validate => "validate",
            Cmd::Detect => "detect",
        };
        settings.set_flag("command", name)?;
    }
    let cfg = settings.build()?;
    match cfg.command {
        Some(Command::Gamma) => cmd_gamma(&cfg, out),
        Some(Command::Sweep) => cmd_sweep(&cfg, out),
        Some(Command::Fidelity) => cmd_fidelity(&cfg, out),
        Some(Command::Validate) => cmd_validate(&cfg, out),
        Some(Command::Detect) => cmd_detect(&cfg, out),
        None => Err(CliError::Usage("no command given (use a subcommand or `command = ...` in the config)".into())),
    }
}

/// `%.15g`: 15 significant digits, trailing zeros dropped, `0` for either zero.
pub fn format_g15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.14e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..15).contains(&exp) {
        let decimals = (14 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn format_complex(z: C64) -> String {
    format!("{},{}", format_g15(z.re), format_g15(z.im))
}

fn cmd_gamma(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let chain = cfg.chain_point()?;
    let t = cfg.fixed("t")?;
    let coupling = coupling(cfg)?;
    let z = match cfg.method {
        Method::Formula => gamma_factor(&chain, &coupling, cfg.bra, cfg.ket, t),
        Method::Oracle => oracle_gamma(&chain, &coupling, cfg.bra, cfg.ket, t)?,
    };
    writeln!(out, "{}", format_complex(z)).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn coupling(cfg: &RunConfig) -> Result<CouplingParams, CliError> {
    let c = cfg.coupling;
    Ok(CouplingParams::with_splittings(c.g, c.h, c.omega_a, c.omega_b)?)
}

/// One CSV line per row, `{}` float formatting (shortest round-trip).
pub fn write_sweep_csv(rows: &[SweepRow], w: &mut dyn Write) -> io::Result<()> {
    let mut buf = String::with_capacity(64 * (rows.len() + 1));
    buf.push_str(SWEEP_HEADER);
    buf.push('\n');
    for r in rows {
        let _ = write!(buf, "{},{},{},{}", r.lambda, r.gamma, r.t, r.concurrence);
        for m in r.gamma_offdiag_abs {
            let _ = write!(buf, ",{m}");
        }
        buf.push('\n');
    }
    w.write_all(buf.as_bytes())
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == SWEEP_HEADER => {}
        Some((_, h)) => return Err(format!("line 1: expected header `{SWEEP_HEADER}`, got `{h}`")),
        None => return Err("empty file".into()),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("line {}: {e}", idx + 1))?;
        if vals.len() != 10 {
            return Err(format!("line {}: expected 10 fields, got {}", idx + 1, vals.len()));
        }
        rows.push(SweepRow {
            lambda: vals[0],
            gamma: vals[1],
            t: vals[2],
            concurrence: vals[3],
            gamma_offdiag_abs: [vals[4], vals[5], vals[6], vals[7], vals[8], vals[9]],
            overlap_extremes: None,
        });
    }
    Ok(rows)
}

fn emit(cfg: &RunConfig, bytes: &[u8], out: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => out.write_all(bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let mut spec = cfg.sweep_spec();
    spec.coupling = coupling(cfg)?;
    let rows = run_sweep_parallel(&spec, cfg.workers)?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).expect("writing to memory");
    emit(cfg, &buf, out)
}

fn cmd_fidelity(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let coupling = coupling(cfg)?;
    let points: Vec<(f64, f64)> =
        cfg.lambda.values().into_iter().flat_map(|l| cfg.gamma.values().into_iter().map(move |g| (l, g))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| cfg.error("workers", e.to_string()))?;
    let lines: Vec<Result<String, CliError>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(lambda, gamma)| {
                let chain = ChainParams::new(cfg.n_sites, gamma, lambda)?;
                let spectra = BranchSpectra::new(&chain, &coupling);
                let mut line = format!("{lambda},{gamma}");
                for (a, b) in BranchIndex::OFF_DIAGONAL {
                    let _ = write!(line, ",{}", spectra.overlap(a, b));
                }
                line.push('\n');
                Ok(line)
            })
            .collect()
    });
    let mut buf = String::from(FIDELITY_HEADER);
    buf.push('\n');
    for l in lines {
        buf.push_str(&l?);
    }
    emit(cfg, buf.as_bytes(), out)
}

/// One randomized formula-vs-oracle comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationCase {
    pub label: String,
    pub chain: ChainParams,
    pub coupling: CouplingParams,
    pub t: f64,
    /// Compare only `bra == ket` entries.
    pub diagonal_only: bool,
}

/// `cases` seeded random cases, then a `t = 0` case and a diagonal-only case.
pub fn validation_cases(seed: u64, cases: usize) -> Vec<ValidationCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = [8usize, 16, 64, 256];
    let draw = |label: String, rng: &mut ChaCha8Rng| {
        let n = sizes[rng.gen_range(0..sizes.len())];
        let chain = ChainParams::new(n, rng.gen_range(0.0..1.0), rng.gen_range(-2.0..2.0)).expect("valid sample");
        let coupling = CouplingParams::new(rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1)).expect("valid sample");
        let t = rng.gen_range(0.0..10.0);
        ValidationCase { label, chain, coupling, t, diagonal_only: false }
    };
    let mut out: Vec<ValidationCase> = (0..cases).map(|i| draw(format!("random {i}"), &mut rng)).collect();
    let mut zero = draw("t=0".into(), &mut rng);
    zero.t = 0.0;
    out.push(zero);
    let mut diag = draw("bra==ket".into(), &mut rng);
    diag.diagonal_only = true;
    out.push(diag);
    out
}

/// Largest `|formula - oracle|` over the compared entries.
pub fn validation_delta(case: &ValidationCase) -> crate::Result<f64> {
    let formula = gamma_tensor(&case.chain, &case.coupling, case.t);
    let oracle = oracle_tensor(&case.chain, &case.coupling, case.t)?;
    let mut worst: f64 = 0.0;
    for a in BranchIndex::ALL {
        for b in BranchIndex::ALL {
            if !case.diagonal_only || a == b {
                worst = worst.max((formula.get(a, b) - oracle.get(a, b)).norm());
            }
        }
    }
    Ok(worst)
}

fn cmd_validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let cases = validation_cases(cfg.seed, cfg.cases);
    let mut report = String::new();
    let mut failed = 0;
    for c in &cases {
        let head = format!(
            "{:<12} N={:<4} lambda={:+.6} gamma={:.6} g={:.6} h={:.6} t={:.6}",
            c.label,
            c.chain.n_sites(),
            c.chain.lambda(),
            c.chain.gamma(),
            c.coupling.g,
            c.coupling.h,
            c.t
        );
        match validation_delta(c) {
            Ok(d) if d < VALIDATE_TOL => {
                let _ = writeln!(report, "{head}  max|delta|={d:.3e}  PASS");
            }
            Ok(d) => {
                failed += 1;
                let _ = writeln!(report, "{head}  max|delta|={d:.3e}  FAIL");
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(report, "{head}  error: {e}  FAIL");
            }
        }
    }
    let _ = writeln!(report, "{} cases, {} failed, tolerance {:e}", cases.len(), failed, VALIDATE_TOL);
    out.write_all(report.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    if failed > 0 {
        return Err(CliError::ValidationFailed { failed, total: cases.len() });
    }
    Ok(())
}

fn fmt_list(xs: &[f64]) -> String {
    if xs.is_empty() {
        return "(none)".into();
    }
    xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn cmd_detect(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let path = cfg.input.as_ref().ok_or_else(|| cfg.error("input", "detect needs an input CSV"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows = read_sweep_csv(&text).map_err(|m| cfg.error("input", m))?;
    let axis = cfg.axis;
    let report = detect_critical(&rows, axis)?;
    let other = match axis {
        CriticalAxis::Lambda => "gamma",
        CriticalAxis::Gamma => "lambda",
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "critical features along {axis} ({} rows, {} cut{})",
        rows.len(),
        report.cuts.len(),
        if report.cuts.len() == 1 { "" } else { "s" }
    );
    let _ = writeln!(s, "peaks:             {}", fmt_list(&report.peak_locations));
    let _ = writeln!(s, "steepest changes:  {}", fmt_list(&report.gradient_max_locations));
    for cut in &report.cuts {
        let _ = writeln!(
            s,
            "  {other}={} t={}: max C={:.6e}; peaks [{}]; steepest [{}]",
            cut.fixed[0],
            cut.fixed[1],
            cut.max_concurrence,
            fmt_list(&cut.peaks),
            fmt_list(&cut.gradient_maxima)
        );
    }
    let distinct_t = {
        let mut ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.len()
    };
    if distinct_t >= 2 {
        if let Ok(st) = stability_from_rows(&rows, axis) {
            let _ = writeln!(s, "peak stability across {} times: max deviation {}", st.times.len(), st.max_deviation);
        }
    }
    out.write_all(s.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g15_formatting() {
        assert_eq!(format_g15(1.0), "1");
        assert_eq!(format_g15(0.0), "0");
        assert_eq!(format_g15(-0.0), "0");
        assert_eq!(format_g15(0.8177154574245901), "0.81771545742459");
        assert_eq!(format_g15(-2.5), "-2.5");
        assert_eq!(format_g15(1.5e-7), "1.5e-07");
        assert_eq!(format_g15(123456789012345678.0), "1.23456789012346e+17");
        assert_eq!(format_g15(0.0001), "0.0001");
        assert_eq!(format_g15(1e15), "1e+15");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![SweepRow {
            lambda: -1.25,
            gamma: 1.0,
            t: 0.1,
            concurrence: 3.0e-9,
            gamma_offdiag_abs: [1.0, 0.5, 0.25, 1.0, 0.125, 0.0625],
            overlap_extremes: None,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(SWEEP_HEADER) && !text.contains('\r'));
        assert_eq!(read_sweep_csv(&text).unwrap(), rows);
        assert!(read_sweep_csv("a,b\n").is_err());
    }

    #[test]
    fn validation_cases_are_seeded() {
        let a = validation_cases(7, 5);
        assert_eq!(a, validation_cases(7, 5));
        assert_ne!(a[0], validation_cases(8, 5)[0]);
        assert_eq!(a.len(), 7);
        assert_eq!(a[5].t, 0.0);
        assert_eq!(validation_delta(&a[5]).unwrap(), 0.0);
        assert_eq!(validation_delta(&a[6]).unwrap(), 0.0);
    }
}
