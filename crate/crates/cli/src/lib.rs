//! `ucx`: modulus tables, verification suites, envelope slices and
//! brute-force probes.
//!
//! Exit codes: 0 success, 1 a mathematical check failed, 2 usage error.

pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ucx_core::bellman::{brute_force_b, witness_test, BellmanError, SearchBudget};
use ucx_core::certificates::{
    certificate_for, sharpness_check, touching_check, verify_appendix, CertError, Regime, VerificationReport,
    DEFAULT_S_MAX,
};
use ucx_core::domain::{contains, slice_point, BoundaryFace, FACE_TOL};
use ucx_core::envelope::{default_radius, sample_boundary, slice_table, SliceRow};
use ucx_core::moduli::{cross_check_residual, delta, route_for};
use ucx_core::numerics::linspace;
use ucx_core::{Exponent, LambdaPoint, ModulusQuery, Theta};

pub use output::{fmt_num, Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Chord points for the sharpness scans.
pub const CHORD_POINTS: usize = 1001;
/// Probe parameters for the `p >= 2` chord.
pub const SHARPNESS_PROBES: [f64; 2] = [1e3, 1e6];

#[derive(Debug, Parser)]
#[command(name = "ucx", version, about = "Sharp modulus of uniform convexity of L^p, with numerical certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// δ(ε) over an ε grid, with the route used and the cross-check residual.
    Table(TableArgs),
    /// Appendix scans, sharpness, touching and witness checks.
    Verify(VerifyArgs),
    /// The envelope slice B̂(1,1,x3) beside the certificate and brute force.
    Envelope(EnvelopeArgs),
    /// Brute-force lower bound for the Bellman function at one point.
    Bruteforce(BruteArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    /// A single value or `lo:hi:n`.
    #[arg(long, default_value = "0:2:21", allow_hyphen_values = true)]
    pub eps: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    #[arg(long, default_value_t = 10001)]
    pub grid_n: usize,
    /// Random pairs for the witness test.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Number of x3 points on [0, 2^p].
    #[arg(long, default_value_t = 25)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 60)]
    pub n_per_face: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub local_steps: usize,
}

#[derive(Debug, Args)]
pub struct BruteArgs {
    #[command(flatten)]
    pub common: Common,
    /// The point as `x1,x2,x3`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub local_steps: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(io::Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

type CmdResult = Result<bool, CliError>;

fn exponent(p: f64) -> Result<Exponent, CliError> {
    Exponent::new(p).map_err(usage)
}

fn parse_real(s: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| usage(format!("not a number: {s:?}")))
}

/// `v` or `lo:hi:n`, every value in `[0, 2]`.
pub fn parse_eps_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts[..] {
        [v] => vec![parse_real(v)?],
        [lo, hi, n] => {
            let n: usize = n.trim().parse().map_err(|_| usage(format!("bad count in {spec:?}")))?;
            if n == 0 {
                return Err(usage("epsilon grid needs at least one point"));
            }
            linspace(parse_real(lo)?, parse_real(hi)?, n)
        }
        _ => return Err(usage(format!("epsilon must be a value or lo:hi:n, got {spec:?}"))),
    };
    if let Some(e) = grid.iter().find(|e| !(0.0..=2.0).contains(*e)) {
        return Err(usage(format!("epsilon={e} must lie in [0, 2]")));
    }
    Ok(grid)
}

fn parse_single_eps(spec: Option<&str>) -> Result<Option<f64>, CliError> {
    match spec {
        None => Ok(None),
        Some(s) => match parse_eps_grid(s)?[..] {
            [e] => Ok(Some(e)),
            _ => Err(usage("this command takes a single epsilon")),
        },
    }
}

/// `x1,x2,x3` with nonnegative finite coordinates.
pub fn parse_point(spec: &str) -> Result<LambdaPoint, CliError> {
    let coords = spec.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?;
    let [x1, x2, x3] = coords[..] else {
        return Err(usage(format!("point must be x1,x2,x3, got {spec:?}")));
    };
    if coords.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(usage(format!("negative or non-finite coordinate in {spec:?}")));
    }
    Ok(LambdaPoint::new(x1, x2, x3))
}

fn lt2_needs_eps(p: Exponent, eps: Option<f64>) -> Result<(), CliError> {
    if Regime::of(p) == Regime::Lt2 && eps.is_none() {
        return Err(usage(CertError::MissingEpsilon));
    }
    Ok(())
}

pub fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> CmdResult {
    let p = exponent(args.common.p)?;
    let mut table = Table::new(&["p", "eps", "delta", "route", "cross_check_residual"]);
    for eps in parse_eps_grid(&args.eps)? {
        let q = ModulusQuery::new(p, eps).map_err(usage)?;
        let d = delta(q).map_err(usage)?;
        let resid = cross_check_residual(q).map_err(usage)?;
        table.push(vec![
            Cell::Num(p.get()),
            Cell::Num(eps),
            Cell::Num(d),
            Cell::Text(route_for(p).to_string()),
            Cell::Num(resid),
        ]);
    }
    table.write(args.common.format.unwrap_or(Format::Csv), out)?;
    Ok(true)
}

/// Every report `verify` prints, in output order.
pub fn verification_reports(p: Exponent, eps: Option<f64>, grid_n: usize, trials: usize, seed: u64) -> Result<Vec<VerificationReport>, CliError> {
    lt2_needs_eps(p, eps)?;
    let mut reports = verify_appendix(p, eps, grid_n, DEFAULT_S_MAX).map_err(usage)?;
    match Regime::of(p) {
        Regime::Ge2 => {
            let probes: Vec<VerificationReport> = SHARPNESS_PROBES
                .iter()
                .map(|&s| {
                    let mut r = sharpness_check(p, 1.0, s, CHORD_POINTS)?;
                    r.claim = format!("{}_s{s:e}", r.claim);
                    Ok(r)
                })
                .collect::<Result<_, CertError>>()
                .map_err(usage)?;
            let (near, far) = (probes[0].worst_value, probes[1].worst_value);
            let shrink = VerificationReport::new("sharpness_gap_shrinks", 2, far - near, SHARPNESS_PROBES[1], far < near);
            reports.extend(probes);
            reports.push(shrink);
        }
        Regime::Lt2 => {
            let e = eps.expect("checked above");
            reports.push(sharpness_check(p, e, 0.0, CHORD_POINTS).map_err(usage)?);
        }
    }
    let cert = certificate_for(p, eps).map_err(usage)?;
    reports.push(touching_check(&cert).map_err(usage)?);
    reports.push(witness_test(p, eps.unwrap_or(1.0), trials, seed).map_err(usage)?);
    Ok(reports)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let p = exponent(args.common.p)?;
    let eps = parse_single_eps(args.eps.as_deref())?;
    let reports = verification_reports(p, eps, args.grid_n, args.trials, args.common.seed)?;
    let all_pass = reports.iter().all(|r| r.pass);
    match args.common.format.unwrap_or(Format::Text) {
        Format::Text => {
            for r in &reports {
                writeln!(out, "{r}")?;
            }
        }
        format => {
            let mut table = Table::new(&["claim", "pass", "worst_value", "worst_arg", "grid"]);
            for r in &reports {
                table.push(vec![
                    Cell::Text(r.claim.clone()),
                    Cell::Bool(r.pass),
                    Cell::Num(r.worst_value),
                    Cell::Num(r.worst_arg),
                    Cell::Int(r.grid as u64),
                ]);
            }
            table.write(format, out)?;
        }
    }
    Ok(all_pass)
}

/// The slice rows the `envelope` command prints. For `p < 2` the chord
/// endpoints at `s*` are added to the sampled boundary.
pub fn envelope_rows(args: &EnvelopeArgs) -> Result<Vec<SliceRow>, CliError> {
    let p = exponent(args.common.p)?;
    let eps = parse_single_eps(args.eps.as_deref())?;
    lt2_needs_eps(p, eps)?;
    if args.grid_n < 2 {
        return Err(usage("grid-n must be at least 2"));
    }
    let budget = SearchBudget::new(args.restarts, args.local_steps, args.common.seed, 1e8).map_err(usage)?;
    let theta = Theta::HALF;
    let mut grid = sample_boundary(p, theta, args.n_per_face, default_radius(p, eps)).map_err(usage)?;
    let cert = certificate_for(p, eps).map_err(usage)?;
    if let Some(s) = cert.meta.s_star.filter(|&s| s > p.slice_min()) {
        let a = slice_point(s, p, false).map_err(usage)?;
        grid = grid.with_points(&[a, a.swapped()]).map_err(usage)?;
    }
    let x3 = linspace(0.0, p.get().exp2(), args.grid_n);
    slice_table(p, theta, eps, &x3, &grid, &budget).map_err(usage)
}

pub fn cmd_envelope(args: &EnvelopeArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let rows = envelope_rows(args)?;
    let mut table = Table::new(&SliceRow::FIELDS);
    for r in &rows {
        table.push(r.values().iter().map(|&v| Cell::Num(v)).collect());
        if !r.ok {
            writeln!(err, "sandwich violated at x3={}", fmt_num(r.x3))?;
        }
    }
    table.write(args.common.format.unwrap_or(Format::Csv), out)?;
    Ok(rows.iter().all(|r| r.ok))
}

pub fn cmd_bruteforce(args: &BruteArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let p = exponent(args.common.p)?;
    let x = parse_point(&args.x)?;
    let budget = SearchBudget::new(args.restarts, args.local_steps, args.common.seed, 1e8).map_err(usage)?;
    if contains(x, p, FACE_TOL).map_err(usage)? == BoundaryFace::Outside {
        writeln!(err, "point {x} lies outside the moment cone for p={p}")?;
        return Ok(false);
    }
    let r = match brute_force_b(x, p, Theta::HALF, &budget) {
        Ok(r) => r,
        Err(BellmanError::InfeasibleStart(x)) => {
            writeln!(err, "point {x} lies outside the moment cone for p={p}")?;
            return Ok(false);
        }
        Err(e) => return Err(usage(e)),
    };
    match args.common.format.unwrap_or(Format::Text) {
        Format::Text => write!(out, "{r}")?,
        format => {
            let mut table = Table::new(&["value", "residual", "w", "f", "g"]);
            for a in r.witness.atoms() {
                table.push(
                    [r.value, r.residual, a.weight, a.f, a.g].iter().map(|&v| Cell::Num(v)).collect(),
                );
            }
            table.write(format, out)?;
        }
    }
    Ok(true)
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Table(a) => cmd_table(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Envelope(a) => cmd_envelope(a, out, err),
        Command::Bruteforce(a) => cmd_bruteforce(a, out, err),
    }
}

fn output_path(cli: &Cli) -> Option<&PathBuf> {
    let common = match &cli.command {
        Command::Table(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Envelope(a) => &a.common,
        Command::Bruteforce(a) => &a.common,
    };
    common.output.as_ref()
}

/// `UCX_THREADS` caps the worker pool; unset means all cores.
fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("UCX_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!("UCX_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let cap = thread_cap()?;
    let run_buffered = || {
        let (mut body, mut notes) = (Vec::new(), Vec::new());
        let result = dispatch(cli, &mut body, &mut notes);
        (result, body, notes)
    };
    let (result, body, notes) = match cap {
        None => run_buffered(),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(usage)?.install(run_buffered),
    };
    err.write_all(&notes)?;
    match output_path(cli) {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            file.write_all(&body)?;
            file.flush()?;
        }
        None => out.write_all(&body)?,
    }
    result
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
