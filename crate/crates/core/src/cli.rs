//! Command-line front end for `svbound`.
//!
//! JSON floats carry 17 significant digits (round-trip exact); CSV floats
//! carry 9. Angles are radians unless `--degrees` is given. Every command
//! takes `--seed` (default 0); nothing reads the clock.
//!
//! Exit codes: 0 success, 1 usage, 2 state validation, 3 numerical or I/O.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::correlation::{correlation_tensor, singular_spectrum, unfold};
use crate::error::Error;
use crate::families::{
    gme_lower_bound, realize, scan, violation_threshold, violation_threshold_bisection, FamilyKind, FamilySpec,
    GhzClassParams, ScanFamily, ScanRow, Threshold, GHZ_COLOR_BILOCAL_BOUND, GHZ_WHITE_GME_THRESHOLD,
};
use crate::optimizer::{maximize, OptimizerConfig};
use crate::qcore::{validate_density, ComplexMatrix, DensityMatrix};
use crate::svetlichny::{quantum_bound_with, tightness_certificate_with, Certificate, MeasurementSettings};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CSV_HEADER: &str = "theta,theta3,p,lambda1,q_bound,violates,gme_lb";
const JSON_DIGITS: usize = 17;
const CSV_DIGITS: usize = 9;

#[derive(Debug, Parser)]
#[command(name = "svbound", version, about = "Svetlichny-operator bound 4λ₁, see-saw oracle and noisy GHZ families")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular spectrum, 4λ₁ and the violation verdict.
    Bound {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = 50)]
        starts: usize,
    },
    /// Multistart see-saw maximization of |⟨S⟩|.
    Optimize {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = 50)]
        starts: usize,
        /// Per-sweep improvement below which a start stops.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
    },
    /// Mixing weight above which a family violates the inequality.
    Threshold {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Grid of family states written as CSV.
    Scan(ScanArgs),
    /// Settings that attain 4λ₁, if any.
    Certify {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        starts: usize,
    },
    /// GME-concurrence lower bounds.
    Gme {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Write a state in the canonical state-file format.
    ExportState {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    GhzWhite,
    GhzColor,
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// State file: {"dim": 8, "matrix": 8×8 of [re, im]}.
    #[arg(long, conflicts_with = "family")]
    pub state: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Read --theta/--theta3 in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta3: Option<f64>,
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    /// Comma-separated θ values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// Comma-separated θ₃ values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta3: Vec<f64>,
    /// Comma-separated p values.
    #[arg(long, value_delimiter = ',', conflicts_with = "p_range")]
    pub p: Vec<f64>,
    /// START,STOP,STEP (inclusive of STOP).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub p_range: Vec<f64>,
    #[arg(long)]
    pub degrees: bool,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Validation(_) | Error::NotNormalized(_) | Error::NonFinite(_) | Error::Dimension { .. } => {
                CliError::Validation(msg)
            }
            Error::OutOfRange { .. }
            | Error::Config(_)
            | Error::EmptyGrid
            | Error::PauliIndex(_)
            | Error::NotUnit { .. } => CliError::Usage(msg),
            Error::NotHermitian(_) | Error::NotRotation(_) | Error::Numerical(_) => CliError::Numerical(msg),
        }
    }
}

/// What a command produced: text for standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the canonicalized input.
    pub input_digest: String,
    pub seed: u64,
    pub version: &'static str,
    pub results: Value,
}

/// `%.{digits}g`-style formatting, always a valid JSON number.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", strip_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Pretty JSON whose floats use [`format_sig`] with 17 digits.
struct SigFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_sig(value, JSON_DIGITS).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        SigFormatter {
            inner: PrettyFormatter::new(),
        },
    );
    value.serialize(&mut ser).expect("serializing to memory");
    let mut s = String::from_utf8(buf).expect("JSON is UTF-8");
    s.push('\n');
    s
}

#[derive(Debug, Serialize, Deserialize)]
struct StateFile {
    dim: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Canonical state-file text for a density matrix.
pub fn write_state(rho: &DensityMatrix) -> String {
    let m = rho.matrix();
    let file = StateFile {
        dim: 8,
        matrix: (0..8)
            .map(|r| (0..8).map(|c| [m.get(r, c).re, m.get(r, c).im]).collect())
            .collect(),
    };
    to_json(&file)
}

/// Parses and validates a state file.
pub fn parse_state(text: &str) -> Result<DensityMatrix, CliError> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed state file: {e}")))?;
    if file.dim != 8 {
        return Err(CliError::Validation(format!("state dim is {}, expected 8", file.dim)));
    }
    if file.matrix.len() != 8 || file.matrix.iter().any(|row| row.len() != 8) {
        return Err(CliError::Validation("state matrix must be 8x8".into()));
    }
    let data: Vec<Complex64> = file
        .matrix
        .iter()
        .flatten()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    let raw = ComplexMatrix::from_row_major(8, data)?;
    validate_density(&raw).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Numerical(format!("cannot read {}: {e}", path.display())))?;
    parse_state(&text)
}

fn digest(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn angle(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_radians()
    } else {
        v
    }
}

fn family_kind(
    name: FamilyName,
    theta: Option<f64>,
    theta3: Option<f64>,
    degrees: bool,
) -> Result<FamilyKind, CliError> {
    match name {
        FamilyName::GhzWhite => {
            let (Some(t), Some(t3)) = (theta, theta3) else {
                return Err(CliError::Usage("ghz-white needs --theta and --theta3".into()));
            };
            Ok(FamilyKind::GhzWhiteNoise(GhzClassParams::new(
                angle(t, degrees),
                angle(t3, degrees),
            )?))
        }
        FamilyName::GhzColor => {
            if theta.is_some() || theta3.is_some() {
                return Err(CliError::Usage("--theta/--theta3 do not apply to ghz-color".into()));
            }
            Ok(FamilyKind::GhzColorNoiseA)
        }
    }
}

fn canonical_kind(kind: &FamilyKind) -> String {
    match kind {
        FamilyKind::GhzWhiteNoise(params) => format!(
            "family=ghz-white;theta={};theta3={}",
            format_sig(params.theta(), JSON_DIGITS),
            format_sig(params.theta3(), JSON_DIGITS)
        ),
        FamilyKind::GhzColorNoiseA => "family=ghz-color".into(),
    }
}

/// Loads the state named by `--state` or the family flags, with the
/// canonical text used for the input digest.
pub fn load_state(args: &StateArgs) -> Result<(DensityMatrix, String), CliError> {
    match (&args.state, args.family) {
        (Some(path), None) => {
            if args.theta.is_some() || args.theta3.is_some() || args.p.is_some() {
                return Err(CliError::Usage("family flags cannot be combined with --state".into()));
            }
            let rho = read_state(path)?;
            let canonical = write_state(&rho);
            Ok((rho, canonical))
        }
        (None, Some(name)) => {
            let kind = family_kind(name, args.theta, args.theta3, args.degrees)?;
            let p = args
                .p
                .ok_or_else(|| CliError::Usage("--family needs --p".into()))?;
            let rho = realize(&FamilySpec::new(kind, p)?)?;
            let canonical = format!("{};p={}", canonical_kind(&kind), format_sig(p, JSON_DIGITS));
            Ok((rho, canonical))
        }
        (None, None) => Err(CliError::Usage("give either --state FILE or --family".into())),
        (Some(_), Some(_)) => Err(CliError::Usage("--state and --family are exclusive".into())),
    }
}

pub fn settings_json(s: &MeasurementSettings) -> Value {
    json!({
        "a": s.a.components(),
        "a_prime": s.a_prime.components(),
        "b": s.b.components(),
        "b_prime": s.b_prime.components(),
        "c": s.c.components(),
        "c_prime": s.c_prime.components(),
    })
}

fn certificate_json(cert: &Certificate) -> Value {
    json!({
        "settings": settings_json(&cert.settings),
        "achieved": cert.achieved,
        "residual": cert.residual,
        "method": cert.method.as_str(),
    })
}

fn optimizer_config(starts: usize, seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        starts,
        seed,
        ..OptimizerConfig::default()
    }
}

fn report(command: &str, canonical: &str, seed: u64, results: Value) -> Output {
    Output {
        stdout: to_json(&RunReport {
            command: command.into(),
            input_digest: digest(canonical),
            seed,
            version: VERSION,
            results,
        }),
    }
}

/// One CSV line per row, header first, LF endings.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_sig(r.theta, CSV_DIGITS),
            format_sig(r.theta3, CSV_DIGITS),
            format_sig(r.p, CSV_DIGITS),
            format_sig(r.lambda1, CSV_DIGITS),
            format_sig(r.q_bound, CSV_DIGITS),
            r.violates,
            format_sig(r.gme_lb, CSV_DIGITS),
        );
    }
    out
}

fn p_grid(args: &ScanArgs) -> Result<Vec<f64>, CliError> {
    if !args.p_range.is_empty() {
        let [start, stop, step] = args.p_range[..] else {
            return Err(CliError::Usage("--p-range takes START,STOP,STEP".into()));
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(CliError::Usage("--p-range needs STEP > 0 and STOP >= START".into()));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // Multiply rather than accumulate so values do not drift.
        return Ok((0..count).map(|n| (start + n as f64 * step).min(stop)).collect());
    }
    if args.p.is_empty() {
        return Err(CliError::Usage("scan needs --p or --p-range".into()));
    }
    Ok(args.p.clone())
}

fn run_scan(args: &ScanArgs, seed: u64) -> Result<Output, CliError> {
    let ps = p_grid(args)?;
    let family = match args.family {
        FamilyName::GhzWhite => {
            if args.theta.is_empty() || args.theta3.is_empty() {
                return Err(CliError::Usage("ghz-white scan needs --theta and --theta3".into()));
            }
            let mut params = Vec::new();
            for &t in &args.theta {
                for &t3 in &args.theta3 {
                    params.push(GhzClassParams::new(angle(t, args.degrees), angle(t3, args.degrees))?);
                }
            }
            ScanFamily::GhzWhiteNoise { params }
        }
        FamilyName::GhzColor => {
            if !args.theta.is_empty() || !args.theta3.is_empty() {
                return Err(CliError::Usage("--theta/--theta3 do not apply to ghz-color".into()));
            }
            ScanFamily::GhzColorNoiseA
        }
    };
    let rows = scan(&family, &ps)?;
    let csv = scan_csv(&rows);
    let Some(path) = &args.out else {
        return Ok(Output { stdout: csv });
    };
    fs::write(path, &csv).map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))?;

    let canonical = format!(
        "scan;family={:?};theta={:?};theta3={:?};p={:?};degrees={}",
        args.family, args.theta, args.theta3, ps, args.degrees
    );
    let annotation = match args.family {
        FamilyName::GhzWhite => json!({
            "gme_threshold_p": GHZ_WHITE_GME_THRESHOLD,
            "note": "literature value for white-noise GHZ, not computed here",
        }),
        FamilyName::GhzColor => json!({
            "bilocal_model_max_p": GHZ_COLOR_BILOCAL_BOUND,
            "note": "literature value for color-noise GHZ, not computed here",
        }),
    };
    Ok(report(
        "scan",
        &canonical,
        seed,
        json!({
            "out": path.display().to_string(),
            "rows": rows.len(),
            "csv_digest": digest(&csv),
            "annotations": annotation,
        }),
    ))
}

fn threshold_json(t: Threshold) -> Value {
    match t {
        Threshold::Violation(p) => json!(p),
        Threshold::NoViolationForAnyP => Value::Null,
    }
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Bound { state, starts } => {
            let (rho, canonical) = load_state(state)?;
            let r = quantum_bound_with(&rho, &optimizer_config(*starts, seed))?;
            Ok(report(
                "bound",
                &canonical,
                seed,
                json!({
                    "lambda": r.spectrum.values,
                    "q_bound": r.q_bound,
                    "classification": r.classification.as_str(),
                    "degenerate_top": r.spectrum.degenerate_top,
                    "optimizer_value": r.optimizer_value,
                    "certificate": r.certificate.as_ref().map(certificate_json),
                }),
            ))
        }
        Command::Optimize {
            state,
            starts,
            tol,
            max_iterations,
        } => {
            let (rho, canonical) = load_state(state)?;
            let cfg = OptimizerConfig {
                starts: *starts,
                max_iterations: *max_iterations,
                convergence_tol: *tol,
                seed,
            };
            let res = maximize(&rho, &cfg)?;
            let spectrum = singular_spectrum(&unfold(&correlation_tensor(&rho)?));
            Ok(report(
                "optimize",
                &format!("{canonical};starts={starts};tol={};max_iterations={max_iterations}", format_sig(*tol, JSON_DIGITS)),
                seed,
                json!({
                    "best_value": res.best_value,
                    "q_bound": 4.0 * spectrum.values[0],
                    "best_settings": settings_json(&res.best_settings),
                    "best_start": res.best_start,
                    "iterations_used": res.iterations_used,
                    "converged": res.converged,
                    "per_start_values": res.per_start_values,
                    "per_start_converged": res.per_start.iter().map(|o| o.converged).collect::<Vec<_>>(),
                    "per_start_iterations": res.per_start.iter().map(|o| o.iterations).collect::<Vec<_>>(),
                }),
            ))
        }
        Command::Threshold { family } => {
            let kind = family_kind(family.family, family.theta, family.theta3, family.degrees)?;
            let closed = violation_threshold(&kind)?;
            let bisection = violation_threshold_bisection(&kind)?;
            let params = kind.params();
            Ok(report(
                "threshold",
                &canonical_kind(&kind),
                seed,
                json!({
                    "family": kind.name(),
                    "theta": params.theta(),
                    "theta3": params.theta3(),
                    "p_star": threshold_json(closed.p_star),
                    "no_violation_for_any_p": closed.p_star == Threshold::NoViolationForAnyP,
                    "method": "ClosedForm",
                    "bisection_p_star": threshold_json(bisection.p_star),
                }),
            ))
        }
        Command::Scan(args) => run_scan(args, seed),
        Command::Certify { state, tol, starts } => {
            let (rho, canonical) = load_state(state)?;
            let cfg = optimizer_config(*starts, seed);
            let q_bound = 4.0 * singular_spectrum(&unfold(&correlation_tensor(&rho)?)).values[0];
            let canonical = format!("{canonical};tol={}", format_sig(*tol, JSON_DIGITS));
            let results = match tightness_certificate_with(&rho, *tol, &cfg)? {
                Some(cert) => json!({
                    "q_bound": q_bound,
                    "certificate": certificate_json(&cert),
                    "achieved": cert.achieved,
                }),
                None => {
                    let best = maximize(&rho, &cfg)?.best_value;
                    json!({
                        "q_bound": q_bound,
                        "certificate": Value::Null,
                        "best_value": best,
                        "gap": q_bound - best,
                    })
                }
            };
            Ok(report("certify", &canonical, seed, results))
        }
        Command::Gme { state } => {
            let (rho, canonical) = load_state(state)?;
            let g = gme_lower_bound(&rho)?;
            Ok(report(
                "gme",
                &canonical,
                seed,
                json!({
                    "hs_norm_sq": g.hs_norm_sq,
                    "lb_value": g.lb_value,
                    "chain_value": g.chain_value,
                    "clamped_lb": g.clamped_lb,
                }),
            ))
        }
        Command::ExportState { state, out } => {
            let (rho, canonical) = load_state(state)?;
            let text = write_state(&rho);
            match out {
                None => Ok(Output { stdout: text }),
                Some(path) => {
                    fs::write(path, &text)
                        .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))?;
                    Ok(report(
                        "export-state",
                        &canonical,
                        seed,
                        json!({ "out": path.display().to_string(), "state_digest": digest(&text) }),
                    ))
                }
            }
        }
    }
}

/// Parses arguments and runs, returning the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn io::Write, stderr: &mut dyn io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}
