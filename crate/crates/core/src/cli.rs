//! The `rotsym` command line: argument definitions and JSON-producing handlers.
//!
//! Every handler returns a `serde_json::Value` or a [`CliError`]; the binary only prints
//! and sets the exit code. Exact values are strings (`"p/q"`, `"s*sqrt(p/q)"`), dense
//! matrices are arrays of decimals.

use std::ffi::OsString;
use std::io::Read;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::angular::{self, wigner_6j_oracle};
use crate::bipartite::{x_matrix, BipartiteError, DensityMatrix, SpinPair, XMatrix, XMethod};
use crate::exact::{format_rational, parse_rational, snap_to_rational, Rational, SnapConfig, SqrtRational};
use crate::half::HalfInt;
use crate::multipartite::{self, BinaryMask, MultiFidelity, MultipartiteError};
use crate::numlab;

/// Exit status for malformed or invalid input.
pub const EXIT_INPUT: i32 = 2;
/// Exit status when independent computations disagree.
pub const EXIT_CONSISTENCY: i32 = 3;

/// Fidelities of user matrices are only reported exactly when a small denominator fits
/// to near machine precision; the library default would snap almost any double.
pub const TWIRL_SNAP: SnapConfig = SnapConfig { tolerance: 1e-12, max_denominator: 10_000 };

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{message}")]
    Input { kind: &'static str, message: String },
    #[error("{message}")]
    Consistency { message: String, detail: Value },
}

impl CliError {
    fn input(kind: &'static str, message: impl ToString) -> Self {
        CliError::Input { kind, message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => EXIT_INPUT,
            CliError::Consistency { .. } => EXIT_CONSISTENCY,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Input { kind, message } => {
                json!({"error": {"code": EXIT_INPUT, "kind": kind, "message": message}})
            }
            CliError::Consistency { message, detail } => {
                json!({"error": {"code": EXIT_CONSISTENCY, "kind": "consistency", "message": message, "detail": detail}})
            }
        }
    }
}

impl From<MultipartiteError> for CliError {
    fn from(e: MultipartiteError) -> Self {
        CliError::input("invalid-state", e)
    }
}

impl From<BipartiteError> for CliError {
    fn from(e: BipartiteError) -> Self {
        match e {
            BipartiteError::SnapFailed { .. } => CliError::Consistency { message: e.to_string(), detail: Value::Null },
            e => CliError::input("invalid-spins", e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rotsym", version, about = "Exact algebra of rotationally invariant spin states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clebsch-Gordan, 3-j, 6-j and Racah W coefficients.
    Wigner {
        #[arg(value_enum)]
        kind: WignerKind,
        /// Six spins or projections, e.g. `1/2 -1/2 1 0 3/2 -1/2`.
        #[arg(allow_hyphen_values = true, num_args = 0..)]
        args: Vec<String>,
    },
    /// Partial-transposition matrix X of a spin pair.
    Xmatrix {
        #[arg(allow_hyphen_values = true)]
        ja: String,
        #[arg(allow_hyphen_values = true)]
        jb: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Trace)]
        method: MethodArg,
        /// Also report row sums, X² = I and detailed balance.
        #[arg(long)]
        check: bool,
    },
    /// σ-PPT classification of a state given by its fidelities.
    Classify {
        /// State document: a path, inline JSON, or `-` for stdin.
        input: String,
        /// Emit the transformed fidelities for every mask.
        #[arg(long)]
        sigma_report: bool,
    },
    /// Twirl a dense density matrix onto the invariant simplex.
    Twirl {
        /// Document with `pairs`, `family` and a row-major `matrix`; path, inline JSON or `-`.
        input: String,
        /// Monte-Carlo samples for the numerical twirl.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Fail unless every fidelity is recovered as an exact rational.
        #[arg(long)]
        exact: bool,
    },
    /// Trace out one pair (1-based slot) of a multi-pair state.
    Reduce {
        input: String,
        #[arg(long)]
        slot: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WignerKind {
    Cg,
    #[value(name = "3j")]
    ThreeJ,
    #[value(name = "6j")]
    SixJ,
    #[value(name = "6j-oracle")]
    SixJOracle,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Trace,
    Sixj,
    Closed,
    All,
}

/// Input document for `classify` and `reduce`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpec {
    pub pairs: Vec<SpinPair>,
    #[serde(default)]
    pub family: Option<String>,
    pub fidelities: Vec<String>,
}

impl StateSpec {
    pub fn parse(&self) -> Result<MultiFidelity, CliError> {
        let family = parse_family(self.family.as_deref(), self.pairs.len())?;
        let values = self
            .fidelities
            .iter()
            .map(|s| parse_rational(s).map_err(|e| CliError::input("invalid-number", e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MultiFidelity::new(self.pairs.clone(), family, values)?)
    }

    pub fn from_fidelity(s: &MultiFidelity) -> Self {
        StateSpec {
            pairs: s.pairs().to_vec(),
            family: Some(s.family().to_string()),
            fidelities: s.values().iter().map(format_rational).collect(),
        }
    }
}

/// Input document for `twirl`: a dense row-major matrix on the pair-grouped space.
#[derive(Debug, Clone, Deserialize)]
pub struct TwirlSpec {
    pub pairs: Vec<SpinPair>,
    #[serde(default)]
    pub family: Option<String>,
    pub matrix: Vec<Vec<f64>>,
}

/// A missing family means Werner-like on every slot.
fn parse_family(text: Option<&str>, k: usize) -> Result<BinaryMask, CliError> {
    match text {
        None => Ok(BinaryMask::zeros(k)),
        Some(t) => t.parse().map_err(|e: MultipartiteError| CliError::input("invalid-mask", e)),
    }
}

fn parse_half(s: &str) -> Result<HalfInt, CliError> {
    s.parse().map_err(|e| CliError::input("invalid-spins", e))
}

/// 15 significant digits.
pub fn decimal(x: f64) -> Value {
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    json!(rounded)
}

fn exact_strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn load_document<T: for<'de> Deserialize<'de>>(input: &str) -> Result<T, CliError> {
    let text = if input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::input("io", e))?;
        s
    } else if input.trim_start().starts_with('{') {
        input.to_owned()
    } else {
        std::fs::read_to_string(Path::new(input)).map_err(|e| CliError::input("io", format!("{input}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::input("invalid-json", e))
}

pub fn run(cli: Cli) -> Result<Value, CliError> {
    match cli.command {
        Command::Wigner { kind, args } => cmd_wigner(kind, &args),
        Command::Xmatrix { ja, jb, method, check } => cmd_xmatrix(&ja, &jb, method, check),
        Command::Classify { input, sigma_report } => cmd_classify(&load_document(&input)?, sigma_report),
        Command::Twirl { input, samples, seed, exact } => cmd_twirl(&load_document(&input)?, samples, seed, exact),
        Command::Reduce { input, slot } => cmd_reduce(&load_document(&input)?, slot),
    }
}

/// Parses `args` (without the program name), runs, and returns the exit code with the
/// JSON text to print.
pub fn execute<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli =
        match Cli::try_parse_from(std::iter::once(OsString::from("rotsym")).chain(args.into_iter().map(Into::into))) {
            Ok(cli) => cli,
            Err(e) => {
                use clap::error::ErrorKind;
                if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                    return (0, e.to_string());
                }
                let err = CliError::input("usage", e.to_string().trim_end());
                return (err.exit_code(), err.to_json().to_string());
            }
        };
    match run(cli) {
        Ok(v) => (0, serde_json::to_string_pretty(&v).expect("serializable")),
        Err(e) => (e.exit_code(), e.to_json().to_string()),
    }
}

/// Reads `ROTSYM_THREADS` and sizes the global rayon pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("ROTSYM_THREADS") else { return Ok(()) };
    let n: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::input("invalid-environment", format!("ROTSYM_THREADS={text:?} is not a positive integer"))
    })?;
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn cmd_wigner(kind: WignerKind, args: &[String]) -> Result<Value, CliError> {
    if args.len() != 6 {
        return Err(CliError::input("usage", format!("expected 6 arguments, got {}", args.len())));
    }
    let a: Vec<HalfInt> = args.iter().map(|s| parse_half(s)).collect::<Result<_, _>>()?;
    let angular_err = |e: angular::AngularError| CliError::input("invalid-spins", e);
    if kind == WignerKind::SixJOracle {
        let v = wigner_6j_oracle(a[0], a[1], a[2], a[3], a[4], a[5]).map_err(angular_err)?;
        return Ok(json!({"value": Value::Null, "decimal": decimal(v)}));
    }
    let v: SqrtRational = match kind {
        WignerKind::Cg => angular::clebsch_gordan(a[0], a[1], a[2], a[3], a[4], a[5]),
        WignerKind::ThreeJ => angular::wigner_3j(a[0], a[1], a[2], a[3], a[4], a[5]),
        WignerKind::SixJ => angular::wigner_6j(a[0], a[1], a[2], a[3], a[4], a[5]),
        WignerKind::W => angular::racah_w(a[0], a[1], a[2], a[3], a[4], a[5]),
        WignerKind::SixJOracle => unreachable!(),
    }
    .map_err(angular_err)?;
    Ok(json!({"value": v.to_string(), "decimal": decimal(v.to_f64())}))
}

fn method_name(m: XMethod) -> &'static str {
    match m {
        XMethod::Trace => "trace",
        XMethod::SixJ => "sixj",
        XMethod::Closed => "closed",
    }
}

fn checks_json(x: &XMatrix) -> Value {
    let c = x.checks();
    json!({"row_sums_one": c.row_sums_one, "involution": c.involution, "detailed_balance": c.detailed_balance})
}

pub fn cmd_xmatrix(ja: &str, jb: &str, method: MethodArg, check: bool) -> Result<Value, CliError> {
    let pair = SpinPair::new(parse_half(ja)?, parse_half(jb)?)?;
    let methods: Vec<XMethod> = match method {
        MethodArg::Trace => vec![XMethod::Trace],
        MethodArg::Sixj => vec![XMethod::SixJ],
        MethodArg::Closed => vec![XMethod::Closed],
        MethodArg::All if pair.ja().doubled() <= 2 => vec![XMethod::Trace, XMethod::SixJ, XMethod::Closed],
        MethodArg::All => vec![XMethod::Trace, XMethod::SixJ],
    };
    let matrices = methods.iter().map(|&m| x_matrix(pair, m)).collect::<Result<Vec<_>, _>>()?;
    let first = &matrices[0];
    if let Some(other) = matrices.iter().find(|x| !x.same_entries(first)) {
        return Err(CliError::Consistency {
            message: format!("methods {} and {} disagree", method_name(first.method()), method_name(other.method())),
            detail: json!({
                method_name(first.method()): first.to_strings(),
                method_name(other.method()): other.to_strings(),
            }),
        });
    }
    let mut out = json!({
        "pair": pair,
        "methods": methods.iter().map(|&m| method_name(m)).collect::<Vec<_>>(),
        "total_spins": pair.total_spins().map(|j| j.to_string()).collect::<Vec<_>>(),
        "matrix": first.to_strings(),
    });
    if check || method == MethodArg::All {
        out["checks"] = checks_json(first);
    }
    Ok(out)
}

pub fn cmd_classify(spec: &StateSpec, sigma_report: bool) -> Result<Value, CliError> {
    let s = spec.parse()?;
    let c = multipartite::classify(&s)?;
    let mut out = json!({"verdict": c.verdict, "decisive": c.decisive});
    if let Some(m) = c.failing_mask {
        out["failing_mask"] = json!(m.to_string());
    }
    if sigma_report {
        let report: Vec<Value> = multipartite::sigma_report(&s)?
            .into_iter()
            .map(|(mask, v)| {
                let positive = v.iter().all(|x| !num_traits::Signed::is_negative(x));
                json!({"mask": mask.to_string(), "positive": positive, "vector": exact_strings(&v)})
            })
            .collect();
        out["ppt_vectors"] = Value::Array(report);
    }
    Ok(out)
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array(m.row_iter().map(|r| Value::Array(r.iter().map(|&x| decimal(x)).collect())).collect())
}

pub fn cmd_twirl(spec: &TwirlSpec, samples: Option<usize>, seed: Option<u64>, exact: bool) -> Result<Value, CliError> {
    if samples.is_some() && seed.is_none() {
        return Err(CliError::input("usage", "--samples requires --seed"));
    }
    let k = spec.pairs.len();
    let family = parse_family(spec.family.as_deref(), k)?;
    let n = spec.matrix.len();
    if spec.matrix.iter().any(|r| r.len() != n) {
        return Err(CliError::input("invalid-matrix", "matrix must be square"));
    }
    let expected: usize = spec.pairs.iter().map(SpinPair::dim).product();
    if n != expected {
        return Err(BipartiteError::DimensionMismatch { expected, found: n }.into());
    }
    let rho = DensityMatrix::new(DMatrix::from_fn(n, n, |r, c| spec.matrix[r][c]))?;
    if !rho.is_state(1e-9) {
        return Err(CliError::input("invalid-matrix", "matrix is not a density matrix (symmetric, PSD, unit trace)"));
    }
    let floats = multipartite::twirl_fidelities_f64(&rho, &spec.pairs, family)?;
    let snapped: Option<Vec<Rational>> = floats.iter().map(|&x| snap_to_rational(x, TWIRL_SNAP)).collect();
    if exact && snapped.is_none() {
        return Err(CliError::input("not-exact", "fidelities do not snap to rationals"));
    }
    let mut out = json!({
        "pairs": spec.pairs,
        "family": family.to_string(),
        "fidelities_decimal": floats.iter().map(|&x| decimal(x)).collect::<Vec<_>>(),
    });
    match &snapped {
        Some(v) => {
            let residual =
                v.iter().zip(&floats).map(|(r, x)| (crate::exact::rational_to_f64(r) - x).abs()).fold(0.0, f64::max);
            out["fidelities"] = json!(exact_strings(v));
            out["snap_residual"] = decimal(residual);
        }
        None => out["fidelities"] = Value::Null,
    }
    if let (Some(samples), Some(seed)) = (samples, seed) {
        let target = multipartite::invariant_density(&spec.pairs, family, &floats)?;
        let mc = numlab::mc_twirl(&rho, &spec.pairs, family, samples, seed)?;
        let deviation = (mc.matrix() - target.matrix()).abs().max();
        let mc_fid = multipartite::twirl_fidelities_f64(&mc, &spec.pairs, family)?;
        out["monte_carlo"] = json!({
            "samples": samples,
            "seed": seed,
            "fidelities": mc_fid.iter().map(|&x| decimal(x)).collect::<Vec<_>>(),
            "max_deviation": decimal(deviation),
            "tolerance": decimal(5.0 / (samples.max(1) as f64).sqrt()),
            "matrix": matrix_json(mc.matrix()),
        });
    }
    Ok(out)
}

pub fn cmd_reduce(spec: &StateSpec, slot: usize) -> Result<Value, CliError> {
    let s = spec.parse()?;
    if slot == 0 || slot > s.k() {
        return Err(MultipartiteError::SlotOutOfRange { slot, k: s.k() }.into());
    }
    let reduced = multipartite::reduce(&s, slot - 1)?;
    Ok(serde_json::to_value(StateSpec::from_fidelity(&reduced)).expect("serializable"))
}
