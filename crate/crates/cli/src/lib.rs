//! Command-line front end. `main` only parses arguments; everything else is
//! reachable in-process through [`JobSpec`] and [`run`].

pub mod format;
pub mod input;
mod verify;

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use hroots::engine::{classify, escalating_trace, RatioTrace, TraceVerdict};
use hroots::hankel::hadamard_det;
use hroots::series::CoefficientStream;
use hroots::{solve, Error, Polynomial, RootSet, SeriesKind, SolverConfig};
use serde::Serialize;

pub use format::{decimal, hex_float, parse_hex_float};
pub use input::{parse_input, parse_input_with_precision, InputError};
pub use verify::{verify, Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "hroots",
    version,
    about = "Polynomial roots from Hankel determinant ratios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    /// Working precision in mantissa bits.
    #[arg(long, global = true, env = "HROOTS_PRECISION", default_value_t = 256)]
    pub precision: usize,
    /// Largest k of a ratio trace or determinant row.
    #[arg(long, global = true, env = "HROOTS_KMAX", default_value_t = 256)]
    pub kmax: usize,
    /// Relative tolerance on limits.
    #[arg(long, global = true, env = "HROOTS_TOL", default_value_t = 1e-12)]
    pub tol: f64,
    /// Seed of the tie-breaking shifts.
    #[arg(long, global = true, env = "HROOTS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Shift retries before giving up on a modulus tie.
    #[arg(long, global = true, env = "HROOTS_MAX_SHIFTS", default_value_t = 5)]
    pub max_shifts: usize,
    /// Output format (default: json for roots and verify, csv otherwise).
    #[arg(long, global = true, env = "HROOTS_FORMAT", value_enum)]
    pub format: Option<Format>,
    /// Add bit-exact hex-float fields.
    #[arg(long, global = true, env = "HROOTS_EXACT")]
    pub exact: bool,
    /// Read the polynomial from a file instead of the command line or stdin.
    #[arg(long, global = true)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// All roots with multiplicities.
    Roots {
        #[arg(allow_negative_numbers = true, num_args = 0..)]
        poly: Vec<String>,
    },
    /// Ratio trace `k,re,im,diff` of one side and order.
    Trace {
        #[arg(long, default_value = "taylor")]
        side: SeriesKind,
        #[arg(long)]
        r: usize,
        #[arg(allow_negative_numbers = true, num_args = 0..)]
        poly: Vec<String>,
    },
    /// Series coefficients `k,re,im` of `P'/P`.
    Series {
        #[arg(long, default_value = "taylor")]
        side: SeriesKind,
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(allow_negative_numbers = true, num_args = 0..)]
        poly: Vec<String>,
    },
    /// Hankel determinants `k = 0..=kmax` with their cancellation.
    Dets {
        #[arg(long, default_value = "taylor")]
        side: SeriesKind,
        #[arg(long)]
        r: usize,
        #[arg(allow_negative_numbers = true, num_args = 0..)]
        poly: Vec<String>,
    },
    /// Cross-checks against the independent oracle.
    Verify {
        #[arg(allow_negative_numbers = true, num_args = 0..)]
        poly: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Roots,
    Trace { side: SeriesKind, r: usize },
    Series { side: SeriesKind, count: usize },
    Dets { side: SeriesKind, r: usize },
    Verify,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Inline(String),
    File(PathBuf),
    Stdin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub input: InputSource,
    pub config: SolverConfig,
    pub format: Format,
    pub exact: bool,
}

/// Exit status plus everything destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

impl JobSpec {
    /// A job with default configuration on an inline polynomial.
    pub fn new(command: Command, poly: &str) -> Self {
        let format = match command {
            Command::Roots | Command::Verify => Format::Json,
            _ => Format::Csv,
        };
        Self {
            command,
            input: InputSource::Inline(poly.to_string()),
            config: SolverConfig::default(),
            format,
            exact: false,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let (command, poly) = match cli.command {
            CommandArgs::Roots { poly } => (Command::Roots, poly),
            CommandArgs::Trace { side, r, poly } => (Command::Trace { side, r }, poly),
            CommandArgs::Series { side, count, poly } => (Command::Series { side, count }, poly),
            CommandArgs::Dets { side, r, poly } => (Command::Dets { side, r }, poly),
            CommandArgs::Verify { poly } => (Command::Verify, poly),
        };
        let input = match (poly.is_empty(), cli.file) {
            (false, Some(_)) => {
                return Err("give the polynomial inline or with --file, not both".into())
            }
            (false, None) => InputSource::Inline(poly.join(" ")),
            (true, Some(f)) => InputSource::File(f),
            (true, None) => InputSource::Stdin,
        };
        let config = SolverConfig {
            precision_bits: cli.precision,
            k_max: cli.kmax,
            tol: cli.tol,
            shift_seed: cli.seed,
            max_shifts: cli.max_shifts,
            max_precision_bits: SolverConfig::default()
                .max_precision_bits
                .max(cli.precision),
            ..SolverConfig::default()
        };
        // Determinant rows and series need no verdict window.
        let checked = match command {
            Command::Series { .. } | Command::Dets { .. } => SolverConfig {
                k_max: config.k_max.max(config.window + 2),
                ..config.clone()
            },
            _ => config.clone(),
        };
        checked.validate().map_err(|e| e.to_string())?;
        let format = cli.format.unwrap_or(match command {
            Command::Roots | Command::Verify => Format::Json,
            _ => Format::Csv,
        });
        Ok(Self {
            command,
            input,
            config,
            format,
            exact: cli.exact,
        })
    }
}

/// Pipeline stage an error belongs to, and whether it is the caller's fault.
pub fn classify_error(e: &Error) -> (&'static str, i32) {
    match e {
        Error::EmptyInput
        | Error::LeadingCoefficientZero
        | Error::DegreeZero
        | Error::ConstantTermZero => ("input", EXIT_USAGE),
        Error::InvalidOrder | Error::InvalidConfig(_) => ("usage", EXIT_USAGE),
        Error::InsufficientStream { .. } => ("series", EXIT_NUMERICAL),
        Error::PrecisionExhausted { .. } => ("hankel", EXIT_NUMERICAL),
        Error::TooFewPoints { .. } => ("trace", EXIT_NUMERICAL),
        Error::GapInProducts { .. } | Error::NoModulusGap { .. } => ("products", EXIT_NUMERICAL),
        Error::ShiftBudgetExhausted { .. } => ("shift", EXIT_NUMERICAL),
        Error::IllConditionedSystem | Error::NonIntegerMultiplicity { .. } => {
            ("multiplicities", EXIT_NUMERICAL)
        }
        Error::ResidualCheckFailed { .. } => ("residual", EXIT_NUMERICAL),
        Error::NoConvergence => ("oracle", EXIT_NUMERICAL),
    }
}

pub fn error_json(stage: &str, message: &str) -> String {
    let v = serde_json::json!({ "error": { "stage": stage, "message": message } });
    format!("{v}\n")
}

fn failure(stage: &str, message: &str, code: i32) -> Outcome {
    Outcome {
        code,
        stdout: String::new(),
        stderr: error_json(stage, message),
    }
}

fn from_error(e: &Error) -> Outcome {
    let (stage, code) = classify_error(e);
    failure(stage, &e.to_string(), code)
}

fn read_source(src: &InputSource, stdin: &mut dyn Read) -> Result<String, String> {
    match src {
        InputSource::Inline(s) => Ok(s.clone()),
        InputSource::File(p) => {
            std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))
        }
        InputSource::Stdin => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| e.to_string())?;
            Ok(s)
        }
    }
}

/// Runs one job. Data goes to `stdout`, diagnostics to `stderr`.
pub fn run(job: &JobSpec, stdin: &mut dyn Read) -> Outcome {
    let text = match read_source(&job.input, stdin) {
        Ok(t) => t,
        Err(m) => return failure("input", &m, EXIT_USAGE),
    };
    let poly = match parse_input_with_precision(&text, job.config.precision_bits) {
        Ok(p) => p,
        Err(InputError::Parse {
            line,
            column,
            message,
        }) => return failure("input", &format!("{line}:{column}: {message}"), EXIT_USAGE),
        Err(InputError::Polynomial(e)) => return from_error(&e),
    };
    let result = match &job.command {
        Command::Roots => solve(&poly, &job.config).map(|s| (render_roots(&s, job), String::new())),
        Command::Trace { side, r } => run_trace(&poly, *side, *r, job),
        Command::Series { side, count } => {
            run_series(&poly, *side, *count, job).map(|s| (s, String::new()))
        }
        Command::Dets { side, r } => run_dets(&poly, *side, *r, job).map(|s| (s, String::new())),
        Command::Verify => {
            let checks = verify(&poly, &job.config);
            let ok = checks.iter().all(|c| c.pass);
            let out = render_checks(&checks, ok, job);
            return Outcome {
                code: if ok { EXIT_OK } else { EXIT_NUMERICAL },
                stdout: out,
                stderr: String::new(),
            };
        }
    };
    match result {
        Ok((stdout, stderr)) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr,
        },
        Err(e) => from_error(&e),
    }
}

#[derive(Serialize)]
struct RootJson {
    re: f64,
    im: f64,
    multiplicity: usize,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    re_hex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    im_hex: Option<String>,
}

#[derive(Serialize)]
struct RootsJson {
    roots: Vec<RootJson>,
    zero_multiplicity: usize,
    distinct_count: usize,
    shifts_used: usize,
}

fn render_roots(set: &RootSet, job: &JobSpec) -> String {
    let hex = |x: f64| job.exact.then(|| hex_float(x));
    match job.format {
        Format::Json => {
            let doc = RootsJson {
                roots: set
                    .entries
                    .iter()
                    .map(|e| {
                        let z = e.root.to_c64();
                        RootJson {
                            re: z.re,
                            im: z.im,
                            multiplicity: e.multiplicity,
                            residual: e.residual,
                            re_hex: hex(z.re),
                            im_hex: hex(z.im),
                        }
                    })
                    .collect(),
                zero_multiplicity: set.zero_multiplicity,
                distinct_count: set.distinct_count(),
                shifts_used: set.shifts_used,
            };
            format!(
                "{}\n",
                serde_json::to_string(&doc).expect("plain data serializes")
            )
        }
        Format::Csv => {
            let mut out = String::from(if job.exact {
                "re,im,multiplicity,residual,re_hex,im_hex\n"
            } else {
                "re,im,multiplicity,residual\n"
            });
            let mut rows: Vec<(f64, f64, usize, f64)> = Vec::new();
            if set.zero_multiplicity > 0 {
                rows.push((0.0, 0.0, set.zero_multiplicity, 0.0));
            }
            rows.extend(set.entries.iter().map(|e| {
                let z = e.root.to_c64();
                (z.re, z.im, e.multiplicity, e.residual)
            }));
            for (re, im, m, res) in rows {
                out += &format!("{},{},{m},{}", decimal(re), decimal(im), decimal(res));
                if job.exact {
                    out += &format!(",{},{}", hex_float(re), hex_float(im));
                }
                out.push('\n');
            }
            out
        }
    }
}

fn verdict_line(v: &TraceVerdict) -> String {
    format!(
        "verdict: {} limit={}{:+}i q={} error={}\n",
        v.status,
        decimal(v.limit.re),
        v.limit.im,
        decimal(v.q_estimate),
        decimal(v.error_estimate)
    )
}

fn run_trace(
    poly: &Polynomial,
    side: SeriesKind,
    r: usize,
    job: &JobSpec,
) -> hroots::Result<(String, String)> {
    let trace = escalating_trace(poly, side, r, job.config.k_max, &job.config)?;
    let log = match classify(&trace, &job.config) {
        Ok(v) => verdict_line(&v),
        Err(e) => format!("verdict: none ({e})\n"),
    };
    Ok((render_trace(&trace, job), log))
}

pub fn render_trace(trace: &RatioTrace, job: &JobSpec) -> String {
    let opt = |d: Option<f64>| d.map_or(String::new(), decimal);
    match job.format {
        Format::Csv => {
            let mut out = String::from(if job.exact {
                "k,re,im,diff,re_hex,im_hex\n"
            } else {
                "k,re,im,diff\n"
            });
            // Gaps get blank fields so that every k up to the last one appears.
            let mut gaps = trace.gaps.iter().peekable();
            for p in &trace.points {
                while let Some(g) = gaps.next_if(|&&g| g < p.k) {
                    out += &format!("{g},,,{}\n", if job.exact { ",," } else { "" });
                }
                out += &format!(
                    "{},{},{},{}",
                    p.k,
                    decimal(p.value.re),
                    decimal(p.value.im),
                    opt(p.diff)
                );
                if job.exact {
                    out += &format!(",{},{}", hex_float(p.value.re), hex_float(p.value.im));
                }
                out.push('\n');
            }
            for g in gaps {
                out += &format!("{g},,,{}\n", if job.exact { ",," } else { "" });
            }
            out
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = trace
                .points
                .iter()
                .map(|p| serde_json::json!({ "k": p.k, "re": p.value.re, "im": p.value.im, "diff": p.diff }))
                .collect();
            let doc = serde_json::json!({
                "side": trace.side.to_string(),
                "r": trace.r,
                "precision": trace.precision,
                "gaps": trace.gaps,
                "points": rows,
            });
            format!("{doc}\n")
        }
    }
}

/// Parses `k,re,im,diff` CSV back into a trace. Rows with a blank `re` are
/// gaps; a blank `diff` means none.
pub fn parse_trace_csv(side: SeriesKind, r: usize, csv: &str) -> Result<RatioTrace, String> {
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for (i, line) in csv.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 4 {
            return Err(format!("line {}: expected 4 fields", i + 1));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1));
        let k = f[0]
            .parse::<usize>()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        if f[1].is_empty() {
            gaps.push(k);
            continue;
        }
        let diff = if f[3].is_empty() {
            None
        } else {
            Some(num(f[3])?)
        };
        rows.push((k, num_complex::Complex64::new(num(f[1])?, num(f[2])?), diff));
    }
    let mut trace = RatioTrace::from_rows(side, r, &rows);
    trace.gaps = gaps;
    Ok(trace)
}

fn run_series(
    poly: &Polynomial,
    side: SeriesKind,
    count: usize,
    job: &JobSpec,
) -> hroots::Result<String> {
    let mut s = CoefficientStream::new(poly, side)?;
    s.extend_to(count);
    let values: Vec<_> = s.values().iter().map(|v| v.to_c64()).collect();
    Ok(match job.format {
        Format::Csv => {
            let mut out = String::from(if job.exact {
                "k,re,im,re_hex,im_hex\n"
            } else {
                "k,re,im\n"
            });
            for (k, v) in values.iter().enumerate() {
                out += &format!("{k},{},{}", decimal(v.re), decimal(v.im));
                if job.exact {
                    out += &format!(",{},{}", hex_float(v.re), hex_float(v.im));
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = values
                .iter()
                .enumerate()
                .map(|(k, v)| serde_json::json!({ "k": k, "re": v.re, "im": v.im }))
                .collect();
            format!(
                "{}\n",
                serde_json::json!({ "side": side.to_string(), "coefficients": rows })
            )
        }
    })
}

fn run_dets(
    poly: &Polynomial,
    side: SeriesKind,
    r: usize,
    job: &JobSpec,
) -> hroots::Result<String> {
    let k_max = job.config.k_max;
    let mut s = CoefficientStream::new(poly, side)?;
    s.extend_to(k_max + 2 * r.max(1));
    let mut rows = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let cell = hadamard_det(&s, k, r)?;
        let m = cell.value.mantissa().to_c64();
        rows.push((k, m, cell.value.exponent(), cell.cancellation_margin));
    }
    Ok(match job.format {
        Format::Csv => {
            let mut out = String::from(if job.exact {
                "k,re_mantissa,im_mantissa,exp2,cancellation_bits,re_hex,im_hex\n"
            } else {
                "k,re_mantissa,im_mantissa,exp2,cancellation_bits\n"
            });
            for (k, m, e, c) in rows {
                out += &format!("{k},{},{},{e},{}", decimal(m.re), decimal(m.im), decimal(c));
                if job.exact {
                    out += &format!(",{},{}", hex_float(m.re), hex_float(m.im));
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(k, m, e, c)| {
                    serde_json::json!({
                        "k": k, "re_mantissa": m.re, "im_mantissa": m.im, "exp2": e,
                        "cancellation_bits": if c.is_finite() { serde_json::json!(c) } else { serde_json::json!("inf") },
                    })
                })
                .collect();
            format!(
                "{}\n",
                serde_json::json!({ "side": side.to_string(), "r": r, "dets": v })
            )
        }
    })
}

fn render_checks(checks: &[Check], ok: bool, job: &JobSpec) -> String {
    match job.format {
        Format::Json => {
            let v = serde_json::json!({ "pass": ok, "checks": checks });
            format!("{v}\n")
        }
        Format::Csv => {
            let mut out = String::from("check,pass,detail\n");
            for c in checks {
                out += &format!("{},{},\"{}\"\n", c.name, c.pass, c.detail.replace('"', "'"));
            }
            out
        }
    }
}
