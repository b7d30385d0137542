//! Command-line front end for the operator-inequality laboratory.
//!
//! Subcommands: `check` (one named check on explicit matrices or a seeded
//! random corpus), `falsify` (seeded random search for violations),
//! `classify` (operator class and spread profile), `wnum` (certified
//! numerical radius with its bound family), and `repro` (the fixed-instance
//! regression table).
//!
//! Exit codes are never mixed: 0 pass, 1 violation or mismatch, 2 usage
//! error, 3 numerical failure. Reports are byte-identical for identical
//! command, configuration, and input, regardless of worker threads.

mod repro;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use opineq_core::classes::{alpha_beta_profile, classify, gen_matrix, mix_seed, MatrixKind};
use opineq_core::error::LabError;
use opineq_core::matrix::{op_norm, ComplexMatrix};
use opineq_core::radius::{bound_family, omega};
use opineq_core::registry::{falsify, find_spec, run_check, FalsifyConfig, CATALOG};
use opineq_core::report::CheckReport;

const EXIT_PASS: i32 = 0;
const EXIT_VIOLATION: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;

/// Terminal failure: message for stderr plus the contract exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let code = match e {
            LabError::Usage(_)
            | LabError::UnknownCheck(_)
            | LabError::ParamRange { .. }
            | LabError::Precondition(_)
            | LabError::DimensionMismatch { .. }
            | LabError::FgMismatch { .. }
            | LabError::Io(_)
            | LabError::Json(_) => EXIT_USAGE,
            LabError::NonFinite
            | LabError::EigFailed { .. }
            | LabError::Domain { .. }
            | LabError::SingularBlock { .. }
            | LabError::IllConditioned { .. }
            | LabError::NonConvergence(_) => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "opineq",
    version,
    about = "Operator-inequality laboratory: checks, falsification, classification, numerical radius"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one named check on matrix files or on a seeded random corpus.
    Check(CheckArgs),
    /// Hammer one check with seeded random draws and report every violation.
    Falsify(FalsifyArgs),
    /// Report the operator class and spread profile of a matrix.
    Classify(ClassifyArgs),
    /// Certified numerical radius with the power-family norm bounds.
    Wnum(WnumArgs),
    /// Re-measure the fixed-instance regression table.
    Repro(ReproArgs),
    /// List every check id with arity and default corpus.
    List,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputOpts {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Check id, optionally parameterized after a colon (e.g. thm23:power:0.3).
    check_id: String,
    /// Matrix operand file, repeated once per operand, in order.
    #[arg(long = "file")]
    files: Vec<PathBuf>,
    /// Corpus to draw operands from instead of files (defaults to the
    /// check's hypothesis corpus).
    #[arg(long, conflicts_with = "files")]
    corpus: Option<String>,
    /// Seed for corpus draws; required in corpus mode, forbidden with files.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of corpus trials (default 100).
    #[arg(long)]
    trials: Option<u64>,
    /// Comma-separated dimensions cycled over trials (default 2,3).
    #[arg(long)]
    dims: Option<String>,
    /// Absolute tolerance override for the check margin.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct FalsifyArgs {
    /// Check id, optionally parameterized after a colon.
    check_id: String,
    /// Seed for the deterministic trial stream (mandatory: no wall-clock
    /// entropy anywhere).
    #[arg(long)]
    seed: u64,
    /// Number of random trials.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Comma-separated dimensions cycled over trials (default 2,3).
    #[arg(long)]
    dims: Option<String>,
    /// Corpus to draw from (defaults to the check's hypothesis corpus).
    #[arg(long)]
    corpus: Option<String>,
    /// Absolute tolerance override handed to every trial.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads for the scan; the report does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Matrix file.
    #[arg(long)]
    file: PathBuf,
    /// Absolute tolerance for the class tests.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct WnumArgs {
    /// Matrix file for the (right) operand whose radius is computed.
    #[arg(long)]
    file: PathBuf,
    /// Optional left-factor matrix file; the identity when absent. The
    /// radius and every bound then refer to the product.
    #[arg(long = "with")]
    with_file: Option<PathBuf>,
    /// Power weight of the bound family, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Absolute target for the radius certificate.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct ReproArgs {
    /// Tolerance override applied to every instance (zero demands exact
    /// agreement and is expected to fail).
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: OutputOpts,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful terminations; everything else
            // is a usage error under the exit-code contract.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("opineq: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.cmd {
        Cmd::Check(args) => cmd_check(args),
        Cmd::Falsify(args) => cmd_falsify(args),
        Cmd::Classify(args) => cmd_classify(args),
        Cmd::Wnum(args) => cmd_wnum(args),
        Cmd::Repro(args) => cmd_repro(args),
        Cmd::List => cmd_list(),
    }
}

// --- shared plumbing ---------------------------------------------------------

/// `--tol` wins, then the `OPINEQ_DEFAULT_TOL` environment variable, then
/// the per-check default (`None`).
fn effective_tol(cli_tol: Option<f64>) -> Result<Option<f64>, Failure> {
    if cli_tol.is_some() {
        return Ok(cli_tol);
    }
    match std::env::var("OPINEQ_DEFAULT_TOL") {
        Ok(raw) => {
            let v: f64 = raw.trim().parse().map_err(|_| {
                Failure::usage(format!("OPINEQ_DEFAULT_TOL must be a number, got '{raw}'"))
            })?;
            if !v.is_finite() {
                return Err(Failure::usage("OPINEQ_DEFAULT_TOL must be finite"));
            }
            Ok(Some(v))
        }
        Err(_) => Ok(None),
    }
}

fn parse_corpus(raw: &str) -> Result<MatrixKind, Failure> {
    match raw.to_ascii_lowercase().as_str() {
        "ginibre" => Ok(MatrixKind::Ginibre),
        "normal" => Ok(MatrixKind::Normal),
        "psd" => Ok(MatrixKind::Psd),
        "unitary" => Ok(MatrixKind::Unitary),
        "invertible" => Ok(MatrixKind::Invertible),
        other => Err(Failure::usage(format!(
            "unknown corpus '{other}' (expected ginibre, normal, psd, unitary, or invertible)"
        ))),
    }
}

fn parse_dims(raw: Option<&str>) -> Result<Vec<usize>, Failure> {
    let raw = match raw {
        None => return Ok(vec![2, 3]),
        Some(r) => r,
    };
    let dims: Vec<usize> = raw
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("--dims expects comma-separated integers, got '{raw}'")))?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(Failure::usage("--dims needs at least one positive dimension"));
    }
    Ok(dims)
}

fn load_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| Failure::usage(format!("cannot parse {}: {e}", path.display())))
}

fn emit(payload: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, format!("{payload}\n"))
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            // A closed downstream pipe is a normal way to stop reading.
            let _ = writeln!(std::io::stdout(), "{payload}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure {
        code: EXIT_NUMERICAL,
        message: format!("serialization failed: {e}"),
    })
}

/// CSV cell for an optional number (empty when absent).
fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// --- check -------------------------------------------------------------------

#[derive(Serialize)]
struct CorpusRunOut {
    check_id: String,
    corpus: MatrixKind,
    seed: u64,
    dims: Vec<usize>,
    trials: u64,
    failures: u64,
    worst_margin: f64,
    reports: Vec<CheckReport>,
}

fn cmd_check(args: CheckArgs) -> Result<i32, Failure> {
    let (base, _) = args
        .check_id
        .split_once(':')
        .map(|(b, p)| (b, Some(p)))
        .unwrap_or((args.check_id.as_str(), None));
    let spec =
        find_spec(base).ok_or_else(|| Failure::from(LabError::UnknownCheck(args.check_id.clone())))?;
    let tol = effective_tol(args.tol)?;

    if !args.files.is_empty() {
        for flag in [
            ("--seed", args.seed.is_some()),
            ("--trials", args.trials.is_some()),
            ("--dims", args.dims.is_some()),
        ] {
            if flag.1 {
                return Err(Failure::usage(format!(
                    "{} applies to corpus runs, not explicit files",
                    flag.0
                )));
            }
        }
        let mats = args
            .files
            .iter()
            .map(|p| load_matrix(p))
            .collect::<Result<Vec<_>, _>>()?;
        let report = run_check(&args.check_id, &mats, tol)?;
        let payload = match args.output.format {
            Format::Json => to_json(&report)?,
            Format::Csv => {
                let mut s = String::from("check_id,dim,seed,margin,passed");
                let dim = mats.first().map(|m| m.dim()).unwrap_or(0);
                write!(s, "\n{},{},,{},{}", report.check_id, dim, report.margin, report.passed)
                    .expect("string write");
                s
            }
        };
        emit(&payload, &args.output.out)?;
        return Ok(if report.passed { EXIT_PASS } else { EXIT_VIOLATION });
    }

    // Corpus mode: same generation scheme as `falsify`, so a clean sweep
    // here means a falsification run over the same seed finds nothing.
    let corpus = match &args.corpus {
        Some(raw) => parse_corpus(raw)?,
        None => spec.default_corpus,
    };
    let seed = args.seed.ok_or_else(|| {
        Failure::usage("corpus runs need --seed (or pass operand files with --file)")
    })?;
    let trials = args.trials.unwrap_or(100);
    if trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let dims = parse_dims(args.dims.as_deref())?;

    let mut reports = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let dim = dims[(trial % dims.len() as u64) as usize];
        let mats = (0..spec.arity)
            .map(|k| gen_matrix(corpus, dim, mix_seed(seed, &[trial, k as u64])))
            .collect::<Result<Vec<_>, _>>()
            .map_err(Failure::from)?;
        reports.push(run_check(&args.check_id, &mats, tol)?);
    }
    let failures = reports.iter().filter(|r| !r.passed).count() as u64;
    let worst_margin = reports
        .iter()
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);

    let payload = match args.output.format {
        Format::Json => to_json(&CorpusRunOut {
            check_id: args.check_id.clone(),
            corpus,
            seed,
            dims: dims.clone(),
            trials,
            failures,
            worst_margin,
            reports,
        })?,
        Format::Csv => {
            let mut s = String::from("check_id,dim,seed,margin,passed");
            for (trial, r) in reports.iter().enumerate() {
                let dim = dims[trial % dims.len()];
                write!(s, "\n{},{},{},{},{}", r.check_id, dim, seed, r.margin, r.passed)
                    .expect("string write");
            }
            s
        }
    };
    emit(&payload, &args.output.out)?;
    Ok(if failures == 0 { EXIT_PASS } else { EXIT_VIOLATION })
}

// --- falsify -------------------------------------------------------------------

fn cmd_falsify(args: FalsifyArgs) -> Result<i32, Failure> {
    let (base, _) = args
        .check_id
        .split_once(':')
        .map(|(b, p)| (b, Some(p)))
        .unwrap_or((args.check_id.as_str(), None));
    let spec =
        find_spec(base).ok_or_else(|| Failure::from(LabError::UnknownCheck(args.check_id.clone())))?;
    let corpus = match &args.corpus {
        Some(raw) => parse_corpus(raw)?,
        None => spec.default_corpus,
    };
    let cfg = FalsifyConfig {
        trials: args.trials,
        dims: parse_dims(args.dims.as_deref())?,
        seed: args.seed,
        corpus,
        tol: effective_tol(args.tol)?,
    };

    let result = match args.jobs {
        None => falsify(&args.check_id, &cfg)?,
        Some(jobs) => {
            if jobs == 0 {
                return Err(Failure::usage("--jobs must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Failure {
                    code: EXIT_NUMERICAL,
                    message: format!("cannot build worker pool: {e}"),
                })?;
            pool.install(|| falsify(&args.check_id, &cfg))?
        }
    };

    let payload = match args.output.format {
        Format::Json => to_json(&result)?,
        Format::Csv => {
            let mut s = String::from("check_id,dim,seed,margin,passed");
            for v in &result.violations {
                let dim = cfg.dims[(v.trial % cfg.dims.len() as u64) as usize];
                write!(s, "\n{},{},{},{},false", result.check_id, dim, cfg.seed, v.margin)
                    .expect("string write");
            }
            s
        }
    };
    emit(&payload, &args.output.out)?;
    Ok(if result.found_violation() {
        EXIT_VIOLATION
    } else {
        EXIT_PASS
    })
}

// --- classify ------------------------------------------------------------------

fn cmd_classify(args: ClassifyArgs) -> Result<i32, Failure> {
    let t = load_matrix(&args.file)?;
    let verdict = classify(&t, effective_tol(args.tol)?)?;
    let payload = match args.output.format {
        Format::Json => to_json(&verdict)?,
        Format::Csv => format!(
            "class,margin,alpha,beta\n{},{},{},{}",
            verdict.class,
            verdict.margin,
            opt_cell(verdict.alpha),
            opt_cell(verdict.beta)
        ),
    };
    emit(&payload, &args.output.out)?;
    Ok(EXIT_PASS)
}

// --- wnum ----------------------------------------------------------------------

#[derive(Serialize)]
struct WnumBounds {
    eq12: f64,
    eq24: f64,
    eq25: f64,
    eq31: f64,
    eq22_lower: Option<f64>,
}

#[derive(Serialize)]
struct WnumOut {
    omega: f64,
    theta: f64,
    error_bound: f64,
    bounds: WnumBounds,
}

fn cmd_wnum(args: WnumArgs) -> Result<i32, Failure> {
    let t = load_matrix(&args.file)?;
    let s = match &args.with_file {
        Some(path) => load_matrix(path)?,
        None => ComplexMatrix::identity(t.dim()),
    };
    let product = &s * &t;
    let est = omega(&product, effective_tol(args.tol)?)?;
    let fam = bound_family(&s, &t, args.t)?;
    let eq22_lower = match alpha_beta_profile(&product) {
        Ok(p) => {
            let factor = (1.0 + 1.0 / (p.beta * p.beta))
                .sqrt()
                .max((1.0 + p.alpha * p.alpha).sqrt());
            Some(factor * 0.5 * op_norm(&product)?)
        }
        Err(LabError::IllConditioned { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let out = WnumOut {
        omega: est.value,
        theta: est.theta_star,
        error_bound: est.error_bound,
        bounds: WnumBounds {
            eq12: fam.mean_bound,
            eq24: fam.split_left,
            eq25: fam.split_right,
            eq31: fam.averaged,
            eq22_lower,
        },
    };
    let payload = match args.output.format {
        Format::Json => to_json(&out)?,
        Format::Csv => format!(
            "omega,theta,error_bound,eq12,eq24,eq25,eq31,eq22_lower\n{},{},{},{},{},{},{},{}",
            out.omega,
            out.theta,
            out.error_bound,
            out.bounds.eq12,
            out.bounds.eq24,
            out.bounds.eq25,
            out.bounds.eq31,
            opt_cell(out.bounds.eq22_lower)
        ),
    };
    emit(&payload, &args.output.out)?;
    Ok(EXIT_PASS)
}

// --- repro ---------------------------------------------------------------------

fn cmd_repro(args: ReproArgs) -> Result<i32, Failure> {
    let tol = effective_tol(args.tol)?;
    if let Some(t) = tol {
        if t < 0.0 || !t.is_finite() {
            return Err(Failure::usage("repro tolerance must be a finite value >= 0"));
        }
    }
    let out = repro::run(tol)?;

    // Human-readable table on stderr; the machine report goes to stdout.
    for row in &out.instances {
        eprintln!(
            "{} {:55} expected {:>20.12e}  measured {:>20.12e}  tol {:.1e}",
            if row.passed { "PASS" } else { "FAIL" },
            row.name,
            row.expected,
            row.measured,
            row.tol
        );
    }
    eprintln!(
        "{} of {} instances match",
        out.instances.iter().filter(|r| r.passed).count(),
        out.instances.len()
    );

    let payload = match args.output.format {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let mut s = String::from("name,expected,measured,tol,passed");
            for r in &out.instances {
                write!(
                    s,
                    "\n\"{}\",{},{},{},{}",
                    r.name, r.expected, r.measured, r.tol, r.passed
                )
                .expect("string write");
            }
            s
        }
    };
    emit(&payload, &args.output.out)?;
    Ok(if out.passed { EXIT_PASS } else { EXIT_VIOLATION })
}

// --- list ----------------------------------------------------------------------

fn cmd_list() -> Result<i32, Failure> {
    let mut stdout = std::io::stdout();
    for spec in CATALOG {
        let params = if spec.params.is_empty() {
            String::new()
        } else {
            format!(" [:{}]", spec.params)
        };
        let line = format!(
            "{:22} arity {}  corpus {:10}  {}{}",
            spec.id,
            spec.arity,
            format!("{:?}", spec.default_corpus).to_ascii_lowercase(),
            spec.summary,
            params
        );
        if writeln!(stdout, "{line}").is_err() {
            break;
        }
    }
    Ok(EXIT_PASS)
}
