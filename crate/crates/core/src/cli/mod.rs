//! The `etaforge` command line.
//!
//! Exit codes: 0 success, 2 bad input, 3 internal consistency alarm.

pub mod scan;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arithmetic::{h_of, in_s, residue_set, Level};
use crate::cusps::{check_latin, cusp_matrix, CuspMatrix};
use crate::error::Error;
use crate::etacore::{parse_pairs, EtaExponents};
use crate::qexp::quotient_series;
use crate::search::{enumerate_parallel, weak_report, SearchConfig, SearchMode, SearchReport};
use crate::theorems::{decide, DecisionRecord, decide_with_fallback, rwhyp_holds, verify_decision};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_ALARM: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "etaforge", version, about = "Eta-quotients in M_k(Gamma_1(N)): search, decide, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Holomorphic,
    Cuspidal,
    Weak,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Holomorphic => SearchMode::Holomorphic,
            ModeArg::Cuspidal => SearchMode::Cuspidal,
            ModeArg::Weak => SearchMode::WeakWitness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factorization, h_N, residues mod 24, membership in S
    Invariants { n: u64 },
    /// List every eta-quotient in M_k(Gamma_1(N)) (or one weak witness)
    Enumerate {
        n: u64,
        k: i64,
        #[arg(long, value_enum, default_value = "holomorphic")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Replace the l1 window with this bound
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Decide existence from the theorems; --verify cross-checks by search
    Decide {
        n: u64,
        k: i64,
        #[arg(long)]
        verify: bool,
        /// Search when the theorems are silent
        #[arg(long)]
        fallback: bool,
    },
    /// Print the cusp matrix A_N
    Matrix {
        n: u64,
        #[arg(long)]
        check_latin: bool,
    },
    /// q-expansion at infinity of an exponent vector such as [[1,-1],[5,5]]
    Qexp {
        n: u64,
        pairs: String,
        #[arg(long, default_value_t = 10)]
        terms: usize,
        #[arg(long)]
        json: bool,
    },
    /// Batch decisions over a range of levels and weights
    Scan {
        #[arg(long)]
        max_n: u64,
        #[arg(long, default_value_t = 5)]
        min_n: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        weights: Vec<i64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ScanFormat,
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Cache file; defaults to $ETAFORGE_CACHE, then <out>.cache.jsonl
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_alarm() { EXIT_ALARM } else { EXIT_BAD_INPUT };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_BAD_INPUT, message: e.to_string() }
    }
}

fn alarm(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_ALARM, message: message.into() }
}

type CliResult = std::result::Result<(), CliError>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Invariants { n } => cmd_invariants(n, out),
        Command::Enumerate { n, k, mode, format, parallel, bound } => {
            cmd_enumerate(n, k, mode.into(), format, parallel, bound, out)
        }
        Command::Decide { n, k, verify, fallback } => cmd_decide(n, k, verify, fallback, out, err),
        Command::Matrix { n, check_latin } => cmd_matrix(n, check_latin, out, err),
        Command::Qexp { n, pairs, terms, json } => cmd_qexp(n, &pairs, terms, json, out),
        Command::Scan { max_n, min_n, weights, out: path, format, resume, verify, workers, cache } => {
            let cache = cache
                .or_else(|| std::env::var_os("ETAFORGE_CACHE").map(PathBuf::from))
                .unwrap_or_else(|| {
                    let mut p = path.clone().into_os_string();
                    p.push(".cache.jsonl");
                    PathBuf::from(p)
                });
            let opts = scan::ScanOptions {
                min_n,
                max_n,
                weights,
                out: path,
                format,
                resume,
                verify,
                workers,
                cache,
            };
            let summary = scan::run_scan(&opts)?;
            writeln!(
                err,
                "scan: {} rows ({} computed, {} from cache)",
                summary.rows.len(),
                summary.computed,
                summary.reused
            )?;
            if summary.inconsistent > 0 {
                return Err(alarm(format!(
                    "{} rows disagree between decision and search",
                    summary.inconsistent
                )));
            }
            Ok(())
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn cmd_invariants(n: u64, out: &mut dyn Write) -> CliResult {
    let level = Level::new(n)?;
    if level.omega() == 0 {
        return Err(Error::NoPrimeDivisors(n).into());
    }
    writeln!(out, "n: {n}")?;
    writeln!(out, "factorization: {level}")?;
    writeln!(out, "radical: {}", level.radical())?;
    writeln!(out, "squarefree: {}", yes_no(level.is_squarefree()))?;
    if level.is_coprime_to_6() {
        writeln!(out, "coprime_to_6: true")?;
    } else {
        writeln!(out, "coprime_to_6: false (outside the supported domain)")?;
    }
    writeln!(out, "residues_mod_24: {}", residue_set(&level)?)?;
    match h_of(&level) {
        Ok(h) => writeln!(out, "h_N: {h}")?,
        Err(_) => writeln!(out, "h_N: undefined")?,
    }
    writeln!(out, "in_S: {}", yes_no(in_s(&level)?))?;
    if level.is_squarefree() {
        writeln!(out, "rwhyp: {}", yes_no(rwhyp_holds(&level)?))?;
    } else {
        writeln!(out, "rwhyp: n/a (not squarefree)")?;
    }
    Ok(())
}

pub fn cmd_enumerate(
    n: u64,
    k: i64,
    mode: SearchMode,
    format: ReportFormat,
    parallel: usize,
    bound: Option<u64>,
    out: &mut dyn Write,
) -> CliResult {
    let level = Level::new(n)?;
    let report = if mode == SearchMode::WeakWitness {
        weak_report(&level, k)?
    } else {
        let mut config = SearchConfig::new(level, k, mode)?;
        config.bound_override = bound;
        enumerate_parallel(&config, parallel)?
    };
    match format {
        ReportFormat::Json => {
            let json = serde_json::to_string(&report.to_record()).map_err(Error::from_json)?;
            writeln!(out, "{json}")?;
        }
        ReportFormat::Csv => write_report_csv(&report, out)?,
    }
    Ok(())
}

/// Columns: `r,character,cusp,v@<d>...` with orders as `num/den`.
pub fn write_report_csv(report: &SearchReport, out: &mut dyn Write) -> CliResult {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["r".to_string(), "character".into(), "cusp".into()];
    header.extend(report.config.level.divisors().iter().map(|d| format!("v@{d}")));
    w.write_record(&header).map_err(csv_err)?;
    for hit in &report.hits {
        let mut rec = vec![
            hit.exponents.to_canonical_string(),
            hit.character.d().to_string(),
            yes_no(hit.is_cusp_form).to_string(),
        ];
        rec.extend(hit.orders.orders().iter().map(|v| format!("{}/{}", v.numer(), v.denom())));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError { code: EXIT_BAD_INPUT, message: e.to_string() }
}

impl Error {
    fn from_json(e: serde_json::Error) -> Error {
        Error::Parse(e.to_string())
    }
}

#[derive(Serialize)]
struct VerificationOutput {
    hit_count: Option<usize>,
    witness_ok: Option<bool>,
    consistent: bool,
}

#[derive(Serialize)]
struct DecisionOutput {
    #[serde(flatten)]
    decision: DecisionRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationOutput>,
}

pub fn cmd_decide(
    n: u64,
    k: i64,
    verify: bool,
    fallback: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let level = Level::new(n)?;
    let decision = if fallback { decide_with_fallback(&level, k)? } else { decide(&level, k)? };
    let mut verification = None;
    if verify {
        let v = verify_decision(&level, &decision)?;
        verification = Some(VerificationOutput {
            hit_count: v.hit_count,
            witness_ok: v.witness_ok,
            consistent: v.consistent,
        });
    }
    let consistent = verification.as_ref().is_none_or(|v| v.consistent);
    let output = DecisionOutput { decision: decision.to_record(), verification };
    let json = serde_json::to_string(&output).map_err(Error::from_json)?;
    writeln!(out, "{json}")?;
    if !consistent {
        writeln!(err, "decision and exhaustive search disagree")?;
        return Err(alarm(format!("verification failed for N = {n}, k = {k}")));
    }
    Ok(())
}

/// Pretty JSON with one matrix row per line.
pub fn format_matrix_json(m: &CuspMatrix) -> String {
    let join = |xs: &[u64]| xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    let rows: Vec<String> = m.rows().iter().map(|r| format!("    [{}]", join(r))).collect();
    format!(
        "{{\n  \"divisors\": [{}],\n  \"rows\": [\n{}\n  ]\n}}",
        join(m.divisors()),
        rows.join(",\n")
    )
}

pub fn cmd_matrix(n: u64, latin: bool, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let level = Level::new(n)?;
    let m = cusp_matrix(&level)?;
    writeln!(out, "{}", format_matrix_json(&m))?;
    if latin {
        if check_latin(&level)? {
            writeln!(err, "latin check: every row and column is a permutation of the divisors")?;
        } else {
            return Err(alarm(format!("A_{n} is not a Latin square")));
        }
    }
    Ok(())
}

pub fn cmd_qexp(n: u64, pairs: &str, terms: usize, json: bool, out: &mut dyn Write) -> CliResult {
    let level = Level::new(n)?;
    let e = EtaExponents::from_pairs(level, &parse_pairs(pairs)?)?;
    let s = quotient_series(&e, terms)?;
    if json {
        let text = serde_json::to_string(&s.to_record()).map_err(Error::from_json)?;
        writeln!(out, "{text}")?;
    } else {
        writeln!(out, "{s}")?;
    }
    Ok(())
}
