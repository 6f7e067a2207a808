//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage error, 3 syntax
//! error, 4 semantic error, 5 resource limit, 6 I/O error, 7 engine
//! disagreement, 8 invalid argument.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arith::{sieve, IntPolynomial};
use crate::constructions::build_family;
use crate::density::{alternating_set, density_profile, DensityFunction, Sequence};
use crate::error::{Error, Result};
use crate::eval::{eval_sentence_with, satisfying_relation, Engine, FastConfig, RingContext};
use crate::logic::{parse, Formula, Sentence};
use crate::spectra::{fit_congruences, poly_spectrum, spectrum, CongruenceFit, Spectrum, SpectrumOptions};
use crate::verify::{verify_suite, VerifyConfig};

pub const MAX_BOUND: u64 = 5_000_000;
pub const MAX_TUPLES: usize = 50_000_000;

pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Syntax { .. } => 3,
        Error::Semantic(_) | Error::UnboundVariable(_) => 4,
        Error::ResourceLimit(_) => 5,
        Error::Io(_) => 6,
        Error::EngineMismatch { .. } => 7,
        _ => 8,
    }
}

#[derive(Debug, Parser)]
#[command(name = "ringspectra", version, about = "Ring-logic model checking and prime spectra")]
pub struct Cli {
    /// Worker threads for per-prime evaluation.
    #[arg(long, global = true, env = "RINGSPECTRA_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a formula and print its normalized form.
    Parse {
        #[arg(long, conflicts_with = "text", required_unless_present = "text")]
        formula: Option<PathBuf>,
        #[arg(long)]
        text: Option<String>,
    },
    /// Evaluate a formula in Z_m.
    Eval {
        #[arg(long)]
        modulus: u64,
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, default_value = "auto")]
        engine: Engine,
        #[arg(long, default_value_t = MAX_TUPLES)]
        max_tuples: usize,
    },
    /// Primes up to a bound whose ring satisfies a sentence or where a polynomial has a root.
    Spectrum {
        #[arg(long, conflicts_with = "poly", required_unless_present = "poly")]
        formula: Option<PathBuf>,
        /// Polynomial such as `c0 + c1*x + c2*x^2`.
        #[arg(long)]
        poly: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value = "auto")]
        engine: Engine,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit congruence classes to a stored spectrum.
    Classify {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        max_d: u64,
        /// Ignore primes at or below this value; defaults to max(d, 50).
        #[arg(long)]
        threshold: Option<u64>,
        /// Bound of a CSV spectrum, if larger than its last prime.
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density profile of a spectrum, as CSV `n,pi_S,pi,ratio`.
    Density {
        /// Spectrum file; without it the alternating set of `--seq` up to `--bound` is used.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, default_value = "identity")]
        h: String,
        #[arg(long, value_delimiter = ',')]
        samples: Vec<u64>,
        /// `geometric:q:kmax`, `doubleexp:q:kmax` or `list:a,b,...`; its terms are added to the samples.
        #[arg(long)]
        seq: Option<String>,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a sentence from one of the built-in families.
    Construct {
        #[arg(long)]
        family: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<u64>,
        /// Print parameters and validity range as JSON instead of the bare sentence.
        #[arg(long)]
        describe: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the reproduction suite and write a JSON report.
    Verify {
        #[arg(long, default_value = "paper")]
        suite: String,
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
        #[arg(long, default_value_t = VerifyConfig::default().seed)]
        seed: u64,
        /// Comma-separated claim ids; all by default.
        #[arg(long, value_delimiter = ',')]
        claims: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, target: Option<&Path>, text: &str) -> Result<()> {
    match target {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn check_bound(bound: u64) -> Result<u64> {
    if bound > MAX_BOUND {
        return Err(Error::ResourceLimit(format!("bound {bound} exceeds the cap {MAX_BOUND}")));
    }
    if bound < 2 {
        return Err(Error::invalid("bound must be at least 2"));
    }
    Ok(bound)
}

fn to_json(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn load_spectrum(path: &Path, bound: Option<u64>) -> Result<Spectrum> {
    if let Some(b) = bound {
        check_bound(b)?;
    }
    let s = Spectrum::parse(&read(path)?, bound)?;
    check_bound(s.bound())?;
    Ok(s)
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    bound: u64,
    max_modulus: u64,
    fits: &'a [CongruenceFit],
}

#[derive(Serialize)]
struct FamilyDescription<'a> {
    family: &'a str,
    params: &'a [(String, u64)],
    precondition: &'a str,
    valid_above: u64,
    sentence: String,
}

/// Runs a parsed command, writing primary output to `out`. Returns the
/// process exit code on success.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let workers = cli.workers.unwrap_or(1);
    if workers == 0 {
        return Err(Error::invalid("worker count must be at least 1"));
    }
    match cli.command {
        Command::Parse { formula, text } => {
            let source = match (formula, text) {
                (Some(path), _) => read(&path)?,
                (None, Some(t)) => t,
                (None, None) => return Err(Error::invalid("give --formula or --text")),
            };
            let f = parse(&source)?;
            let free: Vec<String> = f.free_vars().into_iter().collect();
            let text = format!(
                "formula: {f}\nfree: {}\nquantifier_depth: {}\nsentence: {}\n",
                if free.is_empty() { "-".to_string() } else { free.join(",") },
                f.quantifier_depth(),
                f.is_sentence()
            );
            emit(out, None, &text)?;
        }
        Command::Eval { modulus, formula, engine, max_tuples } => {
            if max_tuples > MAX_TUPLES {
                return Err(Error::ResourceLimit(format!("--max-tuples {max_tuples} exceeds the cap {MAX_TUPLES}")));
            }
            let ctx = RingContext::new(modulus)?;
            let f = parse(&read(&formula)?)?;
            let cfg = FastConfig { tuple_budget: max_tuples, ..FastConfig::default() };
            let text = eval_text(&ctx, f, engine, &cfg)?;
            emit(out, None, &text)?;
        }
        Command::Spectrum { formula, poly, bound, format, engine, out: target } => {
            let table = Arc::new(sieve(check_bound(bound)?)?);
            let s = match (formula, poly) {
                (Some(path), _) => {
                    let sentence = Sentence::new(parse(&read(&path)?)?)?;
                    let opts = SpectrumOptions { workers, engine, ..Default::default() };
                    spectrum(&sentence, table, &opts)?
                }
                (None, Some(text)) => poly_spectrum(&text.parse::<IntPolynomial>()?, table)?,
                (None, None) => return Err(Error::invalid("give --formula or --poly")),
            };
            let text = match format {
                Format::Csv => s.to_csv(),
                Format::Json => to_json(&s.to_record())?,
            };
            emit(out, target.as_deref(), &text)?;
        }
        Command::Classify { spectrum, max_d, threshold, bound, out: target } => {
            let s = load_spectrum(&spectrum, bound)?;
            let fits = fit_congruences(&s, max_d, threshold)?;
            let report = ClassifyReport { bound: s.bound(), max_modulus: max_d, fits: &fits };
            emit(out, target.as_deref(), &to_json(&report)?)?;
        }
        Command::Density { spectrum, h, samples, seq, bound, out: target } => {
            let h: DensityFunction = h.parse()?;
            let seq = seq.map(|t| t.parse::<Sequence>()).transpose()?;
            let s = match (&spectrum, &seq) {
                (Some(path), _) => load_spectrum(path, bound)?,
                (None, Some(seq)) => {
                    let b = bound.ok_or_else(|| Error::invalid("--bound is required without --spectrum"))?;
                    alternating_set(seq, Arc::new(sieve(check_bound(b)?)?))?
                }
                (None, None) => return Err(Error::invalid("give --spectrum or --seq")),
            };
            let mut points: BTreeSet<u64> = samples.into_iter().collect();
            if let Some(seq) = &seq {
                points.extend(seq.terms().iter().copied().filter(|&t| t <= s.bound()));
            }
            let points: Vec<u64> = points.into_iter().collect();
            let profile = density_profile(&s, &h, &points)?;
            emit(out, target.as_deref(), &profile.to_csv())?;
        }
        Command::Construct { family, params, describe, out: target } => {
            let fam = build_family(&family, &params)?;
            let text = if describe {
                to_json(&FamilyDescription {
                    family: &fam.name,
                    params: &fam.params,
                    precondition: &fam.precondition,
                    valid_above: fam.valid_above,
                    sentence: fam.sentence.formula().to_string(),
                })?
            } else {
                format!("{}\n", fam.sentence.formula())
            };
            emit(out, target.as_deref(), &text)?;
        }
        Command::Verify { suite, bound, seed, claims, out: target } => {
            if suite != "paper" {
                return Err(Error::invalid(format!("unknown suite `{suite}`, expected `paper`")));
            }
            let config = VerifyConfig {
                bound: check_bound(bound)?,
                workers,
                seed,
                only: if claims.is_empty() { None } else { Some(claims.into_iter().collect()) },
            };
            let report = verify_suite(&config)?;
            emit(out, target.as_deref(), &to_json(&report)?)?;
            if !report.all_passed() {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
    }
    Ok(0)
}

fn eval_text(ctx: &RingContext, f: Formula, engine: Engine, cfg: &FastConfig) -> Result<String> {
    if f.is_sentence() {
        let s = Sentence::new(f)?;
        return Ok(format!("{}\n", eval_sentence_with(ctx, &s, engine, cfg)?));
    }
    let rel = satisfying_relation(ctx, &f, engine, cfg)?;
    Ok(format!("{}\n{}", !rel.is_empty(), rel.to_csv()))
}

/// Parses arguments, runs, and reports errors on stderr.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["ringspectra"];
        full.extend_from_slice(args);
        let code = main_with_args(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parse_reports_structure() {
        let (code, out, _) = run_args(&["parse", "--text", "E x. x*x = y"]);
        assert_eq!(code, 0);
        assert!(out.contains("free: y") && out.contains("quantifier_depth: 1") && out.contains("sentence: false"));
    }

    #[test]
    fn distinct_exit_codes() {
        assert_eq!(run_args(&["parse", "--text", "E x. x = "]).0, 3);
        assert_eq!(run_args(&["spectrum", "--poly", "x + 1", "--bound", "6000000"]).0, 5);
        assert_eq!(run_args(&["parse", "--formula", "/nonexistent/f.rng"]).0, 6);
        assert_eq!(run_args(&["construct", "--family", "psi", "--params", "4"]).0, 8);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(exit_code(&Error::UnboundVariable("x".into())), 4);
        assert_eq!(exit_code(&Error::EngineMismatch { modulus: 3, naive: true, fast: false }), 7);
    }

    #[test]
    fn poly_spectrum_csv() {
        let (code, out, _) = run_args(&["spectrum", "--poly", "1 + 0*x + 1*x^2", "--bound", "30"]);
        assert_eq!(code, 0);
        assert_eq!(out, "prime,member\n2,1\n3,0\n5,1\n7,0\n11,0\n13,1\n17,1\n19,0\n23,0\n29,1\n");
    }

    #[test]
    fn construct_prints_parseable_sentence() {
        let (code, out, _) = run_args(&["construct", "--family", "congruence", "--params", "2,5"]);
        assert_eq!(code, 0);
        assert!(parse(out.trim()).unwrap().is_sentence());
    }
}
