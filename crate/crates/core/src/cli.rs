//! Command dispatch behind the `hetmod` binary.

use clap::{Parser, ValueEnum};

use crate::chartlocal::trivialize;
use crate::cohomology::{cohomology, injectivity_scan, symbol_samples};
use crate::error::{Error, Result};
use crate::models::load;
use crate::qcomplex::{QComplex, QOptions};
use crate::report;
use crate::scalar::parse_real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Check,
    Cohomology,
    Serre,
    Symbol,
    Trivialize,
}

#[derive(Debug, Parser)]
#[command(name = "hetmod", about = "Heterotic deformation complexes on homogeneous models")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Built-in name (iwasawa, calabi-eckmann, torus) or model JSON file.
    pub model: String,
    /// Override α′ with a real rational such as -4 or 1/7.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_prime: Option<String>,
    /// Number of symbol sample covectors (default: all).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Polynomial degree bound for the chart check.
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Drop the off-diagonal blocks of D̄.
    #[arg(long)]
    pub diagonal_dbar: bool,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Runs one command. Returns the exit code and the report text.
pub fn execute(cfg: &RunConfig) -> Result<(i32, String)> {
    let mut m = load(&cfg.model)?;
    if let Some(a) = &cfg.alpha_prime {
        m = m.with_alpha_prime(parse_real(a)?);
    }
    let code = |ok: bool| if ok { EXIT_PASS } else { EXIT_FAIL };
    let opts = QOptions { diagonal: cfg.diagonal_dbar };
    let (ok, v) = match cfg.command {
        Command::Check => {
            let r = m.check_heterotic_system()?;
            (r.all_pass(), report::system_json(&m.name, &r))
        }
        Command::Cohomology => {
            let checks = m.check_heterotic_system()?;
            let q = QComplex::new(&m, opts)?;
            let c = cohomology(&q, &m.alpha_prime)?;
            let samples = cfg.samples.unwrap_or_else(|| symbol_samples(m.n).len());
            let s = injectivity_scan(&q, &m.alpha_prime, samples, &[])?;
            (c.hodge_identity() && c.serre() && s.injective, report::cohomology_json(&c, Some(&s), &checks))
        }
        Command::Serre => {
            let checks = m.check_heterotic_system()?;
            let q = QComplex::new(&m, opts)?;
            let c = cohomology(&q, &m.alpha_prime)?;
            (c.serre(), report::serre_json(&c, checks.alpha_arbitrary()))
        }
        Command::Symbol => {
            let q = QComplex::new(&m, opts)?;
            let samples = cfg.samples.unwrap_or_else(|| symbol_samples(m.n).len());
            let s = injectivity_scan(&q, &m.alpha_prime, samples, &[])?;
            (s.injective, report::symbol_json(&s))
        }
        Command::Trivialize => {
            let t = trivialize(&m, cfg.degree)?;
            (t.all_pass(), report::trivialization_json(&t))
        }
    };
    Ok((code(ok), report::render(&v)))
}

/// Exit code for an error: a D̄² refusal is a failed check, anything
/// else is bad input.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::NotNilpotent(_) => EXIT_FAIL,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name), runs, writes the report.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    match execute(&cfg) {
        Ok((code, text)) => {
            match &cfg.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("hetmod: {e}");
                        return EXIT_INPUT;
                    }
                }
                None => print!("{text}"),
            }
            code
        }
        Err(e) => {
            eprintln!("hetmod: {e}");
            error_code(&e)
        }
    }
}
