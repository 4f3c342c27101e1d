//! Command-line front end.
//!
//! Exit codes: `0` success, `1` a verification failed, `2` invalid input.
//! Residue arguments are reduced mod `N`, so `--a -1,4` at level 3 means `(2, 1)`.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::Value;

use crate::eisenstein::{bg_tilde_s, eisenstein_qexp, EisensteinIndex};
use crate::error::{Error, Result};
use crate::numeric::{self, NumericConfig, NumericReport, TorusPoint};
use crate::relations::{self, recurrence_check, Coefficient, Perturbation, RelationInstance, ScanOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "eisenrel", version, about = "Level-N Eisenstein series and their three-term product relations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the q-expansion of E^(k;N)_a.
    Expand(ExpandArgs),
    /// Print s~^(k)_(a/N) = -N^(k-1) E^(k;N)_(a,0)(N tau).
    BgSeries(BgArgs),
    /// Verify one instance of the relation exactly.
    Verify(VerifyArgs),
    /// Verify every instance up to the given level and weight.
    Scan(ScanArgs),
    /// Check the polynomial and scalar recurrences of the relation data.
    Recurrences(RecurrenceArgs),
    /// Run one floating-point check.
    Numeric(NumericArgs),
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[arg(long)]
    pub level: u32,
    #[arg(long)]
    pub weight: u32,
    #[arg(long, value_parser = parse_pair_i64, allow_hyphen_values = true)]
    pub a: (i64, i64),
    #[arg(long, default_value_t = 40)]
    pub order: u32,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BgArgs {
    #[arg(long)]
    pub level: u32,
    #[arg(long)]
    pub weight: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub a: i64,
    #[arg(long, default_value_t = 40)]
    pub order: u32,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub level: u32,
    /// Must equal k1 + k2 + 2 when given.
    #[arg(long)]
    pub weight: Option<u32>,
    #[arg(long, value_parser = parse_pair_u32)]
    pub split: (u32, u32),
    #[arg(long, value_parser = parse_pair_i64, allow_hyphen_values = true)]
    pub a: (i64, i64),
    #[arg(long, value_parser = parse_pair_i64, allow_hyphen_values = true)]
    pub b: (i64, i64),
    #[arg(long, default_value_t = 40)]
    pub order: u32,
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PerturbTarget {
    Alpha,
    Beta,
    Gamma,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    pub level_max: u32,
    #[arg(long, default_value_t = 8)]
    pub weight_max: u32,
    #[arg(long, default_value_t = 40)]
    pub order: u32,
    /// Worker threads.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Add 1 to one relation constant in every instance (a self-test of the scan).
    #[arg(long, value_enum)]
    pub perturb: Option<PerturbTarget>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct RecurrenceArgs {
    /// Largest k1 + k2 checked.
    #[arg(long, default_value_t = 10)]
    pub degree_max: u32,
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NumericCheck {
    Relation,
    Diff,
    Bracket,
    Modularity,
    Asymptotics,
}

#[derive(Args, Debug)]
pub struct NumericArgs {
    #[arg(long, value_enum)]
    pub check: NumericCheck,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.3,1.1")]
    pub tau: Complex64,
    /// Weight for diff, modularity and asymptotics.
    #[arg(long, default_value_t = 1)]
    pub weight: u32,
    /// (k1, k2) for relation and bracket; the bracket check uses P = X^k1 Y^k2.
    #[arg(long, value_parser = parse_pair_u32, default_value = "0,0")]
    pub split: (u32, u32),
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0.123,0.456")]
    pub u: TorusPoint,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0.271,0.618")]
    pub v: TorusPoint,
    /// Point (x1, x2) for diff and modularity.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0.31,0.47")]
    pub z: TorusPoint,
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    /// Matrix a,b,c,d for the modularity check.
    #[arg(long, value_parser = parse_matrix, allow_hyphen_values = true, default_value = "1,1,0,1")]
    pub gamma: [[i64; 2]; 2],
    #[arg(long, default_value_t = 80)]
    pub fourier_terms: u32,
    #[arg(long, default_value_t = 200)]
    pub lattice_cutoff: u32,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

fn split_numbers<T: std::str::FromStr>(s: &str, n: usize) -> std::result::Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated values, got '{s}'"));
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| format!("cannot parse '{p}'")))
        .collect()
}

fn parse_pair_i64(s: &str) -> std::result::Result<(i64, i64), String> {
    let v = split_numbers::<i64>(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_pair_u32(s: &str) -> std::result::Result<(u32, u32), String> {
    let v = split_numbers::<u32>(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_real_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = split_numbers::<f64>(s, 2)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("non-finite value in '{s}'"));
    }
    Ok((v[0], v[1]))
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    parse_real_pair(s).map(|(re, im)| Complex64::new(re, im))
}

fn parse_point(s: &str) -> std::result::Result<TorusPoint, String> {
    parse_real_pair(s).map(|(a, b)| TorusPoint::new(a, b))
}

fn parse_matrix(s: &str) -> std::result::Result<[[i64; 2]; 2], String> {
    let v = split_numbers::<i64>(s, 4)?;
    Ok([[v[0], v[1]], [v[2], v[3]]])
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn emit(out: &mut dyn Write, json: bool, value: &Value, text: &str) -> Result<()> {
    let r = if json {
        writeln!(out, "{}", serde_json::to_string_pretty(value).expect("serializable"))
    } else {
        writeln!(out, "{text}")
    };
    r.map_err(|e| Error::Config(format!("cannot write output: {e}")))
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Expand(a) => {
            check_order(a.order)?;
            let idx = EisensteinIndex::new(a.weight, a.level, a.a.0, a.a.1)?;
            let f = eisenstein_qexp(&idx, a.order);
            emit(out, a.json, &f.to_json(), &format!("{idx} = {f}"))?;
            Ok(EXIT_OK)
        }
        Command::BgSeries(a) => {
            check_order(a.order)?;
            let f = bg_tilde_s(a.weight, a.level, a.a, a.order)?;
            let text = format!("s~^({})_({}/{}) = {f}", a.weight, a.a.rem_euclid(a.level as i64), a.level);
            emit(out, a.json, &f.to_json(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify(a) => {
            check_order(a.order)?;
            let (k1, k2) = a.split;
            if let Some(k) = a.weight {
                if k != k1 + k2 + 2 {
                    return Err(Error::InvalidInstance(format!(
                        "weight {k} does not match split ({k1},{k2}); expected {}",
                        k1 + k2 + 2
                    )));
                }
            }
            let inst = RelationInstance::new(a.level, k1, k2, a.a, a.b)?;
            let report = relations::verify_instance(&inst, a.order)?;
            let text = match report.first_nonzero_exponent {
                None => format!("verified: {inst}, residual zero to order {}", a.order),
                Some(n) => format!("FAILED: {inst}, first nonzero exponent {n}/{}", a.level),
            };
            emit(out, a.json, &report.to_json(), &text)?;
            Ok(if report.residual_zero { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Scan(a) => {
            check_order(a.order)?;
            let perturbation = a.perturb.map(|t| {
                Perturbation::plus_one(match t {
                    PerturbTarget::Alpha => Coefficient::Alpha,
                    PerturbTarget::Beta => Coefficient::Beta,
                    PerturbTarget::Gamma => Coefficient::Gamma,
                })
            });
            let opts = ScanOptions {
                threads: a.parallel,
                perturbation,
            };
            let s = relations::scan(a.level_max, a.weight_max, a.order, &opts)?;
            let mut text = format!(
                "instances: {}\npassed: {}\nfailed: {}\norder: {}",
                s.instances, s.passed, s.failed, s.order
            );
            for f in s.failures.iter().take(20) {
                text.push_str(&format!("\n  FAILED {} at exponent {:?}", f.instance, f.first_nonzero_exponent));
            }
            emit(out, a.json, &s.to_json(), &text)?;
            Ok(if s.failed == 0 { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Recurrences(a) => {
            let report = recurrence_check(a.degree_max + 2);
            let mut text = format!(
                "checked {} identities for k1 + k2 <= {}: {}",
                report.entries.len(),
                a.degree_max,
                if report.all_pass() { "all pass" } else { "FAILURES" }
            );
            for f in report.failures() {
                text.push_str(&format!("\n  ({},{}) {}", f.k1, f.k2, f.identity));
            }
            emit(out, a.json, &report.to_json(), &text)?;
            Ok(if report.all_pass() { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Numeric(a) => {
            let report = run_numeric(a)?;
            let text = format!(
                "{}: residual {:.3e} (tail estimate {:.3e}) {}",
                report.check,
                report.residual,
                report.tail_estimate,
                if report.pass { "pass" } else { "FAIL" }
            );
            emit(out, a.json, &report.to_json(), &text)?;
            Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn check_order(order: u32) -> Result<()> {
    if order == 0 {
        return Err(Error::Config("order must be positive".into()));
    }
    Ok(())
}

fn run_numeric(a: &NumericArgs) -> Result<NumericReport> {
    let mut cfg = NumericConfig {
        tau: a.tau,
        fourier_terms: a.fourier_terms,
        lattice_cutoff: a.lattice_cutoff,
        ..Default::default()
    };
    if let Some(t) = a.tol {
        cfg.tol = t;
        cfg.fd_tol = t;
    }
    cfg.validate()?;
    let (k1, k2) = a.split;
    match a.check {
        NumericCheck::Relation => numeric::check_relation_numeric(k1, k2, a.u, a.v, &cfg),
        NumericCheck::Diff => numeric::check_diff_relation(a.weight, a.z, &cfg, a.h),
        NumericCheck::Bracket => {
            let p = relations::poly_p(k1 as i64, k2 as i64);
            numeric::check_diff_bracket(&p, a.u, a.v, &cfg, a.h)
        }
        NumericCheck::Modularity => numeric::check_modularity(a.weight, a.z, a.gamma, &cfg),
        NumericCheck::Asymptotics => numeric::check_asymptotics(a.weight, &cfg),
    }
}
