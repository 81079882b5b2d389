//! The `l0lab` command line: `verify`, `gauge` and `member`.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 parse or configuration
//! error. The seed defaults to 42 and may be overridden by `L0LAB_SEED`;
//! every other setting is a flag.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::L0Error;
use crate::l0::RandomVar;
use crate::prob_space::{AtomSpace, DEFAULT_TRUNCATION};
use crate::sets::{gauge, GaugeEngine, L0Set};
use crate::theorems::{run_suite, Config, Suite};

pub const SEED_ENV: &str = "L0LAB_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "l0lab", version, about = "Exact computations and verification in L0-modules over atomic spaces")]
pub struct Cli {
    /// Probability space: `finite:1/2,1/4,1/4`, `geometric` or `geometric:N=64`.
    #[arg(long, global = true)]
    space: Option<String>,
    /// Seed for every sampled check [default: 42, or $L0LAB_SEED].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Explicit-prefix depth of the countable space [default: 64].
    #[arg(long, global = true)]
    truncation: Option<usize>,
    /// Bisection tolerance is 2^-TOL_EXP.
    #[arg(long = "tol-exp", global = true, default_value_t = crate::sets::DEFAULT_TOL_EXP)]
    tol_exp: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite and write a JSON report.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Radius of the counterexample sets, as a random-variable descriptor.
        #[arg(long, default_value = "1")]
        epsilon: String,
        /// Report path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the gauge of X with respect to a set.
    Gauge {
        set: String,
        x: String,
        #[arg(long, value_enum, default_value_t = Engine::Symbolic)]
        engine: Engine,
    },
    /// Print whether X belongs to a set.
    Member { set: String, x: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Engine {
    Symbolic,
    Bisection,
}

/// Resolves the space from `--space` and `--truncation`; without `--space`,
/// a bracketed `x` gives the uniform space of its length.
fn resolve_space(cli: &Cli, x: Option<&str>) -> Result<AtomSpace, L0Error> {
    let space = match &cli.space {
        Some(s) => s.parse::<AtomSpace>()?,
        None => match x.map(str::trim) {
            Some(x) if x.starts_with('[') => {
                let body = x.trim_start_matches('[').trim_end_matches(']');
                AtomSpace::uniform(body.split(',').filter(|t| !t.trim().is_empty()).count().max(1))
            }
            _ => AtomSpace::geometric(cli.truncation.unwrap_or(DEFAULT_TRUNCATION)),
        },
    };
    match (space.is_countable(), cli.truncation) {
        (true, Some(0)) => Err(L0Error::Parse("truncation must be positive".into())),
        (true, Some(t)) if cli.space.as_deref().is_some_and(|s| s.contains("N=")) && t != space.truncation() => {
            Err(L0Error::Parse(format!("--truncation {t} conflicts with --space {space}")))
        }
        (true, Some(t)) => Ok(AtomSpace::geometric(t)),
        _ => Ok(space),
    }
}

fn seed(cli: &Cli) -> Result<u64, L0Error> {
    if let Some(s) = cli.seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| L0Error::Parse(format!("{SEED_ENV}={v:?} is not a seed"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, L0Error> {
    match &cli.command {
        Command::Verify { suite, epsilon, out: path } => {
            let suite: Suite = suite.parse()?;
            let space = resolve_space(cli, None)?;
            let config = Config {
                space: space.to_string(),
                seed: seed(cli)?,
                truncation: cli.truncation.unwrap_or(space.truncation()),
                tol_exp: cli.tol_exp,
                epsilon: epsilon.clone(),
                ..Config::default()
            };
            let report = run_suite(suite, &config)?;
            for r in &report.reports {
                let status = if r.passed { "ok" } else { "MISMATCH" };
                writeln!(err, "{status:>8}  {}", r.statement).ok();
            }
            let json = report.to_json();
            match path {
                Some(p) => std::fs::write(p, json + "\n")
                    .map_err(|e| L0Error::Parse(format!("cannot write {}: {e}", p.display())))?,
                None => writeln!(out, "{json}").map_err(|e| L0Error::Parse(e.to_string()))?,
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Gauge { set, x, engine } => {
            let space = resolve_space(cli, Some(x))?;
            let k = L0Set::parse(&space, set)?;
            let x = RandomVar::parse(&space, x)?;
            let engine = match engine {
                Engine::Symbolic => GaugeEngine::Symbolic,
                Engine::Bisection => GaugeEngine::Bisection { tol_exp: cli.tol_exp },
            };
            let r = gauge(&k, &x, &engine)?;
            match r.enclosure {
                Some((lo, hi)) => writeln!(out, "lower={lo}\nupper={hi}"),
                None => writeln!(out, "{}", r.value),
            }
            .map_err(|e| L0Error::Parse(e.to_string()))?;
            Ok(0)
        }
        Command::Member { set, x } => {
            let space = resolve_space(cli, Some(x))?;
            let k = L0Set::parse(&space, set)?;
            let x = RandomVar::parse(&space, x)?;
            writeln!(out, "{}", k.member(&x)?).map_err(|e| L0Error::Parse(e.to_string()))?;
            Ok(0)
        }
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                write!(out, "{text}").ok();
            } else {
                write!(err, "{text}").ok();
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("l0lab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn gauge_command() {
        assert_eq!(call(&["gauge", "ball:abs,eps=2", "[4,2,0]"]).1.trim(), "[2,1,0]");
        assert_eq!(call(&["gauge", "ball:abs,eps=2", "[0,0,0]"]).1.trim(), "[0,0,0]");
        assert_eq!(call(&["gauge", "cex:eps=1", "<1|1>"]).1.trim(), "0");
        let (code, out, _) = call(&["gauge", "ball:abs,eps=2", "[4,2,0]", "--engine", "bisection"]);
        assert_eq!(code, 0);
        assert!(out.contains("upper=[2,1,0]"), "{out}");
        let (code, _, err) = call(&["gauge", "cex:eps=1", "<1|1>", "--engine", "bisection"]);
        assert_eq!(code, 2);
        assert!(err.contains("engine"));
        assert_eq!(call(&["gauge", "ball:abs,eps=2", "[1,2]", "--space", "finite:1/2,1/4,1/4"]).0, 2);
    }

    #[test]
    fn member_command() {
        assert_eq!(call(&["member", "cex:eps=1", "<5|1/2>"]).1.trim(), "true");
        assert_eq!(call(&["member", "cex:eps=1", "<2|2>"]).1.trim(), "false");
        assert_eq!(call(&["member", "ball:abs,eps=1", "[1,1,1]"]).1.trim(), "true");
        assert_eq!(call(&["member", "disk", "[1]"]).0, 2);
    }

    #[test]
    fn configuration_errors() {
        assert_eq!(call(&["verify", "--space", "finite:1/2,1/2,1/4"]).0, 2);
        assert_eq!(call(&["verify", "--suite", "everything"]).0, 2);
        assert_eq!(call(&["verify", "--space", "geometric:N=8", "--truncation", "9"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn printed_numbers_round_trip() {
        let (_, out, _) = call(&["gauge", "ball:abs,eps=3", "<7,1/3|-5/2>"]);
        let g = AtomSpace::geometric(DEFAULT_TRUNCATION);
        let parsed = crate::l0::ExtRandomVar::parse(&g, out.trim()).unwrap();
        assert_eq!(parsed.to_string(), out.trim());
    }
}
