//! `diracsusy`: spectra, oracle checks, stability and sweeps from a
//! problem file.
//!
//! Exit codes: 0 success, 1 config or usage error, 2 bound states requested
//! in an unstable regime, 3 verification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod solve;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{parse_pair, ProblemConfig};
use output::SweepPoint;
use solve::Failure;

#[derive(Parser)]
#[command(name = "diracsusy", version, about = "Dirac spectra by factorization, checked against a numerical oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem file
    #[arg(long)]
    config: PathBuf,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Levels {
    /// Highest quantum number (overrides solve.n_max)
    #[arg(long)]
    n_max: Option<usize>,
    /// Energy window `lo,hi` for the root search (overrides solve.window)
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
    window: Option<(f64, f64)>,
}

#[derive(Subcommand)]
enum Command {
    /// Engine levels beside their closed forms
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        levels: Levels,
    },
    /// Engine levels against the numerical oracle; PASS/FAIL on stderr
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        levels: Levels,
    },
    /// Stability verdict of the couplings
    Stability {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-solve the spectrum over a range of one parameter
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        levels: Levels,
        /// Numeric key to vary, e.g. couplings.zeta3
        #[arg(long)]
        param: String,
        /// `lo,hi`
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        range: (f64, f64),
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Normalized eigenfunction of one level
    Wavefunction {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// minus, plus or single; may be omitted when the level is unique
        #[arg(long)]
        branch: Option<String>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        window: Option<(f64, f64)>,
    },
}

fn load(path: &Path) -> Result<ProblemConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(config::parse_config(&text)?)
}

fn apply(mut cfg: ProblemConfig, levels: &Levels) -> Result<ProblemConfig, Failure> {
    if let Some(n) = levels.n_max {
        cfg.n_max = n;
    }
    if let Some(w) = levels.window {
        check_window(w)?;
        cfg.window = Some(w);
    }
    Ok(cfg)
}

fn check_window((lo, hi): (f64, f64)) -> Result<(), Failure> {
    if hi > lo {
        Ok(())
    } else {
        Err(Failure::Usage("--window needs lo < hi".into()))
    }
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_failure(e: anyhow::Error) -> Failure {
    Failure::Usage(format!("{e:#}"))
}

fn sweep_values((lo, hi): (f64, f64), steps: usize) -> Vec<f64> {
    if lo == hi || steps <= 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

fn sweep_point(cfg: &ProblemConfig, param: &str, value: f64) -> Result<Vec<(usize, &'static str, f64)>, Failure> {
    let cfg = config::with_param(cfg, param, value)?;
    let b = solve::build(&cfg)?;
    let levels = diracsusy::susy::spectrum(&b.spectral, cfg.n_max)?;
    Ok(levels.iter().map(|l| (l.n, l.branch.tag(), l.energy)).collect())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum { common, levels } => {
            let cfg = apply(load(&common.config)?, &levels)?;
            let b = solve::build(&cfg)?;
            let (_, rows) = solve::spectrum_rows(&cfg, &b, cfg.n_max)?;
            output::write_rows(sink(&common.out).map_err(io_failure)?, &rows).map_err(io_failure)
        }
        Command::Verify { common, levels } => {
            let cfg = apply(load(&common.config)?, &levels)?;
            let b = solve::build(&cfg)?;
            let (found, mut rows) = solve::spectrum_rows(&cfg, &b, cfg.n_max)?;
            let v = solve::verify(&cfg, &b, &found, &mut rows)?;
            output::write_rows(sink(&common.out).map_err(io_failure)?, &rows).map_err(io_failure)?;
            eprintln!("{}", v.summary);
            if v.pass {
                Ok(())
            } else {
                Err(Failure::Verification(v.summary))
            }
        }
        Command::Stability { config } => {
            let cfg = load(&config)?;
            let v = solve::verdict(&cfg)?;
            println!("{}", solve::describe(&v));
            if let Some(note) = solve::caveat(&v) {
                println!("{note}");
            }
            Ok(())
        }
        Command::Sweep { common, levels, param, range, steps } => {
            let cfg = apply(load(&common.config)?, &levels)?;
            // Reject a bad key up front rather than on every row.
            config::with_param(&cfg, &param, range.0)?;
            let points: Vec<SweepPoint> = sweep_values(range, steps)
                .into_iter()
                .map(|value| SweepPoint { value, outcome: sweep_point(&cfg, &param, value).map_err(|e| e.to_string()) })
                .collect();
            output::write_sweep(sink(&common.out).map_err(io_failure)?, &points).map_err(io_failure)
        }
        Command::Wavefunction { common, n, branch, window } => {
            let mut cfg = load(&common.config)?;
            if let Some(w) = window {
                check_window(w)?;
                cfg.window = Some(w);
            }
            let branch = branch.as_deref().map(solve::parse_branch).transpose()?;
            let b = solve::build(&cfg)?;
            let (level, eig) = solve::wavefunction(&cfg, &b, n, branch)?;
            output::write_wavefunction(sink(&common.out).map_err(io_failure)?, n, level.branch.tag(), &eig)
                .map_err(io_failure)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, Failure::Verification(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
