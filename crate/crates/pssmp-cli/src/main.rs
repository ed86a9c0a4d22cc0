//! `pssmp` experiment runner.
//!
//! Exit codes: 0 completed, 1 failed check or runtime error, 2 schema or usage error,
//! 3 inconclusive classification, 4 conditioning event too rare.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Common, Experiment, UsageError};
use output::Artifacts;

#[derive(Parser)]
#[command(name = "pssmp", version = output::VERSION, about = "Yaglom limits and exponential functionals of positive self-similar Markov processes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the Yaglom regime of a spec.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Regular-variation index asserted for specs without a Cramér root.
        #[arg(long)]
        assert_gamma: Option<f64>,
    },
    /// Conditioned marginals X_t/g(t) across the time grid.
    Yaglom {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long)]
        assert_gamma: Option<f64>,
    },
    /// Check factor × I against its Exp, Beta or Pareto target.
    VerifyFactorization {
        #[command(flatten)]
        common: Common,
        /// exp, beta:GAMMA or pareto:GAMMA; defaults to the regime's factor.
        #[arg(long)]
        factor: Option<String>,
    },
    /// Solve the density equation of I.
    Density {
        #[command(flatten)]
        common: Common,
    },
    /// Hazard against its asymptotic envelope, with the h_n iteration when drift-free.
    Tail {
        #[command(flatten)]
        common: Common,
    },
    /// Residual-lifetime identity at each t.
    Residual {
        #[command(flatten)]
        common: Common,
        /// Also fit the three residual shapes.
        #[arg(long)]
        mda: bool,
    },
    /// List the gallery, optionally checking samplers and regimes.
    Examples {
        #[arg(long)]
        self_test: bool,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.02)]
        ks: f64,
    },
    /// Samples of the exponential functional I.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Draw from the exact law of a gallery example instead of simulating paths.
        #[arg(long)]
        exact: bool,
    },
}

fn run_experiment(ex: Experiment, f: impl FnOnce(&Experiment) -> Result<Artifacts> + Send) -> Result<i32> {
    let config = ex.to_json()?;
    let art = match ex.threads {
        Some(k) => pssmp::rng::with_threads(k, || f(&ex)),
        None => f(&ex),
    }?;
    finish(ex.command, &config, ex.out.as_deref(), &art)
}

fn finish(command: &str, config: &serde_json::Value, out: Option<&std::path::Path>, art: &Artifacts) -> Result<i32> {
    if let Some(dir) = out {
        output::write_dir(dir, command, config, art)?;
    }
    let text = serde_json::to_string_pretty(&output::envelope(command, config, art.report.clone()))?;
    // A closed pipe (e.g. `| head`) is not an error.
    let _ = writeln!(std::io::stdout(), "{text}");
    Ok(art.code)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Classify { common, assert_gamma } => {
            let ex = Experiment::new("classify", &common, commands::CLASSIFY_TOL, json!({ "assert_gamma": assert_gamma }))?;
            run_experiment(ex, |ex| commands::classify(ex, assert_gamma))
        }
        Cmd::Yaglom { common, x0, assert_gamma } => {
            let ex = Experiment::new("yaglom", &common, commands::YAGLOM_TOL, json!({ "x0": x0, "assert_gamma": assert_gamma }))?;
            run_experiment(ex, |ex| commands::yaglom(ex, x0, assert_gamma))
        }
        Cmd::VerifyFactorization { common, factor } => {
            let ex = Experiment::new("verify-factorization", &common, commands::VERIFY_TOL, json!({ "factor": factor }))?;
            run_experiment(ex, |ex| commands::verify_factorization(ex, factor.as_deref()))
        }
        Cmd::Density { common } => run_experiment(Experiment::new("density", &common, commands::CPY_TOL, json!({}))?, commands::density),
        Cmd::Tail { common } => run_experiment(Experiment::new("tail", &common, commands::TAIL_TOL, json!({}))?, commands::tail),
        Cmd::Residual { common, mda } => {
            let ex = Experiment::new("residual", &common, commands::RESIDUAL_TOL, json!({ "mda": mda }))?;
            run_experiment(ex, |ex| commands::residual(ex, mda))
        }
        Cmd::Simulate { common, exact } => {
            let ex = Experiment::new("simulate", &common, commands::SIMULATE_TOL, json!({ "exact": exact }))?;
            run_experiment(ex, |ex| commands::simulate(ex, exact))
        }
        Cmd::Examples { self_test, n, seed, threads, out, ks } => {
            if n < 100 {
                return config::usage(format!("--n must be at least 100, got {n}"));
            }
            let config = json!({ "command": "examples", "self_test": self_test, "n": n, "seed": seed, "threads": threads, "ks": ks });
            let art = match threads {
                Some(k) => pssmp::rng::with_threads(k, || commands::examples(n, seed, self_test, ks)),
                None => commands::examples(n, seed, self_test, ks),
            }?;
            finish("examples", &config, out.as_deref(), &art)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<pssmp::Error>() {
        Some(pssmp::Error::Schema(_) | pssmp::Error::InvalidParameter(_) | pssmp::Error::OutOfDomain(_)) => 2,
        Some(pssmp::Error::Inconclusive(_)) => 3,
        Some(pssmp::Error::RareEvent { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
