use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdns::cli_io::{self, Outcome, RunOptions};
use sdns::verify::Profile;

#[derive(Parser)]
#[command(name = "sdns", version, about = "Damped stochastic Navier–Stokes simulation and verification lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; every key is optional.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Ensemble worker threads.
    #[arg(long, value_name = "N", env = "SDNS_WORKERS")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl From<Common> for RunOptions {
    fn from(c: Common) -> Self {
        RunOptions {
            config: c.config,
            seed: c.seed,
            workers: c.workers,
            out: c.out,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write its observables and snapshots.
    Simulate(Common),
    /// Ensemble time averages, exceedance fractions and stationarity diagnostics.
    Invariant(Common),
    /// Moments of the extra-damped stochastic convolution along α.
    ZetaAlpha {
        #[command(flatten)]
        common: Common,
        /// Comma-separated α list, overriding the configuration.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Panel averages along an increasing mollification grid (3-d).
    MollLimit(Common),
    /// Property-test battery; exits non-zero if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "quick")]
        profile: ProfileArg,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProfileArg {
    Quick,
    Full,
}

fn run(cli: Cli) -> sdns::Result<Outcome> {
    match cli.command {
        Command::Simulate(c) => cli_io::cmd_simulate(&c.into()),
        Command::Invariant(c) => cli_io::cmd_invariant(&c.into()),
        Command::ZetaAlpha { common, alphas } => cli_io::cmd_zeta_alpha(&common.into(), alphas.as_deref()),
        Command::MollLimit(c) => cli_io::cmd_moll_limit(&c.into()),
        Command::Verify { common, profile } => {
            let profile = match profile {
                ProfileArg::Quick => Profile::Quick,
                ProfileArg::Full => Profile::Full,
            };
            if let Some(w) = common.workers {
                // the battery parallelizes across checks
                let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
            }
            let out = common.out.unwrap_or_else(|| PathBuf::from("sdns-out/verify"));
            cli_io::cmd_verify(profile, common.seed.unwrap_or(0), &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            println!("outputs in {}", outcome.out_dir.display());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
