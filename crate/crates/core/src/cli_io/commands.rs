//! Subcommand drivers shared by the binary and the examples. Each returns
//! an [`Outcome`]; the binary turns `passed` into the exit code.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::{
    exceedance_table, kb_report, mollification_limit_study, observable_series, stationarity_diagnostic,
};
use crate::integrator::{simulate_ensemble, simulate_member};
use crate::noise::{zeta_alpha_statistics, ZetaAlphaSetup};
use crate::verify::{self, Profile};

use super::config::RunConfig;
use super::output::{self, VERSION};

/// Command-line overrides; `None` defers to the configuration file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub out_dir: PathBuf,
    /// Whether the run's own checks held (always true for plain runs).
    pub passed: bool,
    pub summary: String,
}

/// Load, apply overrides, resolve, and create the output directory.
pub fn prepare(opts: &RunOptions, command: &str) -> Result<(RunConfig, PathBuf)> {
    let mut config = match &opts.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(w) = opts.workers {
        config.workers = Some(w);
    }
    // the output location is not part of the run, so it stays out of the digest
    let out = opts
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("sdns-out").join(command));
    let config = config.resolve()?;
    fs::create_dir_all(&out)?;
    output::write_run_metadata(&out, command, &config)?;
    Ok((config, out))
}

fn workers(config: &RunConfig) -> usize {
    config.workers.unwrap_or(1)
}

pub fn cmd_simulate(opts: &RunOptions) -> Result<Outcome> {
    let (config, out) = prepare(opts, "simulate")?;
    let solver = config.solver_config()?;
    let traj = simulate_member(&solver, &solver.initial, 0)?;
    output::write_trajectory(&out.join("trajectory.csv"), &traj)?;
    if !traj.panel.is_empty() {
        output::write_panel(&out.join("panel.csv"), &traj)?;
    }
    let snaps = output::write_snapshots(&out.join("snapshots"), &traj)?;
    let last = traj.records.last().expect("a run records its initial state");
    Ok(Outcome {
        out_dir: out,
        passed: true,
        summary: format!(
            "simulated {} steps to t={}: ‖v‖_H={:.6e}, {} snapshot files",
            traj.meta.steps,
            last.time,
            last.norm_h,
            snaps.len()
        ),
    })
}

pub fn cmd_invariant(opts: &RunOptions) -> Result<Outcome> {
    let (config, out) = prepare(opts, "invariant")?;
    if config.members < 2 {
        return Err(Error::InvalidConfig {
            key: "members".into(),
            reason: "invariant-measure estimates need an ensemble of at least 2".into(),
        });
    }
    let solver = config.solver_config()?;
    let trajs = simulate_ensemble(&solver, |_| solver.initial.clone(), config.members, workers(&config))?;
    let horizons = config.estimators.horizons.clone().unwrap_or_default();
    let kb = kb_report(&trajs, &solver.panel, &horizons)?;
    output::write_kb_report(&out.join("kb_report.csv"), &kb)?;
    let exc = exceedance_table(&trajs, &config.estimators.radii, &horizons)?;
    output::write_exceedance(&out.join("exceedance.csv"), &exc)?;

    let split = config.window_split();
    let level = config.estimators.stationarity_level;
    let mut rows = Vec::new();
    for traj in &trajs {
        let times = traj.times();
        for phi in &solver.panel {
            let report = stationarity_diagnostic(&times, &observable_series(traj, phi)?, split)?;
            rows.push((traj.meta.member, phi.name(), report));
        }
    }
    output::write_stationarity(&out.join("stationarity.csv"), &rows, level)?;

    let passing = rows.iter().filter(|r| r.2.passes(level)).count();
    let decreasing = (0..kb.observables.len()).filter(|&o| kb.gaps_decreasing(o)).count();
    Ok(Outcome {
        out_dir: out,
        passed: true,
        summary: format!(
            "{} members; KB gaps decreasing for {decreasing}/{} observables; exceedance monotone in R: {}; \
             stationarity passes at level {level}: {passing}/{}",
            trajs.len(),
            kb.observables.len(),
            exc.monotone_in_radius(),
            rows.len()
        ),
    })
}

/// `alphas` overrides the configured list.
pub fn cmd_zeta_alpha(opts: &RunOptions, alphas: Option<&[f64]>) -> Result<Outcome> {
    let (mut config, out) = prepare(opts, "zeta-alpha")?;
    if let Some(a) = alphas {
        config.zeta.alphas = a.to_vec();
        output::write_run_metadata(&out, "zeta-alpha", &config)?;
    }
    let solver = config.solver_config()?;
    let setup = ZetaAlphaSetup {
        grid: solver.grid,
        nu: solver.nu,
        gamma: solver.gamma,
        dt: solver.dt,
        driver: solver.initial.clone(),
    };
    let z = &config.zeta;
    let table = zeta_alpha_statistics(&solver.noise, &setup, &z.alphas, z.t_probe, z.samples)?;
    output::write_zeta_alpha(&out.join("zeta_alpha.csv"), &table)?;
    let first = table.rows.first().map_or(f64::NAN, |r| r.h2.mean);
    let last = table.rows.last().map_or(f64::NAN, |r| r.h2.mean);
    Ok(Outcome {
        out_dir: out,
        passed: true,
        summary: format!(
            "{} alphas, {} samples: E‖ζ‖² from {first:.4e} to {last:.4e}; non-increasing: {}",
            table.rows.len(),
            table.n_samples,
            table.non_increasing
        ),
    })
}

pub fn cmd_moll_limit(opts: &RunOptions) -> Result<Outcome> {
    let (config, out) = prepare(opts, "moll-limit")?;
    if config.grid.d != 3 {
        return Err(Error::InvalidConfig {
            key: "grid.d".into(),
            reason: "the mollification-limit study runs in 3-d".into(),
        });
    }
    let solver = config.solver_config()?;
    let report = mollification_limit_study(
        &solver,
        &config.moll_limit.ms,
        config.members,
        config.estimators.burn_in.unwrap_or(0.0),
        workers(&config),
    )?;
    output::write_moll_limit(&out.join("moll_limit.csv"), &report)?;
    let decreasing = (0..report.observables.len()).filter(|&o| report.gaps_decreasing(o)).count();
    Ok(Outcome {
        out_dir: out,
        passed: true,
        summary: format!(
            "{} values of m; successive gaps decreasing for {decreasing}/{} observables",
            report.rows.len(),
            report.observables.len()
        ),
    })
}

/// Runs the battery; `passed` is false if any ledger row failed.
pub fn cmd_verify(profile: Profile, seed: u64, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    let rows = verify::run_all(profile, seed);
    output::write_ledger(&out.join("ledger.csv"), &rows)?;
    let text = verify::render_text(&rows);
    fs::write(out.join("ledger.txt"), &text)?;
    fs::write(
        out.join("run.toml"),
        format!("version = \"{VERSION}\"\ncommand = \"verify\"\nprofile = \"{profile}\"\nseed = {seed}\nschema = \"v1\"\n"),
    )?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    Ok(Outcome {
        out_dir: out.to_path_buf(),
        passed: failed == 0,
        summary: format!("{text}{} checks, {failed} failed", rows.len()),
    })
}
