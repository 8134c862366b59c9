//! Krylov–Bogoliubov averages from rest, exceedance fractions and the
//! two-window stationarity diagnostic on a 2-d ensemble.

use sdns::estimators::{exceedance_table, kb_report, observable_series, stationarity_diagnostic, WindowSplit};
use sdns::integrator::{simulate_ensemble, SolverConfig};
use sdns::noise::{NoiseModel, Saturation};
use sdns::spectral::{Grid, SpectralField};

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(2, 16)?;
    let mut config = SolverConfig::new(grid);
    config.noise = NoiseModel::new(0.5, 1.0, NoiseModel::default_r(2, 0.5), Saturation::One, 21)?;
    config.t_end = 40.0;
    config.dt = 0.02;
    let trajs = simulate_ensemble(&config, |_| SpectralField::zeros(grid), 16, 1)?;

    let kb = kb_report(&trajs, &config.panel, &[10.0, 20.0, 40.0])?;
    for (o, name) in kb.observables.iter().enumerate() {
        let avgs: Vec<String> = kb.averages.iter().map(|row| format!("{:.4}", row[o].mean)).collect();
        let gaps: Vec<String> = kb.gaps.iter().map(|row| format!("{:.2e}", row[o].mean)).collect();
        println!("{name:<22} averages {avgs:?} gaps {gaps:?} decreasing {}", kb.gaps_decreasing(o));
    }

    let table = exceedance_table(&trajs, &[2.0, 4.0, 6.0, 8.0], &[10.0, 20.0, 40.0])?;
    println!("exceedance monotone in R: {}, horizon spread {:.2} s.e.", table.monotone_in_radius(), table.max_horizon_spread());

    let phi = &config.panel[0];
    let passes = trajs
        .iter()
        .map(|t| Ok(stationarity_diagnostic(&t.times(), &observable_series(t, phi)?, WindowSplit::default())?.passes(0.01)))
        .collect::<sdns::Result<Vec<bool>>>()?;
    println!("stationarity passes: {}/{}", passes.iter().filter(|&&p| p).count(), passes.len());
    Ok(())
}
