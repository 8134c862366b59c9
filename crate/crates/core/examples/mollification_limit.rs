//! Panel averages of the 3-d mollified system along increasing m, with
//! the paired gaps between successive m.

use sdns::estimators::mollification_limit_study;
use sdns::integrator::SolverConfig;
use sdns::noise::{NoiseModel, Saturation};
use sdns::spectral::Grid;

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(3, 8)?;
    let mut config = SolverConfig::new(grid);
    config.noise = NoiseModel::new(0.5, 1.0, NoiseModel::default_r(3, 0.5), Saturation::One, 4)?;
    config.t_end = 10.0;
    config.dt = 0.02;
    let report = mollification_limit_study(&config, &[1.0, 4.0, 16.0, 64.0], 8, 5.0, 1)?;
    for row in &report.rows {
        let avgs: Vec<String> = row.averages.iter().map(|e| format!("{:.4}", e.mean)).collect();
        let gaps: Vec<String> = row
            .gap_to_previous
            .iter()
            .flatten()
            .map(|e| format!("{:.2e}", e.mean))
            .collect();
        println!("m = {:>4}: averages {avgs:?} gaps {gaps:?}", row.m);
    }
    for (o, name) in report.observables.iter().enumerate() {
        println!("{name}: gaps decreasing {}", report.gaps_decreasing(o));
    }
    Ok(())
}
