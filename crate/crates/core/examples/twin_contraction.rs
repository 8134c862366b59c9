//! Twin runs driven by the same noise from nearby initial data: the
//! weighted H^{-g} distance never increases.

use sdns::integrator::{random_initial, twin_run_contraction, SolverConfig};
use sdns::noise::{NoiseModel, Saturation};
use sdns::spectral::Grid;

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(3, 8)?;
    let mut config = SolverConfig::new(grid);
    config.noise = NoiseModel::new(0.5, 0.5, NoiseModel::default_r(3, 0.5), Saturation::One, 5)?;
    config.t_end = 2.0;
    let x = random_initial(&grid, 1, 1.0);
    let y = &x + &random_initial(&grid, 2, 1e-3);
    let series = twin_run_contraction(&config, &x, &y)?;
    println!(
        "chain constant {:.4}, Young constant {:.4e}, L_g {:.4}",
        series.chain_constant, series.m_hat, series.lipschitz
    );
    for i in (0..series.times.len()).step_by(20) {
        println!(
            "t = {:>4.2}: |V|_H^-g = {:.4e}, log weighted = {:.4}",
            series.times[i], series.distance[i], series.log_weighted[i]
        );
    }
    println!("non-increasing within 1e-3: {}", series.is_non_increasing(1e-3));
    Ok(())
}
