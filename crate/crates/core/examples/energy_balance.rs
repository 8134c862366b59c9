//! The discrete energy identity holds up to a defect that is first order
//! in dt, in the linear and the nonlinear regime.

use sdns::integrator::{mean_abs_residual, random_initial, simulate, SolverConfig};
use sdns::spectral::Grid;

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(2, 32)?;
    for nonlinear in [false, true] {
        let mut config = SolverConfig::new(grid);
        config.nonlinear = nonlinear;
        config.initial = random_initial(&grid, 1, 2.0);
        config.forcing = random_initial(&grid, 2, 0.5);
        config.t_end = 0.5;
        let mut previous: Option<f64> = None;
        println!("nonlinear = {nonlinear}");
        for dt in [0.02, 0.01, 0.005, 0.0025] {
            config.dt = dt;
            let r = mean_abs_residual(&simulate(&config)?);
            let rate = previous.map_or(String::new(), |p| format!("  rate {:.3}", (p / r).log2()));
            println!("  dt = {dt:<7} mean |residual| = {r:.4e}{rate}");
            previous = Some(r);
        }
    }
    Ok(())
}
