//! One forced, noisy 2-d trajectory; prints the observable table every
//! simulated time unit.

use sdns::integrator::{random_initial, simulate, SolverConfig};
use sdns::noise::{NoiseModel, Saturation};
use sdns::spectral::Grid;

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(2, 32)?;
    let mut config = SolverConfig::new(grid);
    config.t_end = 10.0;
    config.dt = 0.01;
    config.noise = NoiseModel::new(0.5, 0.5, NoiseModel::default_r(2, 0.5), Saturation::Tanh, 11)?;
    config.initial = random_initial(&grid, 1, 1.0);
    config.forcing = random_initial(&grid, 2, 0.5);
    config.observe_every = 100;
    let traj = simulate(&config)?;
    println!("stiffness dt(νk²+γ) = {:.2}", traj.meta.stiffness);
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>11}", "t", "|v|_H", "|v|_L4", "|∇u|", "|z|_L4", "residual");
    for r in &traj.records {
        println!(
            "{:>5.1} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>11.2e}",
            r.time, r.norm_h, r.norm_l4, r.grad_u_l2, r.z_l4, r.energy_residual
        );
    }
    Ok(())
}
