//! 3-d runs need a finite mollifier. Without noise or forcing the energy
//! decays at least like e^{-γt}.

use sdns::integrator::{random_initial, simulate, SolverConfig};
use sdns::nonlinearity::Mollifier;
use sdns::spectral::Grid;

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(3, 16)?;
    let mut config = SolverConfig::new(grid);
    config.mollifier = Mollifier::Off;
    println!("unmollified 3-d: {}", config.validate().unwrap_err());

    config.mollifier = Mollifier::Gaussian(16.0);
    config.gamma = 0.5;
    config.t_end = 10.0;
    config.observe_every = 100;
    config.initial = random_initial(&grid, 4, 5.0);
    let traj = simulate(&config)?;
    let v0 = traj.records[0].norm_h;
    for r in &traj.records {
        println!(
            "t = {:>4.1}: |v|_H = {:.5e}, bound e^(-γt)|v0| = {:.5e}",
            r.time,
            r.norm_h,
            v0 * (-config.gamma * r.time).exp()
        );
    }
    Ok(())
}
