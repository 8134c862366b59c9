//! Pathwise energy and gradient envelopes built from the stochastic
//! convolution, checked on a small ensemble.

use sdns::integrator::{gronwall_envelope_check, random_initial, simulate_ensemble, SolverConfig};
use sdns::noise::{NoiseModel, Saturation};
use sdns::spectral::Grid;

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(2, 16)?;
    let mut config = SolverConfig::new(grid);
    config.noise = NoiseModel::new(0.5, 0.3, NoiseModel::default_r(2, 0.5), Saturation::Tanh, 9)?;
    config.initial = random_initial(&grid, 1, 1.0);
    config.forcing = random_initial(&grid, 2, 0.5);
    config.t_end = 2.0;
    let trajs = simulate_ensemble(&config, |_| config.initial.clone(), 8, 1)?;
    for t in &trajs {
        let r = gronwall_envelope_check(t, &config.forcing, 10.0, 10.0)?;
        println!(
            "member {}: sup|u|² = {:.4}, log bound = {:.3}, gradient budget {:.4}, holds: {}",
            t.meta.member,
            r.sup_u2,
            r.log_energy_bound,
            r.grad_budget,
            r.holds()
        );
    }
    Ok(())
}
