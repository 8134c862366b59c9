//! Exact-in-law Ornstein–Uhlenbeck stepping on a single noise mode: the
//! long-run variance matches c²/(2λ) for any step size.

use num_complex::Complex64;
use sdns::noise::{stationary_mode_variance, NoiseModel, NoiseStream, Saturation};
use sdns::spectral::{Grid, SpectralField};
use sdns::stats::mean;

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(2, 8)?;
    let lattice = [1, 0, 0];
    let flat = grid.flat_index(lattice);
    let c = 1.0;
    let lambda = 1.0 + 1.0;
    let model = NoiseModel::single_mode(0.5, lattice, c, Saturation::One, 1)?;
    let noise = model.on_grid(&grid);
    for dt in [0.01, 0.1, 0.5] {
        let stream = NoiseStream::new(1, 0);
        let mut z = SpectralField::zeros(grid);
        let mut acc = Vec::new();
        for step in 0..20_000u64 {
            z = noise.ou_step(&z, &z, 1.0, 1.0, &stream.increment(&grid, dt, step)?)?;
            if step >= 100 {
                // mode (1,0) is polarized along the second axis
                let m: Complex64 = z.mode(flat)[1];
                acc.push(m.norm_sqr());
            }
        }
        println!(
            "dt = {dt:<4}: variance {:.4} vs {:.4}",
            mean(&acc),
            stationary_mode_variance(c, lambda)
        );
    }
    Ok(())
}
