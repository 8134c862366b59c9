//! The multiplicative noise operator: its Hilbert–Schmidt norm, uniform
//! bound, Lipschitz constant, and reproducible Wiener increments.

use sdns::integrator::random_initial;
use sdns::noise::{NoiseModel, NoiseStream, Saturation};
use sdns::spectral::{sobolev_norm, Grid};

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(2, 32)?;
    for g in [0.25, 0.5, 0.75] {
        let model = NoiseModel::new(g, 1.0, NoiseModel::default_r(2, g), Saturation::Tanh, 7)?;
        let noise = model.on_grid(&grid);
        println!("g = {g}: K_g2 = {:.4}, L_g = {:.4}", model.k_g2(&grid), model.lipschitz_g(&grid));
        for l2 in [0.0, 1.0, 100.0] {
            let v = random_initial(&grid, 3, l2);
            println!("  |v|_H = {l2:>5}: |G(v)|_HS(H^-g) = {:.4}", noise.hs_norm(&v));
        }
    }
    let stream = NoiseStream::new(7, 0);
    let a = stream.increment(&grid, 0.01, 42)?;
    let b = stream.increment(&grid, 0.01, 42)?;
    println!(
        "increment at step 42: |ξ|_H = {:.4}, reproducible: {}, Hermitian defect {:.1e}",
        sobolev_norm(0.0, &a.field),
        a == b,
        a.field.hermitian_defect()
    );
    Ok(())
}
