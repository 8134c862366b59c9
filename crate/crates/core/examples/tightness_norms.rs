//! The tightness norm of the stochastic convolution and the growth of its
//! Hölder part with the horizon.

use sdns::estimators::{zt_norm, ZtNormParams};
use sdns::integrator::simulate;
use sdns::spectral::SpectralField;
use sdns::verify::{convolution_config, z_holder_ratios};

fn main() -> sdns::Result<()> {
    let g = 0.5;
    let mut config = convolution_config(16, g, 4.0, 1)?;
    config.snapshot_every = 5;
    config.initial = SpectralField::zeros(config.grid);
    let params = ZtNormParams::default_for(2, g);
    let norm = zt_norm(&simulate(&config)?, &params, g)?;
    println!("Z_T norm parts: {norm:?}, total {:.4}", norm.total());

    for g in [0.25, 0.75] {
        let ratios = z_holder_ratios(16, g, &[1.0, 2.0, 4.0, 8.0], 8, 1, 1)?;
        println!("g = {g}: E|z|_C^β(H^δ) / (1 + T^e) over T = 1,2,4,8: {ratios:.4?}");
    }
    Ok(())
}
