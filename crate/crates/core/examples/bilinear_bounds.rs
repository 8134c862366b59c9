//! Ratios of the convection term against its a-priori bounds, with and
//! without mollification, and their drift under grid refinement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdns::nonlinearity::{check_b_bounds, refinement_drift, DealiasRule, Mollifier};
use sdns::spectral::random::{random_field, FieldSpectrum};
use sdns::spectral::Grid;

fn main() -> sdns::Result<()> {
    let coarse = Grid::periodic(3, 16)?;
    let fine = Grid::periodic(3, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spec = FieldSpectrum::default();
    let samples: Vec<_> = (0..10)
        .map(|_| (random_field(&coarse, &mut rng, &spec), random_field(&coarse, &mut rng, &spec)))
        .collect();
    let refined = samples
        .iter()
        .map(|(u, v)| Ok((u.resample(fine)?, v.resample(fine)?)))
        .collect::<sdns::Result<Vec<_>>>()?;

    for m in [Mollifier::Gaussian(1.0), Mollifier::Gaussian(10.0), Mollifier::Off] {
        let a = check_b_bounds(&samples, m, 0.5, DealiasRule::TwoThirds)?;
        let b = check_b_bounds(&refined, m, 0.5, DealiasRule::TwoThirds)?;
        println!("{m:?}");
        for r in &a.ratios {
            println!("  {:<12} max ratio {:.4e}", r.kind.name(), r.max_ratio);
        }
        for (kind, drift) in refinement_drift(&a, &b) {
            println!("  {:<12} drift n=16→32 {:.2e}", kind.name(), drift);
        }
    }
    Ok(())
}
