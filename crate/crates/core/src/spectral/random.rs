//! Band-limited Gaussian test fields.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{leray_project, sobolev_norm, Grid, SpectralField};

/// Shape of a random test field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpectrum {
    /// Mode variance decays like `(1+|k|²)^{-slope}`; `None` uses `d/2 + 1.5`,
    /// which keeps `‖v‖_{H¹}` finite as the grid is refined.
    pub slope: Option<f64>,
    /// Keep only modes with every `|k_i| <= max_index`; `None` uses the
    /// two-thirds band `3|k_i| < n`.
    pub max_index: Option<i64>,
    /// Rescale to this `L²` norm; `None` leaves the raw draw.
    pub l2_norm: Option<f64>,
}

impl Default for FieldSpectrum {
    fn default() -> Self {
        Self {
            slope: None,
            max_index: None,
            l2_norm: Some(1.0),
        }
    }
}

/// Mean-free, divergence-free, real Gaussian field.
pub fn random_field<R: Rng + ?Sized>(grid: &Grid, rng: &mut R, spectrum: &FieldSpectrum) -> SpectralField {
    let slope = spectrum.slope.unwrap_or(grid.dim() as f64 / 2.0 + 1.5);
    let max_index = spectrum
        .max_index
        .unwrap_or_else(|| two_thirds_max_index(grid.n()));
    let mut v = SpectralField::zeros(*grid);
    for flat in 1..grid.len() {
        let lat = grid.lattice(flat);
        let inside = lat[..grid.dim()].iter().all(|k| k.abs() <= max_index);
        let mut mode = [Complex64::default(); 3];
        // draw even outside the band so the stream does not depend on the cutoff
        let amp = (1.0 + grid.k_squared(flat)).powf(-0.5 * slope);
        for slot in mode.iter_mut().take(grid.dim()) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if inside {
                *slot = Complex64::new(re, im) * amp;
            }
        }
        v.set_mode(flat, mode);
    }
    v.enforce_hermitian();
    let mut v = leray_project(&v);
    if let Some(target) = spectrum.l2_norm {
        let norm = sobolev_norm(0.0, &v);
        if norm > 0.0 {
            v = (target / norm) * &v;
        }
    }
    v
}

/// Largest retained index under the two-thirds rule, `3|k| < n`.
pub fn two_thirds_max_index(n: usize) -> i64 {
    ((n as i64) - 1) / 3
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_fields_satisfy_field_invariants() {
        for dim in [2, 3] {
            let grid = Grid::periodic(dim, 16).unwrap();
            let v = random_field(&grid, &mut ChaCha8Rng::seed_from_u64(1), &FieldSpectrum::default());
            assert!(v.hermitian_defect() < 1e-12);
            assert!(v.max_divergence_ratio() < 1e-10);
            assert!((sobolev_norm(0.0, &v) - 1.0).abs() < 1e-12);
            assert_eq!(v.mode(0), [Complex64::default(); 3]);
            let outside = grid.flat_index([6, 0, 0]);
            assert_eq!(v.mode(outside), [Complex64::default(); 3]);
        }
    }
}
