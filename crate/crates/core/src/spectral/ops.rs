//! Fourier multipliers and the norms used by the energy and tightness estimates.

use super::{Grid, SpectralField};
use crate::error::{invalid, Error, Result};

/// Leray projection: per mode `v̂ - k (k·v̂)/|k|²`, mean mode untouched.
pub fn leray_project(v: &SpectralField) -> SpectralField {
    let grid = *v.grid();
    let dim = grid.dim();
    let mut out = v.clone();
    for flat in 1..grid.len() {
        let k = grid.wavevector(flat);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let mut m = out.mode(flat);
        let dot = (0..dim).map(|c| m[c] * k[c]).sum::<num_complex::Complex64>() / k2;
        for c in 0..dim {
            m[c] -= dot * k[c];
        }
        out.set_mode(flat, m);
    }
    out.zero_nyquist();
    out
}

/// Bessel potential `J^s = (I - Δ)^{s/2}`, the multiplier `(1+|k|²)^{s/2}`.
pub fn apply_js(s: f64, v: &SpectralField) -> SpectralField {
    let grid = *v.grid();
    if s == 0.0 {
        let mut out = v.clone();
        out.zero_nyquist();
        return out;
    }
    v.map_modes(|flat| (1.0 + grid.k_squared(flat)).powf(0.5 * s))
}

/// `e^{-t(νA + γ_eff)}` with `A = -Δ`.
pub fn semigroup_multiplier(t: f64, gamma_eff: f64, nu: f64, v: &SpectralField) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be non-negative, got {t}")));
    }
    let grid = *v.grid();
    Ok(v.map_modes(|flat| (-t * (nu * grid.k_squared(flat) + gamma_eff)).exp()))
}

fn weighted_energy(v: &SpectralField, weight: impl Fn(usize) -> f64) -> f64 {
    let grid = v.grid();
    let len = grid.len();
    let weights: Vec<f64> = (0..len).map(weight).collect();
    let mut sum = 0.0;
    for c in 0..v.dim() {
        sum += v
            .component(c)
            .iter()
            .zip(&weights)
            .map(|(z, w)| w * z.norm_sqr())
            .sum::<f64>();
    }
    sum * grid.volume()
}

/// `‖v‖_{H^s}`, normalized so that `s = 0` is the physical `L²` norm.
pub fn sobolev_norm(s: f64, v: &SpectralField) -> f64 {
    let grid = *v.grid();
    if s == 0.0 {
        return weighted_energy(v, |_| 1.0).sqrt();
    }
    weighted_energy(v, |flat| (1.0 + grid.k_squared(flat)).powf(s)).sqrt()
}

/// `‖∇v‖_{L²}`, summed over components.
pub fn grad_l2_norm(v: &SpectralField) -> f64 {
    let grid = *v.grid();
    weighted_energy(v, |flat| grid.k_squared(flat)).sqrt()
}

/// Energy `Σ |v̂(k)|² L^d` restricted to `k_lo <= |k| < k_hi`.
pub fn band_energy(v: &SpectralField, k_lo: f64, k_hi: f64) -> f64 {
    let grid = *v.grid();
    weighted_energy(v, |flat| {
        let k = grid.k_squared(flat).sqrt();
        if k >= k_lo && k < k_hi {
            1.0
        } else {
            0.0
        }
    })
}

/// `L²` inner product `∫ u·v dx`.
pub fn inner_product(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    u.ensure_same_grid(v)?;
    let sum: f64 = u
        .coeffs()
        .iter()
        .zip(v.coeffs())
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    Ok(sum * u.grid().volume())
}

/// `(Σ_c ‖v^c‖_{L^p}^p)^{1/p}` by rectangle-rule quadrature on the grid;
/// `p = ∞` gives the sum of component sup-norms.
pub fn lp_norm(p: f64, v: &SpectralField) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", format!("must lie in [1, ∞], got {p}")));
    }
    let phys = v.to_physical();
    Ok(physical_lp_norm(p, &phys, v.grid()))
}

pub(crate) fn physical_lp_norm(p: f64, phys: &super::PhysicalField, grid: &Grid) -> f64 {
    let dim = grid.dim();
    if p.is_infinite() {
        return (0..dim)
            .map(|c| phys.component(c).iter().fold(0.0_f64, |m, x| m.max(x.abs())))
            .sum();
    }
    let h = grid.cell_volume();
    let total: f64 = if p == 2.0 {
        phys.values().iter().map(|x| x * x).sum()
    } else if p == 4.0 {
        phys.values().iter().map(|x| (x * x) * (x * x)).sum()
    } else {
        phys.values().iter().map(|x| x.abs().powf(p)).sum()
    };
    (total * h).powf(1.0 / p)
}

/// Discrete `C^β([0,T]; H^s)` norm split into its two parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderNorm {
    /// `max_i ‖v(t_i)‖_{H^s}`
    pub sup: f64,
    /// `max_{i≠j} ‖v(t_i) - v(t_j)‖_{H^s} / |t_i - t_j|^β`
    pub seminorm: f64,
}

impl HolderNorm {
    pub fn total(&self) -> f64 {
        self.sup + self.seminorm
    }
}

/// Hölder norm of a sampled path; a lower bound of the continuous one.
pub fn holder_seminorm(beta: f64, s: f64, samples: &[(f64, SpectralField)]) -> Result<HolderNorm> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Hölder seminorm needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(invalid("samples", "times must be strictly increasing"));
    }
    let first = samples[0].1.grid();
    if samples.iter().any(|(_, f)| f.grid() != first) {
        return Err(invalid("samples", "all samples must share one grid"));
    }
    let grid = *first;
    let len = grid.len();
    let weights: Vec<f64> = (0..len).map(|f| (1.0 + grid.k_squared(f)).powf(s)).collect();
    let vol = grid.volume();
    let norm_diff = |a: &SpectralField, b: &SpectralField| -> f64 {
        let mut sum = 0.0;
        for (i, (x, y)) in a.coeffs().iter().zip(b.coeffs()).enumerate() {
            sum += weights[i % len] * (x - y).norm_sqr();
        }
        (sum * vol).sqrt()
    };
    let sup = samples
        .iter()
        .map(|(_, f)| sobolev_norm(s, f))
        .fold(0.0, f64::max);
    let mut seminorm: f64 = 0.0;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let dt = (samples[j].0 - samples[i].0).abs();
            seminorm = seminorm.max(norm_diff(&samples[i].1, &samples[j].1) / dt.powf(beta));
        }
    }
    Ok(HolderNorm { sup, seminorm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{random_field, FieldSpectrum};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gradient_field_is_annihilated() {
        let grid = Grid::periodic(3, 8).unwrap();
        let mut v = SpectralField::zeros(grid);
        let phi = random_field(&grid, &mut rng(1), &FieldSpectrum::default());
        // v̂ = i k φ̂ with φ the first component of a random field
        for flat in 0..grid.len() {
            let k = grid.wavevector(flat);
            let p = phi.component(0)[flat];
            let mode = [
                Complex64::new(0.0, k[0]) * p,
                Complex64::new(0.0, k[1]) * p,
                Complex64::new(0.0, k[2]) * p,
            ];
            v.set_mode(flat, mode);
        }
        v.zero_nyquist();
        assert!(sobolev_norm(0.0, &v) > 1e-3);
        let p = leray_project(&v);
        assert!(sobolev_norm(0.0, &p) < 1e-12 * sobolev_norm(0.0, &v));
    }

    #[test]
    fn leray_matches_scalar_loop() {
        let grid = Grid::periodic(2, 8).unwrap();
        let mut r = rng(7);
        let mut v = SpectralField::zeros(grid);
        use rand_distr::{Distribution, StandardNormal};
        for z in v.coeffs_mut() {
            *z = Complex64::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r));
        }
        v.enforce_hermitian();
        let p = leray_project(&v);
        for flat in 0..grid.len() {
            let lat = grid.lattice(flat);
            let (kx, ky) = (lat[0] as f64, lat[1] as f64);
            let (a, b) = (v.component(0)[flat], v.component(1)[flat]);
            let (ex, ey) = if flat == 0 {
                (a, b)
            } else if grid.is_nyquist(flat) {
                (Complex64::default(), Complex64::default())
            } else {
                let dot = (a * kx + b * ky) / (kx * kx + ky * ky);
                (a - dot * kx, b - dot * ky)
            };
            assert!((p.component(0)[flat] - ex).norm() < 1e-14);
            assert!((p.component(1)[flat] - ey).norm() < 1e-14);
        }
        assert!(p.max_divergence_ratio() < 1e-12);
        assert!(p.hermitian_defect() < 1e-14);
    }

    #[test]
    fn js_single_mode_amplitude() {
        let grid = Grid::periodic(2, 8).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let v = SpectralField::single_mode(grid, [1, 0, 0], [Complex64::default(), one, one]);
        let w = apply_js(2.0, &v);
        let flat = grid.flat_index([1, 0, 0]);
        assert!((w.component(1)[flat] - 2.0).norm() < 1e-14);
        assert_eq!(apply_js(0.0, &v), v);
    }

    #[test]
    fn js_isometry_and_group_law() {
        let grid = Grid::periodic(3, 8).unwrap();
        let v = random_field(&grid, &mut rng(3), &FieldSpectrum::default());
        for &(s, sigma) in &[(0.0, 1.0), (1.0, -0.5), (-1.0, 2.0)] {
            let lhs = sobolev_norm(s - sigma, &apply_js(sigma, &v));
            assert!(rel(lhs, sobolev_norm(s, &v)) < 1e-12);
        }
        let ab = apply_js(0.7, &apply_js(-1.3, &v));
        let direct = apply_js(-0.6, &v);
        assert!((&ab - &direct).max_abs() <= 1e-12 * direct.max_abs());
        let back = apply_js(-1.5, &apply_js(1.5, &v));
        assert!((&back - &v).max_abs() <= 1e-12 * v.max_abs());
    }

    #[test]
    fn h1_splits_into_l2_and_gradient() {
        let grid = Grid::periodic(2, 16).unwrap();
        let v = random_field(&grid, &mut rng(5), &FieldSpectrum::default());
        let lhs = sobolev_norm(1.0, &v).powi(2);
        let rhs = sobolev_norm(0.0, &v).powi(2) + grad_l2_norm(&v).powi(2);
        assert!(rel(lhs, rhs) < 1e-10);
        assert_eq!(sobolev_norm(1.0, &SpectralField::zeros(grid)), 0.0);
    }

    #[test]
    fn sobolev_norm_matches_physical_quadrature_of_js() {
        let grid = Grid::periodic(2, 8).unwrap();
        let v = random_field(&grid, &mut rng(11), &FieldSpectrum::default());
        for &s in &[-1.0, 0.5, 2.0] {
            let phys = apply_js(s, &v).to_physical();
            let quad: f64 = phys.values().iter().map(|x| x * x).sum::<f64>() * grid.cell_volume();
            assert!(rel(sobolev_norm(s, &v), quad.sqrt()) < 1e-12);
        }
    }

    #[test]
    fn lp_norm_constant_and_plancherel() {
        let grid = Grid::periodic(3, 8).unwrap();
        let mut v = SpectralField::zeros(grid);
        v.component_mut(0)[0] = Complex64::new(-1.5, 0.0);
        for &p in &[1.0, 2.0, 3.0, 4.0] {
            let expect = 1.5 * grid.volume().powf(1.0 / p);
            assert!(rel(lp_norm(p, &v).unwrap(), expect) < 1e-12);
        }
        assert!(rel(lp_norm(f64::INFINITY, &v).unwrap(), 1.5) < 1e-12);
        let w = random_field(&grid, &mut rng(2), &FieldSpectrum::default());
        assert!(rel(lp_norm(2.0, &w).unwrap(), sobolev_norm(0.0, &w)) < 1e-10);
        assert!(lp_norm(0.5, &w).is_err());
    }

    #[test]
    fn lp_norm_single_mode_matches_refined_quadrature() {
        // ‖cos(x+2y)‖_{L^4} on n=16, against a dense n=64 rectangle rule.
        let amp = [Complex64::new(0.5, 0.0), Complex64::default(), Complex64::default()];
        let coarse = SpectralField::single_mode(Grid::periodic(2, 16).unwrap(), [1, 2, 0], amp);
        let fine_grid = Grid::periodic(2, 64).unwrap();
        let h = fine_grid.cell_volume();
        let oracle: f64 = (0..fine_grid.len())
            .map(|f| {
                let x = fine_grid.point(f);
                (x[0] + 2.0 * x[1]).cos().powi(4)
            })
            .sum::<f64>()
            * h;
        assert!(rel(lp_norm(4.0, &coarse).unwrap(), oracle.powf(0.25)) < 1e-12);
    }

    #[test]
    fn semigroup_closed_form_factor() {
        let grid = Grid::periodic(2, 8).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let v = SpectralField::single_mode(grid, [2, 0, 0], [Complex64::default(), one, one]);
        let w = semigroup_multiplier(0.5, 1.0, 1.0, &v).unwrap();
        let flat = grid.flat_index([2, 0, 0]);
        assert!((w.component(1)[flat].re - (-2.5f64).exp()).abs() < 1e-15);
        assert_eq!(semigroup_multiplier(0.0, 1.0, 1.0, &v).unwrap(), v);
        assert!(semigroup_multiplier(-1.0, 1.0, 1.0, &v).is_err());
    }

    #[test]
    fn holder_degenerate_and_ramp_cases() {
        let grid = Grid::periodic(2, 8).unwrap();
        let w = random_field(&grid, &mut rng(9), &FieldSpectrum::default());
        let constant: Vec<_> = (0..4).map(|i| (i as f64, w.clone())).collect();
        let h = holder_seminorm(0.25, -1.0, &constant).unwrap();
        assert_eq!(h.seminorm, 0.0);
        assert!(rel(h.sup, sobolev_norm(-1.0, &w)) < 1e-14);

        let ramp: Vec<_> = (0..=4).map(|i| (i as f64 / 4.0, (i as f64 / 4.0) * &w)).collect();
        let h = holder_seminorm(1.0, -1.0, &ramp).unwrap();
        assert!(rel(h.seminorm, sobolev_norm(-1.0, &w)) < 1e-12);

        assert!(holder_seminorm(0.25, 0.0, &constant[..1]).is_err());
        let backwards = vec![(1.0, w.clone()), (0.5, w.clone())];
        assert!(holder_seminorm(0.25, 0.0, &backwards).is_err());
    }

    #[test]
    fn holder_three_points_all_pairs() {
        let grid = Grid::periodic(2, 8).unwrap();
        let mut r = rng(13);
        let spec = FieldSpectrum::default();
        let path: Vec<(f64, SpectralField)> = [0.0, 0.3, 1.1]
            .iter()
            .map(|&t| (t, random_field(&grid, &mut r, &spec)))
            .collect();
        let beta = 0.2;
        let mut oracle: f64 = 0.0;
        for (a, fa) in &path {
            for (b, fb) in &path {
                if a != b {
                    oracle = oracle.max(sobolev_norm(0.0, &(fa - fb)) / (a - b).abs().powf(beta));
                }
            }
        }
        let h = holder_seminorm(beta, 0.0, &path).unwrap();
        assert!(rel(h.seminorm, oracle) < 1e-12);
    }
}
