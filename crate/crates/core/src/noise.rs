//! Diagonal noise operators `G(v)`, counter-based Wiener increments and the
//! exact per-mode Ornstein–Uhlenbeck step for the stochastic convolution.
//!
//! `G(v)` acts on the Fourier mode `k` of the cylindrical process by
//! `c_k ψ(⟨v, h_k⟩)` followed by the Leray projection, where `h_k` is a fixed
//! unit-norm real probe field (one per `±k` pair) and `ψ` a bounded
//! Lipschitz saturation. With `ψ ≡ 1` the noise is additive.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::nonlinearity::DealiasRule;
use crate::spectral::{sobolev_norm, Grid, SpectralField};
use crate::stats::Estimate;

/// Saturation `ψ` applied to the probe coordinate `⟨v, h_k⟩`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    /// `ψ ≡ 1`: additive noise.
    #[default]
    One,
    Tanh,
}

impl Saturation {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Saturation::One => 1.0,
            Saturation::Tanh => x.tanh(),
        }
    }

    /// `sup |ψ|`
    pub fn sup(&self) -> f64 {
        1.0
    }

    /// `Lip(ψ)`
    pub fn lipschitz(&self) -> f64 {
        match self {
            Saturation::One => 0.0,
            Saturation::Tanh => 1.0,
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, Saturation::One)
    }
}

/// Per-mode amplitudes `c_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum Amplitudes {
    /// `c_k = c0 (1+|k|²)^{-r/2}` on every active mode.
    PowerLaw { c0: f64, r: f64 },
    /// `c` on the pair `±lattice`, zero elsewhere.
    SingleMode { lattice: [i64; 3], c: f64 },
}

/// A concrete noise operator family with roughness `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub g: f64,
    pub amplitudes: Amplitudes,
    pub psi: Saturation,
    pub seed: u64,
    /// Modes outside this band carry no noise.
    pub band: DealiasRule,
}

impl NoiseModel {
    pub fn new(g: f64, c0: f64, r: f64, psi: Saturation, seed: u64) -> Result<Self> {
        check_g(g)?;
        if !(c0 >= 0.0) || !c0.is_finite() {
            return Err(invalid("noise.c0", format!("must be non-negative, got {c0}")));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(invalid("noise.r", format!("must be non-negative, got {r}")));
        }
        Ok(Self {
            g,
            amplitudes: Amplitudes::PowerLaw { c0, r },
            psi,
            seed,
            band: DealiasRule::TwoThirds,
        })
    }

    /// Default decay `r = d/2 + 1 - g`: `K_{g,2}` converges with margin one.
    pub fn default_r(dim: usize, g: f64) -> f64 {
        (dim as f64 / 2.0 + 1.0 - g).max(0.0)
    }

    pub fn single_mode(g: f64, lattice: [i64; 3], c: f64, psi: Saturation, seed: u64) -> Result<Self> {
        check_g(g)?;
        if !(c >= 0.0) {
            return Err(invalid("c", format!("must be non-negative, got {c}")));
        }
        Ok(Self {
            g,
            amplitudes: Amplitudes::SingleMode { lattice, c },
            psi,
            seed,
            band: DealiasRule::TwoThirds,
        })
    }

    /// No noise at all.
    pub fn silent(g: f64) -> Self {
        Self {
            g,
            amplitudes: Amplitudes::PowerLaw { c0: 0.0, r: 0.0 },
            psi: Saturation::One,
            seed: 0,
            band: DealiasRule::TwoThirds,
        }
    }

    pub fn is_silent(&self) -> bool {
        match self.amplitudes {
            Amplitudes::PowerLaw { c0, .. } => c0 == 0.0,
            Amplitudes::SingleMode { c, .. } => c == 0.0,
        }
    }

    /// `c_k` at a flat index.
    pub fn amplitude(&self, grid: &Grid, flat: usize) -> f64 {
        if flat == 0 || grid.is_nyquist(flat) || !self.band.keeps(grid, flat) {
            return 0.0;
        }
        match self.amplitudes {
            Amplitudes::PowerLaw { c0, r } => c0 * (1.0 + grid.k_squared(flat)).powf(-0.5 * r),
            Amplitudes::SingleMode { lattice, c } => {
                let lat = grid.lattice(flat);
                let neg = [-lattice[0], -lattice[1], -lattice[2]];
                if lat == lattice || lat == neg {
                    c
                } else {
                    0.0
                }
            }
        }
    }

    /// Model bound to a grid with its per-mode tables.
    pub fn on_grid(&self, grid: &Grid) -> GridNoise {
        GridNoise::new(self.clone(), *grid)
    }

    /// `K_{g,2} = sup|ψ| (Σ_k c_k² (1+|k|²)^{-g})^{1/2}` on this grid.
    pub fn k_g2(&self, grid: &Grid) -> f64 {
        self.psi.sup() * self.weighted_amplitude_sum(grid).sqrt()
    }

    /// Square-function stand-in for `K_{g,4}`: the `L⁴` norm of
    /// `(Σ_k |c_k J^{-g} e_k(x)|²)^{1/2}` with unit-modulus Fourier modes.
    pub fn k_g4_surrogate(&self, grid: &Grid) -> f64 {
        self.k_g2(grid) * grid.volume().powf(0.25)
    }

    /// Lipschitz constant `L_g` of `v ↦ G(v)` from `H^{-g}` into
    /// Hilbert–Schmidt operators: `√2 · Lip(ψ) · max_k c_k`.
    pub fn lipschitz_g(&self, grid: &Grid) -> f64 {
        let cmax = (0..grid.len()).map(|f| self.amplitude(grid, f)).fold(0.0, f64::max);
        std::f64::consts::SQRT_2 * self.psi.lipschitz() * cmax
    }

    fn weighted_amplitude_sum(&self, grid: &Grid) -> f64 {
        (0..grid.len())
            .map(|f| self.amplitude(grid, f).powi(2) * (1.0 + grid.k_squared(f)).powf(-self.g))
            .sum()
    }
}

fn check_g(g: f64) -> Result<()> {
    if !(g > 0.0 && g < 1.0) {
        return Err(invalid("noise.g", format!("roughness must lie in (0,1), got {g}")));
    }
    Ok(())
}

/// Unit divergence-free polarization attached to mode `k` (shared by `±k`).
fn polarization(grid: &Grid, rep: usize) -> [f64; 3] {
    let k = grid.wavevector(rep);
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let mut e = if grid.dim() == 2 {
        [-k[1], k[0], 0.0]
    } else {
        let a = [1.0, std::f64::consts::SQRT_2, 3f64.sqrt()];
        let dot = (a[0] * k[0] + a[1] * k[1] + a[2] * k[2]) / k2;
        [a[0] - dot * k[0], a[1] - dot * k[1], a[2] - dot * k[2]]
    };
    let norm = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
    for x in e.iter_mut() {
        *x /= norm;
    }
    e
}

/// Unit-norm real field `h_k` carried by the `±lattice` pair.
pub fn unit_probe(grid: &Grid, lattice: [i64; 3]) -> SpectralField {
    let flat = grid.flat_index(lattice);
    let rep = flat.min(grid.mirror(flat));
    let e = polarization(grid, rep);
    let scale = 1.0 / (2.0 * grid.volume()).sqrt();
    let amp = [
        Complex64::new(e[0] * scale, 0.0),
        Complex64::new(e[1] * scale, 0.0),
        Complex64::new(e[2] * scale, 0.0),
    ];
    SpectralField::single_mode(*grid, grid.lattice(rep), amp)
}

/// `⟨v, h_k⟩` for the probe returned by [`unit_probe`].
pub fn probe_coordinate(v: &SpectralField, lattice: [i64; 3]) -> f64 {
    let grid = v.grid();
    let flat = grid.flat_index(lattice);
    let rep = flat.min(grid.mirror(flat));
    let e = polarization(grid, rep);
    let m = v.mode(rep);
    let dot: f64 = (0..grid.dim()).map(|c| (m[c] * e[c]).re).sum();
    (2.0 * grid.volume()).sqrt() * dot
}

/// A [`NoiseModel`] with amplitudes, probes and mode pairing precomputed for one grid.
#[derive(Clone, Debug)]
pub struct GridNoise {
    model: NoiseModel,
    grid: Grid,
    amp: Vec<f64>,
    /// Canonical representative of each `±k` pair.
    rep: Vec<usize>,
    pol: Vec<[f64; 3]>,
    active: Vec<usize>,
}

impl GridNoise {
    fn new(model: NoiseModel, grid: Grid) -> Self {
        let len = grid.len();
        let amp: Vec<f64> = (0..len).map(|f| model.amplitude(&grid, f)).collect();
        let rep: Vec<usize> = (0..len).map(|f| f.min(grid.mirror(f))).collect();
        let pol: Vec<[f64; 3]> = (0..len)
            .map(|f| if rep[f] == f { polarization(&grid, f) } else { [0.0; 3] })
            .collect();
        let active = (0..len).filter(|&f| amp[f] > 0.0).collect();
        Self {
            model,
            grid,
            amp,
            rep,
            pol,
            active,
        }
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitude(&self, flat: usize) -> f64 {
        self.amp[flat]
    }

    /// `⟨v, h_k⟩` for the probe of the pair containing `flat`.
    pub fn probe(&self, v: &SpectralField, flat: usize) -> f64 {
        let r = self.rep[flat];
        let e = self.pol[r];
        let m = v.mode(r);
        let dot: f64 = (0..self.grid.dim()).map(|c| (m[c] * e[c]).re).sum();
        (2.0 * self.grid.volume()).sqrt() * dot
    }

    /// Unit probe field `h_k` as a spectral field.
    pub fn probe_field(&self, flat: usize) -> SpectralField {
        unit_probe(&self.grid, self.grid.lattice(flat))
    }

    /// `c_k ψ(⟨v, h_k⟩)` for every flat index.
    pub fn coefficients(&self, v: &SpectralField) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        if self.model.psi.is_additive() {
            return self.amp.clone();
        }
        for &f in &self.active {
            out[f] = self.amp[f] * self.model.psi.eval(self.probe(v, f));
        }
        out
    }

    /// `G(v) ξ`.
    pub fn apply(&self, v: &SpectralField, xi: &WienerIncrement) -> Result<SpectralField> {
        v.ensure_same_grid(&xi.field)?;
        let coeff = self.coefficients(v);
        let mut out = SpectralField::zeros(self.grid);
        for &f in &self.active {
            let mode = project(&self.grid, f, xi.field.mode(f), coeff[f]);
            out.set_mode(f, mode);
        }
        Ok(out)
    }

    /// `(Σ_k c_k² ψ_k(v)² (1+|k|²)^{-g})^{1/2}`.
    pub fn hs_norm(&self, v: &SpectralField) -> f64 {
        let coeff = self.coefficients(v);
        self.active
            .iter()
            .map(|&f| coeff[f].powi(2) * (1.0 + self.grid.k_squared(f)).powf(-self.model.g))
            .sum::<f64>()
            .sqrt()
    }

    /// Exact-in-law OU step with `v` frozen over the step:
    /// `ẑ ← e^{-λdt} ẑ + c_k ψ_k(v) P_k η_k`, `λ = ν|k|² + γ_total`,
    /// `E|η_k|² = (1 - e^{-2λdt}) / (2λ)` per component.
    pub fn ou_step(
        &self,
        v: &SpectralField,
        z: &SpectralField,
        nu: f64,
        gamma_total: f64,
        xi: &WienerIncrement,
    ) -> Result<SpectralField> {
        z.ensure_same_grid(&xi.field)?;
        let dt = xi.dt;
        let coeff = self.coefficients(v);
        let mut out = z.clone();
        let grid = self.grid;
        out.scale_modes(|f| (-(nu * grid.k_squared(f) + gamma_total) * dt).exp());
        for &f in &self.active {
            let lambda = nu * grid.k_squared(f) + gamma_total;
            let var = if lambda > 0.0 {
                -(-2.0 * lambda * dt).exp_m1() / (2.0 * lambda)
            } else {
                dt
            };
            let scale = coeff[f] * (var / dt).sqrt();
            let kick = project(&grid, f, xi.field.mode(f), scale);
            let mut m = out.mode(f);
            for c in 0..grid.dim() {
                m[c] += kick[c];
            }
            out.set_mode(f, m);
        }
        Ok(out)
    }
}

fn project(grid: &Grid, flat: usize, xi: [Complex64; 3], scale: f64) -> [Complex64; 3] {
    let k = grid.wavevector(flat);
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let dim = grid.dim();
    let dot: Complex64 = (0..dim).map(|c| xi[c] * k[c]).sum::<Complex64>() / k2;
    let mut out = [Complex64::default(); 3];
    for c in 0..dim {
        out[c] = scale * (xi[c] - dot * k[c]);
    }
    out
}

/// Increment of the cylindrical Wiener process over one step: Hermitian
/// complex Gaussians with `E|ξ_k^c|² = dt` per component.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerIncrement {
    pub dt: f64,
    pub field: SpectralField,
}

/// Counter-based source of increments: the draw for `(trajectory, step,
/// mode)` depends on nothing else, so ensemble members can run in any order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseStream {
    pub seed: u64,
    pub trajectory: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, trajectory: u64) -> Self {
        Self { seed, trajectory }
    }

    fn rng(&self, step: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.trajectory.to_le_bytes());
        key[16..24].copy_from_slice(b"sdns-xi\0");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(step);
        rng
    }

    pub fn increment(&self, grid: &Grid, dt: f64, step: u64) -> Result<WienerIncrement> {
        sample_increment(grid, dt, &mut self.rng(step))
    }
}

/// Draw one increment from `rng`, visiting modes in flat-index order.
pub fn sample_increment<R: Rng + ?Sized>(grid: &Grid, dt: f64, rng: &mut R) -> Result<WienerIncrement> {
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    let dim = grid.dim();
    let half = (0.5 * dt).sqrt();
    let mut field = SpectralField::zeros(*grid);
    for flat in 0..grid.len() {
        let mirror = grid.mirror(flat);
        if mirror < flat || grid.is_nyquist(flat) {
            continue;
        }
        let mut mode = [Complex64::default(); 3];
        for slot in mode.iter_mut().take(dim) {
            let re: f64 = rng.sample(StandardNormal);
            if mirror == flat {
                *slot = Complex64::new(re * dt.sqrt(), 0.0);
            } else {
                let im: f64 = rng.sample(StandardNormal);
                *slot = Complex64::new(re * half, im * half);
            }
        }
        field.set_mode(flat, mode);
        if mirror != flat {
            field.set_mode(mirror, [mode[0].conj(), mode[1].conj(), mode[2].conj()]);
        }
    }
    Ok(WienerIncrement { dt, field })
}

/// `G(v) ξ` for a model evaluated on the increment's grid.
pub fn apply_g(model: &NoiseModel, v: &SpectralField, xi: &WienerIncrement) -> Result<SpectralField> {
    model.on_grid(v.grid()).apply(v, xi)
}

/// Hilbert–Schmidt norm of `G(v)` into `H^{-g}`.
pub fn hs_norm_g(model: &NoiseModel, v: &SpectralField) -> f64 {
    model.on_grid(v.grid()).hs_norm(v)
}

/// One exact OU step for `dz + (νA + γ_total) z dt = G(v) dw`.
pub fn ou_exact_step(
    model: &NoiseModel,
    v: &SpectralField,
    z: &SpectralField,
    nu: f64,
    gamma_total: f64,
    xi: &WienerIncrement,
) -> Result<SpectralField> {
    model.on_grid(z.grid()).ou_step(v, z, nu, gamma_total, xi)
}

/// Long-run variance `c²/(2λ)` of one complex OU coordinate.
pub fn stationary_mode_variance(c: f64, lambda: f64) -> f64 {
    c * c / (2.0 * lambda)
}

/// Expected `‖z‖²_H` at time `t` for additive noise started at zero:
/// `L^d Σ_k (d-1) c_k² (1 - e^{-2λ_k t}) / (2λ_k)`.
pub fn ou_energy(model: &NoiseModel, grid: &Grid, nu: f64, gamma_total: f64, t: f64) -> f64 {
    let polarizations = (grid.dim() - 1) as f64;
    let sum: f64 = (0..grid.len())
        .map(|f| {
            let c = model.amplitude(grid, f);
            if c == 0.0 {
                return 0.0;
            }
            let lambda = nu * grid.k_squared(f) + gamma_total;
            let growth = if t.is_infinite() { 1.0 } else { -(-2.0 * lambda * t).exp_m1() };
            polarizations * c * c * growth / (2.0 * lambda)
        })
        .sum();
    sum * grid.volume()
}

/// Inputs for the extra-damped stochastic convolution sweep.
#[derive(Clone, Debug)]
pub struct ZetaAlphaSetup {
    pub grid: Grid,
    pub nu: f64,
    pub gamma: f64,
    pub dt: f64,
    /// Frozen `v` feeding `G(v)`.
    pub driver: SpectralField,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaAlphaRow {
    pub alpha: f64,
    /// `Ê‖ζ^α(t)‖²_H`
    pub h2: Estimate,
    /// `Ê‖ζ^α(t)‖⁴_{L⁴}`
    pub l4: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZetaAlphaTable {
    pub t_probe: f64,
    pub n_samples: usize,
    pub rows: Vec<ZetaAlphaRow>,
    /// No increase beyond 2 standard errors between consecutive `α`.
    pub non_increasing: bool,
}

/// Monte-Carlo moments of `ζ^α(t_probe) = ∫_0^t e^{-(γ+α)(t-s)} e^{-(t-s)A} G(v) dw(s)`.
///
/// All `α` share the same increments, so consecutive rows are strongly
/// correlated and their ordering is resolved far below the per-row error.
pub fn zeta_alpha_statistics(
    model: &NoiseModel,
    setup: &ZetaAlphaSetup,
    alphas: &[f64],
    t_probe: f64,
    n_samples: usize,
) -> Result<ZetaAlphaTable> {
    if n_samples < 10 {
        return Err(invalid("n_samples", format!("at least 10 required, got {n_samples}")));
    }
    if alphas.is_empty() || alphas.windows(2).any(|w| !(w[1] > w[0])) || alphas[0] < 0.0 {
        return Err(invalid("alphas", "must be non-negative and strictly increasing"));
    }
    if !(setup.gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    if (-2.0 * (setup.gamma + alphas[0]) * t_probe).exp() >= 0.01 {
        return Err(invalid(
            "t_probe",
            format!("e^(-2(γ+α)t) must be below 0.01 for the smallest α; t_probe={t_probe} is too short"),
        ));
    }
    let steps = (t_probe / setup.dt).round().max(1.0) as u64;
    let dt = t_probe / steps as f64;
    let noise = model.on_grid(&setup.grid);
    let mut h2 = vec![Vec::with_capacity(n_samples); alphas.len()];
    let mut l4 = vec![Vec::with_capacity(n_samples); alphas.len()];
    for sample in 0..n_samples {
        let stream = NoiseStream::new(model.seed, sample as u64);
        let mut zetas = vec![SpectralField::zeros(setup.grid); alphas.len()];
        for step in 0..steps {
            let xi = stream.increment(&setup.grid, dt, step)?;
            for (zeta, &alpha) in zetas.iter_mut().zip(alphas) {
                *zeta = noise.ou_step(&setup.driver, zeta, setup.nu, setup.gamma + alpha, &xi)?;
            }
        }
        for (i, zeta) in zetas.iter().enumerate() {
            h2[i].push(sobolev_norm(0.0, zeta).powi(2));
            l4[i].push(crate::spectral::lp_norm(4.0, zeta)?.powi(4));
        }
    }
    let rows: Vec<ZetaAlphaRow> = alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| ZetaAlphaRow {
            alpha,
            h2: Estimate::of(&h2[i]),
            l4: Estimate::of(&l4[i]),
        })
        .collect();
    let non_increasing = rows
        .windows(2)
        .all(|w| w[1].h2.mean <= w[0].h2.mean + 2.0 * w[0].h2.se.max(w[1].h2.se));
    Ok(ZetaAlphaTable {
        t_probe,
        n_samples,
        rows,
        non_increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{random_field, FieldSpectrum};
    use crate::stats::{mean, variance};

    fn grid2() -> Grid {
        Grid::periodic(2, 16).unwrap()
    }

    #[test]
    fn increments_are_deterministic_and_hermitian() {
        let g = grid2();
        let s = NoiseStream::new(42, 3);
        let a = s.increment(&g, 0.1, 7).unwrap();
        let b = s.increment(&g, 0.1, 7).unwrap();
        assert_eq!(a, b);
        let c = s.increment(&g, 0.1, 8).unwrap();
        assert_ne!(a, c);
        assert!(a.field.hermitian_defect() < 1e-15);
        assert!(s.increment(&g, 0.0, 0).is_err());
    }

    #[test]
    fn increment_moments() {
        // Re ξ_k over 10⁵ draws: mean 0 ± 4√(dt/10⁵)... with Var(Re ξ) = dt/2
        let g = Grid::periodic(2, 8).unwrap();
        let dt = 0.3;
        let flat = g.flat_index([1, 2, 0]);
        let s = NoiseStream::new(5, 0);
        let draws: Vec<f64> = (0..100_000)
            .map(|i| s.increment(&g, dt, i).unwrap().field.component(0)[flat].re)
            .collect();
        assert!(mean(&draws).abs() < 4.0 * (dt / 1e5).sqrt());
        assert!((variance(&draws) / (dt / 2.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn additive_output_ignores_state_and_tanh_vanishes_at_zero() {
        let g = grid2();
        let xi = NoiseStream::new(1, 0).increment(&g, 0.1, 0).unwrap();
        let additive = NoiseModel::new(0.5, 1.0, 1.5, Saturation::One, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = random_field(&g, &mut rng, &FieldSpectrum::default());
        let zero = SpectralField::zeros(g);
        let a = apply_g(&additive, &v, &xi).unwrap();
        assert_eq!(a, apply_g(&additive, &zero, &xi).unwrap());
        assert!(a.max_divergence_ratio() < 1e-10);
        assert!(a.hermitian_defect() < 1e-14);

        let tanh = NoiseModel::new(0.5, 1.0, 1.5, Saturation::Tanh, 1).unwrap();
        assert_eq!(apply_g(&tanh, &zero, &xi).unwrap().max_abs(), 0.0);
        let b = apply_g(&tanh, &v, &xi).unwrap();
        assert!(b.hermitian_defect() < 1e-14);
        assert!(b.max_divergence_ratio() < 1e-10);
    }

    #[test]
    fn probes_are_unit_and_consistent() {
        let g = Grid::periodic(3, 8).unwrap();
        let m = NoiseModel::new(0.5, 1.0, 1.5, Saturation::Tanh, 1).unwrap().on_grid(&g);
        let flat = g.flat_index([1, -2, 1]);
        let h = m.probe_field(flat);
        assert!((sobolev_norm(0.0, &h) - 1.0).abs() < 1e-13);
        assert!(h.max_divergence_ratio() < 1e-12);
        let ip = crate::spectral::inner_product(&h, &h).unwrap();
        assert!((m.probe(&h, flat) - ip).abs() < 1e-13);
        assert!((m.probe(&h, g.mirror(flat)) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn hs_norm_single_mode_closed_form_and_uniform_bound() {
        let g = grid2();
        let m = NoiseModel::single_mode(0.4, [2, 1, 0], 0.7, Saturation::One, 0).unwrap();
        let v = SpectralField::zeros(g);
        // the pair ±k contributes twice
        let expect = (2.0f64).sqrt() * 0.7 * (1.0 + 5.0f64).powf(-0.2);
        assert!((hs_norm_g(&m, &v) - expect).abs() < 1e-14);

        let tanh = NoiseModel::new(0.5, 1.0, 1.5, Saturation::Tanh, 0).unwrap();
        let k = tanh.k_g2(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..100 {
            let scale = 10f64.powf(3.0 * i as f64 / 99.0) - 1.0;
            let spec = FieldSpectrum {
                l2_norm: Some(scale),
                ..FieldSpectrum::default()
            };
            let v = random_field(&g, &mut rng, &spec);
            assert!(hs_norm_g(&tanh, &v) <= k * (1.0 + 1e-12));
        }
    }

    #[test]
    fn hs_norm_lipschitz_in_negative_norm() {
        let g = grid2();
        let tanh = NoiseModel::new(0.5, 1.0, 1.5, Saturation::Tanh, 0).unwrap();
        let lg = tanh.lipschitz_g(&g);
        assert_eq!(NoiseModel::new(0.5, 1.0, 1.5, Saturation::One, 0).unwrap().lipschitz_g(&g), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = FieldSpectrum {
            l2_norm: Some(3.0),
            ..FieldSpectrum::default()
        };
        for _ in 0..50 {
            let a = random_field(&g, &mut rng, &spec);
            let b = random_field(&g, &mut rng, &spec);
            let lhs = (hs_norm_g(&tanh, &a) - hs_norm_g(&tanh, &b)).abs();
            let rhs = lg * sobolev_norm(-0.5, &(&a - &b));
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ou_step_without_noise_is_pure_decay() {
        let g = grid2();
        let silent = NoiseModel::silent(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = random_field(&g, &mut rng, &FieldSpectrum::default());
        let xi = NoiseStream::new(0, 0).increment(&g, 0.05, 0).unwrap();
        let out = ou_exact_step(&silent, &z, &z, 1.0, 0.5, &xi).unwrap();
        let expect = crate::spectral::semigroup_multiplier(0.05, 0.5, 1.0, &z).unwrap();
        assert!((&out - &expect).max_abs() < 1e-15);
    }

    #[test]
    fn ou_long_run_variance_matches_stationary_law() {
        let g = Grid::periodic(2, 8).unwrap();
        let lattice = [1, 1, 0];
        let flat = g.flat_index(lattice);
        let c = 0.8;
        let m = NoiseModel::single_mode(0.5, lattice, c, Saturation::One, 11).unwrap();
        let noise = m.on_grid(&g);
        let e = polarization(&g, flat.min(g.mirror(flat)));
        let dt = 0.05;
        let mut ratios = Vec::new();
        for gamma in [1.0, 2.0] {
            let lambda = 2.0 + gamma;
            let stream = NoiseStream::new(11, gamma as u64);
            let mut z = SpectralField::zeros(g);
            let mut acc = Vec::new();
            for step in 0..10_000u64 {
                let xi = stream.increment(&g, dt, step).unwrap();
                z = noise.ou_step(&z, &z, 1.0, gamma, &xi).unwrap();
                if step >= 200 {
                    let mode = z.mode(flat);
                    let coord: Complex64 = (0..2).map(|i| mode[i] * e[i]).sum();
                    acc.push(coord.norm_sqr());
                }
            }
            let oracle = stationary_mode_variance(c, lambda);
            assert!((mean(&acc) / oracle - 1.0).abs() < 0.05, "γ={gamma}: {} vs {oracle}", mean(&acc));
            ratios.push(mean(&acc));
        }
        let oracle_ratio = (2.0 + 2.0) / (2.0 + 1.0);
        assert!((ratios[0] / ratios[1] / oracle_ratio - 1.0).abs() < 0.05);
    }

    #[test]
    fn zeta_alpha_validates_inputs() {
        let g = Grid::periodic(2, 8).unwrap();
        let setup = ZetaAlphaSetup {
            grid: g,
            nu: 1.0,
            gamma: 1.0,
            dt: 0.05,
            driver: SpectralField::zeros(g),
        };
        let m = NoiseModel::new(0.5, 1.0, 1.5, Saturation::One, 0).unwrap();
        assert!(zeta_alpha_statistics(&m, &setup, &[0.0, 1.0], 3.0, 5).is_err());
        assert!(zeta_alpha_statistics(&m, &setup, &[1.0, 0.0], 3.0, 20).is_err());
        assert!(zeta_alpha_statistics(&m, &setup, &[0.0, 1.0], 0.5, 20).is_err());
    }

    #[test]
    fn zeta_alpha_single_mode_matches_closed_form() {
        let g = Grid::periodic(2, 8).unwrap();
        let lattice = [1, 0, 0];
        let c = 1.0;
        let m = NoiseModel::single_mode(0.5, lattice, c, Saturation::One, 3).unwrap();
        let setup = ZetaAlphaSetup {
            grid: g,
            nu: 1.0,
            gamma: 1.0,
            dt: 0.05,
            driver: SpectralField::zeros(g),
        };
        let t = 3.0;
        let table = zeta_alpha_statistics(&m, &setup, &[0.0, 1.0, 4.0], t, 400).unwrap();
        for row in &table.rows {
            let oracle = ou_energy(&m, &g, 1.0, 1.0 + row.alpha, t);
            assert!((row.h2.mean - oracle).abs() < 3.0 * row.h2.se, "{row:?} vs {oracle}");
        }
        assert!(table.non_increasing);
    }
}
