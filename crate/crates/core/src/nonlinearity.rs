//! Convection term `B(u,v) = P[(u·∇)v]`, its Leray-mollified variant
//! `B_m(u,v) = B(ρ_m ∗ u, v)`, and numerical checks of their bounds.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{
    analyze_real, leray_project, lp_norm, random::two_thirds_max_index, sobolev_norm, synthesize_real, Grid,
    SpectralField,
};

/// Dealiasing applied around physical-space products.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DealiasRule {
    /// Keep modes with `3|k_i| < n` on every axis.
    #[default]
    TwoThirds,
    None,
}

impl DealiasRule {
    /// Largest retained lattice index per axis.
    pub fn max_index(&self, grid: &Grid) -> i64 {
        match self {
            DealiasRule::TwoThirds => two_thirds_max_index(grid.n()),
            DealiasRule::None => grid.n() as i64 / 2 - 1,
        }
    }

    pub fn keeps(&self, grid: &Grid, flat: usize) -> bool {
        let max = self.max_index(grid);
        grid.lattice(flat)[..grid.dim()].iter().all(|k| k.abs() <= max)
    }

    pub fn apply(&self, v: &SpectralField) -> SpectralField {
        let grid = *v.grid();
        match self {
            DealiasRule::None => {
                let mut out = v.clone();
                out.zero_nyquist();
                out
            }
            DealiasRule::TwoThirds => v.map_modes(|flat| if self.keeps(&grid, flat) { 1.0 } else { 0.0 }),
        }
    }
}

impl fmt::Display for DealiasRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DealiasRule::TwoThirds => f.write_str("two_thirds"),
            DealiasRule::None => f.write_str("none"),
        }
    }
}

/// Gaussian mollifier parameter; `Off` stands for `m = ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mollifier {
    Gaussian(f64),
    Off,
}

impl Mollifier {
    pub fn new(m: f64) -> Result<Self> {
        if m.is_infinite() && m > 0.0 {
            return Ok(Mollifier::Off);
        }
        if !(m > 0.0) {
            return Err(invalid("m", format!("mollifier parameter must be positive, got {m}")));
        }
        Ok(Mollifier::Gaussian(m))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Mollifier::Gaussian(_))
    }

    /// `m`, with `Off` mapped to infinity.
    pub fn value(&self) -> f64 {
        match self {
            Mollifier::Gaussian(m) => *m,
            Mollifier::Off => f64::INFINITY,
        }
    }

    /// Fourier multiplier of `ρ_m ∗ ·` at squared wavenumber `k2`.
    #[inline]
    pub fn multiplier(&self, k2: f64) -> f64 {
        match self {
            Mollifier::Gaussian(m) => (-k2 / (2.0 * m)).exp(),
            Mollifier::Off => 1.0,
        }
    }
}

/// `ρ_m ∗ u`: the multiplier `e^{-|k|²/(2m)}`, a unit-mass convolution.
pub fn mollify(m: Mollifier, u: &SpectralField) -> SpectralField {
    match m {
        Mollifier::Off => {
            let mut out = u.clone();
            out.zero_nyquist();
            out
        }
        Mollifier::Gaussian(_) => {
            let grid = *u.grid();
            u.map_modes(|flat| m.multiplier(grid.k_squared(flat)))
        }
    }
}

/// `P[(u·∇)v]` evaluated pseudospectrally with the given dealiasing.
pub fn bilinear_b(u: &SpectralField, v: &SpectralField, rule: DealiasRule) -> Result<SpectralField> {
    u.ensure_same_grid(v)?;
    let grid = *u.grid();
    let dim = grid.dim();
    let len = grid.len();
    let uf = rule.apply(u);
    let vf = rule.apply(v);

    let kvec: Vec<[f64; 3]> = (0..len).map(|f| grid.wavevector(f)).collect();
    let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(dim + dim * dim);
    for j in 0..dim {
        spectra.push(uf.component(j).to_vec());
    }
    for i in 0..dim {
        let vi = vf.component(i);
        for j in 0..dim {
            spectra.push(
                vi.iter()
                    .zip(&kvec)
                    .map(|(z, k)| Complex64::new(0.0, k[j]) * z)
                    .collect(),
            );
        }
    }
    let refs: Vec<&[Complex64]> = spectra.iter().map(|s| s.as_slice()).collect();
    let phys = synthesize_real(&grid, &refs);

    let mut products = vec![vec![0.0; len]; dim];
    for (i, out) in products.iter_mut().enumerate() {
        for j in 0..dim {
            let uj = &phys[j];
            let dvij = &phys[dim + i * dim + j];
            for ((o, a), b) in out.iter_mut().zip(uj).zip(dvij) {
                *o += a * b;
            }
        }
    }
    let prefs: Vec<&[f64]> = products.iter().map(|p| p.as_slice()).collect();
    let coeffs = analyze_real(&grid, &prefs).concat();
    let out = SpectralField::from_coeffs(grid, coeffs)?;
    Ok(leray_project(&rule.apply(&out)))
}

/// `B_m(u, v) = B(ρ_m ∗ u, v)`.
pub fn bilinear_bm(m: Mollifier, u: &SpectralField, v: &SpectralField, rule: DealiasRule) -> Result<SpectralField> {
    u.ensure_same_grid(v)?;
    bilinear_b(&mollify(m, u), v, rule)
}

/// `‖ρ_m‖_{L^p(ℝ^d)}` for the Gaussian `ρ_m(ξ) = (m/2π)^{d/2} e^{-m|ξ|²/2}`.
pub fn rho_lp_norm_in(dim: usize, m: f64, p: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(invalid("m", format!("must be positive, got {m}")));
    }
    if !(p >= 1.0) || p.is_infinite() {
        return Err(invalid("p", format!("must lie in [1, ∞), got {p}")));
    }
    let d = dim as f64;
    Ok((m / (2.0 * PI)).powf(d / 2.0) * (2.0 * PI / (m * p)).powf(d / (2.0 * p)))
}

/// Three-dimensional `‖ρ_m‖_{L^p}`.
pub fn rho_lp_norm(m: f64, p: f64) -> Result<f64> {
    rho_lp_norm_in(3, m, p)
}

/// Which inequality a ratio belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    /// `‖B_m(u,v)‖_{H^{-1}} ≤ ‖u‖_{L⁴}‖v‖_{L⁴}`
    L4,
    /// `‖B_m(u,v)‖_{H^{-1}} ≤ ‖ρ_m‖_{L²}‖u‖_H‖v‖_H`
    RhoL2,
    /// `‖B_m(u,v)‖_{H^{-1-g}} ≤ C‖ρ_m‖_{L^{6/(4+g)}}‖u‖_H‖v‖_{H^{(1-g)/2}}`
    RoughRight,
    /// `‖B_m(u,v)‖_{H^{-1-g}} ≤ C‖ρ_m‖_{L^{6/(4+g)}}‖u‖_{H^{(1-g)/2}}‖v‖_H`
    RoughLeft,
    /// `‖B(u,v)‖_{H^{-a}} ≤ C‖u‖_{L²}‖v‖_{L²}` with `a = 3` (d=3) or `2.5` (d=2)
    NegativeA,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::L4 => "B_m H^-1 <= |u|_L4 |v|_L4",
            BoundKind::RhoL2 => "B_m H^-1 <= |rho_m|_L2 |u|_H |v|_H",
            BoundKind::RoughRight => "B_m H^-1-g <= C |rho_m| |u|_H |v|_H^(1-g)/2",
            BoundKind::RoughLeft => "B_m H^-1-g <= C |rho_m| |u|_H^(1-g)/2 |v|_H",
            BoundKind::NegativeA => "B H^-a <= C |u|_L2 |v|_L2",
        }
    }

    /// Whether the inequality carries an explicit constant (here 1).
    pub fn has_unit_constant(&self) -> bool {
        matches!(self, BoundKind::L4 | BoundKind::RhoL2)
    }
}

/// Exponent `a` used for the `H^{-a}` bound: the smallest convenient value above `d/2 + 1`.
pub fn negative_exponent(dim: usize) -> f64 {
    if dim == 3 {
        3.0
    } else {
        2.5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRatio {
    pub kind: BoundKind,
    pub max_ratio: f64,
    pub samples: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub grid: Grid,
    pub mollifier: Mollifier,
    pub g: f64,
    pub ratios: Vec<BoundRatio>,
}

impl BoundReport {
    pub fn get(&self, kind: BoundKind) -> Option<&BoundRatio> {
        self.ratios.iter().find(|r| r.kind == kind)
    }
}

/// Ratio `LHS / RHS` (constants dropped) of each inequality, maximized over
/// the sample pairs. Pairs with a vanishing right-hand side are skipped.
/// Inequalities involving `ρ_m` are only evaluated for finite `m`.
pub fn check_b_bounds(
    samples: &[(SpectralField, SpectralField)],
    m: Mollifier,
    g: f64,
    rule: DealiasRule,
) -> Result<BoundReport> {
    let first = samples
        .first()
        .ok_or_else(|| invalid("samples", "at least one pair is required"))?;
    let grid = *first.0.grid();
    if !(g > 0.0 && g < 1.0) {
        return Err(invalid("g", format!("roughness must lie in (0,1), got {g}")));
    }
    let dim = grid.dim();
    let a = negative_exponent(dim);
    let mut kinds = vec![BoundKind::L4, BoundKind::NegativeA];
    let (rho2, rho_g) = if let Mollifier::Gaussian(mv) = m {
        kinds.extend([BoundKind::RhoL2, BoundKind::RoughRight, BoundKind::RoughLeft]);
        (
            rho_lp_norm_in(dim, mv, 2.0)?,
            rho_lp_norm_in(dim, mv, 6.0 / (4.0 + g))?,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let mut ratios: Vec<BoundRatio> = kinds
        .iter()
        .map(|&kind| BoundRatio {
            kind,
            max_ratio: 0.0,
            samples: 0,
            skipped: 0,
        })
        .collect();
    let s = 0.5 * (1.0 - g);
    for (u, v) in samples {
        let bm = bilinear_bm(m, u, v, rule)?;
        let b_plain;
        let b_for_a = if m.is_finite() {
            b_plain = bilinear_b(u, v, rule)?;
            &b_plain
        } else {
            &bm
        };
        for r in ratios.iter_mut() {
            let (lhs, rhs) = match r.kind {
                BoundKind::L4 => (sobolev_norm(-1.0, &bm), lp_norm(4.0, u)? * lp_norm(4.0, v)?),
                BoundKind::RhoL2 => (sobolev_norm(-1.0, &bm), rho2 * sobolev_norm(0.0, u) * sobolev_norm(0.0, v)),
                BoundKind::RoughRight => (
                    sobolev_norm(-1.0 - g, &bm),
                    rho_g * sobolev_norm(0.0, u) * sobolev_norm(s, v),
                ),
                BoundKind::RoughLeft => (
                    sobolev_norm(-1.0 - g, &bm),
                    rho_g * sobolev_norm(s, u) * sobolev_norm(0.0, v),
                ),
                BoundKind::NegativeA => (sobolev_norm(-a, b_for_a), sobolev_norm(0.0, u) * sobolev_norm(0.0, v)),
            };
            if rhs > 0.0 && rhs.is_finite() {
                r.max_ratio = r.max_ratio.max(lhs / rhs);
                r.samples += 1;
            } else {
                r.skipped += 1;
            }
        }
    }
    Ok(BoundReport {
        grid,
        mollifier: m,
        g,
        ratios,
    })
}

/// Relative change of each maximal ratio between a coarse and a refined
/// report, `|fine / coarse - 1|`.
pub fn refinement_drift(coarse: &BoundReport, fine: &BoundReport) -> Vec<(BoundKind, f64)> {
    coarse
        .ratios
        .iter()
        .filter_map(|c| {
            let f = fine.get(c.kind)?;
            Some((c.kind, (f.max_ratio / c.max_ratio - 1.0).abs()))
        })
        .collect()
}
