//! Property-test battery: every in-scope inequality bound to a numerical
//! check, collected into a ledger of measured values against thresholds.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::estimators::{z_holder_norm, ZtNormParams};
use crate::integrator::{
    gronwall_envelope_check, mean_abs_residual, random_initial, simulate, simulate_ensemble, twin_run_contraction,
    SolverConfig,
};
use crate::noise::{zeta_alpha_statistics, NoiseModel, Saturation, ZetaAlphaSetup};
use crate::nonlinearity::{check_b_bounds, mollify, refinement_drift, BoundKind, DealiasRule, Mollifier};
use crate::spectral::random::{random_field, FieldSpectrum};
use crate::spectral::{
    grad_l2_norm, inner_product, lp_norm, sobolev_norm, Grid, SpectralField,
};
use crate::stats::{mean, trapezoid};

/// Battery size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// `n = 16`, 10 samples, small ensembles.
    Quick,
    /// `n = 32`, 100 samples, full ensembles.
    Full,
}

impl FromStr for Profile {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            other => Err(invalid("profile", format!("expected quick or full, got {other}"))),
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Profile::Quick => "quick",
            Profile::Full => "full",
        })
    }
}

#[derive(Clone, Copy, Debug)]
struct Settings {
    n: usize,
    samples: usize,
    zeta_grid: usize,
    zeta_samples: usize,
    envelope_seeds: u64,
    contraction_seeds: u64,
    z_members: u64,
}

impl Settings {
    fn of(profile: Profile) -> Self {
        match profile {
            Profile::Quick => Settings {
                n: 16,
                samples: 10,
                zeta_grid: 8,
                zeta_samples: 16,
                envelope_seeds: 5,
                contraction_seeds: 2,
                z_members: 8,
            },
            Profile::Full => Settings {
                n: 32,
                samples: 100,
                zeta_grid: 16,
                zeta_samples: 64,
                envelope_seeds: 50,
                contraction_seeds: 10,
                z_members: 32,
            },
        }
    }
}

/// How the measured value is compared with the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }
}

/// One ledger row.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub id: String,
    /// The inequality or identity under test, or `plumbing`.
    pub anchor: String,
    pub measured: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub passed: bool,
    pub samples: usize,
    /// Digest of the check's grid and parameters.
    pub digest: String,
    pub note: String,
}

impl CheckRow {
    fn new(id: &str, anchor: &str, measured: f64, relation: Relation, threshold: f64, samples: usize, setup: &str) -> Self {
        let within = match relation {
            Relation::AtMost => measured <= threshold,
            Relation::AtLeast => measured >= threshold,
        };
        Self {
            id: id.into(),
            anchor: anchor.into(),
            measured,
            threshold,
            relation,
            passed: within && measured.is_finite(),
            samples,
            digest: short_digest(setup.as_bytes()),
            note: String::new(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Pass only if `extra` also holds.
    fn also(mut self, extra: bool, why: &str) -> Self {
        if !extra {
            self.passed = false;
            if !self.note.is_empty() {
                self.note.push_str("; ");
            }
            self.note.push_str(why);
        }
        self
    }
}

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn short_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub const PLUMBING: &str = "plumbing";

pub mod anchors {
    pub const H1_IDENTITY: &str = "‖v‖²_{H¹} = ‖v‖²_{L²} + ‖∇v‖²_{L²}";
    pub const SEMIGROUP: &str = "‖e^{-tA}‖_{H→H¹} ≤ M(1 + t^{-1/2})";
    pub const SKEW: &str = "⟨B(u,v),v⟩ = 0";
    pub const SKEW_M: &str = "⟨B_m(u,v),v⟩ = 0";
    pub const TRANSPOSE: &str = "⟨B(u,v),z⟩ = −⟨B(u,z),v⟩";
    pub const B_L4: &str = "‖B(u,v)‖_{H^{-1}} ≤ ‖u‖_{L⁴}‖v‖_{L⁴}";
    pub const BM_L4: &str = "‖B_m(u,v)‖_{H^{-1}} ≤ ‖u‖_{L⁴}‖v‖_{L⁴}";
    pub const BM_RHO_L2: &str = "‖B_m(u,v)‖_{H^{-1}} ≤ ‖ρ_m‖_{L²}‖u‖_H‖v‖_H";
    pub const BM_ROUGH_RIGHT: &str = "‖B_m(u,v)‖_{H^{-1-g}} ≤ C‖ρ_m‖_{L^{6/(4+g)}}‖u‖_H‖v‖_{H^{(1-g)/2}}";
    pub const BM_ROUGH_LEFT: &str = "‖B_m(u,v)‖_{H^{-1-g}} ≤ C‖ρ_m‖_{L^{6/(4+g)}}‖u‖_{H^{(1-g)/2}}‖v‖_H";
    pub const B_NEG_A: &str = "‖B(u,v)‖_{H^{-a}} ≤ C‖u‖_{L²}‖v‖_{L²}, a > d/2 + 1";
    pub const MOLL_LIMIT: &str = "‖B_m(u,v) − B(u,v)‖_{H^{-a}} → 0 as m → ∞";
    pub const NOISE_BOUND: &str = "sup_v ‖G(v)‖_{γ(Y;H^{-g})} = K_{g,2} < ∞";
    pub const NOISE_LIPSCHITZ: &str = "‖G(v₁) − G(v₂)‖_{γ(Y;H^{-g})} ≤ L_g‖v₁ − v₂‖_{H^{-g}}";
    pub const ZETA_ALPHA: &str = "E‖ζ^α(t)‖²_H ≤ C_{α,2}, C_{α,2} → 0 as α → ∞";
    pub const ENERGY: &str = "½ d/dt‖u‖² + ‖∇u‖² + γ‖u‖² = −⟨B(z+u,z+u),u⟩ + ⟨f,u⟩";
    pub const ENVELOPE_H: &str = "sup_t ‖u(t)‖²_H ≤ Ψ(z,T) e^{Φ(z,T)}";
    pub const ENVELOPE_GRAD: &str = "∫_0^T ‖∇u‖²_{L²} dt ≤ Ψ + ΦΨe^Φ";
    pub const GAGLIARDO_NIRENBERG: &str = "‖u‖_{L⁴} ≤ C‖u‖_{L²}^{1/4}‖∇u‖_{L²}^{3/4}";
    pub const LADYZHENSKAYA: &str = "‖u‖_{L⁴} ≤ C‖u‖_{L²}^{1/2}‖∇u‖_{L²}^{1/2}";
    pub const CONTRACTION: &str = "d(e^{-∫σ}‖V‖²_{H^{-g}}) ≤ martingale term";
    pub const Z_LP: &str = "E‖z‖^p_{L^p(0,T;L⁴)} ≤ C(1 + T)";
    pub const Z_HOLDER: &str = "E‖z‖_{C^β([0,T];H^δ)} ≤ C(1 + T^{(1-g)/2-β-δ/2})";

    /// Every anchor the battery must cover.
    pub const REQUIRED: &[&str] = &[
        H1_IDENTITY,
        SEMIGROUP,
        SKEW,
        SKEW_M,
        TRANSPOSE,
        B_L4,
        BM_L4,
        BM_RHO_L2,
        BM_ROUGH_RIGHT,
        BM_ROUGH_LEFT,
        B_NEG_A,
        MOLL_LIMIT,
        NOISE_BOUND,
        NOISE_LIPSCHITZ,
        ZETA_ALPHA,
        ENERGY,
        ENVELOPE_H,
        ENVELOPE_GRAD,
        GAGLIARDO_NIRENBERG,
        LADYZHENSKAYA,
        CONTRACTION,
        Z_LP,
        Z_HOLDER,
    ];
}

pub type BilinearFn = fn(&SpectralField, &SpectralField, DealiasRule) -> Result<SpectralField>;

/// Implementations exercised by the skew-symmetry checks; swapping in a
/// faulty one must make the battery fail.
#[derive(Clone, Copy)]
pub struct Kernels {
    pub bilinear: BilinearFn,
}

impl Default for Kernels {
    fn default() -> Self {
        Self {
            bilinear: crate::nonlinearity::bilinear_b,
        }
    }
}

type CheckFn = Box<dyn Fn(&Settings, u64, &Kernels) -> Result<Vec<CheckRow>> + Send + Sync>;

/// Run the battery with the library kernels.
pub fn run_all(profile: Profile, seed: u64) -> Vec<CheckRow> {
    run_all_with(profile, seed, Kernels::default())
}

/// Run the battery. Check failures and errors become failed rows; the
/// ledger is sorted by id and ends with the completeness meta-check.
pub fn run_all_with(profile: Profile, seed: u64, kernels: Kernels) -> Vec<CheckRow> {
    let settings = Settings::of(profile);
    let checks: Vec<(&str, &str, CheckFn)> = vec![
        ("spectral.h1_identity", anchors::H1_IDENTITY, Box::new(check_h1_identity)),
        ("spectral.semigroup_smoothing", anchors::SEMIGROUP, Box::new(check_semigroup)),
        ("nonlinearity.skew", anchors::SKEW, Box::new(check_skew)),
        ("nonlinearity.transposition", anchors::TRANSPOSE, Box::new(check_transposition)),
        ("nonlinearity.bounds", anchors::B_L4, Box::new(check_bounds)),
        ("nonlinearity.moll_limit", anchors::MOLL_LIMIT, Box::new(check_moll_limit)),
        ("noise.bounds", anchors::NOISE_BOUND, Box::new(check_noise)),
        ("noise.zeta_alpha", anchors::ZETA_ALPHA, Box::new(check_zeta_alpha)),
        ("integrator.energy_residual", anchors::ENERGY, Box::new(check_energy_residual)),
        ("integrator.envelope", anchors::ENVELOPE_H, Box::new(check_envelope)),
        ("integrator.gagliardo_nirenberg", anchors::GAGLIARDO_NIRENBERG, Box::new(check_gn)),
        ("integrator.contraction", anchors::CONTRACTION, Box::new(check_contraction)),
        ("tightness.z_lp", anchors::Z_LP, Box::new(check_z_lp)),
        ("tightness.z_holder", anchors::Z_HOLDER, Box::new(check_z_holder)),
    ];
    let mut rows: Vec<CheckRow> = checks
        .par_iter()
        .flat_map_iter(|(id, anchor, check)| match check(&settings, seed, &kernels) {
            Ok(rows) => rows,
            Err(e) => vec![CheckRow::new(id, anchor, f64::NAN, Relation::AtMost, 0.0, 0, id).with_note(e.to_string())],
        })
        .collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    rows.push(meta_check(&rows));
    rows
}

/// Ledger completeness: every required anchor is present.
pub fn meta_check(rows: &[CheckRow]) -> CheckRow {
    let missing: Vec<&str> = anchors::REQUIRED
        .iter()
        .copied()
        .filter(|a| !rows.iter().any(|r| r.anchor == *a))
        .collect();
    let unanchored = rows.iter().filter(|r| r.anchor.is_empty()).count();
    CheckRow::new(
        "verify.meta_completeness",
        PLUMBING,
        (missing.len() + unanchored) as f64,
        Relation::AtMost,
        0.0,
        rows.len(),
        "anchors",
    )
    .with_note(if missing.is_empty() {
        String::new()
    } else {
        format!("missing: {}", missing.join(" | "))
    })
}

pub fn all_passed(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| r.passed)
}

/// Human-readable ledger.
pub fn render_text(rows: &[CheckRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "[{}] {:<36} {:>12.4e} {} {:<10.4e} n={:<4} {}{}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.measured,
            r.relation.symbol(),
            r.threshold,
            r.samples,
            r.anchor,
            if r.note.is_empty() { String::new() } else { format!("  ({})", r.note) }
        );
    }
    out
}

fn smooth_fields(grid: &Grid, rng: &mut ChaCha8Rng, count: usize) -> Vec<SpectralField> {
    (0..count)
        .map(|_| random_field(grid, rng, &FieldSpectrum::default()))
        .collect()
}

fn grids(n: usize) -> Result<[Grid; 2]> {
    Ok([Grid::periodic(2, n)?, Grid::periodic(3, n)?])
}

fn check_h1_identity(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for grid in grids(s.n)? {
        for v in smooth_fields(&grid, &mut rng, s.samples) {
            let h1 = sobolev_norm(1.0, &v).powi(2);
            let rhs = sobolev_norm(0.0, &v).powi(2) + grad_l2_norm(&v).powi(2);
            worst = worst.max((h1 - rhs).abs() / h1);
            count += 1;
        }
    }
    Ok(vec![CheckRow::new(
        "spectral.h1_identity",
        anchors::H1_IDENTITY,
        worst,
        Relation::AtMost,
        1e-10,
        count,
        &format!("n={} seed={seed}", s.n),
    )])
}

/// Exact operator norm of `e^{-tA}` from `H` to `H¹` on a grid, divided by `1 + t^{-1/2}`.
fn semigroup_constant(grid: &Grid, gamma: f64, times: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in times {
        for f in 0..grid.len() {
            if grid.is_nyquist(f) {
                continue;
            }
            let k2 = grid.k_squared(f);
            let norm = (1.0 + k2).sqrt() * (-t * (k2 + gamma)).exp();
            worst = worst.max(norm / (1.0 + t.powf(-0.5)));
        }
    }
    worst
}

fn check_semigroup(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let times = [0.01, 0.03, 0.1, 0.3, 1.0];
    let coarse = Grid::periodic(3, s.n)?;
    let fine = Grid::periodic(3, 2 * s.n)?;
    let c0 = semigroup_constant(&coarse, 1.0, &times);
    let c1 = semigroup_constant(&fine, 1.0, &times);
    // random fields never exceed the operator bound
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field_worst: f64 = 0.0;
    for v in smooth_fields(&coarse, &mut rng, s.samples) {
        for &t in &times {
            let w = crate::spectral::semigroup_multiplier(t, 1.0, 1.0, &v)?;
            field_worst = field_worst.max(sobolev_norm(1.0, &w) / ((1.0 + t.powf(-0.5)) * sobolev_norm(0.0, &v)));
        }
    }
    let drift = (c1 / c0 - 1.0).abs();
    Ok(vec![CheckRow::new(
        "spectral.semigroup_smoothing",
        anchors::SEMIGROUP,
        drift,
        Relation::AtMost,
        0.2,
        s.samples,
        &format!("n={} t={times:?}", s.n),
    )
    .with_note(format!("fitted M: {c0:.4} (n={}), {c1:.4} (n={})", s.n, 2 * s.n))
    .also(field_worst <= c0 * (1.0 + 1e-12), "random field exceeds the fitted constant")])
}

fn pairs(grid: &Grid, rng: &mut ChaCha8Rng, count: usize) -> Vec<(SpectralField, SpectralField)> {
    (0..count)
        .map(|_| {
            let u = random_field(grid, rng, &FieldSpectrum::default());
            let v = random_field(grid, rng, &FieldSpectrum::default());
            (u, v)
        })
        .collect()
}

fn check_skew(s: &Settings, seed: u64, k: &Kernels) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
    let (mut worst, mut worst_m): (f64, f64) = (0.0, 0.0);
    let mut count = 0;
    for grid in grids(s.n)? {
        for (u, v) in pairs(&grid, &mut rng, s.samples) {
            let scale = sobolev_norm(0.0, &u) * sobolev_norm(1.0, &v).powi(2);
            let b = (k.bilinear)(&u, &v, DealiasRule::TwoThirds)?;
            worst = worst.max(inner_product(&b, &v)?.abs() / scale);
            let bm = (k.bilinear)(&mollify(Mollifier::Gaussian(10.0), &u), &v, DealiasRule::TwoThirds)?;
            worst_m = worst_m.max(inner_product(&bm, &v)?.abs() / scale);
            count += 1;
        }
    }
    let setup = format!("n={} seed={seed}", s.n);
    Ok(vec![
        CheckRow::new("nonlinearity.skew", anchors::SKEW, worst, Relation::AtMost, 1e-10, count, &setup),
        CheckRow::new("nonlinearity.skew_m", anchors::SKEW_M, worst_m, Relation::AtMost, 1e-10, count, &setup)
            .with_note("m = 10"),
    ])
}

fn check_transposition(s: &Settings, seed: u64, k: &Kernels) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for grid in grids(s.n)? {
        for (u, v) in pairs(&grid, &mut rng, s.samples) {
            let z = random_field(&grid, &mut rng, &FieldSpectrum::default());
            let a = inner_product(&(k.bilinear)(&u, &v, DealiasRule::TwoThirds)?, &z)?;
            let b = inner_product(&(k.bilinear)(&u, &z, DealiasRule::TwoThirds)?, &v)?;
            let scale = sobolev_norm(0.0, &u) * sobolev_norm(1.0, &v) * sobolev_norm(1.0, &z);
            worst = worst.max((a + b).abs() / scale);
            count += 1;
        }
    }
    Ok(vec![CheckRow::new(
        "nonlinearity.transposition",
        anchors::TRANSPOSE,
        worst,
        Relation::AtMost,
        1e-10,
        count,
        &format!("n={} seed={seed}", s.n),
    )])
}

fn check_bounds(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let g = 0.5;
    let coarse = Grid::periodic(3, s.n)?;
    let fine = Grid::periodic(3, 2 * s.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb0);
    let samples = pairs(&coarse, &mut rng, s.samples);
    let refined = samples
        .iter()
        .map(|(u, v)| Ok((u.resample(fine)?, v.resample(fine)?)))
        .collect::<Result<Vec<_>>>()?;
    let setup = format!("d=3 n={} g={g} seed={seed}", s.n);
    let mut rows = Vec::new();

    let plain = check_b_bounds(&samples, Mollifier::Off, g, DealiasRule::TwoThirds)?;
    let l4 = plain.get(BoundKind::L4).expect("L4 bound evaluated");
    rows.push(CheckRow::new(
        "nonlinearity.b_l4",
        anchors::B_L4,
        l4.max_ratio,
        Relation::AtMost,
        1.05,
        l4.samples,
        &setup,
    ));
    let plain_fine = check_b_bounds(&refined, Mollifier::Off, g, DealiasRule::TwoThirds)?;
    let drift_a = drift_of(&plain, &plain_fine, BoundKind::NegativeA);
    rows.push(
        CheckRow::new(
            "nonlinearity.b_negative_a",
            anchors::B_NEG_A,
            drift_a,
            Relation::AtMost,
            0.2,
            samples.len(),
            &setup,
        )
        .with_note(format!(
            "max ratio {:.4e}, refinement n={}→{}",
            plain.get(BoundKind::NegativeA).map_or(f64::NAN, |r| r.max_ratio),
            s.n,
            2 * s.n
        )),
    );

    let mut worst_l4: f64 = 0.0;
    let mut worst_rho: f64 = 0.0;
    let mut worst_right: f64 = 0.0;
    let mut worst_left: f64 = 0.0;
    for m in [1.0, 10.0] {
        let coarse_rep = check_b_bounds(&samples, Mollifier::Gaussian(m), g, DealiasRule::TwoThirds)?;
        let fine_rep = check_b_bounds(&refined, Mollifier::Gaussian(m), g, DealiasRule::TwoThirds)?;
        worst_l4 = worst_l4.max(coarse_rep.get(BoundKind::L4).map_or(f64::NAN, |r| r.max_ratio));
        worst_rho = worst_rho.max(coarse_rep.get(BoundKind::RhoL2).map_or(f64::NAN, |r| r.max_ratio));
        worst_right = worst_right.max(drift_of(&coarse_rep, &fine_rep, BoundKind::RoughRight));
        worst_left = worst_left.max(drift_of(&coarse_rep, &fine_rep, BoundKind::RoughLeft));
    }
    let n = samples.len();
    rows.push(
        CheckRow::new("nonlinearity.bm_l4", anchors::BM_L4, worst_l4, Relation::AtMost, 1.05, n, &setup)
            .with_note("m ∈ {1, 10}"),
    );
    rows.push(
        CheckRow::new("nonlinearity.bm_rho_l2", anchors::BM_RHO_L2, worst_rho, Relation::AtMost, 1.05, n, &setup)
            .with_note("m ∈ {1, 10}"),
    );
    rows.push(
        CheckRow::new(
            "nonlinearity.bm_rough_right",
            anchors::BM_ROUGH_RIGHT,
            worst_right,
            Relation::AtMost,
            0.2,
            n,
            &setup,
        )
        .with_note("refinement drift of the max ratio, m ∈ {1, 10}"),
    );
    rows.push(
        CheckRow::new(
            "nonlinearity.bm_rough_left",
            anchors::BM_ROUGH_LEFT,
            worst_left,
            Relation::AtMost,
            0.2,
            n,
            &setup,
        )
        .with_note("refinement drift of the max ratio, m ∈ {1, 10}"),
    );
    Ok(rows)
}

fn drift_of(
    coarse: &crate::nonlinearity::BoundReport,
    fine: &crate::nonlinearity::BoundReport,
    kind: BoundKind,
) -> f64 {
    refinement_drift(coarse, fine)
        .into_iter()
        .find(|(k, _)| *k == kind)
        .map_or(f64::NAN, |(_, d)| d)
}

/// `‖B_m(u,v) − B(u,v)‖_{H^{-a}}` along `ms` for one pair.
pub fn moll_limit_series(u: &SpectralField, v: &SpectralField, ms: &[f64]) -> Result<Vec<f64>> {
    let a = crate::nonlinearity::negative_exponent(u.dim());
    let b = crate::nonlinearity::bilinear_b(u, v, DealiasRule::TwoThirds)?;
    ms.iter()
        .map(|&m| {
            let bm = crate::nonlinearity::bilinear_bm(Mollifier::new(m)?, u, v, DealiasRule::TwoThirds)?;
            Ok(sobolev_norm(-a, &(&bm - &b)))
        })
        .collect()
}

fn check_moll_limit(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let grid = Grid::periodic(3, s.n)?;
    let ms = [1.0, 4.0, 16.0, 64.0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3c);
    let count = s.samples.min(20);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for (u, v) in pairs(&grid, &mut rng, count) {
        let series = moll_limit_series(&u, &v, &ms)?;
        monotone &= series.windows(2).all(|w| w[1] < w[0]);
        worst = worst.max(series[3] / series[0]);
    }
    Ok(vec![CheckRow::new(
        "nonlinearity.moll_limit",
        anchors::MOLL_LIMIT,
        worst,
        Relation::AtMost,
        0.05,
        count,
        &format!("d=3 n={} m={ms:?}", s.n),
    )
    .with_note("final/initial over m = 1 → 64")
    .also(monotone, "not strictly decreasing in m")])
}

fn check_noise(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let g = 0.5;
    let grid = Grid::periodic(2, s.n)?;
    let model = NoiseModel::new(g, 1.0, NoiseModel::default_r(2, g), Saturation::Tanh, seed)?;
    let noise = model.on_grid(&grid);
    let k = model.k_g2(&grid);
    let lg = model.lipschitz_g(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e);
    let mut worst_bound: f64 = 0.0;
    let mut worst_lip: f64 = 0.0;
    let count = s.samples.max(10);
    for i in 0..count {
        let scale = 10f64.powf(3.0 * i as f64 / (count - 1) as f64) - 1.0;
        let spec = FieldSpectrum {
            l2_norm: Some(scale),
            ..FieldSpectrum::default()
        };
        let a = random_field(&grid, &mut rng, &spec);
        let b = random_field(&grid, &mut rng, &spec);
        worst_bound = worst_bound.max(noise.hs_norm(&a) / k);
        let d = sobolev_norm(-g, &(&a - &b));
        if d > 0.0 {
            worst_lip = worst_lip.max((noise.hs_norm(&a) - noise.hs_norm(&b)).abs() / (lg * d));
        }
    }
    let fine = Grid::periodic(2, 2 * s.n)?;
    let k_drift = (model.k_g2(&fine) / k - 1.0).abs();
    let setup = format!("d=2 n={} g={g} psi=tanh", s.n);
    Ok(vec![
        CheckRow::new("noise.hs_bound", anchors::NOISE_BOUND, worst_bound, Relation::AtMost, 1.0, count, &setup)
            .with_note(format!("K_g2={k:.4}, refinement drift {k_drift:.3}"))
            .also(k_drift <= 0.1, "K_g2 unstable under refinement"),
        CheckRow::new(
            "noise.lipschitz",
            anchors::NOISE_LIPSCHITZ,
            worst_lip,
            Relation::AtMost,
            1.0 + 1e-12,
            count,
            &setup,
        )
        .with_note(format!("L_g={lg:.4}")),
    ])
}

fn check_zeta_alpha(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let grid = Grid::periodic(2, s.zeta_grid)?;
    let g = 0.5;
    let model = NoiseModel::new(g, 1.0, NoiseModel::default_r(2, g), Saturation::One, seed)?;
    let setup = ZetaAlphaSetup {
        grid,
        nu: 1.0,
        gamma: 1.0,
        dt: 0.02,
        driver: SpectralField::zeros(grid),
    };
    let alphas = [0.0, 1.0, 4.0, 16.0, 64.0, 256.0];
    let table = zeta_alpha_statistics(&model, &setup, &alphas, 3.0, s.zeta_samples)?;
    let ratio = table.rows[5].h2.mean / table.rows[0].h2.mean;
    Ok(vec![CheckRow::new(
        "noise.zeta_alpha",
        anchors::ZETA_ALPHA,
        ratio,
        Relation::AtMost,
        0.05,
        s.zeta_samples,
        &format!("d=2 n={} alphas={alphas:?}", s.zeta_grid),
    )
    .with_note("E‖ζ^256‖² / E‖ζ^0‖²")
    .also(table.non_increasing, "increase beyond 2 s.e. along α")])
}

/// Convergence rate of the mean per-step energy defect when `dt` halves.
pub fn energy_residual_rate(config: &SolverConfig) -> Result<f64> {
    let coarse = mean_abs_residual(&simulate(config)?);
    let mut half = config.clone();
    half.dt = config.dt / 2.0;
    let fine = mean_abs_residual(&simulate(&half)?);
    Ok((coarse / fine).log2())
}

fn residual_config(n: usize, nonlinear: bool, seed: u64) -> Result<SolverConfig> {
    let grid = Grid::periodic(2, n)?;
    let mut c = SolverConfig::new(grid);
    c.nonlinear = nonlinear;
    c.initial = random_initial(&grid, seed, 2.0);
    c.forcing = random_initial(&grid, seed + 1, 0.5);
    c.t_end = 0.5;
    c.dt = 0.01;
    c.panel = vec![];
    Ok(c)
}

fn check_energy_residual(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let lin = energy_residual_rate(&residual_config(s.n, false, seed)?)?;
    let nonlin = energy_residual_rate(&residual_config(s.n, true, seed)?)?;
    Ok(vec![CheckRow::new(
        "integrator.energy_residual",
        anchors::ENERGY,
        lin.min(nonlin),
        Relation::AtLeast,
        0.9,
        2,
        &format!("d=2 n={} dt=0.01→0.005", s.n),
    )
    .with_note(format!("rate linear {lin:.3}, nonlinear {nonlin:.3}"))])
}

/// Configuration used for envelope checks: 2-d, multiplicative noise.
pub fn envelope_config(n: usize, seed: u64) -> Result<SolverConfig> {
    let grid = Grid::periodic(2, n)?;
    let g = 0.5;
    let mut c = SolverConfig::new(grid);
    c.noise = NoiseModel::new(g, 1.0, NoiseModel::default_r(2, g), Saturation::Tanh, seed)?;
    c.initial = random_initial(&grid, seed, 1.0);
    c.forcing = random_initial(&grid, seed + 7, 0.5);
    c.t_end = 2.0;
    c.dt = 0.01;
    c.panel = vec![];
    Ok(c)
}

fn check_envelope(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let c = envelope_config(s.n, seed)?;
    let trajs = simulate_ensemble(&c, |_| c.initial.clone(), s.envelope_seeds, 1)?;
    let (mut energy_fail, mut grad_fail) = (0, 0);
    let mut worst_margin = f64::NEG_INFINITY;
    for t in &trajs {
        let rep = gronwall_envelope_check(t, &c.forcing, 10.0, 10.0)?;
        energy_fail += usize::from(!rep.energy_holds);
        grad_fail += usize::from(!rep.gradient_holds);
        worst_margin = worst_margin.max(rep.sup_u2.ln() - rep.log_energy_bound);
    }
    let setup = format!("d=2 n={} seeds={} C5=C6=10", s.n, s.envelope_seeds);
    let n = trajs.len();
    Ok(vec![
        CheckRow::new("integrator.envelope_h", anchors::ENVELOPE_H, energy_fail as f64, Relation::AtMost, 0.0, n, &setup)
            .with_note(format!("violations; worst log(sup‖u‖²/bound) = {worst_margin:.3}")),
        CheckRow::new(
            "integrator.envelope_gradient",
            anchors::ENVELOPE_GRAD,
            grad_fail as f64,
            Relation::AtMost,
            0.0,
            n,
            &setup,
        )
        .with_note("violations"),
    ])
}

/// Worst Gagliardo–Nirenberg (3-d) or Ladyzhenskaya (2-d) ratio over samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnReport {
    pub worst: f64,
    pub samples: usize,
    pub skipped: usize,
}

/// `max ‖u‖_{L⁴} / (‖u‖_{L²}^{1-θ}‖∇u‖_{L²}^θ)` with `θ = 3/4` in 3-d and `1/2` in 2-d;
/// fields with `∇u = 0` are skipped.
pub fn gn_ratio_check(samples: &[SpectralField]) -> Result<GnReport> {
    let mut worst: f64 = 0.0;
    let (mut used, mut skipped) = (0, 0);
    for u in samples {
        let theta = if u.dim() == 3 { 0.75 } else { 0.5 };
        let grad = grad_l2_norm(u);
        let l2 = sobolev_norm(0.0, u);
        if grad == 0.0 || l2 == 0.0 {
            skipped += 1;
            continue;
        }
        worst = worst.max(lp_norm(4.0, u)? / (l2.powf(1.0 - theta) * grad.powf(theta)));
        used += 1;
    }
    Ok(GnReport {
        worst,
        samples: used,
        skipped,
    })
}

fn check_gn(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for dim in [2usize, 3] {
        let coarse = Grid::periodic(dim, s.n)?;
        let fine = Grid::periodic(dim, 2 * s.n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e ^ dim as u64);
        // full band on the coarse grid, so refinement changes the quadrature
        let spec = FieldSpectrum {
            max_index: Some(s.n as i64 / 2 - 1),
            slope: Some(dim as f64 / 2.0 + 1.0),
            ..FieldSpectrum::default()
        };
        let mut fields: Vec<SpectralField> = (0..s.samples).map(|_| random_field(&coarse, &mut rng, &spec)).collect();
        fields.push(SpectralField::zeros(coarse));
        let refined = fields.iter().map(|f| f.resample(fine)).collect::<Result<Vec<_>>>()?;
        let a = gn_ratio_check(&fields)?;
        let b = gn_ratio_check(&refined)?;
        let drift = (b.worst / a.worst - 1.0).abs();
        rows.push(
            CheckRow::new(
                &format!("integrator.gagliardo_nirenberg_d{dim}"),
                if dim == 3 { anchors::GAGLIARDO_NIRENBERG } else { anchors::LADYZHENSKAYA },
                drift,
                Relation::AtMost,
                0.15,
                a.samples,
                &format!("d={dim} n={}→{}", s.n, 2 * s.n),
            )
            .with_note(format!("worst ratio {:.4} → {:.4}, skipped {}", a.worst, b.worst, a.skipped)),
        );
    }
    Ok(rows)
}

/// Additive-noise 3-d mollified configuration for twin runs.
pub fn contraction_config(seed: u64) -> Result<SolverConfig> {
    let grid = Grid::periodic(3, 8)?;
    let g = 0.5;
    let mut c = SolverConfig::new(grid);
    c.noise = NoiseModel::new(g, 0.5, NoiseModel::default_r(3, g), Saturation::One, seed)?;
    c.t_end = 1.0;
    c.dt = 0.01;
    c.panel = vec![];
    Ok(c)
}

fn check_contraction(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let mut worst: f64 = 0.0;
    let mut identical = true;
    for k in 0..s.contraction_seeds {
        let c = contraction_config(seed + k)?;
        let x = random_initial(&c.grid, seed + 100 + k, 1.0);
        let eps = random_initial(&c.grid, seed + 200 + k, 1e-3);
        let series = twin_run_contraction(&c, &x, &(&x + &eps))?;
        worst = worst.max(series.max_relative_increase);
        identical &= twin_run_contraction(&c, &x, &x)?.identical_paths;
    }
    Ok(vec![CheckRow::new(
        "integrator.contraction",
        anchors::CONTRACTION,
        worst,
        Relation::AtMost,
        1e-3,
        s.contraction_seeds as usize,
        "d=3 n=8 m=64 additive",
    )
    .with_note("largest step increase / initial weighted distance")
    .also(identical, "identical initial data gave different paths")])
}

/// Additive linear 2-d configuration whose `z` carries the tightness statistics.
pub fn convolution_config(n: usize, g: f64, t_end: f64, seed: u64) -> Result<SolverConfig> {
    let grid = Grid::periodic(2, n)?;
    let mut c = SolverConfig::new(grid);
    c.nonlinear = false;
    c.noise = NoiseModel::new(g, 1.0, NoiseModel::default_r(2, g), Saturation::One, seed)?;
    c.t_end = t_end;
    c.dt = 0.02;
    c.panel = vec![];
    Ok(c)
}

/// `max/min` of `values`.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn check_z_lp(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let g = 0.5;
    let c = convolution_config(s.n, g, 8.0, seed)?;
    let p = 4.0;
    let trajs = simulate_ensemble(&c, |_| SpectralField::zeros(c.grid), s.z_members, 1)?;
    // z starts at rest, so horizons begin once the transient has decayed
    let horizons = [2.0, 4.0, 8.0];
    let ratios: Vec<f64> = horizons
        .iter()
        .map(|&h| {
            let per: Vec<f64> = trajs
                .iter()
                .map(|t| {
                    let keep: Vec<usize> = (0..t.records.len()).filter(|&i| t.records[i].time <= h + 1e-9).collect();
                    let times: Vec<f64> = keep.iter().map(|&i| t.records[i].time).collect();
                    let y: Vec<f64> = keep.iter().map(|&i| t.records[i].z_l4.powf(p)).collect();
                    trapezoid(&times, &y)
                })
                .collect();
            mean(&per) / (1.0 + h)
        })
        .collect();
    Ok(vec![CheckRow::new(
        "tightness.z_lp",
        anchors::Z_LP,
        spread(&ratios),
        Relation::AtMost,
        2.0,
        s.z_members as usize,
        &format!("d=2 n={} g={g} p={p}", s.n),
    )
    .with_note(format!("E∫‖z‖⁴/(1+T) over T=2,4,8: {ratios:.4?}"))])
}

/// Ratios `E‖z‖_{C^β([0,T];H^δ)} / (1 + T^e)` over `horizons`.
pub fn z_holder_ratios(n: usize, g: f64, horizons: &[f64], members: u64, seed: u64, workers: usize) -> Result<Vec<f64>> {
    let t_end = horizons.iter().copied().fold(0.0, f64::max);
    let mut c = convolution_config(n, g, t_end, seed)?;
    c.snapshot_every = 5;
    c.observe_every = 5;
    let params = ZtNormParams::default_for(2, g);
    let e = params.holder_growth_exponent(g);
    let trajs = simulate_ensemble(&c, |_| SpectralField::zeros(c.grid), members, workers)?;
    horizons
        .iter()
        .map(|&h| {
            let per = trajs
                .iter()
                .map(|t| {
                    let mut prefix = t.clone();
                    prefix.snapshots.retain(|s| s.time <= h + 1e-9);
                    Ok(z_holder_norm(&prefix, &params)?.total())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(mean(&per) / (1.0 + h.powf(e)))
        })
        .collect()
}

fn check_z_holder(s: &Settings, seed: u64, _: &Kernels) -> Result<Vec<CheckRow>> {
    let horizons = [1.0, 2.0, 4.0, 8.0];
    let mut rows = Vec::new();
    for g in [0.25, 0.75] {
        let ratios = z_holder_ratios(s.n, g, &horizons, s.z_members, seed, 1)?;
        rows.push(
            CheckRow::new(
                &format!("tightness.z_holder_g{g}"),
                anchors::Z_HOLDER,
                spread(&ratios),
                Relation::AtMost,
                2.0,
                s.z_members as usize,
                &format!("d=2 n={} g={g} beta=delta=(1-g)/6", s.n),
            )
            .with_note(format!("ratio over T=1,2,4,8: {ratios:.4?}")),
        );
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn profile_parsing() {
        assert_eq!("quick".parse::<Profile>().unwrap(), Profile::Quick);
        assert_eq!("full".parse::<Profile>().unwrap(), Profile::Full);
        assert!("fast".parse::<Profile>().is_err());
    }

    #[test]
    fn meta_check_detects_missing_anchor() {
        let rows: Vec<CheckRow> = anchors::REQUIRED
            .iter()
            .map(|a| CheckRow::new("x", a, 0.0, Relation::AtMost, 1.0, 1, ""))
            .collect();
        assert!(meta_check(&rows).passed);
        assert!(!meta_check(&rows[1..]).passed);
    }

    #[test]
    fn gn_single_mode_matches_refined_quadrature() {
        let grid = Grid::periodic(3, 16).unwrap();
        let a = [Complex64::new(0.3, 0.0), Complex64::new(-0.3, 0.0), Complex64::default()];
        let u = SpectralField::single_mode(grid, [1, 1, 2], a);
        let coarse = gn_ratio_check(&[u.clone()]).unwrap().worst;
        let fine = gn_ratio_check(&[u.resample(Grid::periodic(3, 64).unwrap()).unwrap()])
            .unwrap()
            .worst;
        assert!(coarse.is_finite() && coarse > 0.0);
        assert!((coarse / fine - 1.0).abs() < 0.01);
        let rep = gn_ratio_check(&[SpectralField::zeros(grid)]).unwrap();
        assert_eq!((rep.samples, rep.skipped), (0, 1));
    }

    #[test]
    fn row_comparison() {
        assert!(CheckRow::new("a", "x", 0.5, Relation::AtMost, 1.0, 1, "").passed);
        assert!(!CheckRow::new("a", "x", f64::NAN, Relation::AtMost, 1.0, 1, "").passed);
        assert!(CheckRow::new("a", "x", 2.0, Relation::AtLeast, 1.0, 1, "").passed);
        assert!(!CheckRow::new("a", "x", 0.5, Relation::AtMost, 1.0, 1, "").also(false, "no").passed);
        assert_eq!(short_digest(b"abc").len(), 16);
    }
}
