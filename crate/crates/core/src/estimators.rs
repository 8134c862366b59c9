//! Invariant-measure and stationarity statistics over recorded trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integrator::{simulate_ensemble, Record, SolverConfig, Trajectory};
use crate::noise::probe_coordinate;
use crate::nonlinearity::Mollifier;
use crate::spectral::{band_energy, holder_seminorm, lp_norm, sobolev_norm, HolderNorm, SpectralField};
use crate::stats::{effective_sample_size, ks_p_value, ks_statistic, trapezoid, Estimate};

/// A scalar functional of the velocity field evaluated along a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    NormHSquared,
    NormL4,
    /// Energy carried by modes with `k_lo ≤ |k| < k_hi`.
    EnergySpectrumBand { k_lo: f64, k_hi: f64 },
    /// `φ(v) = x²/(r² + x²)` with `x = ⟨v, h⟩` for the unit probe `h` on
    /// the `±mode` pair: bounded, Lipschitz and weakly continuous.
    BoundedTestFn { radius: f64, mode: [i64; 3] },
}

impl ObservableSpec {
    pub fn name(&self) -> String {
        match self {
            ObservableSpec::NormHSquared => "norm_H_squared".into(),
            ObservableSpec::NormL4 => "norm_L4".into(),
            ObservableSpec::EnergySpectrumBand { k_lo, k_hi } => format!("band_{k_lo}_{k_hi}"),
            ObservableSpec::BoundedTestFn { radius, mode } => {
                format!("bounded_r{radius}_k{}_{}_{}", mode[0], mode[1], mode[2])
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ObservableSpec::EnergySpectrumBand { k_lo, k_hi } if !(k_lo >= &0.0 && k_hi > k_lo) => {
                Err(invalid("observable.band", format!("need 0 ≤ k_lo < k_hi, got [{k_lo}, {k_hi})")))
            }
            ObservableSpec::BoundedTestFn { radius, mode } => {
                if !(*radius > 0.0) {
                    return Err(invalid("observable.radius", format!("must be positive, got {radius}")));
                }
                if mode.iter().all(|&k| k == 0) {
                    return Err(invalid("observable.mode", "probe mode must be non-zero"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, v: &SpectralField) -> Result<f64> {
        Ok(match self {
            ObservableSpec::NormHSquared => sobolev_norm(0.0, v).powi(2),
            ObservableSpec::NormL4 => lp_norm(4.0, v)?,
            ObservableSpec::EnergySpectrumBand { k_lo, k_hi } => band_energy(v, *k_lo, *k_hi),
            ObservableSpec::BoundedTestFn { radius, mode } => {
                let x = probe_coordinate(v, *mode);
                x * x / (radius * radius + x * x)
            }
        })
    }

    /// Default test-functional panel.
    pub fn default_panel() -> Vec<ObservableSpec> {
        vec![
            ObservableSpec::NormHSquared,
            ObservableSpec::EnergySpectrumBand { k_lo: 0.0, k_hi: 2.5 },
            ObservableSpec::BoundedTestFn {
                radius: 0.5,
                mode: [1, 0, 0],
            },
            ObservableSpec::BoundedTestFn {
                radius: 0.5,
                mode: [1, 1, 0],
            },
        ]
    }
}

/// `(1/T) ∫_0^T y dt` by trapezoid quadrature on the recorded samples, with
/// linear interpolation at `T` when it falls between samples.
pub fn time_average(times: &[f64], values: &[f64], horizon: f64) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::InsufficientData("need at least two samples".into()));
    }
    if !(horizon > times[0]) {
        return Err(invalid("T", format!("must exceed the start time {}, got {horizon}", times[0])));
    }
    let end = *times.last().unwrap();
    if horizon > end * (1.0 + 1e-12) {
        return Err(invalid("T", format!("{horizon} exceeds the trajectory end time {end}")));
    }
    let mut t = Vec::new();
    let mut y = Vec::new();
    for i in 0..times.len() {
        if times[i] <= horizon {
            t.push(times[i]);
            y.push(values[i]);
        } else {
            let (t0, t1) = (times[i - 1], times[i]);
            let w = (horizon - t0) / (t1 - t0);
            t.push(horizon);
            y.push(values[i - 1] + w * (values[i] - values[i - 1]));
            break;
        }
    }
    Ok(trapezoid(&t, &y) / (horizon - times[0]))
}

/// Series of an observable along a trajectory: taken from the recorded
/// panel when present, otherwise from the standard records.
pub fn observable_series(traj: &Trajectory, phi: &ObservableSpec) -> Result<Vec<f64>> {
    if let Some(j) = traj.meta.panel.iter().position(|n| *n == phi.name()) {
        return Ok(traj.panel_series(j));
    }
    match phi {
        ObservableSpec::NormHSquared => Ok(traj.series(|r| r.norm_h * r.norm_h)),
        ObservableSpec::NormL4 => Ok(traj.series(|r| r.norm_l4)),
        other => Err(Error::InsufficientData(format!(
            "observable {} was not recorded on this trajectory",
            other.name()
        ))),
    }
}

/// Krylov–Bogoliubov time average `(1/T) ∫_0^T φ(v(t)) dt`.
pub fn kb_average(traj: &Trajectory, phi: &ObservableSpec, horizon: f64) -> Result<f64> {
    time_average(&traj.times(), &observable_series(traj, phi)?, horizon)
}

/// Ensemble time averages at doubling horizons with their Cauchy gaps.
#[derive(Clone, Debug, PartialEq)]
pub struct KbReport {
    pub horizons: Vec<f64>,
    pub observables: Vec<String>,
    /// `averages[h][o]`: ensemble estimate of `Ā_{T_h}(φ_o)`.
    pub averages: Vec<Vec<Estimate>>,
    /// `gaps[h][o]`: ensemble mean of `|Ā_{T_{h+1}} − Ā_{T_h}|` per member.
    pub gaps: Vec<Vec<Estimate>>,
    pub members: Vec<u64>,
}

impl KbReport {
    /// Gaps strictly decrease along the horizons for observable `o`.
    pub fn gaps_decreasing(&self, o: usize) -> bool {
        self.gaps.windows(2).all(|w| w[1][o].mean < w[0][o].mean)
    }
}

pub fn kb_report(trajs: &[Trajectory], panel: &[ObservableSpec], horizons: &[f64]) -> Result<KbReport> {
    if trajs.is_empty() {
        return Err(Error::InsufficientData("empty ensemble".into()));
    }
    if horizons.is_empty() || horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("horizons", "must be non-empty and increasing"));
    }
    // per[member][h][o]
    let mut per = Vec::with_capacity(trajs.len());
    for traj in trajs {
        let times = traj.times();
        let mut rows = vec![vec![0.0; panel.len()]; horizons.len()];
        for (o, phi) in panel.iter().enumerate() {
            let series = observable_series(traj, phi)?;
            for (h, &t) in horizons.iter().enumerate() {
                rows[h][o] = time_average(&times, &series, t)?;
            }
        }
        per.push(rows);
    }
    let collect = |f: &dyn Fn(&Vec<Vec<f64>>) -> f64| -> Estimate {
        Estimate::of(&per.iter().map(f).collect::<Vec<_>>())
    };
    let averages = (0..horizons.len())
        .map(|h| (0..panel.len()).map(|o| collect(&|m| m[h][o])).collect())
        .collect();
    let gaps = (1..horizons.len())
        .map(|h| (0..panel.len()).map(|o| collect(&|m| (m[h][o] - m[h - 1][o]).abs())).collect())
        .collect();
    Ok(KbReport {
        horizons: horizons.to_vec(),
        observables: panel.iter().map(|o| o.name()).collect(),
        averages,
        gaps,
        members: trajs.iter().map(|t| t.meta.member).collect(),
    })
}

/// Fraction of recorded times in `(0, T]` with `‖v(t)‖_H > R`.
pub fn exceedance_fraction(traj: &Trajectory, radius: f64, horizon: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(invalid("R", format!("must be non-negative, got {radius}")));
    }
    if horizon > traj.end_time() * (1.0 + 1e-12) {
        return Err(invalid("T", format!("{horizon} exceeds the trajectory end time {}", traj.end_time())));
    }
    let inside: Vec<&Record> = traj
        .records
        .iter()
        .filter(|r| r.time > 0.0 && r.time <= horizon * (1.0 + 1e-12))
        .collect();
    if inside.is_empty() {
        return Err(Error::InsufficientData("no samples in (0, T]".into()));
    }
    Ok(inside.iter().filter(|r| r.norm_h > radius).count() as f64 / inside.len() as f64)
}

/// Ensemble exceedance estimates over a radius grid and several horizons.
#[derive(Clone, Debug, PartialEq)]
pub struct ExceedanceTable {
    pub radii: Vec<f64>,
    pub horizons: Vec<f64>,
    /// `fractions[h][r]`
    pub fractions: Vec<Vec<Estimate>>,
}

impl ExceedanceTable {
    /// Every row is non-increasing in `R`.
    pub fn monotone_in_radius(&self) -> bool {
        self.fractions.iter().all(|row| row.windows(2).all(|w| w[1].mean <= w[0].mean))
    }

    /// Largest horizon-to-horizon spread, in units of the larger standard error.
    pub fn max_horizon_spread(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.radii.len() {
            for a in 0..self.horizons.len() {
                for b in a + 1..self.horizons.len() {
                    let (x, y) = (self.fractions[a][r], self.fractions[b][r]);
                    let diff = (x.mean - y.mean).abs();
                    let se = x.se.max(y.se);
                    if diff > 0.0 {
                        worst = worst.max(if se > 0.0 { diff / se } else { f64::INFINITY });
                    }
                }
            }
        }
        worst
    }
}

pub fn exceedance_table(trajs: &[Trajectory], radii: &[f64], horizons: &[f64]) -> Result<ExceedanceTable> {
    if trajs.is_empty() {
        return Err(Error::InsufficientData("empty ensemble".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("radii", "must be increasing"));
    }
    let mut fractions = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let mut row = Vec::with_capacity(radii.len());
        for &r in radii {
            let per = trajs
                .iter()
                .map(|traj| exceedance_fraction(traj, r, t))
                .collect::<Result<Vec<_>>>()?;
            row.push(Estimate::of(&per));
        }
        fractions.push(row);
    }
    Ok(ExceedanceTable {
        radii: radii.to_vec(),
        horizons: horizons.to_vec(),
        fractions,
    })
}

/// Exponents of the tightness norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZtNormParams {
    pub beta: f64,
    pub delta: f64,
    pub p: f64,
}

impl ZtNormParams {
    /// Checks `β ∈ (0, 1/4]`, `δ ∈ (0, 1]`, `p ≥ 1` and `β + δ/2 < (1−g)/2`.
    pub fn new(beta: f64, delta: f64, p: f64, g: f64) -> Result<Self> {
        let params = Self { beta, delta, p };
        params.validate(g)?;
        Ok(params)
    }

    /// `β = δ = (1−g)/6`; `p = 8/3` in 3-d and `4` in 2-d.
    pub fn default_for(dim: usize, g: f64) -> Self {
        Self {
            beta: (1.0 - g) / 6.0,
            delta: (1.0 - g) / 6.0,
            p: if dim == 3 { 8.0 / 3.0 } else { 4.0 },
        }
    }

    pub fn validate(&self, g: f64) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 0.25) {
            return Err(invalid("zt.beta", format!("must lie in (0, 1/4], got {}", self.beta)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("zt.delta", format!("must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.p >= 1.0) {
            return Err(invalid("zt.p", format!("must be at least 1, got {}", self.p)));
        }
        if !(self.beta + self.delta / 2.0 < (1.0 - g) / 2.0) {
            return Err(invalid(
                "zt",
                format!(
                    "β + δ/2 = {} must be below (1−g)/2 = {}",
                    self.beta + self.delta / 2.0,
                    (1.0 - g) / 2.0
                ),
            ));
        }
        Ok(())
    }

    /// Growth exponent `(1−g)/2 − β − δ/2` of the Hölder bound on `z`.
    pub fn holder_growth_exponent(&self, g: f64) -> f64 {
        (1.0 - g) / 2.0 - self.beta - self.delta / 2.0
    }
}

/// The four parts of the discrete tightness norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZtNorm {
    /// `sup_t ‖v‖_H`
    pub sup_h: f64,
    /// `(∫ ‖v‖²_{H^δ})^{1/2}`
    pub l2_hdelta: f64,
    /// `(∫ ‖v‖^p_{L⁴})^{1/p}`
    pub lp_l4: f64,
    /// `‖v‖_{C^β(H^{-1})}` from the snapshots (a lower bound of the continuum value).
    pub holder_hm1: HolderNorm,
}

impl ZtNorm {
    pub fn total(&self) -> f64 {
        self.sup_h + self.l2_hdelta + self.lp_l4 + self.holder_hm1.total()
    }
}

pub fn zt_norm(traj: &Trajectory, params: &ZtNormParams, g: f64) -> Result<ZtNorm> {
    params.validate(g)?;
    if (traj.meta.delta - params.delta).abs() > 1e-12 {
        return Err(invalid(
            "zt.delta",
            format!(
                "trajectory recorded H^δ with δ = {}, requested δ = {}",
                traj.meta.delta, params.delta
            ),
        ));
    }
    let t = traj.times();
    let sup_h = traj.records.iter().map(|r| r.norm_h).fold(0.0, f64::max);
    let hd: Vec<f64> = traj.series(|r| r.norm_hdelta * r.norm_hdelta);
    let l4: Vec<f64> = traj.series(|r| r.norm_l4.powf(params.p));
    let samples: Vec<(f64, SpectralField)> = traj.snapshots.iter().map(|s| (s.time, s.v.clone())).collect();
    Ok(ZtNorm {
        sup_h,
        l2_hdelta: trapezoid(&t, &hd).sqrt(),
        lp_l4: trapezoid(&t, &l4).powf(1.0 / params.p),
        holder_hm1: holder_seminorm(params.beta, -1.0, &samples)?,
    })
}

/// `‖z‖_{C^β([0,T]; H^δ)}` from the `z` snapshots.
pub fn z_holder_norm(traj: &Trajectory, params: &ZtNormParams) -> Result<HolderNorm> {
    let samples: Vec<(f64, SpectralField)> = traj.snapshots.iter().map(|s| (s.time, s.z.clone())).collect();
    holder_seminorm(params.beta, params.delta, &samples)
}

/// Which part of the run the two comparison windows cover.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSplit {
    /// Start of the first window as a fraction of the horizon.
    pub start: f64,
    /// Boundary between the two windows.
    pub middle: f64,
}

impl Default for WindowSplit {
    fn default() -> Self {
        Self { start: 0.5, middle: 0.75 }
    }
}

/// Two-window Kolmogorov–Smirnov comparison with autocorrelation-adjusted
/// sample sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationarityReport {
    pub ks: f64,
    pub p_value: f64,
    pub ess_first: f64,
    pub ess_second: f64,
    /// Fewer than 20 effective samples in a window.
    pub inconclusive: bool,
}

impl StationarityReport {
    /// Conclusive and not rejected at `level`.
    pub fn passes(&self, level: f64) -> bool {
        !self.inconclusive && self.p_value >= level
    }
}

pub const MIN_EFFECTIVE_SAMPLES: f64 = 20.0;

pub fn stationarity_diagnostic(times: &[f64], values: &[f64], split: WindowSplit) -> Result<StationarityReport> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(Error::InsufficientData("need at least four samples".into()));
    }
    if !(0.0 <= split.start && split.start < split.middle && split.middle < 1.0) {
        return Err(invalid("window_split", "need 0 ≤ start < middle < 1"));
    }
    let (t0, t1) = (times[0], *times.last().unwrap());
    let a_lo = t0 + split.start * (t1 - t0);
    let mid = t0 + split.middle * (t1 - t0);
    let first: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= a_lo && **t < mid)
        .map(|(_, v)| *v)
        .collect();
    let second: Vec<f64> = times.iter().zip(values).filter(|(t, _)| **t >= mid).map(|(_, v)| *v).collect();
    if first.len() < 2 || second.len() < 2 {
        return Err(Error::InsufficientData("a window holds fewer than two samples".into()));
    }
    let ks = ks_statistic(&first, &second);
    let ess_first = effective_sample_size(&first);
    let ess_second = effective_sample_size(&second);
    Ok(StationarityReport {
        ks,
        p_value: ks_p_value(ks, ess_first, ess_second),
        ess_first,
        ess_second,
        inconclusive: ess_first < MIN_EFFECTIVE_SAMPLES || ess_second < MIN_EFFECTIVE_SAMPLES,
    })
}

/// One row of the mollification-limit sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct MollLimitRow {
    pub m: f64,
    /// Ensemble estimate of the post-burn-in average of each panel observable.
    pub averages: Vec<Estimate>,
    /// Paired ensemble mean of `|Ā_m − Ā_{m_prev}|` (absent for the first `m`).
    pub gap_to_previous: Option<Vec<Estimate>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MollLimitReport {
    pub observables: Vec<String>,
    pub rows: Vec<MollLimitRow>,
}

impl MollLimitReport {
    /// Successive-`m` gaps strictly decrease for observable `o`.
    pub fn gaps_decreasing(&self, o: usize) -> bool {
        let gaps: Vec<f64> = self
            .rows
            .iter()
            .filter_map(|r| r.gap_to_previous.as_ref().map(|g| g[o].mean))
            .collect();
        gaps.windows(2).all(|w| w[1] < w[0])
    }

    /// The two largest `m` agree within `k` combined standard errors for observable `o`.
    pub fn tail_agrees(&self, o: usize, k: f64) -> bool {
        let n = self.rows.len();
        if n < 2 {
            return true;
        }
        let (a, b) = (self.rows[n - 2].averages[o], self.rows[n - 1].averages[o]);
        (a.mean - b.mean).abs() <= k * (a.se * a.se + b.se * b.se).sqrt()
    }
}

/// Same seeds and noise for every `m`; each member's panel averages over
/// `[burn_in, T]` are compared pairwise across successive `m`.
pub fn mollification_limit_study(
    base: &SolverConfig,
    ms: &[f64],
    members: u64,
    burn_in: f64,
    workers: usize,
) -> Result<MollLimitReport> {
    if base.grid.dim() != 3 {
        return Err(invalid("grid.d", "the mollification limit is a 3-d study"));
    }
    if ms.is_empty() || ms.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("m", "mollifier grid must be increasing"));
    }
    let mut per_m: Vec<Vec<Vec<f64>>> = Vec::with_capacity(ms.len());
    for &m in ms {
        let mut cfg = base.clone();
        cfg.mollifier = Mollifier::new(m)?;
        let trajs = simulate_ensemble(&cfg, |_| cfg.initial.clone(), members, workers)?;
        let mut rows = Vec::with_capacity(trajs.len());
        for traj in &trajs {
            let times = traj.times();
            let keep: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= burn_in).collect();
            let t: Vec<f64> = keep.iter().map(|&i| times[i]).collect();
            let mut row = Vec::with_capacity(cfg.panel.len());
            for phi in &cfg.panel {
                let s = observable_series(traj, phi)?;
                let y: Vec<f64> = keep.iter().map(|&i| s[i]).collect();
                let span = t.last().copied().unwrap_or(0.0) - t.first().copied().unwrap_or(0.0);
                if t.len() < 2 || span <= 0.0 {
                    return Err(Error::InsufficientData("burn-in leaves fewer than two samples".into()));
                }
                row.push(trapezoid(&t, &y) / span);
            }
            rows.push(row);
        }
        per_m.push(rows);
    }
    let n_obs = base.panel.len();
    let rows = ms
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let averages = (0..n_obs)
                .map(|o| Estimate::of(&per_m[i].iter().map(|r| r[o]).collect::<Vec<_>>()))
                .collect();
            let gap_to_previous = (i > 0).then(|| {
                (0..n_obs)
                    .map(|o| {
                        let d: Vec<f64> = per_m[i]
                            .iter()
                            .zip(&per_m[i - 1])
                            .map(|(a, b)| (a[o] - b[o]).abs())
                            .collect();
                        Estimate::of(&d)
                    })
                    .collect()
            });
            MollLimitRow {
                m,
                averages,
                gap_to_previous,
            }
        })
        .collect();
    Ok(MollLimitReport {
        observables: base.panel.iter().map(|o| o.name()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{random_initial, simulate_ensemble, TrajectoryMeta};
    use crate::noise::{ou_energy, NoiseModel, Saturation};
    use crate::spectral::Grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn synthetic(times: &[f64], v: impl Fn(f64) -> f64) -> Trajectory {
        let grid = Grid::periodic(2, 8).unwrap();
        Trajectory {
            records: times
                .iter()
                .map(|&t| Record {
                    time: t,
                    norm_h: v(t),
                    ..Record::default()
                })
                .collect(),
            panel: vec![vec![]; times.len()],
            snapshots: vec![],
            meta: TrajectoryMeta {
                grid,
                seed: 0,
                member: 0,
                dt: 0.1,
                steps: times.len() as u64 - 1,
                stiffness: 0.0,
                delta: 0.1,
                panel: vec![],
            },
        }
    }

    fn constant_field_trajectory(w: &SpectralField, horizon: f64, delta: f64) -> Trajectory {
        let steps = 40;
        let times: Vec<f64> = (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect();
        let rec = Record {
            norm_h: sobolev_norm(0.0, w),
            norm_l4: lp_norm(4.0, w).unwrap(),
            norm_hdelta: sobolev_norm(delta, w),
            ..Record::default()
        };
        let mut traj = synthetic(&times, |_| 0.0);
        traj.meta.delta = delta;
        for r in traj.records.iter_mut() {
            *r = Record { time: r.time, ..rec };
        }
        traj.snapshots = times
            .iter()
            .map(|&t| crate::integrator::Snapshot {
                time: t,
                v: w.clone(),
                z: w.clone(),
            })
            .collect();
        traj
    }

    #[test]
    fn time_average_of_constant_and_linear() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        assert!((time_average(&t, &vec![1.0; 11], 2.0).unwrap() - 1.0).abs() < 1e-15);
        let y: Vec<f64> = t.iter().map(|x| 2.0 * x).collect();
        assert!((time_average(&t, &y, 2.5).unwrap() - 2.5).abs() < 1e-12);
        assert!(time_average(&t, &y, 5.0).is_err());
    }

    #[test]
    fn kb_average_insensitive_to_cadence() {
        let fine: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.005).collect();
        let coarse: Vec<f64> = fine.iter().step_by(2).copied().collect();
        let f = |t: f64| 1.0 + (3.0 * t).sin();
        let a = kb_average(&synthetic(&fine, f), &ObservableSpec::NormHSquared, 10.0).unwrap();
        let b = kb_average(&synthetic(&coarse, f), &ObservableSpec::NormHSquared, 10.0).unwrap();
        // range of φ = (1+sin)² is 4
        assert!((a - b).abs() <= 1e-3 * 4.0);
    }

    #[test]
    fn kb_average_linear_in_observable() {
        let t: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let traj = synthetic(&t, |x| x.cos());
        let y = traj.series(|r| r.norm_h.powi(2));
        let y3: Vec<f64> = y.iter().map(|v| 3.0 * v).collect();
        let a = time_average(&t, &y, 4.0).unwrap();
        let b = time_average(&t, &y3, 4.0).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12);
    }

    #[test]
    fn exceedance_limits_and_monotonicity() {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let traj = synthetic(&t, |x| 1.0 + x.sin().abs());
        assert_eq!(exceedance_fraction(&traj, 0.0, 5.0).unwrap(), 1.0);
        assert_eq!(exceedance_fraction(&traj, 20.0, 5.0).unwrap(), 0.0);
        let mut prev = 1.0;
        for i in 0..40 {
            let f = exceedance_fraction(&traj, i as f64 * 0.05, 5.0).unwrap();
            assert!(f <= prev);
            prev = f;
        }
        assert!(exceedance_fraction(&traj, 1.0, 6.0).is_err());
    }

    #[test]
    fn zt_params_validation() {
        assert!(ZtNormParams::new(0.1, 0.1, 4.0, 0.5).is_ok());
        assert!(ZtNormParams::new(0.2, 0.2, 4.0, 0.5).is_err());
        assert!(ZtNormParams::new(0.3, 0.01, 4.0, 0.0).is_err());
        assert!(ZtNormParams::new(0.1, 0.0, 4.0, 0.5).is_err());
        let d = ZtNormParams::default_for(3, 0.25);
        assert!(d.validate(0.25).is_ok());
        assert_eq!(d.p, 8.0 / 3.0);
    }

    #[test]
    fn zt_norm_zero_and_constant_closed_form() {
        let grid = Grid::periodic(3, 8).unwrap();
        let g = 0.25;
        let params = ZtNormParams::default_for(3, g);
        let zero = constant_field_trajectory(&SpectralField::zeros(grid), 2.0, params.delta);
        assert_eq!(zero_total(&zero, &params, g), 0.0);

        let w = random_initial(&grid, 3, 1.3);
        let horizon = 2.0;
        let traj = constant_field_trajectory(&w, horizon, params.delta);
        let z = zt_norm(&traj, &params, g).unwrap();
        let expect = sobolev_norm(0.0, &w)
            + horizon.sqrt() * sobolev_norm(params.delta, &w)
            + horizon.powf(3.0 / 8.0) * lp_norm(4.0, &w).unwrap()
            + sobolev_norm(-1.0, &w);
        assert!((z.total() - expect).abs() < 1e-12 * expect);
        assert_eq!(z.holder_hm1.seminorm, 0.0);

        // each part scales by |c|
        let scaled = constant_field_trajectory(&(-2.0 * &w), horizon, params.delta);
        let zs = zt_norm(&scaled, &params, g).unwrap();
        assert!((zs.sup_h - 2.0 * z.sup_h).abs() < 1e-12 * z.sup_h);
        assert!((zs.l2_hdelta - 2.0 * z.l2_hdelta).abs() < 1e-12 * z.l2_hdelta);
        assert!((zs.lp_l4 - 2.0 * z.lp_l4).abs() < 1e-12 * z.lp_l4);
        assert!((zs.holder_hm1.total() - 2.0 * z.holder_hm1.total()).abs() < 1e-12 * z.holder_hm1.total());

        let bad = ZtNormParams::new(0.1, 0.3, 4.0, g).unwrap();
        assert!(zt_norm(&traj, &bad, g).is_err());
    }

    fn zero_total(traj: &Trajectory, params: &ZtNormParams, g: f64) -> f64 {
        zt_norm(traj, params, g).unwrap().total()
    }

    #[test]
    fn ks_calibration_on_iid_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let t: Vec<f64> = (0..800).map(|i| i as f64).collect();
        let repeats = 500;
        let mut rejected = 0;
        for _ in 0..repeats {
            let y: Vec<f64> = (0..800).map(|_| StandardNormal.sample(&mut rng)).collect();
            let rep = stationarity_diagnostic(&t, &y, WindowSplit::default()).unwrap();
            assert!(!rep.inconclusive);
            if rep.p_value < 0.05 {
                rejected += 1;
            }
        }
        let rate = rejected as f64 / repeats as f64;
        assert!((rate - 0.05).abs() <= 0.02, "{rate}");
    }

    #[test]
    fn decaying_path_is_flagged() {
        let t: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|x| (-x).exp()).collect();
        let rep = stationarity_diagnostic(&t, &y, WindowSplit::default()).unwrap();
        assert_eq!(rep.ks, 1.0);
        assert!(!rep.passes(0.01));
    }

    #[test]
    fn linear_model_kb_average_matches_ou_energy() {
        let grid = Grid::periodic(2, 8).unwrap();
        let mut c = crate::integrator::SolverConfig::new(grid);
        c.nonlinear = false;
        c.noise = NoiseModel::new(0.5, 0.5, NoiseModel::default_r(2, 0.5), Saturation::One, 21).unwrap();
        c.t_end = 20.0;
        c.dt = 0.02;
        c.panel = vec![ObservableSpec::NormHSquared];
        let trajs = simulate_ensemble(&c, |_| SpectralField::zeros(grid), 32, 2).unwrap();
        // time average of E‖z(t)‖² over [0, T]
        let horizon = c.t_end;
        let n = 4000;
        let oracle = (1..=n)
            .map(|i| ou_energy(&c.noise, &grid, c.nu, c.gamma, horizon * (i as f64 - 0.5) / n as f64))
            .sum::<f64>()
            / n as f64;
        let avgs: Vec<f64> = trajs
            .iter()
            .map(|t| kb_average(t, &ObservableSpec::NormHSquared, horizon).unwrap())
            .collect();
        let est = Estimate::of(&avgs);
        assert!((est.mean - oracle).abs() < 3.0 * est.se, "{est:?} vs {oracle}");

        let rep = kb_report(&trajs, &[ObservableSpec::NormHSquared], &[5.0, 10.0, 20.0]).unwrap();
        assert_eq!(rep.averages.len(), 3);
        assert_eq!(rep.gaps.len(), 2);
        assert_eq!(rep.members.len(), 32);
    }

    #[test]
    fn moll_limit_without_convection_is_flat() {
        let grid = Grid::periodic(3, 8).unwrap();
        let mut c = crate::integrator::SolverConfig::new(grid);
        c.nonlinear = false;
        c.noise = NoiseModel::new(0.5, 0.5, NoiseModel::default_r(3, 0.5), Saturation::One, 1).unwrap();
        c.t_end = 0.5;
        c.dt = 0.05;
        let rep = mollification_limit_study(&c, &[4.0, 16.0], 3, 0.1, 1).unwrap();
        for o in 0..rep.observables.len() {
            assert_eq!(rep.rows[0].averages[o], rep.rows[1].averages[o]);
        }
        let two_d = crate::integrator::SolverConfig::new(Grid::periodic(2, 8).unwrap());
        assert!(mollification_limit_study(&two_d, &[4.0], 2, 0.0, 1).is_err());
    }
}
