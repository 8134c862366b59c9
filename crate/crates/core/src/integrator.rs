//! OU-splitting time stepper `v = z + u`.
//!
//! Each step advances the stochastic convolution `z` exactly in law with `v`
//! frozen at the start of the step, then advances `u` with the linear part
//! `νA + γ` implicit and the convection (and forcing) explicit. With
//! `alpha > 0` the variant `v = ζ^α + u` is used: `ζ^α` carries the extra
//! damping `γ + α` and `u` receives the compensating feed `α ζ^α`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::estimators::ObservableSpec;
use crate::noise::{GridNoise, NoiseModel, NoiseStream, WienerIncrement};
use crate::nonlinearity::{bilinear_bm, DealiasRule, Mollifier};
use crate::spectral::random::{random_field, FieldSpectrum};
use crate::spectral::{grad_l2_norm, inner_product, lp_norm, sobolev_norm, Grid, SpectralField};
use crate::stats::trapezoid;

/// Physical and numerical parameters of one run.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub grid: Grid,
    pub nu: f64,
    pub gamma: f64,
    /// Extra damping of the stochastic convolution (0: plain splitting).
    pub alpha: f64,
    pub mollifier: Mollifier,
    pub dt: f64,
    pub t_end: f64,
    /// Time-independent forcing `f`.
    pub forcing: SpectralField,
    pub noise: NoiseModel,
    pub dealias: DealiasRule,
    /// Keep the convection term (switching it off gives the linear model).
    pub nonlinear: bool,
    /// Record observables every this many steps.
    pub observe_every: usize,
    /// Store `(v, z)` snapshots every this many steps (0: never).
    pub snapshot_every: usize,
    /// Sobolev exponent of the `norm_Hdelta` observable.
    pub delta: f64,
    pub panel: Vec<ObservableSpec>,
    /// Initial velocity `v(0)`; `z(0) = 0`, so `u(0) = v(0)`.
    pub initial: SpectralField,
}

impl SolverConfig {
    /// Defaults: `ν = γ = 1`, `dt = 0.01`, `T = 1`, no noise, no forcing,
    /// zero initial state, two-thirds dealiasing, and `m = 64` in 3-d.
    pub fn new(grid: Grid) -> Self {
        let g = 0.5;
        Self {
            grid,
            nu: 1.0,
            gamma: 1.0,
            alpha: 0.0,
            mollifier: if grid.dim() == 3 { Mollifier::Gaussian(64.0) } else { Mollifier::Off },
            dt: 0.01,
            t_end: 1.0,
            forcing: SpectralField::zeros(grid),
            noise: NoiseModel::silent(g),
            dealias: DealiasRule::TwoThirds,
            nonlinear: true,
            observe_every: 1,
            snapshot_every: 0,
            delta: (1.0 - g) / 6.0,
            panel: ObservableSpec::default_panel(),
            initial: SpectralField::zeros(grid),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {x}")))
            }
        };
        positive("nu", self.nu)?;
        positive("gamma", self.gamma)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if !(self.alpha >= 0.0) {
            return Err(invalid("alpha", format!("must be non-negative, got {}", self.alpha)));
        }
        if self.grid.dim() == 3 && !self.mollifier.is_finite() {
            return Err(invalid(
                "mollifier.m",
                "d=3 requires a finite mollification parameter m (uniqueness holds only for the mollified system)",
            ));
        }
        if self.observe_every == 0 {
            return Err(invalid("observe_every", "must be at least 1"));
        }
        if self.dt > self.t_end {
            return Err(invalid("dt", "time step exceeds the horizon"));
        }
        for (name, field) in [("forcing", &self.forcing), ("initial", &self.initial)] {
            if *field.grid() != self.grid {
                return Err(Error::GridMismatch {
                    left: self.grid.to_string(),
                    right: format!("{name}: {}", field.grid()),
                });
            }
            if !field.is_divergence_free() {
                return Err(invalid(name, "field must be divergence-free"));
            }
        }
        for obs in &self.panel {
            obs.validate()?;
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round().max(1.0) as u64
    }

    /// `dt (ν k_max² + γ)` with `k_max = 2π n / (2L)`.
    pub fn stiffness(&self) -> f64 {
        let kmax = std::f64::consts::PI * self.grid.n() as f64 / self.grid.length();
        self.dt * (self.nu * kmax * kmax + self.gamma)
    }

    /// Damping rate of the stochastic convolution.
    pub fn convolution_damping(&self) -> f64 {
        self.gamma + self.alpha
    }
}

/// Divergence-free random initial state with `‖v‖_H = l2_norm`.
pub fn random_initial(grid: &Grid, seed: u64, l2_norm: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_field(
        grid,
        &mut rng,
        &FieldSpectrum {
            l2_norm: Some(l2_norm),
            ..FieldSpectrum::default()
        },
    )
}

/// Scalar observables at one recorded time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Record {
    pub time: f64,
    /// `‖v‖_H`
    pub norm_h: f64,
    /// `‖v‖_{L⁴}`
    pub norm_l4: f64,
    /// `‖v‖_{H^δ}`
    pub norm_hdelta: f64,
    /// `‖∇u‖_{L²}`
    pub grad_u_l2: f64,
    /// `‖z‖_{L⁴}`
    pub z_l4: f64,
    /// Discrete energy-balance defect of the step ending here (0 at `t = 0`).
    pub energy_residual: f64,
    /// `‖u‖_H`
    pub norm_u_h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub v: SpectralField,
    pub z: SpectralField,
}

/// Run provenance carried alongside the series.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub grid: Grid,
    pub seed: u64,
    pub member: u64,
    pub dt: f64,
    pub steps: u64,
    pub stiffness: f64,
    /// Sobolev exponent of the recorded `norm_hdelta`.
    pub delta: f64,
    pub panel: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub records: Vec<Record>,
    /// `panel[i][j]`: observable `j` of the configured panel at record `i`.
    pub panel: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn series(&self, f: impl Fn(&Record) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn panel_series(&self, j: usize) -> Vec<f64> {
        self.panel.iter().map(|row| row[j]).collect()
    }

    pub fn end_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.time)
    }
}

/// Terms of the discrete energy balance for one `u`-step:
/// `(‖u₁‖² − ‖u₀‖²)/(2dt) + ν‖∇u₁‖² + γ‖u₁‖² = −⟨B(v₀,v₀), u₁⟩ + ⟨f + αζ₀, u₁⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBalance {
    pub rate: f64,
    pub dissipation: f64,
    pub damping: f64,
    pub convection: f64,
    pub forcing: f64,
}

impl EnergyBalance {
    /// LHS − RHS. For backward Euler this equals `−‖u₁ − u₀‖²/(2dt)`.
    pub fn residual(&self) -> f64 {
        (self.rate + self.dissipation + self.damping) - (self.convection + self.forcing)
    }

    /// Largest term in absolute value.
    pub fn scale(&self) -> f64 {
        [self.rate, self.dissipation, self.damping, self.convection, self.forcing]
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Precomputed per-grid state shared by every step of a run.
pub struct Stepper<'a> {
    config: &'a SolverConfig,
    noise: GridNoise,
    implicit: Vec<f64>,
}

/// Output of one `u`-step.
pub struct UStep {
    pub u: SpectralField,
    /// Explicit drift `f + αζ − B_m(v,v)` used for the step.
    pub drive: SpectralField,
    pub convection: SpectralField,
}

impl<'a> Stepper<'a> {
    pub fn new(config: &'a SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid;
        let implicit = (0..grid.len())
            .map(|f| 1.0 / (1.0 + config.dt * (config.nu * grid.k_squared(f) + config.gamma)))
            .collect();
        Ok(Self {
            config,
            noise: config.noise.on_grid(&grid),
            implicit,
        })
    }

    pub fn noise(&self) -> &GridNoise {
        &self.noise
    }

    /// `u ← (u + dt[f + αζ − B_m(v,v)]) / (1 + dt(ν|k|² + γ))`.
    pub fn u_step(&self, u: &SpectralField, v: &SpectralField, z: &SpectralField, use_alpha_feed: bool) -> Result<UStep> {
        let c = self.config;
        let convection = if c.nonlinear {
            bilinear_bm(c.mollifier, v, v, c.dealias)?
        } else {
            SpectralField::zeros(c.grid)
        };
        let mut drive = c.forcing.clone();
        if use_alpha_feed && c.alpha > 0.0 {
            drive.axpy(c.alpha, z);
        }
        drive.axpy(-1.0, &convection);
        let mut next = u.clone();
        next.axpy(c.dt, &drive);
        next.scale_modes(|f| self.implicit[f]);
        Ok(UStep {
            u: next,
            drive,
            convection,
        })
    }

    pub fn z_step(&self, v: &SpectralField, z: &SpectralField, xi: &WienerIncrement) -> Result<SpectralField> {
        let c = self.config;
        self.noise.ou_step(v, z, c.nu, c.convolution_damping(), xi)
    }

    pub fn energy_balance(&self, u0: &SpectralField, step: &UStep) -> Result<EnergyBalance> {
        let c = self.config;
        let u1 = &step.u;
        let e0 = sobolev_norm(0.0, u0).powi(2);
        let e1 = sobolev_norm(0.0, u1).powi(2);
        let convection = -inner_product(&step.convection, u1)?;
        let total = inner_product(&step.drive, u1)?;
        Ok(EnergyBalance {
            rate: (e1 - e0) / (2.0 * c.dt),
            dissipation: c.nu * grad_l2_norm(u1).powi(2),
            damping: c.gamma * e1,
            convection,
            forcing: total - convection,
        })
    }
}

/// Single `u`-step with a fresh [`Stepper`].
pub fn u_step(
    u: &SpectralField,
    v: &SpectralField,
    z: &SpectralField,
    config: &SolverConfig,
    use_alpha_feed: bool,
) -> Result<SpectralField> {
    Ok(Stepper::new(config)?.u_step(u, v, z, use_alpha_feed)?.u)
}

fn observe(
    config: &SolverConfig,
    time: f64,
    u: &SpectralField,
    v: &SpectralField,
    z: &SpectralField,
    residual: f64,
) -> Result<(Record, Vec<f64>)> {
    let record = Record {
        time,
        norm_h: sobolev_norm(0.0, v),
        norm_l4: lp_norm(4.0, v)?,
        norm_hdelta: sobolev_norm(config.delta, v),
        grad_u_l2: grad_l2_norm(u),
        z_l4: lp_norm(4.0, z)?,
        energy_residual: residual,
        norm_u_h: sobolev_norm(0.0, u),
    };
    let panel = config.panel.iter().map(|o| o.evaluate(v)).collect::<Result<Vec<_>>>()?;
    Ok((record, panel))
}

/// Run from `config.initial` as ensemble member 0.
pub fn simulate(config: &SolverConfig) -> Result<Trajectory> {
    simulate_member(config, &config.initial, 0)
}

/// Run one ensemble member: increments come from the stream
/// `(config.noise.seed, member)`, so members are independent of scheduling.
pub fn simulate_member(config: &SolverConfig, initial: &SpectralField, member: u64) -> Result<Trajectory> {
    let stepper = Stepper::new(config)?;
    initial.ensure_same_grid(&config.forcing)?;
    let stream = NoiseStream::new(config.noise.seed, member);
    let steps = config.steps();
    let grid = config.grid;
    let alpha_feed = config.alpha > 0.0;

    let mut u = initial.clone();
    u.zero_nyquist();
    let mut z = SpectralField::zeros(grid);
    let mut v = u.clone();

    let mut records = Vec::new();
    let mut panel = Vec::new();
    let mut snapshots = Vec::new();
    let (r, p) = observe(config, 0.0, &u, &v, &z, 0.0)?;
    records.push(r);
    panel.push(p);
    if config.snapshot_every > 0 {
        snapshots.push(Snapshot {
            time: 0.0,
            v: v.clone(),
            z: z.clone(),
        });
    }

    for step in 0..steps {
        let xi = if config.noise.is_silent() {
            None
        } else {
            Some(stream.increment(&grid, config.dt, step)?)
        };
        let z_next = match &xi {
            Some(xi) => stepper.z_step(&v, &z, xi)?,
            None => z.map_modes(|f| {
                (-(config.nu * grid.k_squared(f) + config.convolution_damping()) * config.dt).exp()
            }),
        };
        let out = stepper.u_step(&u, &v, &z, alpha_feed)?;
        if !out.u.is_finite() {
            return Err(Error::BlowUp {
                step: step as usize,
                field: "u",
            });
        }
        if !z_next.is_finite() {
            return Err(Error::BlowUp {
                step: step as usize,
                field: "z",
            });
        }
        let n = step + 1;
        let record_now = n % config.observe_every as u64 == 0 || n == steps;
        let residual = if record_now {
            stepper.energy_balance(&u, &out)?.residual()
        } else {
            0.0
        };
        u = out.u;
        z = z_next;
        v = &z + &u;
        let time = n as f64 * config.dt;
        if record_now {
            let (r, p) = observe(config, time, &u, &v, &z, residual)?;
            records.push(r);
            panel.push(p);
        }
        if config.snapshot_every > 0 && n % config.snapshot_every as u64 == 0 {
            snapshots.push(Snapshot {
                time,
                v: v.clone(),
                z: z.clone(),
            });
        }
    }

    Ok(Trajectory {
        records,
        panel,
        snapshots,
        meta: TrajectoryMeta {
            grid,
            seed: config.noise.seed,
            member,
            dt: config.dt,
            steps,
            stiffness: config.stiffness(),
            delta: config.delta,
            panel: config.panel.iter().map(|o| o.name()).collect(),
        },
    })
}

/// Run members `0..members` on a pool of `workers` threads. The result is
/// ordered by member and does not depend on `workers`.
pub fn simulate_ensemble(
    config: &SolverConfig,
    initial: impl Fn(u64) -> SpectralField + Sync,
    members: u64,
    workers: usize,
) -> Result<Vec<Trajectory>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    pool.install(|| {
        (0..members)
            .into_par_iter()
            .map(|m| simulate_member(config, &initial(m), m))
            .collect()
    })
}

/// Mean over steps of `|energy residual|`, the per-step energy defect.
pub fn mean_abs_residual(traj: &Trajectory) -> f64 {
    let r: Vec<f64> = traj.records[1..].iter().map(|r| r.energy_residual.abs()).collect();
    crate::stats::mean(&r)
}

/// Weighted distance series of a twin run.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionSeries {
    pub times: Vec<f64>,
    /// `‖V(t)‖²_{H^{-g}}`
    pub distance: Vec<f64>,
    /// `σ̂(t)`
    pub sigma: Vec<f64>,
    /// `log(e^{-∫σ̂} ‖V‖²_{H^{-g}})`
    pub log_weighted: Vec<f64>,
    /// `e^{-∫σ̂} ‖V‖²_{H^{-g}}`
    pub weighted: Vec<f64>,
    pub chain_constant: f64,
    pub m_hat: f64,
    pub lipschitz: f64,
    /// Largest step-to-step increase of `weighted`, relative to its initial value.
    pub max_relative_increase: f64,
    /// `v` paths of the two members coincide bitwise.
    pub identical_paths: bool,
}

impl ContractionSeries {
    pub fn is_non_increasing(&self, tolerance: f64) -> bool {
        self.max_relative_increase <= tolerance
    }
}

/// Largest observed constant `C` in
/// `|⟨B_m(V,v) + B_m(ṽ,V), J^{-2g} V⟩| ≤ C (‖v‖+‖ṽ‖) ‖V‖_{H^{-g}}^{(1-g)/2} ‖V‖_{H^{1-g}}^{(3+g)/2}`
/// over random triples.
pub fn calibrate_chain_constant(config: &SolverConfig, samples: usize, seed: u64) -> Result<f64> {
    let g = config.noise.g;
    let grid = config.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        // alternate rough and smooth spectra for the difference field
        let slope = if i % 2 == 0 { None } else { Some(grid.dim() as f64 / 2.0) };
        let v = random_field(&grid, &mut rng, &FieldSpectrum::default());
        let vt = random_field(&grid, &mut rng, &FieldSpectrum::default());
        let big_v = random_field(
            &grid,
            &mut rng,
            &FieldSpectrum {
                slope,
                ..FieldSpectrum::default()
            },
        );
        let tri = trilinear(config, &big_v, &v, &vt)?;
        let denom = (sobolev_norm(0.0, &v) + sobolev_norm(0.0, &vt))
            * sobolev_norm(-g, &big_v).powf((1.0 - g) / 2.0)
            * sobolev_norm(1.0 - g, &big_v).powf((3.0 + g) / 2.0);
        if denom > 0.0 {
            worst = worst.max(tri / denom);
        }
    }
    Ok(worst)
}

fn trilinear(config: &SolverConfig, big_v: &SpectralField, v: &SpectralField, vt: &SpectralField) -> Result<f64> {
    let g = config.noise.g;
    let mut b = bilinear_bm(config.mollifier, big_v, v, config.dealias)?;
    b.axpy(1.0, &bilinear_bm(config.mollifier, vt, big_v, config.dealias)?);
    let w = crate::spectral::apply_js(-2.0 * g, big_v);
    Ok(inner_product(&b, &w)?.abs())
}

/// Young's-inequality constant turning the chain bound into
/// `c ‖V‖²_{H^{1-g}} + M̂ (‖v‖+‖ṽ‖)^{4/(1-g)} ‖V‖²_{H^{-g}}` with
/// `c = min(ν, γ)/2`.
pub fn young_constant(chain: f64, g: f64, nu: f64, gamma: f64) -> f64 {
    let p = 4.0 / (3.0 + g);
    let q = 4.0 / (1.0 - g);
    let c = 0.5 * nu.min(gamma);
    chain.powf(q) / (q * (c * p).powf(q / p))
}

/// Twin runs with identical increments from `ic1` and `ic2`, returning the
/// weighted `H^{-g}` distance series. Requires additive noise so that the
/// martingale term vanishes pathwise.
pub fn twin_run_contraction(config: &SolverConfig, ic1: &SpectralField, ic2: &SpectralField) -> Result<ContractionSeries> {
    if !config.noise.psi.is_additive() && !config.noise.is_silent() {
        return Err(invalid(
            "noise.psi",
            "twin contraction requires additive noise; the martingale term does not vanish pathwise otherwise",
        ));
    }
    let g = config.noise.g;
    let chain = calibrate_chain_constant(config, 64, config.noise.seed ^ 0x7a11)?;
    let m_hat = young_constant(chain, g, config.nu, config.gamma);
    let lipschitz = config.noise.lipschitz_g(&config.grid);

    let mut cfg = config.clone();
    cfg.snapshot_every = 1;
    let a = simulate_member(&cfg, ic1, 0)?;
    let b = simulate_member(&cfg, ic2, 0)?;

    let times: Vec<f64> = a.snapshots.iter().map(|s| s.time).collect();
    let mut distance = Vec::with_capacity(times.len());
    let mut sigma = Vec::with_capacity(times.len());
    let mut identical = true;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        identical &= sa.v == sb.v;
        let diff = &sa.v - &sb.v;
        distance.push(sobolev_norm(-g, &diff).powi(2));
        let s = sobolev_norm(0.0, &sa.v) + sobolev_norm(0.0, &sb.v);
        sigma.push(lipschitz * lipschitz + 2.0 * m_hat * s.powf(4.0 / (1.0 - g)));
    }
    let mut log_weighted = Vec::with_capacity(times.len());
    let mut integral = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            integral += 0.5 * (times[i] - times[i - 1]) * (sigma[i] + sigma[i - 1]);
        }
        log_weighted.push(distance[i].ln() - integral);
    }
    let weighted: Vec<f64> = log_weighted.iter().map(|x| x.exp()).collect();
    let w0 = weighted[0];
    let max_relative_increase = if w0 > 0.0 {
        weighted.windows(2).map(|w| (w[1] - w[0]) / w0).fold(f64::NEG_INFINITY, f64::max).max(0.0)
    } else if weighted.iter().all(|&w| w == 0.0) {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ContractionSeries {
        times,
        distance,
        sigma,
        log_weighted,
        weighted,
        chain_constant: chain,
        m_hat,
        lipschitz,
        max_relative_increase,
        identical_paths: identical,
    })
}

/// Outcome of the Gronwall-envelope comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeReport {
    pub psi: f64,
    pub phi: f64,
    /// `sup_t ‖u(t)‖²_H`
    pub sup_u2: f64,
    /// `log(Ψ e^Φ)`
    pub log_energy_bound: f64,
    /// `∫_0^T ‖∇u‖²_{L²} dt`
    pub grad_budget: f64,
    /// `log(Ψ + ΦΨe^Φ)`
    pub log_gradient_bound: f64,
    pub energy_holds: bool,
    pub gradient_holds: bool,
}

impl EnvelopeReport {
    pub fn holds(&self) -> bool {
        self.energy_holds && self.gradient_holds
    }
}

/// Compare the realized `u`-path with
/// `Ψ = ‖x‖² + C₅∫‖z‖⁴_{L⁴} + C₅ T ‖f‖²_{H^{-1}}`, `Φ = C₆∫‖z‖⁸_{L⁴}`:
/// `sup ‖u‖² ≤ Ψe^Φ` and `∫‖∇u‖² ≤ Ψ + ΦΨe^Φ`. Comparisons are made in
/// log space so that large `Φ` does not overflow.
pub fn gronwall_envelope_check(traj: &Trajectory, forcing: &SpectralField, c5: f64, c6: f64) -> Result<EnvelopeReport> {
    if traj.records.len() < 2 {
        return Err(Error::InsufficientData("envelope needs at least two records".into()));
    }
    let t = traj.times();
    let z4: Vec<f64> = traj.series(|r| r.z_l4.powi(4));
    let z8: Vec<f64> = z4.iter().map(|x| x * x).collect();
    if z4.iter().any(|x| !x.is_finite()) {
        return Err(Error::InsufficientData("z observables missing or non-finite".into()));
    }
    let horizon = traj.end_time();
    let x2 = traj.records[0].norm_u_h.powi(2);
    let f2 = sobolev_norm(-1.0, forcing).powi(2);
    let psi = x2 + c5 * trapezoid(&t, &z4) + c5 * horizon * f2;
    let phi = c6 * trapezoid(&t, &z8);
    let sup_u2 = traj.records.iter().map(|r| r.norm_u_h.powi(2)).fold(0.0, f64::max);
    let grad: Vec<f64> = traj.series(|r| r.grad_u_l2.powi(2));
    let grad_budget = trapezoid(&t, &grad);
    let log_energy_bound = psi.ln() + phi;
    // log(Ψ + ΦΨe^Φ) = log Ψ + log(1 + Φ e^Φ)
    let log_gradient_bound = psi.ln() + log1p_phi_exp(phi);
    Ok(EnvelopeReport {
        psi,
        phi,
        sup_u2,
        log_energy_bound,
        grad_budget,
        log_gradient_bound,
        energy_holds: sup_u2.ln() <= log_energy_bound + 1e-12,
        gradient_holds: grad_budget == 0.0 || grad_budget.ln() <= log_gradient_bound + 1e-12,
    })
}

fn log1p_phi_exp(phi: f64) -> f64 {
    if phi <= 0.0 {
        return 0.0;
    }
    if phi > 30.0 {
        phi + phi.ln() + (1.0 + (-phi).exp() / phi).ln()
    } else {
        (phi * phi.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Saturation;
    use crate::nonlinearity::bilinear_b;
    use num_complex::Complex64;

    fn base(dim: usize, n: usize) -> SolverConfig {
        let grid = Grid::periodic(dim, n).unwrap();
        let mut c = SolverConfig::new(grid);
        c.panel = vec![];
        c
    }

    #[test]
    fn config_validation() {
        let mut c = base(3, 8);
        c.mollifier = Mollifier::Off;
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("d=3"), "{err}");
        let mut c = base(2, 8);
        c.gamma = 0.0;
        assert!(c.validate().is_err());
        let mut c = base(2, 8);
        c.observe_every = 0;
        assert!(c.validate().is_err());
        assert!(base(2, 8).validate().is_ok());
        assert!(base(2, 8).stiffness() > 0.0);
    }

    #[test]
    fn linear_decay_per_mode() {
        let mut c = base(2, 8);
        c.nonlinear = false;
        let lattice = [1, 2, 0];
        let u0 = SpectralField::single_mode(
            c.grid,
            lattice,
            [Complex64::new(-2.0, 0.0), Complex64::new(1.0, 0.0), Complex64::default()],
        );
        let z = SpectralField::zeros(c.grid);
        let u1 = u_step(&u0, &u0, &z, &c, false).unwrap();
        let factor = 1.0 / (1.0 + c.dt * (5.0 + 1.0));
        assert!((&u1 - &(factor * &u0)).max_abs() < 1e-15);
    }

    #[test]
    fn steady_forcing_fixed_point() {
        let mut c = base(2, 8);
        c.nonlinear = false;
        let lattice = [1, 1, 0];
        c.forcing = SpectralField::single_mode(
            c.grid,
            lattice,
            [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::default()],
        );
        let lambda = 2.0 + 1.0;
        c.t_end = 10.0 / lambda + c.dt;
        c.observe_every = 1000;
        c.snapshot_every = c.steps() as usize;
        let traj = simulate(&c).unwrap();
        let u = &traj.snapshots.last().unwrap().v;
        let target = (1.0 / lambda) * &c.forcing;
        let err = sobolev_norm(0.0, &(u - &target)) / sobolev_norm(0.0, &target);
        assert!(err < 0.01, "{err}");
    }

    #[test]
    fn full_step_matches_dense_assembly() {
        let mut c = base(2, 8);
        c.alpha = 2.0;
        c.forcing = random_initial(&c.grid, 5, 0.3);
        let u = random_initial(&c.grid, 1, 1.0);
        let z = random_initial(&c.grid, 2, 0.5);
        let v = &u + &z;
        let got = u_step(&u, &v, &z, &c, true).unwrap();
        let b = bilinear_b(&v, &v, c.dealias).unwrap();
        let mut expect = SpectralField::zeros(c.grid);
        for f in 0..c.grid.len() {
            let lam = c.nu * c.grid.k_squared(f) + c.gamma;
            let (mu, mf, mz, mb) = (u.mode(f), c.forcing.mode(f), z.mode(f), b.mode(f));
            let mut m = [Complex64::default(); 3];
            for i in 0..2 {
                m[i] = (mu[i] + c.dt * (mf[i] + c.alpha * mz[i] - mb[i])) / (1.0 + c.dt * lam);
            }
            expect.set_mode(f, m);
        }
        expect.zero_nyquist();
        assert!((&got - &expect).max_abs() < 1e-14);
        assert!(got.is_divergence_free());
    }

    #[test]
    fn residual_equals_increment_defect() {
        let mut c = base(2, 16);
        c.forcing = random_initial(&c.grid, 9, 0.5);
        let stepper = Stepper::new(&c).unwrap();
        let u = random_initial(&c.grid, 3, 2.0);
        let out = stepper.u_step(&u, &u, &SpectralField::zeros(c.grid), false).unwrap();
        let bal = stepper.energy_balance(&u, &out).unwrap();
        let du = sobolev_norm(0.0, &(&out.u - &u)).powi(2);
        assert!((bal.residual() + du / (2.0 * c.dt)).abs() < 1e-9 * bal.scale());
        assert!(bal.residual().abs() <= 0.05 * bal.scale());
    }

    #[test]
    fn deterministic_and_decaying_without_noise() {
        let mut c = base(2, 16);
        c.initial = random_initial(&c.grid, 4, 3.0);
        c.t_end = 2.0;
        let a = simulate(&c).unwrap();
        let b = simulate(&c).unwrap();
        assert_eq!(a, b);
        let h0 = a.records[0].norm_h;
        for r in &a.records {
            assert!(r.norm_h <= 1.02 * (-c.gamma * r.time).exp() * h0);
        }
    }

    #[test]
    fn seeded_noise_is_reproducible_and_divergence_free() {
        let mut c = base(2, 16);
        c.noise = NoiseModel::new(0.5, 0.5, NoiseModel::default_r(2, 0.5), Saturation::Tanh, 3).unwrap();
        c.initial = random_initial(&c.grid, 4, 1.0);
        c.snapshot_every = 10;
        c.panel = ObservableSpec::default_panel();
        let a = simulate_member(&c, &c.initial, 2).unwrap();
        let b = simulate_member(&c, &c.initial, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_member(&c, &c.initial, 3).unwrap());
        for s in &a.snapshots {
            assert!(s.v.max_divergence_ratio() < 1e-10);
        }
        assert_eq!(a.panel[0].len(), 4);
    }

    #[test]
    fn ensemble_independent_of_workers() {
        let mut c = base(2, 8);
        c.t_end = 0.2;
        c.noise = NoiseModel::new(0.5, 1.0, 1.5, Saturation::One, 1).unwrap();
        let one = simulate_ensemble(&c, |_| SpectralField::zeros(c.grid), 4, 1).unwrap();
        let three = simulate_ensemble(&c, |_| SpectralField::zeros(c.grid), 4, 3).unwrap();
        assert_eq!(one, three);
        assert_eq!(one[2].meta.member, 2);
    }

    #[test]
    fn blow_up_reports_step() {
        let mut c = base(2, 16);
        c.dt = 0.5;
        c.t_end = 200.0;
        c.nu = 1e-6;
        c.gamma = 1e-6;
        c.dealias = DealiasRule::None;
        c.initial = random_initial(&c.grid, 1, 1e4);
        match simulate(&c) {
            Err(Error::BlowUp { step, .. }) => assert!(step < 400),
            other => panic!("expected blow-up, got {:?}", other.map(|t| t.records.len())),
        }
    }

    #[test]
    fn twin_identical_and_quadratic_scaling() {
        let mut c = base(3, 8);
        c.t_end = 0.2;
        c.noise = NoiseModel::new(0.5, 0.5, NoiseModel::default_r(3, 0.5), Saturation::One, 2).unwrap();
        let x = random_initial(&c.grid, 1, 1.0);
        let same = twin_run_contraction(&c, &x, &x).unwrap();
        assert!(same.identical_paths);
        assert!(same.distance.iter().all(|&d| d == 0.0));

        let eps = random_initial(&c.grid, 2, 1e-3);
        let one = twin_run_contraction(&c, &x, &(&x + &eps)).unwrap();
        let two = twin_run_contraction(&c, &x, &(&x + &(2.0 * &eps))).unwrap();
        assert!((two.weighted[0] / one.weighted[0] - 4.0).abs() < 1e-9);
        assert!(one.is_non_increasing(1e-3));
        assert!(one.weighted.last().unwrap() <= &one.weighted[0]);

        let mut m = c.clone();
        m.noise.psi = Saturation::Tanh;
        assert!(twin_run_contraction(&m, &x, &x).is_err());
    }

    #[test]
    fn young_constant_balances() {
        // c x^p/… : check x·y ≤ c x^p + M y^q numerically on a grid
        let (g, nu, gamma) = (0.4, 1.0, 0.5);
        let m = young_constant(1.0, g, nu, gamma);
        let p = 4.0 / (3.0 + g);
        let q = 4.0 / (1.0 - g);
        let c = 0.5 * nu.min(gamma);
        for i in 1..50 {
            for j in 1..50 {
                let (x, y) = (i as f64 * 0.1, j as f64 * 0.1);
                assert!(x * y <= c * x.powf(p) + m * y.powf(q) + 1e-12);
            }
        }
    }

    #[test]
    fn envelope_trivial_without_noise_and_detects_spike() {
        let mut c = base(2, 8);
        c.initial = random_initial(&c.grid, 1, 1.0);
        c.forcing = random_initial(&c.grid, 2, 0.5);
        let mut traj = simulate(&c).unwrap();
        let rep = gronwall_envelope_check(&traj, &c.forcing, 10.0, 10.0).unwrap();
        assert_eq!(rep.phi, 0.0);
        assert!(rep.holds());
        traj.records[5].norm_u_h = 1e3 * rep.psi.sqrt();
        let rep = gronwall_envelope_check(&traj, &c.forcing, 10.0, 10.0).unwrap();
        assert!(!rep.energy_holds);
    }
}
