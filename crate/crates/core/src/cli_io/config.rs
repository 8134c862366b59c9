//! Run configuration: a TOML document with dotted sections, every key
//! optional, unknown keys rejected. Resolution fills every default so the
//! copy written next to the outputs reproduces the run on its own.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::{ObservableSpec, WindowSplit, ZtNormParams};
use crate::integrator::{random_initial, SolverConfig};
use crate::noise::{NoiseModel, Saturation};
use crate::nonlinearity::{DealiasRule, Mollifier};
use crate::spectral::snapshot::read_snapshot;
use crate::spectral::Grid;

/// Largest run seed: TOML integers are signed 64-bit, and the initial and
/// forcing streams use the next two seeds.
pub const MAX_SEED: u64 = i64::MAX as u64 - 2;

fn config_error(key: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub d: usize,
    pub n: usize,
    /// Box side `L`; the default `2π` makes wavenumbers integers.
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            d: 2,
            n: 32,
            length: 2.0 * std::f64::consts::PI,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DealiasKey {
    TwoThirds,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub nu: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Mollification parameter; absent (or `inf`) means unmollified, which
    /// only 2-d accepts.
    pub m: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: DealiasKey,
    pub nonlinear: bool,
    pub observe_every: usize,
    /// `0` disables field snapshots.
    pub snapshot_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            nu: 1.0,
            gamma: 1.0,
            alpha: 0.0,
            m: None,
            dt: 0.01,
            t_end: 10.0,
            dealias: DealiasKey::TwoThirds,
            nonlinear: true,
            observe_every: 1,
            snapshot_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub g: f64,
    pub c0: f64,
    /// Amplitude decay; defaults to `d/2 + 1 - g`.
    pub r: Option<f64>,
    pub psi: Saturation,
    /// Defaults to the run seed.
    pub seed: Option<u64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            g: 0.5,
            c0: 1.0,
            r: None,
            psi: Saturation::One,
            seed: None,
        }
    }
}

/// A random divergence-free field of the given `‖·‖_H`, or a snapshot file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    pub l2: f64,
    pub seed: Option<u64>,
    pub snapshot: Option<PathBuf>,
}

impl Default for FieldSection {
    fn default() -> Self {
        Self {
            l2: 0.0,
            seed: None,
            snapshot: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ZtSection {
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub panel: Vec<ObservableSpec>,
    /// Increasing KB horizons; default `[T/4, T/2, T]`.
    pub horizons: Option<Vec<f64>>,
    /// Exceedance radii for `‖v‖_H`.
    pub radii: Vec<f64>,
    /// Default `max(10/γ, T/2)`, or `T/2` when that leaves nothing.
    pub burn_in: Option<f64>,
    pub stationarity_level: f64,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            panel: ObservableSpec::default_panel(),
            horizons: None,
            radii: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            burn_in: None,
            stationarity_level: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZetaSection {
    pub alphas: Vec<f64>,
    pub t_probe: f64,
    pub samples: usize,
}

impl Default for ZetaSection {
    fn default() -> Self {
        Self {
            alphas: vec![0.0, 1.0, 4.0, 16.0, 64.0, 256.0],
            t_probe: 3.0,
            samples: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollLimitSection {
    pub ms: Vec<f64>,
}

impl Default for MollLimitSection {
    fn default() -> Self {
        Self {
            ms: vec![1.0, 4.0, 16.0, 64.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Ensemble size.
    pub members: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub noise: NoiseSection,
    pub initial: FieldSection,
    pub forcing: FieldSection,
    pub zt: ZtSection,
    pub estimators: EstimatorSection,
    pub zeta: ZetaSection,
    pub moll_limit: MollLimitSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            members: 8,
            workers: None,
            out: None,
            grid: GridSection::default(),
            solver: SolverSection::default(),
            noise: NoiseSection::default(),
            initial: FieldSection::default(),
            forcing: FieldSection::default(),
            zt: ZtSection::default(),
            estimators: EstimatorSection::default(),
            zeta: ZetaSection::default(),
            moll_limit: MollLimitSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error(parse_error_key(&e), e.message().trim()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Materialize every default and validate; the result is what gets
    /// written next to the outputs.
    pub fn resolve(mut self) -> Result<Self> {
        if self.seed > MAX_SEED {
            return Err(config_error("seed", format!("must not exceed {MAX_SEED}")));
        }
        let dim = self.grid.d;
        Grid::new(dim, self.grid.n, self.grid.length).map_err(|e| config_error("grid", e.to_string()))?;
        if self.solver.m == Some(f64::INFINITY) {
            self.solver.m = None;
        }
        if dim == 3 && self.solver.m.is_none() {
            return Err(config_error(
                "solver.m",
                "d=3 requires a finite mollification parameter m (uniqueness holds only for the mollified system)",
            ));
        }
        let g = self.noise.g;
        self.noise.r.get_or_insert(NoiseModel::default_r(dim, g));
        self.noise.seed.get_or_insert(self.seed);
        self.initial.seed.get_or_insert(self.seed.wrapping_add(1));
        self.forcing.seed.get_or_insert(self.seed.wrapping_add(2));
        let zt = ZtNormParams::default_for(dim, g);
        self.zt.beta.get_or_insert(zt.beta);
        self.zt.delta.get_or_insert(zt.delta);
        self.zt.p.get_or_insert(zt.p);
        let t = self.solver.t_end;
        self.estimators
            .horizons
            .get_or_insert_with(|| vec![t / 4.0, t / 2.0, t]);
        let gamma = self.solver.gamma;
        // short runs cannot afford 10/γ; fall back to the second half
        let burn_in = (10.0 / gamma).max(t / 2.0);
        self.estimators
            .burn_in
            .get_or_insert(if burn_in < t { burn_in } else { t / 2.0 });
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.members == 0 {
            return Err(config_error("members", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(config_error("workers", "must be at least 1"));
        }
        // the tightness-norm defaults derive from g, so g is checked first
        self.noise_model()?;
        self.zt_params()?;
        let horizons = self.estimators.horizons.as_deref().unwrap_or_default();
        if horizons.is_empty()
            || horizons.windows(2).any(|w| !(w[1] > w[0]))
            || !(horizons[0] > 0.0)
            || horizons[horizons.len() - 1] > self.solver.t_end * (1.0 + 1e-12)
        {
            return Err(config_error("estimators.horizons", "must be increasing within (0, t_end]"));
        }
        let burn_in = self.estimators.burn_in.unwrap_or(0.0);
        if !(0.0..self.solver.t_end).contains(&burn_in) {
            return Err(config_error("estimators.burn_in", "must lie in [0, t_end)"));
        }
        let radii = &self.estimators.radii;
        if radii.iter().any(|r| !(*r >= 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config_error("estimators.radii", "radii must be non-negative and increasing"));
        }
        if !(self.estimators.stationarity_level > 0.0 && self.estimators.stationarity_level < 1.0) {
            return Err(config_error("estimators.stationarity_level", "must lie in (0, 1)"));
        }
        self.solver_config()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.d, self.grid.n, self.grid.length).map_err(|e| config_error("grid", e.to_string()))
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let n = &self.noise;
        let r = n.r.unwrap_or(NoiseModel::default_r(self.grid.d, n.g));
        NoiseModel::new(n.g, n.c0, r, n.psi, n.seed.unwrap_or(self.seed)).map_err(|e| prefixed("noise", e))
    }

    pub fn zt_params(&self) -> Result<ZtNormParams> {
        let d = ZtNormParams::default_for(self.grid.d, self.noise.g);
        ZtNormParams::new(
            self.zt.beta.unwrap_or(d.beta),
            self.zt.delta.unwrap_or(d.delta),
            self.zt.p.unwrap_or(d.p),
            self.noise.g,
        )
        .map_err(|e| prefixed("zt", e))
    }

    pub fn window_split(&self) -> WindowSplit {
        let start = self.estimators.burn_in.unwrap_or(0.0) / self.solver.t_end;
        WindowSplit {
            start,
            middle: 0.5 * (1.0 + start),
        }
    }

    fn field(&self, section: &FieldSection, key: &str, grid: &Grid, default_seed: u64) -> Result<crate::spectral::SpectralField> {
        if let Some(path) = &section.snapshot {
            let file = std::fs::File::open(path)
                .map_err(|e| config_error(format!("{key}.snapshot"), format!("{}: {e}", path.display())))?;
            let (_, field) = read_snapshot(std::io::BufReader::new(file))
                .map_err(|e| config_error(format!("{key}.snapshot"), e.to_string()))?;
            if field.grid() != grid {
                return Err(config_error(
                    format!("{key}.snapshot"),
                    format!("snapshot grid {} differs from the configured {grid}", field.grid()),
                ));
            }
            return Ok(field);
        }
        if !(section.l2 >= 0.0 && section.l2.is_finite()) {
            return Err(config_error(format!("{key}.l2"), "must be non-negative"));
        }
        Ok(random_initial(grid, section.seed.unwrap_or(default_seed), section.l2))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let grid = self.grid()?;
        let s = &self.solver;
        let mut c = SolverConfig::new(grid);
        c.nu = s.nu;
        c.gamma = s.gamma;
        c.alpha = s.alpha;
        c.mollifier = match s.m {
            None => Mollifier::Off,
            Some(m) => Mollifier::new(m).map_err(|e| config_error("solver.m", e.to_string()))?,
        };
        c.dt = s.dt;
        c.t_end = s.t_end;
        c.dealias = match s.dealias {
            DealiasKey::TwoThirds => DealiasRule::TwoThirds,
            DealiasKey::None => DealiasRule::None,
        };
        c.nonlinear = s.nonlinear;
        c.observe_every = s.observe_every;
        c.snapshot_every = s.snapshot_every;
        c.noise = self.noise_model()?;
        c.delta = self.zt_params()?.delta;
        c.panel = self.estimators.panel.clone();
        c.initial = self.field(&self.initial, "initial", &grid, self.seed.wrapping_add(1))?;
        c.forcing = self.field(&self.forcing, "forcing", &grid, self.seed.wrapping_add(2))?;
        c.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } if name == "mollifier.m" => config_error("solver.m", reason),
            Error::InvalidParameter { name, reason } if name.starts_with("observable") => {
                config_error(format!("estimators.panel ({name})"), reason)
            }
            Error::InvalidParameter { name, reason } if matches!(name, "forcing" | "initial") => {
                config_error(name, reason)
            }
            Error::InvalidParameter { name, reason } => config_error(format!("solver.{name}"), reason),
            other => other,
        })?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    /// SHA-256 of the serialized configuration, hex encoded.
    pub fn digest(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn prefixed(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            let key = name.rsplit('.').next().unwrap_or(name);
            config_error(format!("{section}.{key}"), reason)
        }
        other => other,
    }
}

/// Best-effort dotted key for a TOML error: the unknown field name when
/// serde reports one, otherwise `<config>`.
fn parse_error_key(e: &toml::de::Error) -> String {
    let msg = e.message();
    msg.split('`')
        .nth(1)
        .filter(|_| msg.starts_with("unknown field") || msg.starts_with("unknown variant"))
        .map_or_else(|| "<config>".to_string(), str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_resolves_to_defaults() {
        let c = RunConfig::from_toml("").unwrap().resolve().unwrap();
        assert_eq!(c.grid.d, 2);
        assert_eq!(c.noise.r, Some(1.5));
        assert_eq!(c.estimators.horizons, Some(vec![2.5, 5.0, 10.0]));
        assert_eq!(c.estimators.burn_in, Some(5.0));
        let again = RunConfig::from_toml(&c.to_toml()).unwrap().resolve().unwrap();
        assert_eq!(again, c);
        assert_eq!(again.digest(), c.digest());
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = RunConfig::from_toml("[solver]\nnu = 1.0\nviscosity = 2.0\n").unwrap_err();
        assert!(e.to_string().contains("viscosity"), "{e}");
        let e = RunConfig::from_toml("colour = 1\n").unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
    }

    #[test]
    fn three_d_needs_mollifier() {
        let e = RunConfig::from_toml("[grid]\nd = 3\nn = 8\n").unwrap().resolve().unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("solver.m") && msg.contains("d=3"), "{msg}");
        let e = RunConfig::from_toml("[grid]\nd = 3\nn = 8\n[solver]\nm = inf\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(e.to_string().contains("d=3"));
        assert!(RunConfig::from_toml("[grid]\nd = 3\nn = 8\n[solver]\nm = 16.0\n")
            .unwrap()
            .resolve()
            .is_ok());
    }

    #[test]
    fn bad_values_name_their_key() {
        let cases = [
            ("[solver]\ndt = -1.0\n", "solver.dt"),
            ("[noise]\ng = 1.5\n", "noise.g"),
            ("[estimators]\nhorizons = [2.0, 1.0]\n", "estimators.horizons"),
            ("members = 0\n", "members"),
            ("[grid]\nn = 7\n", "grid"),
        ];
        for (text, key) in cases {
            let e = RunConfig::from_toml(text).and_then(RunConfig::resolve).unwrap_err();
            assert!(e.to_string().contains(&format!("`{key}`")), "{text}: {e}");
        }
    }

    #[test]
    fn seeds_must_fit_a_toml_integer() {
        let mut c = RunConfig::default();
        c.seed = u64::MAX;
        assert!(c.resolve().unwrap_err().to_string().contains("`seed`"));
        let mut c = RunConfig::default();
        c.seed = MAX_SEED;
        let resolved = c.resolve().unwrap();
        assert_eq!(RunConfig::from_toml(&resolved.to_toml()).unwrap(), resolved);
    }

    #[test]
    fn seed_flows_into_defaults() {
        let c = RunConfig::from_toml("seed = 42\n").unwrap().resolve().unwrap();
        assert_eq!(c.noise.seed, Some(42));
        assert_eq!(c.solver_config().unwrap().noise.seed, 42);
    }
}
