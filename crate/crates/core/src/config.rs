//! Run configuration: flat `section.key = value` text with `#` comments.
//!
//! Values are layered file < environment < command line. Environment
//! variables are named `BLENDSEM_` followed by the upper-cased key, with
//! the dot kept or replaced by `_` (`BLENDSEM_TIME_T_END`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flux::FluxKind;
use crate::indicator::IndicatorSettings;
use crate::limiter::LimiterSettings;
use crate::physics::Primitive;
use crate::spatial::VolumeForm;

pub const ENV_PREFIX: &str = "BLENDSEM_";

/// Every key the configuration understands.
pub const KNOWN_KEYS: &[&str] = &[
    "run.experiment",
    "run.seed",
    "mesh.elements_x",
    "mesh.elements_y",
    "mesh.x0",
    "mesh.x1",
    "mesh.y0",
    "mesh.y1",
    "solver.degree",
    "gas.gamma",
    "flux.surface",
    "flux.volume_form",
    "indicator.enabled",
    "indicator.variable",
    "indicator.alpha_min",
    "indicator.alpha_max",
    "indicator.per_stage",
    "indicator.propagation_sweep",
    "limiter.enabled",
    "limiter.beta",
    "limiter.newton_max_iter",
    "limiter.newton_tol",
    "time.cfl",
    "time.t_end",
    "time.max_steps",
    "time.dt_halving_max",
    "output.sample_interval",
    "output.snapshot_interval",
    "output.dir",
    "custom.rho",
    "custom.vx",
    "custom.vy",
    "custom.p",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    KelvinHelmholtz,
    Sedov,
    Custom,
}

impl Experiment {
    fn default_domain(self) -> [f64; 4] {
        match self {
            Experiment::KelvinHelmholtz => [-1.0, 1.0, -1.0, 1.0],
            Experiment::Sedov => [-1.5, 1.5, -1.5, 1.5],
            Experiment::Custom => [0.0, 1.0, 0.0, 1.0],
        }
    }

    fn default_t_end(self) -> f64 {
        match self {
            Experiment::KelvinHelmholtz => 25.0,
            Experiment::Sedov => 20.0,
            Experiment::Custom => 1.0,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::KelvinHelmholtz => "khi",
            Experiment::Sedov => "sedov",
            Experiment::Custom => "custom",
        })
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "khi" | "kelvin_helmholtz" => Ok(Experiment::KelvinHelmholtz),
            "sedov" => Ok(Experiment::Sedov),
            "custom" => Ok(Experiment::Custom),
            other => Err(format!("unknown experiment `{other}` (expected khi, sedov or custom)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshConfig {
    pub elements_x: usize,
    pub elements_y: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorConfig {
    pub enabled: bool,
    pub settings: IndicatorSettings<f64>,
    /// Re-evaluate at every stage instead of once per step.
    pub per_stage: bool,
    pub propagation_sweep: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub max_steps: usize,
    pub dt_halving_max: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub sample_interval: f64,
    /// `None` disables snapshots.
    pub snapshot_interval: Option<f64>,
    pub dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Reserved; the physics is deterministic.
    pub seed: u64,
    pub mesh: MeshConfig,
    pub degree: usize,
    pub gamma: f64,
    pub surface_flux: FluxKind,
    pub volume_form: VolumeForm,
    pub indicator: IndicatorConfig,
    pub limiter: LimiterSettings<f64>,
    pub time: TimeConfig,
    pub output: OutputConfig,
    /// Uniform initial state of the custom experiment.
    pub custom: Primitive<f64>,
}

/// Key-value pairs before interpretation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected `section.key = value`, got `{line}`"),
                )
            })?;
            raw.set(key.trim(), value.trim())?;
        }
        Ok(raw)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "expected `section.key=value`"))?;
        self.set(key.trim(), value.trim())
    }

    /// Applies `BLENDSEM_*` variables from `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut lookup = BTreeMap::new();
        for key in KNOWN_KEYS {
            let upper = key.to_ascii_uppercase();
            lookup.insert(format!("{ENV_PREFIX}{upper}"), *key);
            lookup.insert(format!("{ENV_PREFIX}{}", upper.replace('.', "_")), *key);
        }
        for (name, value) in vars {
            if let Some(key) = lookup.get(name.as_ref()) {
                self.set(key, value.as_ref().trim())?;
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| Error::config(key, format!("invalid value `{v}`: {e}"))),
        }
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key).map(str::to_ascii_lowercase).as_deref() {
            None => Ok(default),
            Some("true" | "yes" | "on" | "1") => Ok(true),
            Some("false" | "no" | "off" | "0") => Ok(false),
            Some(v) => Err(Error::config(key, format!("invalid boolean `{v}`"))),
        }
    }
}

impl RunConfig {
    /// Interprets and validates raw values, filling in defaults.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let experiment: Experiment = raw.parsed("run.experiment", Experiment::KelvinHelmholtz)?;
        let [x0, x1, y0, y1] = experiment.default_domain();
        let limiter_default = LimiterSettings::<f64>::default();
        let indicator_default = IndicatorSettings::<f64>::default();

        let variable = raw.get("indicator.variable").unwrap_or("pressure");
        if variable != "pressure" {
            return Err(Error::config(
                "indicator.variable",
                format!("unsupported variable `{variable}`"),
            ));
        }
        let snapshot_interval: f64 = raw.parsed("output.snapshot_interval", 0.0)?;

        let cfg = RunConfig {
            experiment,
            seed: raw.parsed("run.seed", 0)?,
            mesh: MeshConfig {
                elements_x: raw.parsed("mesh.elements_x", 16)?,
                elements_y: raw.parsed("mesh.elements_y", 16)?,
                x_range: (raw.parsed("mesh.x0", x0)?, raw.parsed("mesh.x1", x1)?),
                y_range: (raw.parsed("mesh.y0", y0)?, raw.parsed("mesh.y1", y1)?),
            },
            degree: raw.parsed("solver.degree", 3)?,
            gamma: raw.parsed("gas.gamma", 1.4)?,
            surface_flux: raw.parsed("flux.surface", FluxKind::Rusanov)?,
            volume_form: raw.parsed("flux.volume_form", VolumeForm::Standard)?,
            indicator: IndicatorConfig {
                enabled: raw.flag("indicator.enabled", false)?,
                settings: IndicatorSettings {
                    alpha_min: raw.parsed("indicator.alpha_min", indicator_default.alpha_min)?,
                    alpha_max: raw.parsed("indicator.alpha_max", indicator_default.alpha_max)?,
                },
                per_stage: raw.flag("indicator.per_stage", false)?,
                propagation_sweep: raw.flag("indicator.propagation_sweep", false)?,
            },
            limiter: LimiterSettings {
                enabled: raw.flag("limiter.enabled", true)?,
                beta: raw.parsed("limiter.beta", limiter_default.beta)?,
                newton_max_iter: raw.parsed("limiter.newton_max_iter", limiter_default.newton_max_iter)?,
                newton_tol: raw.parsed("limiter.newton_tol", limiter_default.newton_tol)?,
            },
            time: TimeConfig {
                cfl: raw.parsed("time.cfl", 0.5)?,
                t_end: raw.parsed("time.t_end", experiment.default_t_end())?,
                max_steps: raw.parsed("time.max_steps", usize::MAX)?,
                dt_halving_max: raw.parsed("time.dt_halving_max", 5)?,
            },
            output: OutputConfig {
                sample_interval: raw.parsed("output.sample_interval", 0.01)?,
                snapshot_interval: (snapshot_interval > 0.0).then_some(snapshot_interval),
                dir: PathBuf::from(raw.get("output.dir").unwrap_or("output")),
            },
            custom: Primitive {
                rho: raw.parsed("custom.rho", 1.0)?,
                v1: raw.parsed("custom.vx", 0.0)?,
                v2: raw.parsed("custom.vy", 0.0)?,
                p: raw.parsed("custom.p", 1.0)?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `text`, then applies environment variables and overrides.
    pub fn load<I, K, V>(text: &str, env: I, overrides: &[String]) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut raw = RawConfig::parse(text)?;
        raw.apply_env(env)?;
        for o in overrides {
            raw.apply_assignment(o)?;
        }
        Self::from_raw(&raw)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, msg: &str| if ok { Ok(()) } else { Err(Error::config(key, msg)) };
        check(self.mesh.elements_x >= 2, "mesh.elements_x", "need at least 2 elements")?;
        check(self.mesh.elements_y >= 2, "mesh.elements_y", "need at least 2 elements")?;
        check(
            self.mesh.x_range.1 > self.mesh.x_range.0,
            "mesh.x1",
            "must exceed mesh.x0",
        )?;
        check(
            self.mesh.y_range.1 > self.mesh.y_range.0,
            "mesh.y1",
            "must exceed mesh.y0",
        )?;
        check(self.degree >= 1, "solver.degree", "must be at least 1")?;
        check(self.gamma > 1.0, "gas.gamma", "must exceed 1")?;
        check(
            self.surface_flux.is_surface_flux(),
            "flux.surface",
            "not a dissipative surface flux",
        )?;
        let ind = &self.indicator.settings;
        check(
            (0.0..=1.0).contains(&ind.alpha_min),
            "indicator.alpha_min",
            "must lie in [0, 1]",
        )?;
        check(
            ind.alpha_max >= ind.alpha_min && ind.alpha_max <= 1.0,
            "indicator.alpha_max",
            "must lie in [alpha_min, 1]",
        )?;
        check(
            self.limiter.beta > 0.0 && self.limiter.beta <= 1.0,
            "limiter.beta",
            "must lie in (0, 1]",
        )?;
        check(
            self.limiter.newton_max_iter >= 1,
            "limiter.newton_max_iter",
            "must be at least 1",
        )?;
        check(self.limiter.newton_tol > 0.0, "limiter.newton_tol", "must be positive")?;
        check(
            self.time.cfl > 0.0 && self.time.cfl.is_finite(),
            "time.cfl",
            "must be positive",
        )?;
        check(
            self.time.t_end >= 0.0 && self.time.t_end.is_finite(),
            "time.t_end",
            "must be non-negative",
        )?;
        check(
            self.output.sample_interval > 0.0,
            "output.sample_interval",
            "must be positive",
        )?;
        let c = &self.custom;
        check(c.rho > 0.0, "custom.rho", "must be positive")?;
        check(c.p > 0.0, "custom.p", "must be positive")?;
        Ok(())
    }
}
