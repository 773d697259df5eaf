//! Scenario configuration: presets, a flat key-value text format, and the
//! translation into simulation inputs.

use std::path::PathBuf;

use faer::Mat;

use crate::dynamics::{BathMode, CouplingKind, HamiltonianSpec, uniform_spectrum};
use crate::states::{PureMixedParams, WeightVector};
use crate::{C64, Error, Result};

/// How the sector weight vectors are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightsKind {
    Uniform,
    /// Linearly increasing weights, a fixed non-uniform choice that keeps the
    /// nearest separable state distinct from the equimixed one.
    Ramp,
    Explicit(Vec<Vec<f64>>),
}

/// Everything needed to run one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub sector_dims: Vec<usize>,
    /// Real nonnegative amplitudes; their squares are the measurement
    /// statistics and must sum to one.
    pub amplitudes: Vec<f64>,
    pub weights: WeightsKind,
    pub n_e: usize,
    pub sector_energies: Vec<f64>,
    pub h_e_range: (f64, f64),
    /// Every entry of the system Hamiltonian is this constant.
    pub h_s_all: f64,
    pub coupling: CouplingKind,
    pub lambda: f64,
    pub seed: u64,
    pub env_seed: u64,
    pub bath: BathMode,
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
    /// Output path prefix; `.csv` and `.json` are appended.
    pub out: PathBuf,
}

pub const PRESET_NAMES: &[&str] = &["fig1", "fig2", "fig3", "fig4a", "fig4b", "fig5"];

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl ScenarioConfig {
    /// The shared parameter block of all presets: two-state system, sectors
    /// of 7 and 8 microstates, 60 environment states spread over [190, 410],
    /// sector energies 200 and 400, equal amplitudes, a tiny all-equal system
    /// Hamiltonian, and fixed seeds.
    fn base(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            sector_dims: vec![7, 8],
            amplitudes: vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            weights: WeightsKind::Uniform,
            n_e: 60,
            sector_energies: vec![200.0, 400.0],
            h_e_range: (190.0, 410.0),
            h_s_all: 0.5e-6,
            coupling: CouplingKind::RandomHermitian,
            lambda: 0.005,
            seed: 101,
            env_seed: 202,
            bath: BathMode::Finite,
            dt: 2.5,
            n_steps: 300,
            record_every: 1,
            out: PathBuf::from(scenario),
        }
    }

    /// Built-in scenarios.
    ///
    /// - `fig1`: random coupling, finite bath — decoherence and relaxation.
    /// - `fig2`: random coupling, bath renewed every step — exponential decay.
    /// - `fig3`: random coupling, finite bath, ramp weights, long horizon —
    ///   relative entropies against the separable and equimixed states.
    /// - `fig4a`: as `fig3` but watched through the Bures distances.
    /// - `fig4b`: non-demolition coupling at λ = 1e-4, ramp weights — decay
    ///   towards the separable state with frozen populations.
    /// - `fig5`: as `fig1`, tracking the minimum partial-transpose eigenvalue.
    pub fn preset(name: &str) -> Result<Self> {
        let mut cfg = Self::base(name);
        match name {
            "fig1" => {}
            "fig2" => {
                cfg.bath = BathMode::Renewed { every: 1 };
                cfg.dt = 20.0;
                cfg.n_steps = 400;
                cfg.record_every = 2;
            }
            "fig3" => {
                cfg.weights = WeightsKind::Ramp;
                cfg.dt = 2.5;
                cfg.n_steps = 4000;
                cfg.record_every = 20;
            }
            "fig4a" => {
                cfg.weights = WeightsKind::Ramp;
                cfg.dt = 2.5;
                cfg.n_steps = 4000;
                cfg.record_every = 20;
            }
            "fig4b" => {
                cfg.weights = WeightsKind::Ramp;
                cfg.coupling = CouplingKind::NonDemolition;
                cfg.lambda = 1e-4;
                cfg.dt = 0.5;
                cfg.n_steps = 600;
                cfg.record_every = 3;
            }
            "fig5" => {}
            _ => {
                return Err(Error::Config(format!(
                    "unknown scenario '{name}' (expected one of {PRESET_NAMES:?} or 'custom')"
                )));
            }
        }
        Ok(cfg)
    }

    /// Starting point for `custom` scenarios and bare config files: the fig1
    /// parameter block.
    pub fn default_custom() -> Self {
        Self::base("custom")
    }

    /// Parse the flat `key = value` format; `#` starts a comment. A
    /// `scenario` key naming a preset makes that preset the base, every other
    /// key overrides one field.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }

        let scenario = pairs
            .iter()
            .find(|(k, _)| k == "scenario")
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| "custom".to_string());
        let mut cfg = if scenario == "custom" {
            Self::default_custom()
        } else {
            Self::preset(&scenario)?
        };
        cfg.out = PathBuf::from(&scenario);

        let mut explicit: Vec<(usize, Vec<f64>)> = Vec::new();
        for (key, value) in &pairs {
            match key.as_str() {
                "scenario" => {}
                "sector_dims" => cfg.sector_dims = parse_list(value, key)?,
                "amplitudes" => cfg.amplitudes = parse_list(value, key)?,
                "weights" => {
                    cfg.weights = match value.as_str() {
                        "uniform" => WeightsKind::Uniform,
                        "ramp" => WeightsKind::Ramp,
                        "explicit" => WeightsKind::Explicit(Vec::new()),
                        other => {
                            return Err(Error::Config(format!(
                                "weights must be uniform, ramp or explicit, got '{other}'"
                            )));
                        }
                    }
                }
                _ if key.starts_with("weights_") => {
                    let idx: usize = key["weights_".len()..].parse().map_err(|_| {
                        Error::Config(format!("bad sector index in '{key}'"))
                    })?;
                    if idx == 0 {
                        return Err(Error::Config("sector indices start at 1".into()));
                    }
                    explicit.push((idx - 1, parse_list(value, key)?));
                }
                "n_e" => cfg.n_e = parse_scalar(value, key)?,
                "sector_energies" => cfg.sector_energies = parse_list(value, key)?,
                "h_e_range" => {
                    let r: Vec<f64> = parse_list(value, key)?;
                    if r.len() != 2 {
                        return Err(Error::Config("h_e_range needs exactly two values".into()));
                    }
                    cfg.h_e_range = (r[0], r[1]);
                }
                "h_s_all" => cfg.h_s_all = parse_scalar(value, key)?,
                "coupling" => {
                    cfg.coupling = match value.as_str() {
                        "random" => CouplingKind::RandomHermitian,
                        "nondemolition" => CouplingKind::NonDemolition,
                        other => {
                            return Err(Error::Config(format!(
                                "coupling must be random or nondemolition, got '{other}'"
                            )));
                        }
                    }
                }
                "lambda" => cfg.lambda = parse_scalar(value, key)?,
                "seed" => cfg.seed = parse_scalar(value, key)?,
                "env_seed" => cfg.env_seed = parse_scalar(value, key)?,
                "bath" => cfg.bath = parse_bath(value)?,
                "dt" => cfg.dt = parse_scalar(value, key)?,
                "n_steps" => cfg.n_steps = parse_scalar(value, key)?,
                "record_every" => cfg.record_every = parse_scalar(value, key)?,
                "out" => cfg.out = PathBuf::from(value),
                other => {
                    return Err(Error::Config(format!("unknown key '{other}'")));
                }
            }
        }
        if !explicit.is_empty() {
            explicit.sort_by_key(|(i, _)| *i);
            let mut lists = vec![Vec::new(); cfg.sector_dims.len()];
            for (i, w) in explicit {
                if i >= lists.len() {
                    return Err(Error::Config(format!(
                        "weights_{} exceeds the {} sectors",
                        i + 1,
                        lists.len()
                    )));
                }
                lists[i] = w;
            }
            cfg.weights = WeightsKind::Explicit(lists);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serialize to the same flat text format `from_text` reads.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut push = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        push("scenario", self.scenario.clone());
        push("sector_dims", join(&self.sector_dims));
        push("amplitudes", join(&self.amplitudes));
        match &self.weights {
            WeightsKind::Uniform => push("weights", "uniform".into()),
            WeightsKind::Ramp => push("weights", "ramp".into()),
            WeightsKind::Explicit(lists) => {
                push("weights", "explicit".into());
                for (i, w) in lists.iter().enumerate() {
                    push(&format!("weights_{}", i + 1), join(w));
                }
            }
        }
        push("n_e", self.n_e.to_string());
        push("sector_energies", join(&self.sector_energies));
        push("h_e_range", format!("{},{}", self.h_e_range.0, self.h_e_range.1));
        push("h_s_all", format!("{}", self.h_s_all));
        push(
            "coupling",
            match self.coupling {
                CouplingKind::RandomHermitian => "random".into(),
                CouplingKind::NonDemolition => "nondemolition".into(),
            },
        );
        push("lambda", format!("{}", self.lambda));
        push("seed", self.seed.to_string());
        push("env_seed", self.env_seed.to_string());
        push(
            "bath",
            match self.bath {
                BathMode::Finite => "finite".into(),
                BathMode::Renewed { every } => format!("renewed:{every}"),
            },
        );
        push("dt", format!("{}", self.dt));
        push("n_steps", self.n_steps.to_string());
        push("record_every", self.record_every.to_string());
        push("out", self.out.display().to_string());
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.sector_dims.len() < 2 {
            return Err(Error::Config("need at least two pointer sectors".into()));
        }
        if self.amplitudes.len() != self.sector_dims.len() {
            return Err(Error::Config(format!(
                "{} amplitudes for {} sectors",
                self.amplitudes.len(),
                self.sector_dims.len()
            )));
        }
        if self.sector_energies.len() != self.sector_dims.len() {
            return Err(Error::Config(format!(
                "{} sector energies for {} sectors",
                self.sector_energies.len(),
                self.sector_dims.len()
            )));
        }
        if let WeightsKind::Explicit(lists) = &self.weights {
            if lists.len() != self.sector_dims.len()
                || lists
                    .iter()
                    .zip(&self.sector_dims)
                    .any(|(w, &n)| w.len() != n)
            {
                return Err(Error::Config(
                    "explicit weights must match the sector dimensions".into(),
                ));
            }
        }
        if self.n_e == 0 {
            return Err(Error::Config("environment dimension must be positive".into()));
        }
        if self.h_e_range.0 > self.h_e_range.1 {
            return Err(Error::Config("h_e_range must be ordered".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::Config("lambda must be nonnegative".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if let BathMode::Renewed { every: 0 } = self.bath {
            return Err(Error::Config("renewal interval must be at least 1".into()));
        }
        // amplitude normalization and weight validity surface here
        self.build_params().map(|_| ())
    }

    /// The initial S–A state parameters.
    pub fn build_params(&self) -> Result<PureMixedParams> {
        let amplitudes: Vec<C64> = self.amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect();
        let weights: Vec<WeightVector> = match &self.weights {
            WeightsKind::Uniform => self
                .sector_dims
                .iter()
                .map(|&n| WeightVector::uniform(n))
                .collect(),
            WeightsKind::Ramp => self
                .sector_dims
                .iter()
                .map(|&n| WeightVector::ramp(n))
                .collect(),
            WeightsKind::Explicit(lists) => lists
                .iter()
                .map(|w| WeightVector::new(w.clone()))
                .collect::<Result<_>>()?,
        };
        PureMixedParams::new(amplitudes, weights, self.n_e)
    }

    /// The Hamiltonian ingredients.
    pub fn hamiltonian_spec(&self) -> HamiltonianSpec {
        let d_s = self.sector_dims.len();
        HamiltonianSpec {
            h_s: Mat::from_fn(d_s, d_s, |_, _| C64::new(self.h_s_all, 0.0)),
            sector_energies: self.sector_energies.clone(),
            h_e_spectrum: uniform_spectrum(self.h_e_range.0, self.h_e_range.1, self.n_e),
            coupling: self.coupling,
            lambda: self.lambda,
            seed: self.seed,
        }
    }

    pub fn csv_path(&self) -> PathBuf {
        let mut p = self.out.as_os_str().to_owned();
        p.push(".csv");
        PathBuf::from(p)
    }

    pub fn json_path(&self) -> PathBuf {
        let mut p = self.out.as_os_str().to_owned();
        p.push(".json");
        PathBuf::from(p)
    }
}

fn parse_bath(value: &str) -> Result<BathMode> {
    if value == "finite" {
        return Ok(BathMode::Finite);
    }
    if let Some(rest) = value.strip_prefix("renewed:") {
        let every = rest
            .parse()
            .map_err(|_| Error::Config(format!("bad renewal interval '{rest}'")))?;
        return Ok(BathMode::Renewed { every });
    }
    Err(Error::Config(format!(
        "bath must be 'finite' or 'renewed:N', got '{value}'"
    )))
}

fn parse_scalar<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
}

fn parse_list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("bad entry '{s}' for '{key}'")))
        })
        .collect()
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
