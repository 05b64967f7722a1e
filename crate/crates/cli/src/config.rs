//! Scenario configuration: a TOML file, dotted `--set` overrides, defaults.
//!
//! Overrides are applied to the parsed TOML table before deserialization, so
//! every source goes through the same typed parser and unknown keys are
//! rejected by name.

use std::path::{Path, PathBuf};

use mixflow::{EnsembleSpec, Geometry, InitLaw, PhaseLaw};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Pure,
    ShutterMixture,
    PhaseMixture,
    BareAverage,
    SingleSlit,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Pure => "pure",
            Scenario::ShutterMixture => "shutter_mixture",
            Scenario::PhaseMixture => "phase_mixture",
            Scenario::BareAverage => "bare_average",
            Scenario::SingleSlit => "single_slit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLawConfig {
    Uniform,
    Dirac(f64),
    /// Density samples on an even grid of `[0, 2 pi)`.
    Tabulated(Vec<f64>),
}

impl PhaseLawConfig {
    pub fn to_law(&self) -> Result<PhaseLaw, CliError> {
        match self {
            PhaseLawConfig::Uniform => Ok(PhaseLaw::Uniform),
            PhaseLawConfig::Dirac(d) => Ok(PhaseLaw::Dirac(*d)),
            PhaseLawConfig::Tabulated(v) => PhaseLaw::tabulated(v.clone())
                .map_err(|e| CliError::Config(format!("physics.phase_law: {e}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub hbar: f64,
    pub mass: f64,
    pub sigma0: f64,
    /// Slit separation; the packets sit at `+-d / 2`.
    pub d: f64,
    pub p_plus: f64,
    /// Relative phase of the pure state.
    pub delta: f64,
    /// Phase distribution of the phase-mixture scenario.
    pub phase_law: PhaseLawConfig,
    /// Quadrature nodes for phase-averaged fields.
    pub phase_nodes: usize,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            hbar: 1.0,
            mass: 0.5,
            sigma0: 0.5,
            d: 10.0,
            p_plus: 0.5,
            delta: 0.0,
            phase_law: PhaseLawConfig::Uniform,
            phase_nodes: mixflow::states::DEFAULT_PHASE_NODES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitConfig {
    Quantile,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Run {
    pub t_start: f64,
    pub t_end: f64,
    pub dt_out: f64,
    pub substeps: usize,
    pub n_per_slit: usize,
    pub init: InitConfig,
    pub seed: u64,
    pub n_realizations: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    /// Time of the intensity profile.
    pub intensity_time: f64,
    /// Times of the momentum profiles.
    pub profile_times: Vec<f64>,
}

impl Default for Run {
    fn default() -> Self {
        Run {
            t_start: 0.0,
            t_end: 3.0,
            dt_out: 0.01,
            substeps: 10,
            n_per_slit: 9,
            init: InitConfig::Quantile,
            seed: 0,
            n_realizations: mixflow::montecarlo::DEFAULT_REALIZATIONS,
            x_min: -15.0,
            x_max: 15.0,
            n_x: 601,
            intensity_time: 1.0,
            profile_times: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Product {
    Trajectories,
    Intensity,
    Momentum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub format: Format,
    pub path: PathBuf,
    pub products: Vec<Product>,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            format: Format::Csv,
            path: PathBuf::from("out"),
            products: vec![Product::Trajectories, Product::Intensity, Product::Momentum],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub physics: Physics,
    pub run: Run,
    pub output: Output,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: Scenario::ShutterMixture,
            physics: Physics::default(),
            run: Run::default(),
            output: Output::default(),
        }
    }
}

fn bad(field: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {why}"))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, format!("must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    /// Parses TOML text; an empty document gives the defaults.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        Self::from_table(table)
    }

    pub fn from_table(table: Table) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// File (if any), then `key=value` overrides, then validation.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?
                .parse::<Table>()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        Self::from_table(table)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.physics;
        positive("physics.hbar", p.hbar)?;
        positive("physics.mass", p.mass)?;
        positive("physics.sigma0", p.sigma0)?;
        positive("physics.d", p.d)?;
        if !(0.0..=1.0).contains(&p.p_plus) {
            return Err(bad(
                "physics.p_plus",
                format!("must lie in [0, 1], got {}", p.p_plus),
            ));
        }
        finite("physics.delta", p.delta)?;
        if p.phase_nodes < mixflow::states::MIN_PHASE_NODES {
            return Err(bad(
                "physics.phase_nodes",
                format!("must be at least {}", mixflow::states::MIN_PHASE_NODES),
            ));
        }
        match &p.phase_law {
            PhaseLawConfig::Dirac(d) => finite("physics.phase_law.dirac", *d)?,
            law => {
                law.to_law()?;
            }
        }

        let r = &self.run;
        finite("run.t_start", r.t_start)?;
        finite("run.t_end", r.t_end)?;
        if r.t_end <= r.t_start {
            return Err(bad(
                "run.t_end",
                format!("must exceed run.t_start = {}", r.t_start),
            ));
        }
        positive("run.dt_out", r.dt_out)?;
        if r.substeps < 1 {
            return Err(bad("run.substeps", "must be at least 1"));
        }
        if r.n_per_slit < 1 {
            return Err(bad("run.n_per_slit", "must be at least 1"));
        }
        if r.n_realizations < 1 {
            return Err(bad("run.n_realizations", "must be at least 1"));
        }
        finite("run.x_min", r.x_min)?;
        finite("run.x_max", r.x_max)?;
        if r.x_max <= r.x_min {
            return Err(bad(
                "run.x_max",
                format!("must exceed run.x_min = {}", r.x_min),
            ));
        }
        if r.n_x < 2 {
            return Err(bad("run.n_x", "must be at least 2"));
        }
        finite("run.intensity_time", r.intensity_time)?;
        for t in &r.profile_times {
            finite("run.profile_times", *t)?;
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry, CliError> {
        let p = &self.physics;
        Geometry::from_separation(p.hbar, p.mass, p.sigma0, p.d)
            .map_err(|e| CliError::Config(format!("physics: {e}")))
    }

    pub fn ensemble_spec(&self) -> EnsembleSpec {
        let r = &self.run;
        EnsembleSpec {
            n_per_slit: r.n_per_slit,
            seed: r.seed,
            t_start: r.t_start,
            t_end: r.t_end,
            dt_out: r.dt_out,
            substeps: r.substeps,
            init_law: match r.init {
                InitConfig::Quantile => InitLaw::Quantile,
                InitConfig::Gaussian => InitLaw::Gaussian,
            },
        }
    }

    pub fn x_grid(&self) -> Vec<f64> {
        let r = &self.run;
        let n = r.n_x - 1;
        (0..=n)
            .map(|i| r.x_min + (r.x_max - r.x_min) * i as f64 / n as f64)
            .collect()
    }
}

/// Parses the right-hand side of `key=value` as a TOML value, falling back to a
/// bare string so `--set scenario=pure` works without quotes.
fn parse_value(raw: &str) -> Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key v was just parsed"),
        Err(_) => Value::String(raw.trim().to_string()),
    }
}

/// Sets a dotted key such as `physics.delta=0.5` in `table`.
pub fn apply_override(table: &mut Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!(
            "override `{item}` has an empty key segment"
        )));
    }
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut node = table;
    for (depth, part) in path.iter().enumerate() {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = entry.as_table_mut().ok_or_else(|| {
            CliError::Config(format!("{} is not a section", parts[..=depth].join(".")))
        })?;
    }
    node.insert(last.to_string(), parse_value(raw));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(
            ScenarioConfig::from_toml("").unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn overrides_beat_file_values() {
        let mut t: Table = "[physics]\ndelta = 1.0\n".parse().unwrap();
        apply_override(&mut t, "physics.delta=2.5").unwrap();
        apply_override(&mut t, "scenario=pure").unwrap();
        apply_override(&mut t, "run.profile_times=[1.0, 2.0]").unwrap();
        let cfg = ScenarioConfig::from_table(t).unwrap();
        assert_eq!(cfg.physics.delta, 2.5);
        assert_eq!(cfg.scenario, Scenario::Pure);
        assert_eq!(cfg.run.profile_times, vec![1.0, 2.0]);
    }

    #[test]
    fn phase_law_forms() {
        let cfg = ScenarioConfig::from_toml("[physics]\nphase_law = { dirac = 0.25 }\n").unwrap();
        assert_eq!(cfg.physics.phase_law, PhaseLawConfig::Dirac(0.25));
        let cfg = ScenarioConfig::from_toml("[physics]\nphase_law = \"uniform\"\n").unwrap();
        assert_eq!(cfg.physics.phase_law, PhaseLawConfig::Uniform);
    }

    #[test]
    fn errors_name_the_field() {
        let e = ScenarioConfig::from_toml("[physics]\nsigma0 = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("physics.sigma0"), "{e}");
        let e = ScenarioConfig::from_toml("[physics]\np_plus = 1.5\n").unwrap_err();
        assert!(e.to_string().contains("physics.p_plus"), "{e}");
        let e = ScenarioConfig::from_toml("[run]\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = ScenarioConfig::from_toml("[run]\nt_end = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("run.t_end"), "{e}");
    }

    #[test]
    fn bad_override_shapes() {
        let mut t = Table::new();
        assert!(apply_override(&mut t, "physics").is_err());
        assert!(apply_override(&mut t, "physics..d=1").is_err());
        apply_override(&mut t, "scenario=pure").unwrap();
        assert!(apply_override(&mut t, "scenario.x=1").is_err());
    }
}
