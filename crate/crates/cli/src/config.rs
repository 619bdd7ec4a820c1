use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ringsqz::dynamics::IntegratorOptions;
use ringsqz::sweep::{Axis, OptimizerSettings, SearchBounds, SweepSpec};
use ringsqz::{Knobs, PhysicalConfig};

use crate::CliError;

/// Device block as written in the file; names follow the usual symbols.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub ring_radius: f64,
    pub n_eff: f64,
    pub signal_wavelength: f64,
    pub chi2_eff: f64,
    #[serde(rename = "A_eff")]
    pub a_eff: f64,
    #[serde(rename = "Q_sI")]
    pub q_si: f64,
    #[serde(rename = "Q_pI")]
    pub q_pi: f64,
    /// Defaults to `n_eff`.
    #[serde(default)]
    pub group_index: Option<f64>,
}

impl From<PhysicalSection> for PhysicalConfig {
    fn from(p: PhysicalSection) -> Self {
        PhysicalConfig {
            ring_radius: p.ring_radius,
            n_eff: p.n_eff,
            signal_wavelength: p.signal_wavelength,
            chi2_eff: p.chi2_eff,
            a_eff: p.a_eff,
            q_si: p.q_si,
            q_pi: p.q_pi,
            group_index: p.group_index.unwrap_or(p.n_eff),
        }
    }
}

impl From<PhysicalConfig> for PhysicalSection {
    fn from(c: PhysicalConfig) -> Self {
        PhysicalSection {
            ring_radius: c.ring_radius,
            n_eff: c.n_eff,
            signal_wavelength: c.signal_wavelength,
            chi2_eff: c.chi2_eff,
            a_eff: c.a_eff,
            q_si: c.q_si,
            q_pi: c.q_pi,
            group_index: Some(c.group_index),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default)]
    pub t_start_override: Option<f64>,
    #[serde(default)]
    pub t_end_override: Option<f64>,
    #[serde(default)]
    pub output_step: Option<f64>,
}

fn default_rel_tol() -> f64 {
    IntegratorOptions::default().rel_tol
}

fn default_abs_tol() -> f64 {
    IntegratorOptions::default().abs_tol
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { rel_tol: default_rel_tol(), abs_tol: default_abs_tol(), t_start_override: None, t_end_override: None, output_step: None }
    }
}

impl IntegratorSection {
    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_start: self.t_start_override,
            t_end: self.t_end_override,
            output_step: self.output_step,
            ..IntegratorOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: default_directory(), formats: default_formats() }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis1: Axis,
    pub axis2: Axis,
    #[serde(default)]
    pub target_squeezing_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    #[serde(default = "default_target")]
    pub target_db: f64,
    #[serde(default)]
    pub bounds: SearchBounds,
}

fn default_target() -> f64 {
    10.0
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self { target_db: default_target(), bounds: SearchBounds::default() }
    }
}

/// Whole configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physical: PhysicalSection,
    #[serde(default)]
    pub knobs: Option<Knobs>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub optimize: Option<OptimizeSection>,
}

impl RunConfig {
    /// Reference device with no knobs; used when no file is given.
    pub fn reference() -> Self {
        Self {
            physical: PhysicalConfig::default().into(),
            knobs: None,
            integrator: IntegratorSection::default(),
            output: OutputSection::default(),
            sweep: None,
            optimize: None,
        }
    }

    pub fn physical(&self) -> PhysicalConfig {
        self.physical.into()
    }

    pub fn knobs(&self) -> Result<Knobs, CliError> {
        self.knobs.ok_or_else(|| CliError::Config("knobs: section required for this command".into()))
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, CliError> {
        let s = self.sweep.ok_or_else(|| CliError::Config("sweep: section required for this command".into()))?;
        Ok(SweepSpec { axis1: s.axis1, axis2: s.axis2, fixed: self.knobs()?, target_squeezing_db: s.target_squeezing_db })
    }

    pub fn optimizer(&self) -> OptimizerSettings {
        let o = self.optimize.unwrap_or_default();
        OptimizerSettings { target_db: o.target_db, bounds: o.bounds, ..OptimizerSettings::default() }
    }

    /// Checks everything that can be checked without running a simulation.
    pub fn validate(&self) -> Result<(), CliError> {
        self.physical().validate().map_err(|e| CliError::Config(e.to_string()))?;
        let i = &self.integrator;
        if !(i.rel_tol > 0.0 && i.abs_tol > 0.0) {
            return Err(CliError::Config("integrator.rel_tol and integrator.abs_tol must be positive".into()));
        }
        if let Some(k) = self.knobs {
            ringsqz::derive_run(&self.physical(), k).map_err(|e| CliError::Config(format!("knobs: {e}")))?;
        }
        if self.sweep.is_some() {
            self.sweep_spec()?.validate().map_err(|e| CliError::Config(format!("sweep: {e}")))?;
        }
        Ok(())
    }
}

/// Parses TOML text, reporting the dotted path of the offending key.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::new(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.message().to_string();
        // "missing field `x`" is reported against the parent table
        let located = match message.strip_prefix("missing field `").and_then(|m| m.strip_suffix('`')) {
            Some(field) if path == "." || path.is_empty() => field.to_string(),
            Some(field) => format!("{path}.{field}"),
            None => path,
        };
        CliError::Config(format!("{located}: {message}"))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}
