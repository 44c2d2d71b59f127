//! Experiment configuration: TOML text in, fully resolved record out.
//!
//! Every key is optional; missing keys take the apparatus defaults. Unknown
//! keys are rejected with their dotted path.

use serde::{Deserialize, Serialize};

use crate::constants::OMEGA_EARTH;
use crate::coupling::FormFactorModel;
use crate::error::{Error, Result};
use crate::interferometer::{Model, PairMode};
use crate::noise::NoiseParams;
use crate::superfluid::{DriveParams, Geometry, SuperfluidParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingParams {
    /// Either a fixed number or `"line"` for the line-mass model.
    pub form_factor: FormFactorModel,
    pub mode: PairMode,
    /// Upper end of the compensation-field search, V/m.
    pub e_max: f64,
}

impl Default for CouplingParams {
    fn default() -> Self {
        Self {
            form_factor: FormFactorModel::default(),
            mode: PairMode::NearestOnly,
            e_max: 1e7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotationParams {
    /// Site latitude, degrees. The loops sit in a vertical plane oriented to
    /// pick up the horizontal component `Ω_E cos(latitude)`.
    pub latitude_deg: f64,
    /// Explicit perpendicular rotation rate, rad/s; overrides the latitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_perp: Option<f64>,
}

impl Default for RotationParams {
    fn default() -> Self {
        Self {
            latitude_deg: 45.4,
            omega_perp: None,
        }
    }
}

impl RotationParams {
    pub fn omega_perp(&self) -> f64 {
        self.omega_perp
            .unwrap_or_else(|| OMEGA_EARTH * self.latitude_deg.to_radians().cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunParams {
    pub model: Model,
    pub heater_on: bool,
    pub seed: u64,
    /// Simulated time, s.
    pub duration: f64,
    /// Samples per second.
    pub sample_rate: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            model: Model::Qg,
            heater_on: true,
            seed: 1,
            duration: 3600.0,
            sample_rate: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisParams {
    pub n_harmonics: usize,
    pub null_runs: usize,
    /// Below this p-value the data are QG-consistent.
    pub alpha: f64,
    /// Above this p-value the data are CG-consistent.
    pub cg_threshold: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            n_harmonics: 3,
            null_runs: 100,
            alpha: 0.01,
            cg_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub superfluid: SuperfluidParams,
    pub geometry: Geometry,
    pub drive: DriveParams,
    pub coupling: CouplingParams,
    pub noise: NoiseParams,
    pub rotation: RotationParams,
    pub run: RunParams,
    pub analysis: AnalysisParams,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.superfluid.validate("superfluid")?;
        self.geometry.validate("geometry")?;
        self.drive.validate("drive", &self.geometry)?;
        self.noise.validate("noise")?;
        if let FormFactorModel::Fixed(a) = self.coupling.form_factor {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::invalid("coupling.form_factor", "must be > 0"));
            }
        }
        if !(self.coupling.e_max > 0.0) {
            return Err(Error::invalid("coupling.e_max", "must be > 0"));
        }
        if !self.rotation.latitude_deg.is_finite() || self.rotation.latitude_deg.abs() > 90.0 {
            return Err(Error::invalid(
                "rotation.latitude_deg",
                "must lie in [-90, 90]",
            ));
        }
        if let Some(w) = self.rotation.omega_perp {
            if !w.is_finite() {
                return Err(Error::invalid("rotation.omega_perp", "must be finite"));
            }
        }
        if !(self.run.duration > 0.0) {
            return Err(Error::invalid("run.duration", "must be > 0"));
        }
        if !(self.run.sample_rate > 0.0) {
            return Err(Error::invalid("run.sample_rate", "must be > 0"));
        }
        if self.run.seed > i64::MAX as u64 {
            return Err(Error::invalid("run.seed", "must fit in 63 bits"));
        }
        let a = &self.analysis;
        if a.n_harmonics == 0 {
            return Err(Error::invalid("analysis.n_harmonics", "must be >= 1"));
        }
        if a.null_runs < 100 {
            return Err(Error::invalid("analysis.null_runs", "must be >= 100"));
        }
        if !(a.alpha > 0.0 && a.alpha <= a.cg_threshold && a.cg_threshold < 1.0) {
            return Err(Error::invalid(
                "analysis.alpha",
                "need 0 < alpha <= cg_threshold < 1",
            ));
        }
        Ok(())
    }

    /// Serialize to TOML; `parse_config` of the result gives back `self`.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
        path: "<root>".into(),
        message: e.to_string(),
    })?;
    let config: ExperimentConfig =
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    config.validate()?;
    Ok(config)
}

/// Copy of `base` with the dotted `path` set to `value`.
///
/// The parent table must exist and the key must be a known field; integer
/// fields receive the value rounded.
pub fn with_parameter(base: &ExperimentConfig, path: &str, value: f64) -> Result<ExperimentConfig> {
    let mut root = toml::Table::try_from(base).map_err(|e| Error::Config {
        path: path.into(),
        message: e.to_string(),
    })?;
    let (parents, leaf) = match path.rsplit_once('.') {
        Some((p, l)) => (p.split('.').collect::<Vec<_>>(), l),
        None => (Vec::new(), path),
    };
    let mut table = &mut root;
    for key in parents {
        table = match table.get_mut(key) {
            Some(toml::Value::Table(t)) => t,
            _ => {
                return Err(Error::Config {
                    path: path.into(),
                    message: format!("no such section `{key}`"),
                })
            }
        };
    }
    let new_value = match table.get(leaf) {
        Some(toml::Value::Integer(_)) => toml::Value::Integer(value.round() as i64),
        Some(toml::Value::Table(_))
        | Some(toml::Value::Boolean(_))
        | Some(toml::Value::String(_)) => {
            return Err(Error::Config {
                path: path.into(),
                message: "not a numeric parameter".into(),
            })
        }
        _ => toml::Value::Float(value),
    };
    table.insert(leaf.to_string(), new_value);
    let text = toml::to_string(&root).map_err(|e| Error::Config {
        path: path.into(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}
