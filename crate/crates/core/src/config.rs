//! Scenario configuration.
//!
//! The wire format is a JSON object. Every key is optional and falls back to
//! the reference scenario; unknown keys are rejected. Physical quantities
//! carry their unit in the key name.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelParams;
use crate::engine::ConvergenceParams;
use crate::geometry::{ClassProfile, CountModel, DeploymentParams, RadioParams, Region, VnMode};
use crate::policy::PolicyKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("invalid config value `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area_km2: f64,
    pub lte_density_per_km2: f64,
    pub bs_count: CountModel,
    pub mmw_density_grid_per_km2: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub vn_mode: VnMode,
    pub n_sim: usize,
    pub master_seed: u64,
    pub snr_threshold_db: f64,
    pub class_requirements_bps: [f64; 4],
    pub class_probabilities: [f64; 4],
    pub radio: RadioParams,
    pub channel: ChannelParams,
    pub convergence: ConvergenceParams,
    pub measurement_region_m: Region,
}

/// `{4, 8, ..., 80}` BS/km².
pub fn default_density_grid() -> Vec<f64> {
    (1..=20).map(|i| f64::from(4 * i)).collect()
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let classes = ClassProfile::default();
        Self {
            area_km2: 1.0,
            lte_density_per_km2: 4.0,
            bs_count: CountModel::Exact,
            mmw_density_grid_per_km2: default_density_grid(),
            policies: PolicyKind::ALL.to_vec(),
            vn_mode: VnMode::default(),
            n_sim: 2000,
            master_seed: 1,
            snr_threshold_db: -5.0,
            class_requirements_bps: classes.requirements_bps,
            class_probabilities: classes.probabilities,
            radio: RadioParams::default(),
            channel: ChannelParams::default(),
            convergence: ConvergenceParams::default(),
            measurement_region_m: Region::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses a JSON document. Blank input means all defaults.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let text = if text.trim().is_empty() { "{}" } else { text };
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
                key: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_reader(mut r: impl Read, origin: &Path) -> Result<Self, ConfigError> {
        let mut text = String::new();
        r.read_to_string(&mut text)
            .map_err(|source| ConfigError::Io {
                path: origin.to_path_buf(),
                source,
            })?;
        Self::from_json_str(&text)
    }

    /// Loads from a file, or from standard input when `path` is `-`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        if path.as_os_str() == "-" {
            return Self::from_reader(std::io::stdin().lock(), path);
        }
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(
                    key,
                    format!("must be finite and >= 0, got {v}"),
                ))
            }
        }
        fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(
                    key,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        }

        positive("area_km2", self.area_km2)?;
        non_negative("lte_density_per_km2", self.lte_density_per_km2)?;
        if self.mmw_density_grid_per_km2.is_empty() {
            return Err(ConfigError::invalid(
                "mmw_density_grid_per_km2",
                "grid is empty",
            ));
        }
        for (i, &d) in self.mmw_density_grid_per_km2.iter().enumerate() {
            non_negative(&format!("mmw_density_grid_per_km2[{i}]"), d)?;
        }
        if self.policies.is_empty() {
            return Err(ConfigError::invalid("policies", "no policy selected"));
        }
        if self.n_sim == 0 {
            return Err(ConfigError::invalid("n_sim", "must be at least 1"));
        }
        if !self.snr_threshold_db.is_finite() {
            return Err(ConfigError::invalid("snr_threshold_db", "must be finite"));
        }
        match self.vn_mode {
            VnMode::PerMmwBs { vehicles_per_bs } => {
                non_negative("vn_mode.vehicles_per_bs", vehicles_per_bs)?
            }
            VnMode::PerRealizedMmwBs { .. } | VnMode::Fixed { .. } => {}
        }
        for (i, &r) in self.class_requirements_bps.iter().enumerate() {
            non_negative(&format!("class_requirements_bps[{i}]"), r)?;
        }
        for (i, &p) in self.class_probabilities.iter().enumerate() {
            non_negative(&format!("class_probabilities[{i}]"), p)?;
        }
        let total: f64 = self.class_probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ConfigError::invalid(
                "class_probabilities",
                format!("must sum to 1, sum is {total}"),
            ));
        }

        let r = &self.radio;
        positive("radio.lte_bandwidth_hz", r.lte_bandwidth_hz)?;
        positive("radio.mmw_bandwidth_hz", r.mmw_bandwidth_hz)?;
        positive("radio.lte_carrier_hz", r.lte_carrier_hz)?;
        positive("radio.mmw_carrier_hz", r.mmw_carrier_hz)?;
        if r.bs_array_elements == 0 {
            return Err(ConfigError::invalid(
                "radio.bs_array_elements",
                "must be >= 1",
            ));
        }
        if r.vn_array_elements == 0 {
            return Err(ConfigError::invalid(
                "radio.vn_array_elements",
                "must be >= 1",
            ));
        }
        non_negative("radio.bs_height_m", r.bs_height_m)?;
        non_negative("radio.vn_height_m", r.vn_height_m)?;

        positive("channel.min_distance_m", self.channel.min_distance_m)?;
        if self.channel.shadow_fading {
            return Err(ConfigError::invalid(
                "channel.shadow_fading",
                "shadow fading is not supported",
            ));
        }

        if self.convergence.cap_multiplier == 0 {
            return Err(ConfigError::invalid(
                "convergence.cap_multiplier",
                "must be >= 1",
            ));
        }
        if self.convergence.no_change_window_multiplier == 0 {
            return Err(ConfigError::invalid(
                "convergence.no_change_window_multiplier",
                "must be >= 1",
            ));
        }

        let m = &self.measurement_region_m;
        if !(m.x_min <= m.x_max && m.y_min <= m.y_max) {
            return Err(ConfigError::invalid(
                "measurement_region_m",
                "min bound exceeds max bound",
            ));
        }
        Ok(())
    }

    pub fn deployment(&self) -> DeploymentParams {
        DeploymentParams {
            area_km2: self.area_km2,
            lte_density: self.lte_density_per_km2,
            bs_count: self.bs_count,
            vn_mode: self.vn_mode,
            classes: ClassProfile {
                requirements_bps: self.class_requirements_bps,
                probabilities: self.class_probabilities,
            },
            radio: self.radio.clone(),
            measurement_region: self.measurement_region_m,
        }
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
