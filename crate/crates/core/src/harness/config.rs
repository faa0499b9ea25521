//! Experiment configuration.
//!
//! Configs are flat JSON objects. Any key can be overridden with a
//! `key=value` string, where the value is parsed as JSON and falls back to
//! a plain string.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::channel::FadingModel;
use crate::error::{Error, Result};
use crate::gains::SpreadingParams;
use crate::policy::{linspace_steps, DeniedOutage, PolicyKind, RateGrid};
use crate::topology::{TopologyParams, DEFAULT_MAX_ATTEMPTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    DistanceDependent,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "R")]
    Rate,
    #[serde(rename = "load")]
    Load,
    #[serde(rename = "G")]
    SpreadingFactor,
    #[serde(rename = "r_bs")]
    ExclusionRadius,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Rate => "R",
            SweepAxis::Load => "load",
            SweepAxis::SpreadingFactor => "G",
            SweepAxis::ExclusionRadius => "r_bs",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base_stations: usize,
    /// Mobiles per base station; `M = round(load · C)`.
    pub load: f64,
    pub r_net: f64,
    pub r_bs: f64,
    pub r_m: f64,
    /// Minimum mobile-to-base-station distance; `None` means `r_bs`.
    pub mobile_clearance: Option<f64>,
    pub sector_offset: f64,
    pub max_placement_attempts: usize,

    pub alpha: f64,
    pub sigma_s_db: f64,
    pub fading: FadingMode,
    /// Nakagami `m` for constant fading.
    pub fading_m: u32,

    pub spreading_factor: u32,
    pub chip_factor: f64,
    pub snr_db: f64,
    pub activity: f64,
    /// Scale on shadowing inside power control; above 1 models imperfect control.
    pub pc_sigma_multiplier: f64,

    pub policies: Vec<PolicyKind>,
    pub zeta: f64,
    pub rate_min: f64,
    pub rate_max: f64,
    pub rate_step: f64,
    pub denied_outage_convention: DeniedOutage,

    pub trials: usize,
    pub seed: u64,

    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Vec<f64>,
    /// `[start, stop, step]`, used when `sweep_values` is empty.
    pub sweep_range: Option<[f64; 3]>,
    /// Uplinks tracked individually in rate sweeps.
    pub panel_size: usize,

    /// Optional second axis: each value of this key yields a separate run.
    pub series_key: Option<String>,
    pub series_values: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            base_stations: 50,
            load: 8.0,
            r_net: 2.0,
            r_bs: 0.25,
            r_m: 0.01,
            mobile_clearance: None,
            sector_offset: 0.0,
            max_placement_attempts: DEFAULT_MAX_ATTEMPTS,
            alpha: 3.0,
            sigma_s_db: 8.0,
            fading: FadingMode::DistanceDependent,
            fading_m: 1,
            spreading_factor: 16,
            chip_factor: 2.0 / 3.0,
            snr_db: 10.0,
            activity: 1.0,
            pc_sigma_multiplier: 1.0,
            policies: PolicyKind::ALL.to_vec(),
            zeta: 0.1,
            rate_min: 0.01,
            rate_max: 10.0,
            rate_step: 0.01,
            denied_outage_convention: DeniedOutage::Zero,
            trials: 500,
            seed: 1,
            sweep_axis: None,
            sweep_values: Vec::new(),
            sweep_range: None,
            panel_size: 8,
            series_key: None,
            series_values: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key=value` overrides in order.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut map = match serde_json::to_value(self).expect("config serializes") {
            Value::Object(map) => map,
            _ => unreachable!("config is an object"),
        };
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
            set_key(&mut map, key.trim(), raw.trim())?;
        }
        let cfg: ExperimentConfig =
            serde_json::from_value(Value::Object(map)).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one numeric key, as used for series axes.
    pub fn with_number(&self, key: &str, value: f64) -> Result<Self> {
        self.with_overrides(&[format!("{key}={}", json_number(value))])
    }

    pub fn mobiles(&self) -> usize {
        (self.load * self.base_stations as f64).round() as usize
    }

    pub fn topology_params(&self) -> TopologyParams {
        TopologyParams {
            base_stations: self.base_stations,
            mobiles: self.mobiles(),
            r_net: self.r_net,
            r_bs: self.r_bs,
            r_m: self.r_m,
            mobile_clearance: self.mobile_clearance,
            sector_offset: self.sector_offset,
            max_attempts: self.max_placement_attempts,
        }
    }

    pub fn fading_model(&self) -> FadingModel {
        match self.fading {
            FadingMode::DistanceDependent => FadingModel::DistanceDependent { r_bs: self.r_bs },
            FadingMode::Constant => FadingModel::Constant { m: self.fading_m },
        }
    }

    pub fn spreading(&self) -> SpreadingParams {
        SpreadingParams {
            spreading_factor: self.spreading_factor,
            chip_factor: self.chip_factor,
        }
    }

    pub fn rate_grid(&self) -> Result<RateGrid> {
        RateGrid::uniform(self.rate_min, self.rate_max, self.rate_step)
    }

    /// Sweep values, or an empty list when there is no sweep.
    pub fn sweep_points(&self) -> Result<Vec<f64>> {
        if self.sweep_axis.is_none() {
            return Ok(Vec::new());
        }
        if !self.sweep_values.is_empty() {
            return Ok(self.sweep_values.clone());
        }
        match self.sweep_range {
            Some([start, stop, step]) => linspace_steps(start, stop, step),
            None => Err(Error::Config(
                "sweep_axis set without sweep_values or sweep_range".into(),
            )),
        }
    }

    /// The config with the sweep axis pinned to `value`.
    pub fn at_point(&self, value: f64) -> Self {
        let mut cfg = self.clone();
        match self.sweep_axis {
            Some(SweepAxis::Load) => cfg.load = value,
            Some(SweepAxis::SpreadingFactor) => cfg.spreading_factor = value.round() as u32,
            Some(SweepAxis::ExclusionRadius) => cfg.r_bs = value,
            Some(SweepAxis::Rate) | None => {}
        }
        cfg
    }

    /// "half loaded" when `M/C = G/2`, "fully loaded" when `M/C = G`.
    pub fn load_label(&self) -> Option<&'static str> {
        let g = self.spreading_factor as f64;
        let ratio = self.mobiles() as f64 / self.base_stations as f64;
        if (ratio - g / 2.0).abs() < 1e-12 {
            Some("half loaded")
        } else if (ratio - g).abs() < 1e-12 {
            Some("fully loaded")
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.load >= 0.0 && self.load.is_finite()) {
            return bad(format!("load must be non-negative, got {}", self.load));
        }
        if !(self.alpha >= 2.0) {
            return bad(format!("path-loss exponent must be at least 2, got {}", self.alpha));
        }
        if !(self.sigma_s_db >= 0.0) {
            return bad("sigma_s_db must be non-negative".into());
        }
        if self.fading == FadingMode::Constant && self.fading_m == 0 {
            return bad("fading_m must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.activity) {
            return bad("activity must lie in [0, 1]".into());
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return bad(format!("zeta must lie in (0, 1), got {}", self.zeta));
        }
        if !(self.pc_sigma_multiplier >= 0.0 && self.pc_sigma_multiplier.is_finite()) {
            return bad("pc_sigma_multiplier must be non-negative".into());
        }
        if self.policies.is_empty() && self.sweep_axis != Some(SweepAxis::Rate) {
            return bad("at least one policy is required".into());
        }
        self.spreading().validate()?;
        self.rate_grid()?;
        self.topology_params().validate()?;
        let points = self.sweep_points()?;
        for &v in &points {
            let ok = match self.sweep_axis {
                Some(SweepAxis::Rate) => v > 0.0,
                Some(SweepAxis::Load) => v >= 0.0 && v.is_finite(),
                Some(SweepAxis::SpreadingFactor) => v >= 1.0 && v.fract() == 0.0,
                Some(SweepAxis::ExclusionRadius) => v > 0.0 && v >= self.r_m,
                None => true,
            };
            if !ok {
                return bad(format!(
                    "invalid {} sweep value {v}",
                    self.sweep_axis.map_or("", |a| a.label())
                ));
            }
        }
        if self.series_key.is_some() != !self.series_values.is_empty() {
            return bad("series_key and series_values must be given together".into());
        }
        if let Some(key) = &self.series_key {
            if key.starts_with("series_") || key.starts_with("sweep_") {
                return bad(format!("series_key cannot be {key:?}"));
            }
            for &v in &self.series_values {
                let mut probe = self.clone();
                probe.series_key = None;
                probe.series_values.clear();
                probe.with_number(key, v)?;
            }
        }
        Ok(())
    }
}

fn json_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn set_key(map: &mut Map<String, Value>, key: &str, raw: &str) -> Result<()> {
    if !map.contains_key(key) {
        return Err(Error::Config(format!("unknown config key {key:?}")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    map.insert(key.to_string(), value);
    Ok(())
}
