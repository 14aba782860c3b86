//! Scenario configuration, validation, and unit conversion.
//!
//! Config files (TOML or JSON) carry transmit and noise powers in dBm and
//! gains in dB, matching how link budgets are usually quoted. Everything is
//! converted to linear units (watts, unitless gains) exactly once, here, at
//! ingestion. The rest of the crate never sees a dB value.

use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse config: {0}")]
    Parse(String),
    #[error("config field `{field}` invalid: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown override key `{0}`")]
    UnknownKey(String),
    #[error("override `{key}={value}` could not be parsed: {reason}")]
    BadOverride {
        key: String,
        value: String,
        reason: String,
    },
}

/// Converts a power in dBm to watts. `10 dBm -> 0.01 W`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a gain in dB to a linear factor. `-30 dB -> 1e-3`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Layout of the transmissive units on each TRTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayGeometry {
    /// Uniform linear array along the x axis, half-wavelength spacing.
    Ula,
    /// Square uniform planar array in the x-y plane; requires square `num_units`.
    Upa,
}

/// How the starting beamformers are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Per-unit equal-gain beams phase-matched to the serving channel, so
    /// every unit meets its power budget with equality.
    MatchedPhase,
    /// Random directions, scaled to meet every per-unit budget with equality.
    RandomFeasible,
}

/// Schedule for the softmin sharpness parameter mu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuSchedule {
    Fixed(f64),
    /// `mu_t = min(mu_max, mu0 * 1.5^t)` over outer iterations `t`.
    Geometric {
        mu0: f64,
        mu_max: f64,
    },
}

impl MuSchedule {
    pub fn at(&self, outer_iter: usize) -> f64 {
        match *self {
            MuSchedule::Fixed(mu) => mu,
            MuSchedule::Geometric { mu0, mu_max } => {
                (mu0 * 1.5f64.powi(outer_iter as i32)).min(mu_max)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NoiseSpec {
    Uniform(f64),
    PerUser(Vec<f64>),
}

fn default_num_cells() -> usize {
    2
}
fn default_users_per_cell() -> usize {
    2
}
fn default_num_units() -> usize {
    16
}
fn default_unit_power_dbm() -> f64 {
    10.0
}
fn default_noise_dbm() -> NoiseSpec {
    NoiseSpec::Uniform(-80.0)
}
fn default_pathloss_ref_db() -> f64 {
    -30.0
}
fn default_pathloss_exponent() -> f64 {
    3.2
}
fn default_rician_factor_db() -> f64 {
    5.0
}
fn default_cell_radius() -> f64 {
    100.0
}
fn default_user_height() -> f64 {
    1.5
}
fn default_trtc_height() -> f64 {
    4.5
}
fn default_trtc_spacing() -> f64 {
    140.0
}
fn default_geometry() -> ArrayGeometry {
    ArrayGeometry::Ula
}
fn default_init() -> InitScheme {
    InitScheme::MatchedPhase
}
fn default_mu() -> f64 {
    20.0
}
fn default_mu_schedule() -> String {
    "fixed".to_string()
}
fn default_mu_max() -> f64 {
    200.0
}
fn default_max_outer_iters() -> usize {
    100
}
fn default_convergence_tol() -> f64 {
    1e-4
}
fn default_max_backtracks() -> u32 {
    10
}
fn default_rng_seed() -> u64 {
    1
}

/// Config exactly as written on disk, before unit conversion and validation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default = "default_num_cells")]
    pub num_cells: usize,
    #[serde(default = "default_users_per_cell")]
    pub users_per_cell: usize,
    #[serde(default = "default_num_units")]
    pub num_units: usize,
    /// Per-unit transmit power budget, dBm.
    #[serde(default = "default_unit_power_dbm")]
    pub unit_power_dbm: f64,
    /// Receiver noise power, dBm. Scalar, or one entry per user in cell-major
    /// order.
    #[serde(default = "default_noise_dbm")]
    noise_power_dbm: NoiseSpec,
    /// Path loss at the 1 m reference distance, dB.
    #[serde(default = "default_pathloss_ref_db")]
    pub pathloss_ref_db: f64,
    #[serde(default = "default_pathloss_exponent")]
    pub pathloss_exponent: f64,
    /// Rician K-factor of every link, dB.
    #[serde(default = "default_rician_factor_db")]
    pub rician_factor_db: f64,
    /// Cell radius in metres; users drop uniformly on the disk around their TRTC.
    #[serde(default = "default_cell_radius")]
    pub cell_radius: f64,
    #[serde(default = "default_user_height")]
    pub user_height: f64,
    /// Height used when TRTC positions are derived rather than listed.
    #[serde(default = "default_trtc_height")]
    pub trtc_height: f64,
    /// Inter-TRTC spacing along the x axis when positions are derived.
    #[serde(default = "default_trtc_spacing")]
    pub trtc_spacing: f64,
    /// Explicit TRTC positions `[x, y, z]`; overrides the derived line layout.
    #[serde(default)]
    pub trtc_positions: Option<Vec<[f64; 3]>>,
    #[serde(default = "default_geometry")]
    pub array_geometry: ArrayGeometry,
    #[serde(default = "default_init")]
    pub init: InitScheme,
    /// Softmin sharpness; also the starting value of the geometric schedule.
    #[serde(default = "default_mu")]
    pub smoothing_mu: f64,
    /// `"fixed"` or `"geometric"`.
    #[serde(default = "default_mu_schedule")]
    pub mu_schedule: String,
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
    #[serde(default = "default_max_outer_iters")]
    pub max_outer_iters: usize,
    /// Stop once one outer iteration improves the objective by less than this
    /// many nats. `inf` stops after the first iteration.
    #[serde(default = "default_convergence_tol")]
    pub convergence_tol: f64,
    #[serde(default = "default_max_backtracks")]
    pub max_backtracks: u32,
    #[serde(default = "default_rng_seed")]
    pub rng_seed: u64,
}

impl Default for RawConfig {
    fn default() -> Self {
        // serde fills every field from its default fn
        toml::from_str("").expect("empty config must deserialize")
    }
}

impl RawConfig {
    /// Applies a `key=value` override as accepted by the CLI `--set` flag.
    ///
    /// Keys mirror the config file fields. Lists use commas
    /// (`noise_power_dbm=-80,-75,-80,-75`), positions use semicolons between
    /// points (`trtc_positions=0,0,4.5;140,0,4.5`).
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
            ConfigError::BadOverride {
                key: key.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            }
        }
        fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
            value.parse().map_err(|e| bad(key, value, e))
        }
        fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
            value.parse().map_err(|e| bad(key, value, e))
        }
        match key {
            "num_cells" => self.num_cells = parse_usize(key, value)?,
            "users_per_cell" => self.users_per_cell = parse_usize(key, value)?,
            "num_units" => self.num_units = parse_usize(key, value)?,
            "unit_power_dbm" => self.unit_power_dbm = parse_f64(key, value)?,
            "noise_power_dbm" => {
                if let Ok(v) = value.parse::<f64>() {
                    self.noise_power_dbm = NoiseSpec::Uniform(v);
                } else {
                    let list = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| bad(key, value, e))?;
                    self.noise_power_dbm = NoiseSpec::PerUser(list);
                }
            }
            "pathloss_ref_db" => self.pathloss_ref_db = parse_f64(key, value)?,
            "pathloss_exponent" => self.pathloss_exponent = parse_f64(key, value)?,
            "rician_factor_db" => self.rician_factor_db = parse_f64(key, value)?,
            "cell_radius" => self.cell_radius = parse_f64(key, value)?,
            "user_height" => self.user_height = parse_f64(key, value)?,
            "trtc_height" => self.trtc_height = parse_f64(key, value)?,
            "trtc_spacing" => self.trtc_spacing = parse_f64(key, value)?,
            "trtc_positions" => {
                let pts = value
                    .split(';')
                    .map(|p| {
                        let coords = p
                            .split(',')
                            .map(|s| s.trim().parse::<f64>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|e| bad(key, value, e))?;
                        if coords.len() != 3 {
                            return Err(bad(key, value, "each position needs x,y,z"));
                        }
                        Ok([coords[0], coords[1], coords[2]])
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                self.trtc_positions = Some(pts);
            }
            "array_geometry" => {
                self.array_geometry = match value {
                    "ula" => ArrayGeometry::Ula,
                    "upa" => ArrayGeometry::Upa,
                    _ => return Err(bad(key, value, "expected `ula` or `upa`")),
                }
            }
            "init" => {
                self.init = match value {
                    "matched_phase" => InitScheme::MatchedPhase,
                    "random_feasible" => InitScheme::RandomFeasible,
                    _ => {
                        return Err(bad(
                            key,
                            value,
                            "expected `matched_phase` or `random_feasible`",
                        ))
                    }
                }
            }
            "smoothing_mu" => self.smoothing_mu = parse_f64(key, value)?,
            "mu_schedule" => self.mu_schedule = value.to_string(),
            "mu_max" => self.mu_max = parse_f64(key, value)?,
            "max_outer_iters" => self.max_outer_iters = parse_usize(key, value)?,
            "convergence_tol" => self.convergence_tol = parse_f64(key, value)?,
            "max_backtracks" => {
                self.max_backtracks = value.parse().map_err(|e| bad(key, value, e))?
            }
            "rng_seed" => self.rng_seed = value.parse().map_err(|e| bad(key, value, e))?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

/// Validated scenario description in linear units. Powers are watts.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_cells: usize,
    pub users_per_cell: usize,
    pub num_units: usize,
    /// Per-unit transmit power budget, watts.
    pub unit_power: f64,
    /// Noise power per user, watts, indexed `g * users_per_cell + k`.
    pub noise_power: Vec<f64>,
    /// Linear path loss at the reference distance of 1 m.
    pub pathloss_ref: f64,
    pub pathloss_exponent: f64,
    /// Linear Rician K-factor.
    pub rician_factor: f64,
    pub cell_radius: f64,
    pub user_height: f64,
    pub trtc_positions: Vec<[f64; 3]>,
    pub array_geometry: ArrayGeometry,
    pub init: InitScheme,
    pub smoothing: MuSchedule,
    pub max_outer_iters: usize,
    pub convergence_tol: f64,
    pub max_backtracks: u32,
    pub rng_seed: u64,
}

impl SystemConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        fn invalid(field: &'static str, reason: impl ToString) -> ConfigError {
            ConfigError::Invalid {
                field,
                reason: reason.to_string(),
            }
        }
        if raw.num_cells == 0 {
            return Err(invalid("num_cells", "must be at least 1"));
        }
        if raw.users_per_cell == 0 {
            return Err(invalid("users_per_cell", "must be at least 1"));
        }
        if raw.num_units == 0 {
            return Err(invalid("num_units", "must be at least 1"));
        }
        if raw.array_geometry == ArrayGeometry::Upa {
            let side = (raw.num_units as f64).sqrt().round() as usize;
            if side * side != raw.num_units {
                return Err(invalid(
                    "num_units",
                    format!(
                        "{} is not a perfect square, required for UPA",
                        raw.num_units
                    ),
                ));
            }
        }
        let unit_power = dbm_to_watts(raw.unit_power_dbm);
        if !unit_power.is_finite() || unit_power <= 0.0 {
            return Err(invalid("unit_power_dbm", "must be finite"));
        }
        let num_users = raw.num_cells * raw.users_per_cell;
        let noise_power: Vec<f64> = match &raw.noise_power_dbm {
            NoiseSpec::Uniform(dbm) => vec![dbm_to_watts(*dbm); num_users],
            NoiseSpec::PerUser(list) => {
                if list.len() != num_users {
                    return Err(invalid(
                        "noise_power_dbm",
                        format!("list has {} entries, need {}", list.len(), num_users),
                    ));
                }
                list.iter().map(|d| dbm_to_watts(*d)).collect()
            }
        };
        if noise_power.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(invalid("noise_power_dbm", "must be finite"));
        }
        let pathloss_ref = db_to_linear(raw.pathloss_ref_db);
        if !pathloss_ref.is_finite() || pathloss_ref <= 0.0 {
            return Err(invalid("pathloss_ref_db", "must be finite"));
        }
        if !(raw.pathloss_exponent > 0.0) {
            return Err(invalid("pathloss_exponent", "must be positive"));
        }
        let rician_factor = db_to_linear(raw.rician_factor_db);
        if !rician_factor.is_finite() {
            return Err(invalid("rician_factor_db", "must be finite"));
        }
        if !(raw.cell_radius > 0.0) {
            return Err(invalid("cell_radius", "must be positive"));
        }
        let trtc_positions = match &raw.trtc_positions {
            Some(pts) => {
                if pts.len() != raw.num_cells {
                    return Err(invalid(
                        "trtc_positions",
                        format!("{} positions for {} cells", pts.len(), raw.num_cells),
                    ));
                }
                pts.clone()
            }
            None => (0..raw.num_cells)
                .map(|g| [raw.trtc_spacing * g as f64, 0.0, raw.trtc_height])
                .collect(),
        };
        if !(raw.smoothing_mu > 0.0) {
            return Err(invalid("smoothing_mu", "must be positive"));
        }
        let smoothing = match raw.mu_schedule.as_str() {
            "fixed" => MuSchedule::Fixed(raw.smoothing_mu),
            "geometric" => {
                if !(raw.mu_max >= raw.smoothing_mu) {
                    return Err(invalid("mu_max", "must be at least smoothing_mu"));
                }
                MuSchedule::Geometric {
                    mu0: raw.smoothing_mu,
                    mu_max: raw.mu_max,
                }
            }
            other => {
                return Err(invalid(
                    "mu_schedule",
                    format!("unknown schedule `{other}`"),
                ))
            }
        };
        if raw.max_outer_iters == 0 {
            return Err(invalid("max_outer_iters", "must be at least 1"));
        }
        // +inf is allowed and means "stop after one iteration"
        if raw.convergence_tol.is_nan() || raw.convergence_tol <= 0.0 {
            return Err(invalid("convergence_tol", "must be positive"));
        }
        Ok(SystemConfig {
            num_cells: raw.num_cells,
            users_per_cell: raw.users_per_cell,
            num_units: raw.num_units,
            unit_power,
            noise_power,
            pathloss_ref,
            pathloss_exponent: raw.pathloss_exponent,
            rician_factor,
            cell_radius: raw.cell_radius,
            user_height: raw.user_height,
            trtc_positions,
            array_geometry: raw.array_geometry,
            init: raw.init,
            smoothing,
            max_outer_iters: raw.max_outer_iters,
            convergence_tol: raw.convergence_tol,
            max_backtracks: raw.max_backtracks,
            rng_seed: raw.rng_seed,
        })
    }

    /// Paper-style two-cell default scenario.
    pub fn default_scenario() -> Self {
        Self::from_raw(&RawConfig::default()).expect("defaults must validate")
    }

    pub fn num_users(&self) -> usize {
        self.num_cells * self.users_per_cell
    }

    pub fn user_index(&self, cell: usize, user: usize) -> usize {
        debug_assert!(cell < self.num_cells && user < self.users_per_cell);
        cell * self.users_per_cell + user
    }

    /// Noise power of user `k` in cell `g`, watts.
    pub fn noise(&self, cell: usize, user: usize) -> f64 {
        self.noise_power[self.user_index(cell, user)]
    }

    /// Loads a raw config from TOML or JSON, chosen by file extension.
    pub fn load_raw(path: &Path) -> Result<RawConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        if is_json {
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
        }
    }

    /// Loads, applies `key=value` overrides in order, and validates.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut raw = match path {
            Some(p) => Self::load_raw(p)?,
            None => RawConfig::default(),
        };
        for (key, value) in overrides {
            raw.apply_override(key, value)?;
        }
        Self::from_raw(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn db_conversions_match_link_budget_values() {
        assert!((dbm_to_watts(10.0) - 0.01).abs() < 1e-15);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-24);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-16);
        assert!((db_to_linear(-30.0) - 1e-3).abs() < 1e-16);
        assert!((db_to_linear(0.0) - 1.0).abs() < 1e-15);
        assert!((db_to_linear(5.0) - 3.1622776601683795).abs() < 1e-12);
    }

    #[test]
    fn defaults_give_two_cell_scenario() {
        let cfg = SystemConfig::default_scenario();
        assert_eq!(cfg.num_cells, 2);
        assert_eq!(cfg.users_per_cell, 2);
        assert_eq!(cfg.num_units, 16);
        assert!((cfg.unit_power - 0.01).abs() < 1e-15);
        assert!((cfg.noise_power[3] - 1e-11).abs() < 1e-24);
        assert!((cfg.pathloss_ref - 1e-3).abs() < 1e-16);
        assert_eq!(cfg.trtc_positions, vec![[0.0, 0.0, 4.5], [140.0, 0.0, 4.5]]);
        assert_eq!(cfg.smoothing, MuSchedule::Fixed(20.0));
        assert_eq!(cfg.max_backtracks, 10);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut raw = RawConfig::default();
        raw.users_per_cell = 0;
        assert!(SystemConfig::from_raw(&raw).is_err());

        let mut raw = RawConfig::default();
        raw.array_geometry = ArrayGeometry::Upa;
        raw.num_units = 17;
        assert!(SystemConfig::from_raw(&raw).is_err());
        raw.num_units = 16;
        assert!(SystemConfig::from_raw(&raw).is_ok());

        let mut raw = RawConfig::default();
        raw.noise_power_dbm = NoiseSpec::PerUser(vec![-80.0; 3]);
        assert!(SystemConfig::from_raw(&raw).is_err());

        let mut raw = RawConfig::default();
        raw.trtc_positions = Some(vec![[0.0, 0.0, 4.5]]);
        assert!(SystemConfig::from_raw(&raw).is_err());

        let mut raw = RawConfig::default();
        raw.convergence_tol = 0.0;
        assert!(SystemConfig::from_raw(&raw).is_err());
        raw.convergence_tol = f64::INFINITY;
        assert!(SystemConfig::from_raw(&raw).is_ok());

        let mut raw = RawConfig::default();
        raw.mu_schedule = "warmup".into();
        assert!(SystemConfig::from_raw(&raw).is_err());
    }

    #[test]
    fn overrides_cover_every_documented_key() {
        let mut raw = RawConfig::default();
        for (k, v) in [
            ("num_cells", "3"),
            ("users_per_cell", "4"),
            ("num_units", "25"),
            ("unit_power_dbm", "15"),
            ("noise_power_dbm", "-75"),
            ("pathloss_ref_db", "-28"),
            ("pathloss_exponent", "3.5"),
            ("rician_factor_db", "3"),
            ("cell_radius", "80"),
            ("user_height", "1.6"),
            ("trtc_height", "5.0"),
            ("trtc_spacing", "120"),
            ("array_geometry", "upa"),
            ("init", "random_feasible"),
            ("smoothing_mu", "10"),
            ("mu_schedule", "geometric"),
            ("mu_max", "400"),
            ("max_outer_iters", "50"),
            ("convergence_tol", "1e-5"),
            ("max_backtracks", "6"),
            ("rng_seed", "99"),
        ] {
            raw.apply_override(k, v)
                .unwrap_or_else(|e| panic!("{k}: {e}"));
        }
        let cfg = SystemConfig::from_raw(&raw).expect("overridden config validates");
        assert_eq!(cfg.num_cells, 3);
        assert_eq!(cfg.num_units, 25);
        assert_eq!(
            cfg.smoothing,
            MuSchedule::Geometric {
                mu0: 10.0,
                mu_max: 400.0
            }
        );

        let mut raw = RawConfig::default();
        raw.apply_override("noise_power_dbm", "-80,-75,-80,-75")
            .unwrap();
        let cfg = SystemConfig::from_raw(&raw).unwrap();
        assert!((cfg.noise_power[1] - dbm_to_watts(-75.0)).abs() < 1e-22);

        let mut raw = RawConfig::default();
        raw.apply_override("trtc_positions", "0,0,4.5; 140,0,4.5")
            .unwrap();
        let cfg = SystemConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.trtc_positions[1], [140.0, 0.0, 4.5]);

        let mut raw = RawConfig::default();
        assert!(matches!(
            raw.apply_override("power", "1"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(raw.apply_override("num_units", "many").is_err());
    }

    #[test]
    fn toml_and_json_configs_agree() {
        let toml_text = "num_cells = 2\nusers_per_cell = 3\nunit_power_dbm = 5.0\n";
        let json_text = r#"{"num_cells": 2, "users_per_cell": 3, "unit_power_dbm": 5.0}"#;

        let dir = tempfile::tempdir().unwrap();
        let tpath = dir.path().join("cfg.toml");
        let jpath = dir.path().join("cfg.json");
        write!(std::fs::File::create(&tpath).unwrap(), "{toml_text}").unwrap();
        write!(std::fs::File::create(&jpath).unwrap(), "{json_text}").unwrap();

        let a = SystemConfig::load(Some(&tpath), &[]).unwrap();
        let b = SystemConfig::load(Some(&jpath), &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.users_per_cell, 3);
    }

    #[test]
    fn unknown_config_field_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "transmit_power = 3\n").unwrap();
        assert!(matches!(
            SystemConfig::load(Some(&path), &[]),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn mu_schedule_evaluation() {
        let fixed = MuSchedule::Fixed(20.0);
        assert_eq!(fixed.at(0), 20.0);
        assert_eq!(fixed.at(57), 20.0);
        let geo = MuSchedule::Geometric {
            mu0: 8.0,
            mu_max: 20.0,
        };
        assert_eq!(geo.at(0), 8.0);
        assert_eq!(geo.at(1), 12.0);
        assert_eq!(geo.at(2), 18.0);
        assert_eq!(geo.at(3), 20.0);
        assert_eq!(geo.at(50), 20.0);
    }
}
