//! Flat `key = value` run configuration.
//!
//! Every key has a documented default. A configuration renders back to
//! the same text form (see [`RunConfig::entries`]), which is what output
//! headers record.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ris_locbf::beamforming::BucketingRule;
use ris_locbf::channel::{dbm_to_watts, Scenario};
use ris_locbf::geometry::{wavelength, PlaneFrame, RisGeometry, Vec3};
use ris_locbf::harness::{ComplexityScheme, CostModels, GreedyInit};
use ris_locbf::localization::AxisMask;
use ris_locbf::protocol::{FrameModel, FrameScheme};

/// Recognized keys with their defaults, in rendering order.
pub const KEYS: &[(&str, &str)] = &[
    ("frequency_hz", "28e9"),
    ("tx", "0, 12, 0"),
    ("rx", "5, 0, 0"),
    ("ris_nx", "80"),
    ("ris_ny", "80"),
    ("ris_spacing_wavelengths", "0.5"),
    ("ris_center", "0, 0, 0"),
    ("ris_orientation", "bisector"),
    ("ris_u_axis", "1, 0, 0"),
    ("ris_v_axis", "0, 0, 1"),
    ("tx_power_dbm", "30"),
    ("noise_power_dbm", "-90"),
    ("los_blocked", "true"),
    ("seed", "0"),
    ("rule", "zone-parity"),
    ("xi_list_wavelengths", "0.1, 0.25, 0.5"),
    ("error_grid_wavelengths", "0, 0.125, 0.25, 0.5, 1, 2, 5, 10, 20"),
    ("trials", "200"),
    ("schemes", "tposj, benchmark-onebit, benchmark-continuous, random"),
    ("error_axes", "xyz"),
    ("error_on_tx", "false"),
    ("greedy_init", "warm"),
    ("greedy_max_sweeps", "100"),
    ("xi_sweep_wavelengths", "0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5"),
    ("map_xi_wavelengths", "0.5"),
    ("map_m_max", "auto"),
    ("oracle_nx", "4"),
    ("oracle_ny", "3"),
    ("oracle_instances", "100"),
    ("oracle_max_offset_m", "1"),
    ("complexity_n_list", "100, 1000, 10000"),
    ("complexity_schemes", "tposj, greedy, sdr, mjce"),
    ("complexity_exhaustive_n_list", "10, 12, 14, 16"),
    ("complexity_repetitions", "5"),
    ("sdr_model_constant", "1"),
    ("mjce_model_constant", "1"),
    ("frame_length", "10000"),
    ("frame_pilot_cost", "1"),
    ("frame_control_cost", "10"),
    ("frame_num_ris", "1"),
    ("frame_paths_per_ris", "3"),
    ("frame_enabled_fraction", "1"),
    ("frame_pilots_required", "true"),
    ("frame_n_list", "100, 400, 1600, 6400, 25600"),
    ("frame_se_location", "auto"),
    ("frame_se_csi", "auto"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    /// 1-based line in the configuration text; `None` for defaults and
    /// command-line overrides.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) if self.key.is_empty() => write!(f, "line {line}: {}", self.message),
            Some(line) => write!(f, "line {line}: key '{}': {}", self.key, self.message),
            None => write!(f, "key '{}': {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Bisector,
    Explicit,
}

/// Scheme names accepted by the `schemes` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeName {
    /// Expands to one entry per `xi_list_wavelengths` value.
    Tposj,
    BenchmarkOneBit,
    BenchmarkContinuous,
    Random,
    Greedy,
    Exhaustive,
}

impl FromStr for SchemeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "tposj" => SchemeName::Tposj,
            "benchmark-onebit" => SchemeName::BenchmarkOneBit,
            "benchmark-continuous" => SchemeName::BenchmarkContinuous,
            "random" => SchemeName::Random,
            "greedy" => SchemeName::Greedy,
            "exhaustive" => SchemeName::Exhaustive,
            other => return Err(format!("unknown scheme '{other}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub frequency_hz: f64,
    pub tx: Vec3,
    pub rx: Vec3,
    pub ris_nx: usize,
    pub ris_ny: usize,
    pub ris_spacing_wavelengths: f64,
    pub ris_center: Vec3,
    pub ris_orientation: Orientation,
    pub ris_u_axis: Vec3,
    pub ris_v_axis: Vec3,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub los_blocked: bool,
    pub seed: u64,
    pub rule: BucketingRule,
    pub xi_list_wavelengths: Vec<f64>,
    pub error_grid_wavelengths: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<SchemeName>,
    pub error_axes: AxisMask,
    pub error_on_tx: bool,
    pub greedy_init: GreedyInit,
    pub greedy_max_sweeps: usize,
    pub xi_sweep_wavelengths: Vec<f64>,
    pub map_xi_wavelengths: f64,
    pub map_m_max: Option<u64>,
    pub oracle_nx: usize,
    pub oracle_ny: usize,
    pub oracle_instances: usize,
    pub oracle_max_offset_m: f64,
    pub complexity_n_list: Vec<usize>,
    pub complexity_schemes: Vec<ComplexityScheme>,
    pub complexity_exhaustive_n_list: Vec<usize>,
    pub complexity_repetitions: usize,
    pub cost_models: CostModels,
    pub frame: FrameModel,
    pub frame_n_list: Vec<u64>,
    pub frame_se_location: Option<f64>,
    pub frame_se_csi: Option<f64>,
    /// Source text of every key, defaults included.
    raw: BTreeMap<&'static str, String>,
    /// Keys that fell back to their default.
    defaulted: Vec<&'static str>,
}

/// Raw values plus the line each came from.
struct Source {
    values: BTreeMap<&'static str, (String, Option<usize>)>,
}

impl Source {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            key: key.to_string(),
            line: self.values.get(key).and_then(|(_, line)| *line),
            message: message.into(),
        }
    }

    fn text(&self, key: &str) -> &str {
        &self.values[key].0
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let text = self.text(key);
        text.parse()
            .map_err(|e| self.err(key, format!("cannot parse '{text}': {e}")))
    }

    fn float(&self, key: &str) -> Result<f64, ConfigError> {
        let x: f64 = self.parse(key)?;
        if !x.is_finite() {
            return Err(self.err(key, "value must be finite"));
        }
        Ok(x)
    }

    fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let x = self.float(key)?;
        if x <= 0.0 {
            return Err(self.err(key, format!("{x} must be positive")));
        }
        Ok(x)
    }

    fn count(&self, key: &str, min: usize) -> Result<usize, ConfigError> {
        let n: usize = self.parse(key)?;
        if n < min {
            return Err(self.err(key, format!("{n} must be at least {min}")));
        }
        Ok(n)
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let items: Vec<&str> = self.text(key).split(',').map(str::trim).collect();
        if items.iter().any(|s| s.is_empty()) {
            return Err(self.err(key, "empty list entry"));
        }
        items
            .into_iter()
            .map(|s| s.parse().map_err(|e| self.err(key, format!("cannot parse '{s}': {e}"))))
            .collect()
    }

    fn float_list(&self, key: &str, lo: f64, hi: f64) -> Result<Vec<f64>, ConfigError> {
        let xs: Vec<f64> = self.list(key)?;
        if let Some(x) = xs.iter().find(|x| !(x.is_finite() && **x >= lo && **x <= hi)) {
            return Err(self.err(key, format!("{x} outside [{lo}, {hi}]")));
        }
        Ok(xs)
    }

    fn point(&self, key: &str) -> Result<Vec3, ConfigError> {
        let xs: Vec<f64> = self.list(key)?;
        if xs.len() != 3 {
            return Err(self.err(key, format!("expected 3 coordinates, got {}", xs.len())));
        }
        Vec3::try_new(xs[0], xs[1], xs[2]).map_err(|_| self.err(key, "coordinates must be finite"))
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.text(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(self.err(key, format!("expected true or false, got '{other}'"))),
        }
    }

    fn auto_or<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        if self.text(key) == "auto" {
            Ok(None)
        } else {
            self.parse(key).map(Some)
        }
    }
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().map(|(k, _)| *k).find(|k| *k == key)
}

impl RunConfig {
    /// Parses configuration text. Missing keys take their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (n, raw_line) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError {
                    key: String::new(),
                    line: Some(line),
                    message: format!("expected 'key = value', got '{content}'"),
                });
            };
            let key = key.trim();
            let Some(key) = known_key(key) else {
                return Err(ConfigError {
                    key: key.to_string(),
                    line: Some(line),
                    message: "unknown key".into(),
                });
            };
            if let Some((_, Some(first))) = values.insert(key, (value.trim().to_string(), Some(line))) {
                return Err(ConfigError {
                    key: key.to_string(),
                    line: Some(line),
                    message: format!("duplicate key (first set on line {first})"),
                });
            }
        }
        let mut defaulted = Vec::new();
        for (key, default) in KEYS {
            values.entry(*key).or_insert_with(|| {
                defaulted.push(*key);
                (default.to_string(), None)
            });
        }
        Self::from_source(Source { values }, defaulted)
    }

    fn from_source(src: Source, defaulted: Vec<&'static str>) -> Result<Self, ConfigError> {
        let ris_orientation = match src.text("ris_orientation") {
            "bisector" => Orientation::Bisector,
            "explicit" => Orientation::Explicit,
            other => {
                return Err(src.err("ris_orientation", format!("expected 'bisector' or 'explicit', got '{other}'")))
            }
        };
        let greedy_init = match src.text("greedy_init") {
            "warm" => GreedyInit::Warm,
            "cold" => GreedyInit::Cold,
            other => return Err(src.err("greedy_init", format!("expected 'warm' or 'cold', got '{other}'"))),
        };
        let error_axes: AxisMask = src.parse("error_axes")?;
        if error_axes.is_empty() {
            return Err(src.err("error_axes", "at least one axis must carry error"));
        }
        let complexity_schemes = src
            .text("complexity_schemes")
            .split(',')
            .map(|s| ComplexityScheme::parse(s.trim()).map_err(|e| src.err("complexity_schemes", e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let ascending = |key: &str, xs: &[usize]| {
            if xs.is_empty() || xs[0] == 0 || xs.windows(2).any(|w| w[0] >= w[1]) {
                Err(src.err(key, "element counts must be positive and strictly ascending"))
            } else {
                Ok(())
            }
        };
        let complexity_n_list: Vec<usize> = src.list("complexity_n_list")?;
        ascending("complexity_n_list", &complexity_n_list)?;
        let complexity_exhaustive_n_list: Vec<usize> = src.list("complexity_exhaustive_n_list")?;
        ascending("complexity_exhaustive_n_list", &complexity_exhaustive_n_list)?;
        if let Some(n) = complexity_exhaustive_n_list.iter().find(|&&n| n > 20) {
            return Err(src.err("complexity_exhaustive_n_list", format!("{n} exceeds the exhaustive limit of 20")));
        }
        let oracle_nx = src.count("oracle_nx", 1)?;
        let oracle_ny = src.count("oracle_ny", 1)?;
        if oracle_nx * oracle_ny > 20 {
            return Err(src.err("oracle_ny", "oracle arrays are limited to 20 elements"));
        }
        let frame_enabled_fraction = src.float("frame_enabled_fraction")?;
        if !(frame_enabled_fraction > 0.0 && frame_enabled_fraction <= 1.0) {
            return Err(src.err("frame_enabled_fraction", format!("{frame_enabled_fraction} outside (0, 1]")));
        }
        let frame_length: u64 = src.parse("frame_length")?;
        if frame_length == 0 {
            return Err(src.err("frame_length", "must be positive"));
        }
        let frame_num_ris: u64 = src.parse("frame_num_ris")?;
        if frame_num_ris == 0 {
            return Err(src.err("frame_num_ris", "must be positive"));
        }
        let map_m_max = src.auto_or::<u64>("map_m_max")?;
        if map_m_max == Some(0) {
            return Err(src.err("map_m_max", "must be at least 1"));
        }
        let se_override = |key: &str| -> Result<Option<f64>, ConfigError> {
            let se = src.auto_or::<f64>(key)?;
            match se {
                Some(x) if !(x.is_finite() && x >= 0.0) => Err(src.err(key, format!("{x} must be nonnegative"))),
                _ => Ok(se),
            }
        };

        let config = RunConfig {
            frequency_hz: src.positive("frequency_hz")?,
            tx: src.point("tx")?,
            rx: src.point("rx")?,
            ris_nx: src.count("ris_nx", 1)?,
            ris_ny: src.count("ris_ny", 1)?,
            ris_spacing_wavelengths: src.positive("ris_spacing_wavelengths")?,
            ris_center: src.point("ris_center")?,
            ris_orientation,
            ris_u_axis: src.point("ris_u_axis")?,
            ris_v_axis: src.point("ris_v_axis")?,
            tx_power_dbm: src.float("tx_power_dbm")?,
            noise_power_dbm: src.float("noise_power_dbm")?,
            los_blocked: src.flag("los_blocked")?,
            seed: src.parse("seed")?,
            rule: src.parse("rule")?,
            xi_list_wavelengths: src.float_list("xi_list_wavelengths", 0.0, 0.5)?,
            error_grid_wavelengths: src.float_list("error_grid_wavelengths", 0.0, f64::MAX)?,
            trials: src.count("trials", 1)?,
            schemes: src.list("schemes")?,
            error_axes,
            error_on_tx: src.flag("error_on_tx")?,
            greedy_init,
            greedy_max_sweeps: src.count("greedy_max_sweeps", 1)?,
            xi_sweep_wavelengths: src.float_list("xi_sweep_wavelengths", 0.0, 0.5)?,
            map_xi_wavelengths: src.float_list("map_xi_wavelengths", 0.0, 0.5)?[0],
            map_m_max,
            oracle_nx,
            oracle_ny,
            oracle_instances: src.count("oracle_instances", 1)?,
            oracle_max_offset_m: src.float_list("oracle_max_offset_m", 0.0, f64::MAX)?[0],
            complexity_n_list,
            complexity_schemes,
            complexity_exhaustive_n_list,
            complexity_repetitions: src.count("complexity_repetitions", 1)?,
            cost_models: CostModels {
                sdr_constant: src.positive("sdr_model_constant")?,
                mjce_constant: src.positive("mjce_model_constant")?,
            },
            frame: FrameModel {
                frame_length,
                uplink_pilot_cost: src.parse("frame_pilot_cost")?,
                control_cost: src.parse("frame_control_cost")?,
                scheme: FrameScheme::LocationDriven,
                num_ris: frame_num_ris,
                elements_per_ris: 1,
                paths_per_ris: src.parse("frame_paths_per_ris")?,
                enabled_ris_fraction: frame_enabled_fraction,
                pilots_required: src.flag("frame_pilots_required")?,
            },
            frame_n_list: src.list("frame_n_list")?,
            frame_se_location: se_override("frame_se_location")?,
            frame_se_csi: se_override("frame_se_csi")?,
            raw: src.values.iter().map(|(k, (v, _))| (*k, v.clone())).collect(),
            defaulted,
        };
        if src.text("map_xi_wavelengths").contains(',') {
            return Err(src.err("map_xi_wavelengths", "expected a single value"));
        }
        if config.tx.distance(&config.rx) < 1e-9 {
            return Err(src.err("rx", "tx and rx coincide"));
        }
        config.frame_for_orientation().map_err(|e| {
            let key = if ris_orientation == Orientation::Explicit { "ris_u_axis" } else { "ris_center" };
            src.err(key, e.to_string())
        })?;
        Ok(config)
    }

    /// Keys that were not present in the parsed text.
    pub fn defaulted(&self) -> &[&'static str] {
        &self.defaulted
    }

    /// Every key with its value text, in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, &str)> {
        KEYS.iter().map(|(k, _)| (*k, self.raw[k].as_str())).collect()
    }

    /// Configuration text that parses back to `self`.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.raw.insert("seed", seed.to_string());
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency_hz)
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            frequency: self.frequency_hz,
            tx_true: self.tx,
            rx_true: self.rx,
            rx_presumed: self.rx,
            transmit_power: dbm_to_watts(self.tx_power_dbm),
            noise_power: dbm_to_watts(self.noise_power_dbm),
            los_blocked: self.los_blocked,
            seed: self.seed,
        }
    }

    fn frame_for_orientation(&self) -> ris_locbf::Result<PlaneFrame> {
        match self.ris_orientation {
            Orientation::Bisector => PlaneFrame::bisector(self.ris_center, self.tx, self.rx),
            Orientation::Explicit => PlaneFrame::new(self.ris_center, self.ris_u_axis, self.ris_v_axis),
        }
    }

    /// RIS plane and grid of size `nx × ny` with the configured spacing and
    /// orientation.
    pub fn geometry_with(&self, nx: usize, ny: usize) -> ris_locbf::Result<RisGeometry> {
        RisGeometry::new(
            self.frame_for_orientation()?,
            nx,
            ny,
            self.ris_spacing_wavelengths * self.wavelength(),
        )
    }

    pub fn geometry(&self) -> ris_locbf::Result<RisGeometry> {
        self.geometry_with(self.ris_nx, self.ris_ny)
    }
}
