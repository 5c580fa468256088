//! Experiment configuration.
//!
//! The on-disk format is flat `key = value` text, one entry per line, `#`
//! starting a comment. Lists are comma separated; the `regions` list
//! separates rectangles with `;`, each written `min_lat,min_lon,max_lat,max_lon`.
//! Every key may also be overridden from the command line with `--set key=value`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::geo::Rect;
use crate::GeoPoint;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("config key `{key}`: {reason}")]
    OutOfRange { key: String, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueSource {
    /// EVs travelling to or charging at the station.
    Targeted,
    /// Idle EVs within the station search radius.
    Radius,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub speed_kmh: f64,
    pub lambda: f64,
    pub omega_kwh_per_km: Vec<f64>,
    pub window_min: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub soc_init_min: f64,
    pub soc_init_max: f64,

    pub battery_kwh: f64,
    /// Battery fraction per hour.
    pub charge_rate: f64,
    pub charge_target_soc: f64,
    pub cs_radius_km: f64,
    pub scenarios: usize,
    pub gmm_components: usize,
    pub em_max_iter: usize,
    pub regions: Vec<Rect>,
    pub pois: Vec<GeoPoint>,
    pub avg_trip_fallback_km: f64,
    pub fleet_size: usize,
    pub rider_patience_min: f64,
    pub fleet_cap: bool,
    pub charge_after_trip: bool,
    pub keep_guided_at_poi: bool,
    pub queue_source: QueueSource,
    pub shared_sg_trajectory: bool,
    pub seed: u64,
}

fn default_regions() -> Vec<Rect> {
    // Plausible Manhattan boxes: Midtown, Upper East Side, Lower Manhattan,
    // Upper West Side. Not taken from any published coordinates.
    vec![
        Rect::new(40.750, -73.995, 40.762, -73.978),
        Rect::new(40.768, -73.965, 40.780, -73.948),
        Rect::new(40.705, -74.015, 40.717, -73.998),
        Rect::new(40.778, -73.985, 40.790, -73.968),
    ]
}

impl Default for Config {
    fn default() -> Self {
        Self {
            alpha_min: 0.8,
            alpha_max: 1.1,
            beta1: 5.0,
            beta2: 10.0,
            speed_kmh: 30.0,
            lambda: 0.1,
            omega_kwh_per_km: vec![0.1171, 0.1751, 0.1863],
            window_min: 10.0,
            theta1: 1.0,
            theta2: 10.0,
            pi1: 1.0,
            pi2: 10.0,
            soc_init_min: 0.2,
            soc_init_max: 0.8,
            battery_kwh: 40.0,
            charge_rate: 1.0,
            charge_target_soc: 0.8,
            cs_radius_km: 3.0,
            scenarios: 100,
            gmm_components: 2,
            em_max_iter: 200,
            regions: default_regions(),
            pois: Vec::new(),
            avg_trip_fallback_km: 3.0,
            fleet_size: 50,
            rider_patience_min: 15.0,
            fleet_cap: true,
            charge_after_trip: true,
            keep_guided_at_poi: true,
            queue_source: QueueSource::Targeted,
            shared_sg_trajectory: true,
            seed: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v)).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::BadValue { key: key.into(), value: value.into() }),
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        let mut cfg = Config::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: n + 1 })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Applies a single `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ConfigError> {
        let (k, v) = kv.split_once('=').ok_or(ConfigError::Syntax { line: 0 })?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "alpha_min" => self.alpha_min = parse(key, value)?,
            "alpha_max" => self.alpha_max = parse(key, value)?,
            "beta1" => self.beta1 = parse(key, value)?,
            "beta2" => self.beta2 = parse(key, value)?,
            "speed_kmh" => self.speed_kmh = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "omega_kwh_per_km" => self.omega_kwh_per_km = parse_list(key, value)?,
            "window_min" => self.window_min = parse(key, value)?,
            "theta1" => self.theta1 = parse(key, value)?,
            "theta2" => self.theta2 = parse(key, value)?,
            "pi1" => self.pi1 = parse(key, value)?,
            "pi2" => self.pi2 = parse(key, value)?,
            "soc_init_min" => self.soc_init_min = parse(key, value)?,
            "soc_init_max" => self.soc_init_max = parse(key, value)?,
            "battery_kwh" => self.battery_kwh = parse(key, value)?,
            "charge_rate" => self.charge_rate = parse(key, value)?,
            "charge_target_soc" => self.charge_target_soc = parse(key, value)?,
            "cs_radius_km" => self.cs_radius_km = parse(key, value)?,
            "scenarios" => self.scenarios = parse(key, value)?,
            "gmm_components" => self.gmm_components = parse(key, value)?,
            "em_max_iter" => self.em_max_iter = parse(key, value)?,
            "regions" => {
                let mut rects = Vec::new();
                for chunk in value.split(';').filter(|c| !c.trim().is_empty()) {
                    let v = parse_list(key, chunk)?;
                    if v.len() != 4 {
                        return Err(ConfigError::BadValue { key: key.into(), value: chunk.into() });
                    }
                    rects.push(Rect::new(v[0], v[1], v[2], v[3]));
                }
                self.regions = rects;
            }
            "pois" => {
                let mut pois = Vec::new();
                for chunk in value.split(';').filter(|c| !c.trim().is_empty()) {
                    let v = parse_list(key, chunk)?;
                    if v.len() != 2 {
                        return Err(ConfigError::BadValue { key: key.into(), value: chunk.into() });
                    }
                    pois.push(GeoPoint::new(v[0], v[1]));
                }
                self.pois = pois;
            }
            "avg_trip_fallback_km" => self.avg_trip_fallback_km = parse(key, value)?,
            "fleet_size" => self.fleet_size = parse(key, value)?,
            "rider_patience_min" => self.rider_patience_min = parse(key, value)?,
            "fleet_cap" => self.fleet_cap = parse_bool(key, value)?,
            "charge_after_trip" => self.charge_after_trip = parse_bool(key, value)?,
            "keep_guided_at_poi" => self.keep_guided_at_poi = parse_bool(key, value)?,
            "queue_source" => {
                self.queue_source = match value {
                    "targeted" => QueueSource::Targeted,
                    "radius" => QueueSource::Radius,
                    _ => return Err(ConfigError::BadValue { key: key.into(), value: value.into() }),
                }
            }
            "shared_sg_trajectory" => self.shared_sg_trajectory = parse_bool(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(key: &str, reason: &str) -> Result<(), ConfigError> {
            Err(ConfigError::OutOfRange { key: key.into(), reason: reason.into() })
        }
        let positive = [
            ("alpha_min", self.alpha_min),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("speed_kmh", self.speed_kmh),
            ("window_min", self.window_min),
            ("battery_kwh", self.battery_kwh),
            ("charge_rate", self.charge_rate),
            ("cs_radius_km", self.cs_radius_km),
            ("avg_trip_fallback_km", self.avg_trip_fallback_km),
            ("rider_patience_min", self.rider_patience_min),
        ];
        for (k, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(k, "must be a positive finite number");
            }
        }
        let non_negative =
            [("theta1", self.theta1), ("theta2", self.theta2), ("pi1", self.pi1), ("pi2", self.pi2)];
        for (k, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(k, "must be a non-negative finite number");
            }
        }
        if self.alpha_max < self.alpha_min {
            return bad("alpha_max", "must be >= alpha_min");
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return bad("lambda", "must lie in [0, 1)");
        }
        if self.omega_kwh_per_km.is_empty() || self.omega_kwh_per_km.iter().any(|w| !(*w > 0.0)) {
            return bad("omega_kwh_per_km", "needs at least one positive rate");
        }
        let per_day = 1440.0 / self.window_min;
        if (per_day - per_day.round()).abs() > 1e-9 {
            return bad("window_min", "must divide 1440 minutes");
        }
        if !(0.0 <= self.soc_init_min && self.soc_init_min <= self.soc_init_max && self.soc_init_max <= 1.0) {
            return bad("soc_init_min", "need 0 <= soc_init_min <= soc_init_max <= 1");
        }
        if !(self.charge_target_soc > 0.0 && self.charge_target_soc <= 1.0) {
            return bad("charge_target_soc", "must lie in (0, 1]");
        }
        if self.scenarios == 0 {
            return bad("scenarios", "must be >= 1");
        }
        if self.gmm_components == 0 {
            return bad("gmm_components", "must be >= 1");
        }
        if self.em_max_iter == 0 {
            return bad("em_max_iter", "must be >= 1");
        }
        if self.regions.is_empty() {
            return bad("regions", "at least one region is required");
        }
        if let Some(r) = self.regions.iter().find(|r| !r.is_valid()) {
            return bad("regions", &format!("invalid rectangle {r:?}"));
        }
        if !self.pois.is_empty() {
            if self.pois.len() != self.regions.len() {
                return bad("pois", "must list one POI per region");
            }
            if self.pois.iter().zip(&self.regions).any(|(p, r)| !r.contains(p)) {
                return bad("pois", "each POI must lie inside its region");
            }
        }
        if self.fleet_size == 0 {
            return bad("fleet_size", "must be >= 1");
        }
        Ok(())
    }

    pub fn poi(&self, region: usize) -> GeoPoint {
        self.pois.get(region).copied().unwrap_or_else(|| self.regions[region].center())
    }

    /// Consumption rates as battery fraction per km.
    pub fn consumption_rates(&self) -> Vec<f64> {
        self.omega_kwh_per_km.iter().map(|w| w / self.battery_kwh).collect()
    }

    pub fn speed_km_per_min(&self) -> f64 {
        self.speed_kmh / 60.0
    }

    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let b = |v: bool| if v { "true" } else { "false" };
        let _ = writeln!(s, "alpha_min = {}", self.alpha_min);
        let _ = writeln!(s, "alpha_max = {}", self.alpha_max);
        let _ = writeln!(s, "beta1 = {}", self.beta1);
        let _ = writeln!(s, "beta2 = {}", self.beta2);
        let _ = writeln!(s, "speed_kmh = {}", self.speed_kmh);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "omega_kwh_per_km = {}", join(&self.omega_kwh_per_km));
        let _ = writeln!(s, "window_min = {}", self.window_min);
        let _ = writeln!(s, "theta1 = {}", self.theta1);
        let _ = writeln!(s, "theta2 = {}", self.theta2);
        let _ = writeln!(s, "pi1 = {}", self.pi1);
        let _ = writeln!(s, "pi2 = {}", self.pi2);
        let _ = writeln!(s, "soc_init_min = {}", self.soc_init_min);
        let _ = writeln!(s, "soc_init_max = {}", self.soc_init_max);
        let _ = writeln!(s, "battery_kwh = {}", self.battery_kwh);
        let _ = writeln!(s, "charge_rate = {}", self.charge_rate);
        let _ = writeln!(s, "charge_target_soc = {}", self.charge_target_soc);
        let _ = writeln!(s, "cs_radius_km = {}", self.cs_radius_km);
        let _ = writeln!(s, "scenarios = {}", self.scenarios);
        let _ = writeln!(s, "gmm_components = {}", self.gmm_components);
        let _ = writeln!(s, "em_max_iter = {}", self.em_max_iter);
        let rects: Vec<String> = self
            .regions
            .iter()
            .map(|r| join(&[r.min_lat, r.min_lon, r.max_lat, r.max_lon]))
            .collect();
        let _ = writeln!(s, "regions = {}", rects.join("; "));
        let pois: Vec<String> = self.pois.iter().map(|p| join(&[p.lat, p.lon])).collect();
        let _ = writeln!(s, "pois = {}", pois.join("; "));
        let _ = writeln!(s, "avg_trip_fallback_km = {}", self.avg_trip_fallback_km);
        let _ = writeln!(s, "fleet_size = {}", self.fleet_size);
        let _ = writeln!(s, "rider_patience_min = {}", self.rider_patience_min);
        let _ = writeln!(s, "fleet_cap = {}", b(self.fleet_cap));
        let _ = writeln!(s, "charge_after_trip = {}", b(self.charge_after_trip));
        let _ = writeln!(s, "keep_guided_at_poi = {}", b(self.keep_guided_at_poi));
        let qs = match self.queue_source {
            QueueSource::Targeted => "targeted",
            QueueSource::Radius => "radius",
        };
        let _ = writeln!(s, "queue_source = {qs}");
        let _ = writeln!(s, "shared_sg_trajectory = {}", b(self.shared_sg_trajectory));
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
