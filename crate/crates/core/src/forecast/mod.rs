//! Probabilistic demand forecasting.
//!
//! A forecaster maps every (day type, region, window of day) slot to a
//! Gaussian mixture over the request count. The guidance model consumes
//! Monte Carlo scenarios drawn from it; the deterministic benchmark consumes
//! the rounded mixture mean.

pub mod gmm;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::ingest::{DayType, DemandSeries};
use crate::rng;
pub use gmm::{fit_em, Mixture, VARIANCE_FLOOR};

/// Minimum history length for a mixture fit; shorter slots get one Gaussian.
pub const MIN_OBSERVATIONS: usize = 8;

const FORMAT_HEADER: &str = "evhail-forecast v1";

#[derive(Debug, Error, PartialEq)]
pub enum ForecastError {
    #[error("forecast file: {0}")]
    Format(String),
    #[error("forecast file is version `{0}`, expected `{FORMAT_HEADER}`")]
    Version(String),
}

/// Anything that can produce a per-slot demand distribution.
pub trait Forecaster {
    fn mixture(&self, day_type: DayType, region: usize, window: usize) -> Mixture;
    fn num_regions(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotModel {
    pub history: Vec<u32>,
    pub mixture: Mixture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastModel {
    pub window_min: f64,
    pub num_regions: usize,
    pub windows_per_day: usize,
    pub components: usize,
    pub slots: BTreeMap<(DayType, usize, usize), SlotModel>,
}

/// Sampled demand outcomes: `samples[region][s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandScenarioSet {
    pub samples: Vec<Vec<u32>>,
}

impl DemandScenarioSet {
    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn fit_slot(history: &[u32], components: usize, max_iter: usize) -> Mixture {
    let data: Vec<f64> = history.iter().map(|&c| c as f64).collect();
    if data.is_empty() {
        return Mixture::single(0.0, VARIANCE_FLOOR);
    }
    if data.len() < MIN_OBSERVATIONS {
        let (m, v) = gmm::sample_mean_variance(&data);
        return Mixture::single(m, v);
    }
    fit_em(&data, components, max_iter)
}

pub fn fit(history: &DemandSeries, components: usize, max_iter: usize) -> ForecastModel {
    let mut slots = BTreeMap::new();
    for dt in history.day_types() {
        for r in 0..history.num_regions {
            for w in 0..history.windows_per_day {
                let obs = history.observations(dt, r, w);
                let mixture = fit_slot(&obs, components, max_iter);
                slots.insert((dt, r, w), SlotModel { history: obs, mixture });
            }
        }
    }
    ForecastModel {
        window_min: history.window_min,
        num_regions: history.num_regions,
        windows_per_day: history.windows_per_day,
        components,
        slots,
    }
}

/// One truncated, rounded draw.
pub fn draw_count<R: Rng>(mix: &Mixture, rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut k = mix.len() - 1;
    for (j, w) in mix.weights.iter().enumerate() {
        acc += w;
        if u < acc {
            k = j;
            break;
        }
    }
    let x = Normal::new(mix.means[k], mix.variances[k].sqrt()).expect("valid normal").sample(rng);
    round_half_up(x.max(0.0)) as u32
}

pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

pub fn sample_region(mix: &Mixture, n: usize, seed: u64) -> Vec<u32> {
    let mut g = rng::stream(seed, &[]);
    (0..n).map(|_| draw_count(mix, &mut g)).collect()
}

pub fn sample_scenarios<F: Forecaster + ?Sized>(
    model: &F,
    day_type: DayType,
    window: usize,
    n: usize,
    seed: u64,
) -> DemandScenarioSet {
    assert!(n >= 1, "need at least one scenario");
    let samples = (0..model.num_regions())
        .map(|r| sample_region(&model.mixture(day_type, r, window), n, rng::derive_seed(seed, &[r as u64])))
        .collect();
    DemandScenarioSet { samples }
}

pub fn point_forecast<F: Forecaster + ?Sized>(model: &F, day_type: DayType, region: usize, window: usize) -> u32 {
    round_half_up(model.mixture(day_type, region, window).mean().max(0.0)) as u32
}

impl Forecaster for ForecastModel {
    fn mixture(&self, day_type: DayType, region: usize, window: usize) -> Mixture {
        let other = match day_type {
            DayType::Weekday => DayType::Weekend,
            DayType::Weekend => DayType::Weekday,
        };
        self.slots
            .get(&(day_type, region, window))
            .or_else(|| self.slots.get(&(other, region, window)))
            .map(|s| s.mixture.clone())
            .unwrap_or_else(|| Mixture::single(0.0, VARIANCE_FLOOR))
    }

    fn num_regions(&self) -> usize {
        self.num_regions
    }
}

fn fmt_list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ForecastModel {
    /// Versioned text form. Header lines are `key = value`; each slot is one
    /// `slot` line of space separated fields:
    /// `slot <day_type> <region> <window> <weights> <means> <variances> <history>`
    /// with comma separated lists (`-` for an empty history).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_HEADER}");
        let _ = writeln!(s, "window_min = {}", self.window_min);
        let _ = writeln!(s, "num_regions = {}", self.num_regions);
        let _ = writeln!(s, "windows_per_day = {}", self.windows_per_day);
        let _ = writeln!(s, "components = {}", self.components);
        for ((dt, r, w), slot) in &self.slots {
            let hist = if slot.history.is_empty() { "-".to_string() } else { fmt_list(&slot.history) };
            let _ = writeln!(
                s,
                "slot {} {r} {w} {} {} {} {hist}",
                dt.as_str(),
                fmt_list(&slot.mixture.weights),
                fmt_list(&slot.mixture.means),
                fmt_list(&slot.mixture.variances),
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ForecastError> {
        let err = |m: &str| ForecastError::Format(m.to_string());
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("").trim();
        if header != FORMAT_HEADER {
            return Err(ForecastError::Version(header.to_string()));
        }
        let mut kv = BTreeMap::new();
        let mut slots = BTreeMap::new();
        for line in lines.map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("slot ") {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 7 {
                    return Err(err("slot line needs 7 fields"));
                }
                let dt = DayType::parse(f[0]).ok_or_else(|| err("bad day type"))?;
                let r: usize = f[1].parse().map_err(|_| err("bad region"))?;
                let w: usize = f[2].parse().map_err(|_| err("bad window"))?;
                let list = |s: &str| -> Result<Vec<f64>, ForecastError> {
                    s.split(',').map(|x| x.parse::<f64>().map_err(|_| err("bad number"))).collect()
                };
                let mixture = Mixture { weights: list(f[3])?, means: list(f[4])?, variances: list(f[5])? };
                if !mixture.is_valid() {
                    return Err(err("invalid mixture"));
                }
                let history = if f[6] == "-" {
                    Vec::new()
                } else {
                    f[6].split(',').map(|x| x.parse::<u32>().map_err(|_| err("bad history"))).collect::<Result<_, _>>()?
                };
                slots.insert((dt, r, w), SlotModel { history, mixture });
            } else {
                let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
                kv.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| kv.get(k).ok_or_else(|| err(&format!("missing `{k}`")));
        Ok(ForecastModel {
            window_min: get("window_min")?.parse().map_err(|_| err("window_min"))?,
            num_regions: get("num_regions")?.parse().map_err(|_| err("num_regions"))?,
            windows_per_day: get("windows_per_day")?.parse().map_err(|_| err("windows_per_day"))?,
            components: get("components")?.parse().map_err(|_| err("components"))?,
            slots,
        })
    }
}
