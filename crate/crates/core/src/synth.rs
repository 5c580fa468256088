//! Synthetic city for desk-scale experiments.
//!
//! Demand in every region follows a day-type specific hourly profile. Each
//! region and two-hour block independently either runs at its base rate or
//! surges, which makes per-slot counts strongly bimodal across days. Trips
//! start inside a region and end a few kilometres away. Charging stations sit
//! outside the regions but within one window's drive of a region anchor.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::bundle::Bundle;
use crate::config::{Config, ConfigError};
use crate::geo::distance;
use crate::ingest::{DayType, TripRecord};
use crate::rng::{stream, STREAM_SYNTH};
use crate::types::ChargingStation;
use crate::GeoPoint;

/// Area trips and stations are confined to.
pub const CITY: crate::GeoRect = crate::geo::Rect { min_lat: 40.70, min_lon: -74.02, max_lat: 40.80, max_lon: -73.93 };

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub eval_days: usize,
    pub history_days: usize,
    pub stations: usize,
    /// Multiplies every demand rate.
    pub demand_scale: f64,
    pub surge_prob: f64,
    pub surge_factor: f64,
    pub trip_km: (f64, f64),
    /// Station distance band to the nearest region anchor.
    pub station_km: (f64, f64),
    /// Inclusive range of chargers per station.
    pub chargers: (u32, u32),
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            eval_days: 12,
            history_days: 56,
            stations: 8,
            demand_scale: 1.0,
            surge_prob: 0.55,
            surge_factor: 2.5,
            trip_km: (1.0, 5.0),
            station_km: (2.0, 4.5),
            chargers: (1, 2),
        }
    }
}

/// Requests per ten minutes in one region at base rate, by hour.
const WEEKDAY_PROFILE: [f64; 24] =
    [1.5, 1.0, 0.8, 0.6, 0.6, 1.0, 2.5, 5.0, 6.0, 5.0, 3.5, 3.5, 4.0, 3.5, 3.5, 4.0, 4.5, 5.5, 6.0, 5.0, 4.0, 3.5, 3.0, 2.0];
const WEEKEND_PROFILE: [f64; 24] =
    [4.5, 4.0, 3.0, 2.0, 1.0, 0.6, 0.6, 0.8, 1.5, 2.5, 3.5, 4.0, 4.5, 4.5, 4.5, 4.5, 4.5, 4.5, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0];
const REGION_WEIGHTS: [f64; 4] = [1.2, 0.9, 1.0, 0.8];

/// Evaluation dates in January 2016, alternating weekdays and weekend days
/// until `n` dates are chosen.
pub fn evaluation_dates(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid date");
    let days = (0..).map(|k| start + Duration::days(k));
    let weekdays = days.clone().filter(|d| DayType::of(*d) == DayType::Weekday);
    let weekends = days.filter(|d| DayType::of(*d) == DayType::Weekend);
    let n_weekend = n / 2;
    let mut out: Vec<NaiveDate> = weekdays.take(n - n_weekend).chain(weekends.take(n_weekend)).collect();
    out.sort();
    out
}

/// `n` consecutive days ending on 2015-12-27, a Sunday.
pub fn history_dates(n: usize) -> Vec<NaiveDate> {
    let end = NaiveDate::from_ymd_opt(2015, 12, 27).expect("valid date");
    debug_assert_eq!(end.weekday(), Weekday::Sun);
    (0..n).rev().map(|k| end - Duration::days(k as i64)).collect()
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn offset(p: &GeoPoint, km: f64, bearing: f64) -> GeoPoint {
    let dlat = km * bearing.cos() / 111.194_926_644_558_73;
    let dlon = km * bearing.sin() / (111.194_926_644_558_73 * p.lat.to_radians().cos());
    GeoPoint::new(p.lat + dlat, p.lon + dlon)
}

fn clamp_to_city(p: GeoPoint) -> GeoPoint {
    GeoPoint::new(p.lat.clamp(CITY.min_lat, CITY.max_lat), p.lon.clamp(CITY.min_lon, CITY.max_lon))
}

fn place_stations(cfg: &Config, opts: &SynthOptions, rng: &mut ChaCha8Rng) -> Vec<ChargingStation> {
    let pois: Vec<GeoPoint> = (0..cfg.regions.len()).map(|i| cfg.poi(i)).collect();
    let mut out = Vec::with_capacity(opts.stations);
    let mut tries = 0;
    while out.len() < opts.stations {
        tries += 1;
        let p = GeoPoint::new(round6(rng.gen_range(CITY.min_lat..CITY.max_lat)), round6(rng.gen_range(CITY.min_lon..CITY.max_lon)));
        let nearest = pois.iter().map(|q| distance(&p, q)).fold(f64::INFINITY, f64::min);
        let inside = cfg.regions.iter().any(|r| r.contains(&p));
        let band = (opts.station_km.0..=opts.station_km.1).contains(&nearest);
        if inside || (!band && tries < 100_000) {
            continue;
        }
        let chargers = rng.gen_range(opts.chargers.0.max(1)..=opts.chargers.1.max(opts.chargers.0).max(1));
        out.push(ChargingStation::new(out.len(), p, chargers).expect("at least one charger"));
    }
    out
}

fn day_trips(cfg: &Config, opts: &SynthOptions, date: NaiveDate, rng: &mut ChaCha8Rng) -> Vec<TripRecord> {
    let profile = match DayType::of(date) {
        DayType::Weekday => &WEEKDAY_PROFILE,
        DayType::Weekend => &WEEKEND_PROFILE,
    };
    let per_day = (1440.0 / cfg.window_min).round() as usize;
    let midnight = date.and_hms_opt(0, 0, 0).expect("valid time");
    let mut trips = Vec::new();
    for (r, rect) in cfg.regions.iter().enumerate() {
        let weight = REGION_WEIGHTS[r % REGION_WEIGHTS.len()];
        let surges: Vec<bool> = (0..12).map(|_| rng.gen_bool(opts.surge_prob)).collect();
        for w in 0..per_day {
            let minute = w as f64 * cfg.window_min;
            let hour = (minute / 60.0) as usize;
            let surge = if surges[hour / 2] { opts.surge_factor } else { 1.0 };
            let rate = opts.demand_scale * weight * profile[hour] * surge * cfg.window_min / 10.0;
            let count = if rate > 0.0 { Poisson::new(rate).expect("positive rate").sample(rng) as usize } else { 0 };
            for _ in 0..count {
                let secs = ((minute + rng.gen_range(0.0..cfg.window_min)) * 60.0).floor() as i64;
                let pickup = GeoPoint::new(
                    round6(rng.gen_range(rect.min_lat..=rect.max_lat)),
                    round6(rng.gen_range(rect.min_lon..=rect.max_lon)),
                );
                let km = rng.gen_range(opts.trip_km.0..opts.trip_km.1);
                let bearing = rng.gen_range(0.0..std::f64::consts::TAU);
                let d = clamp_to_city(offset(&pickup, km, bearing));
                let dropoff = GeoPoint::new(round6(d.lat), round6(d.lon));
                let ride = distance(&pickup, &dropoff) / cfg.speed_km_per_min();
                let pickup_time = midnight + Duration::seconds(secs);
                let dropoff_time = pickup_time + Duration::seconds((ride * 60.0).round() as i64);
                trips.push(TripRecord { pickup_time, dropoff_time, pickup, dropoff });
            }
        }
    }
    trips.sort_by(|a, b| a.pickup_time.cmp(&b.pickup_time));
    trips
}

pub fn generate(cfg: &Config, opts: &SynthOptions, seed: u64) -> Result<Bundle, ConfigError> {
    cfg.validate()?;
    let mut rng = stream(seed, &[STREAM_SYNTH, 0]);
    let stations = place_stations(cfg, opts, &mut rng);
    let gen = |dates: Vec<NaiveDate>| -> Vec<TripRecord> {
        dates
            .into_iter()
            .flat_map(|d| {
                let mut day_rng = stream(seed, &[STREAM_SYNTH, 1, d.num_days_from_ce() as u64]);
                day_trips(cfg, opts, d, &mut day_rng)
            })
            .collect()
    };
    let history = gen(history_dates(opts.history_days));
    let trips = gen(evaluation_dates(opts.eval_days));
    Ok(Bundle { trips, history, stations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calendar() {
        let d = evaluation_dates(12);
        assert_eq!(d.len(), 12);
        assert_eq!(d.iter().filter(|x| DayType::of(**x) == DayType::Weekend).count(), 6);
        assert_eq!(d[0], NaiveDate::from_ymd_opt(2016, 1, 4).unwrap());
        let h = history_dates(56);
        assert_eq!(h.len(), 56);
        assert_eq!(h[0].weekday(), Weekday::Mon);
    }

    #[test]
    fn deterministic_and_well_formed() {
        let cfg = Config::default();
        let opts = SynthOptions { eval_days: 2, history_days: 7, ..Default::default() };
        let a = generate(&cfg, &opts, 5).unwrap();
        let b = generate(&cfg, &opts, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(&cfg, &opts, 6).unwrap());
        assert_eq!(a.stations.len(), 8);
        for s in &a.stations {
            assert!(!cfg.regions.iter().any(|r| r.contains(&s.loc)));
        }
        for t in a.trips.iter().chain(&a.history) {
            assert!(cfg.regions.iter().any(|r| r.contains(&t.pickup)));
            assert!(CITY.contains(&t.dropoff));
            assert!(t.dropoff_time >= t.pickup_time);
        }
    }

    #[test]
    fn zero_regions_rejected() {
        let cfg = Config { regions: vec![], ..Config::default() };
        assert!(generate(&cfg, &SynthOptions::default(), 1).is_err());
    }
}
