//! Trip and charging-station CSV ingestion, demand binning and derived
//! parameter estimates.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{distance, Rect};
use crate::types::ChargingStation;
use crate::GeoPoint;

pub const TRIP_COLUMNS: [&str; 6] =
    ["pickup_datetime", "dropoff_datetime", "pickup_lat", "pickup_lon", "dropoff_lat", "dropoff_lon"];
pub const STATION_COLUMNS: [&str; 4] = ["station_id", "lat", "lon", "num_chargers"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Open { path: String, source: std::io::Error },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no trips originate in the region; use the configured fallback")]
    NoTrips,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParseReport {
    pub total: usize,
    pub kept: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripRecord {
    pub pickup_time: NaiveDateTime,
    pub dropoff_time: NaiveDateTime,
    pub pickup: GeoPoint,
    pub dropoff: GeoPoint,
}

impl TripRecord {
    pub fn distance_km(&self) -> f64 {
        distance(&self.pickup, &self.dropoff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DayType {
    Weekday,
    Weekend,
}

impl DayType {
    pub fn of(date: NaiveDate) -> Self {
        match date.weekday() {
            Weekday::Sat | Weekday::Sun => DayType::Weekend,
            _ => DayType::Weekday,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DayType::Weekday => "weekday",
            DayType::Weekend => "weekend",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "weekday" => Some(DayType::Weekday),
            "weekend" => Some(DayType::Weekend),
            _ => None,
        }
    }
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t);
        }
    }
    chrono::DateTime::parse_from_rfc3339(s).ok().map(|t| t.naive_local())
}

/// Minutes since midnight.
pub fn minute_of_day(t: &NaiveDateTime) -> f64 {
    t.num_seconds_from_midnight() as f64 / 60.0 + t.nanosecond() as f64 / 60e9
}

fn column_index(headers: &csv::StringRecord, required: &[&str]) -> Result<Vec<usize>, IngestError> {
    required
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| IngestError::MissingColumn((*name).to_string()))
        })
        .collect()
}

fn open(path: &Path) -> Result<std::fs::File, IngestError> {
    std::fs::File::open(path).map_err(|source| IngestError::Open { path: path.display().to_string(), source })
}

pub fn parse_trips(path: &Path) -> Result<(Vec<TripRecord>, ParseReport), IngestError> {
    read_trips(open(path)?, None)
}

/// Like [`parse_trips`] but drops records with either endpoint outside `bbox`.
pub fn parse_trips_within(path: &Path, bbox: &Rect) -> Result<(Vec<TripRecord>, ParseReport), IngestError> {
    read_trips(open(path)?, Some(bbox))
}

pub fn read_trips<R: Read>(reader: R, bbox: Option<&Rect>) -> Result<(Vec<TripRecord>, ParseReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let idx = column_index(rdr.headers()?, &TRIP_COLUMNS)?;
    let mut report = ParseReport::default();
    let mut out = Vec::new();
    for row in rdr.records() {
        report.total += 1;
        let Ok(row) = row else {
            report.dropped += 1;
            continue;
        };
        let field = |i: usize| row.get(idx[i]).unwrap_or("");
        let num = |i: usize| field(i).trim().parse::<f64>().ok();
        let parsed = (|| {
            let pickup_time = parse_timestamp(field(0))?;
            let dropoff_time = parse_timestamp(field(1))?;
            let pickup = GeoPoint::new(num(2)?, num(3)?);
            let dropoff = GeoPoint::new(num(4)?, num(5)?);
            if dropoff_time < pickup_time || !pickup.is_valid() || !dropoff.is_valid() {
                return None;
            }
            if let Some(b) = bbox {
                if !b.contains(&pickup) || !b.contains(&dropoff) {
                    return None;
                }
            }
            Some(TripRecord { pickup_time, dropoff_time, pickup, dropoff })
        })();
        match parsed {
            Some(t) => {
                report.kept += 1;
                out.push(t);
            }
            None => report.dropped += 1,
        }
    }
    Ok((out, report))
}

pub fn write_trips<W: Write>(writer: W, trips: &[TripRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRIP_COLUMNS)?;
    for t in trips {
        w.write_record([
            t.pickup_time.format("%Y-%m-%dT%H:%M:%S").to_string(),
            t.dropoff_time.format("%Y-%m-%dT%H:%M:%S").to_string(),
            format!("{:.6}", t.pickup.lat),
            format!("{:.6}", t.pickup.lon),
            format!("{:.6}", t.dropoff.lat),
            format!("{:.6}", t.dropoff.lon),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_stations(path: &Path) -> Result<(Vec<ChargingStation>, ParseReport), IngestError> {
    read_stations(open(path)?)
}

pub fn read_stations<R: Read>(reader: R) -> Result<(Vec<ChargingStation>, ParseReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let idx = column_index(rdr.headers()?, &STATION_COLUMNS)?;
    let mut report = ParseReport::default();
    let mut out = Vec::new();
    for row in rdr.records() {
        report.total += 1;
        let parsed = row.ok().and_then(|row| {
            let f = |i: usize| row.get(idx[i]).map(str::trim).unwrap_or("");
            let id: usize = f(0).parse().ok()?;
            let loc = GeoPoint::new(f(1).parse().ok()?, f(2).parse().ok()?);
            let n: u32 = f(3).parse().ok()?;
            if !loc.is_valid() {
                return None;
            }
            ChargingStation::new(id, loc, n).ok()
        });
        match parsed {
            Some(s) => {
                report.kept += 1;
                out.push(s);
            }
            None => report.dropped += 1,
        }
    }
    Ok((out, report))
}

pub fn write_stations<W: Write>(writer: W, stations: &[ChargingStation]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STATION_COLUMNS)?;
    for s in stations {
        w.write_record([
            s.id.to_string(),
            format!("{:.6}", s.loc.lat),
            format!("{:.6}", s.loc.lon),
            s.num_chargers.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Index of the first region whose rectangle contains `p`.
pub fn region_of(p: &GeoPoint, regions: &[Rect]) -> Option<usize> {
    regions.iter().position(|r| r.contains(p))
}

/// Observed demand per day, region and window of day.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DemandSeries {
    pub window_min: f64,
    pub num_regions: usize,
    pub windows_per_day: usize,
    /// date -> region -> window -> count
    pub days: BTreeMap<NaiveDate, Vec<Vec<u32>>>,
}

impl DemandSeries {
    pub fn count_on(&self, date: NaiveDate, region: usize, window: usize) -> u32 {
        self.days.get(&date).map_or(0, |d| d[region][window])
    }

    /// Count summed over all days.
    pub fn count(&self, region: usize, window: usize) -> u32 {
        self.days.values().map(|d| d[region][window]).sum()
    }

    pub fn total(&self) -> u64 {
        self.days.values().flatten().flatten().map(|&c| c as u64).sum()
    }

    /// History vector for one slot across all days of the given type.
    pub fn observations(&self, day_type: DayType, region: usize, window: usize) -> Vec<u32> {
        self.days
            .iter()
            .filter(|(d, _)| DayType::of(**d) == day_type)
            .map(|(_, v)| v[region][window])
            .collect()
    }

    pub fn day_types(&self) -> Vec<DayType> {
        let mut v: Vec<DayType> = self.days.keys().map(|d| DayType::of(*d)).collect();
        v.sort();
        v.dedup();
        v
    }
}

pub fn window_index(t: &NaiveDateTime, window_min: f64) -> usize {
    (minute_of_day(t) / window_min).floor() as usize
}

pub fn bin_demand(trips: &[TripRecord], regions: &[Rect], window_min: f64) -> DemandSeries {
    let windows_per_day = (1440.0 / window_min).round() as usize;
    let mut series = DemandSeries {
        window_min,
        num_regions: regions.len(),
        windows_per_day,
        days: BTreeMap::new(),
    };
    for t in trips {
        let Some(r) = region_of(&t.pickup, regions) else { continue };
        let w = window_index(&t.pickup_time, window_min).min(windows_per_day - 1);
        let day = series
            .days
            .entry(t.pickup_time.date())
            .or_insert_with(|| vec![vec![0; windows_per_day]; regions.len()]);
        day[r][w] += 1;
    }
    series
}

pub fn estimate_avg_trip(trips: &[TripRecord], region: &Rect) -> Result<f64, IngestError> {
    let (sum, n) = trips
        .iter()
        .filter(|t| region.contains(&t.pickup))
        .fold((0.0, 0usize), |(s, n), t| (s + t.distance_km(), n + 1));
    if n == 0 {
        return Err(IngestError::NoTrips);
    }
    Ok(sum / n as f64)
}

/// Number of trips whose drop-off falls in `[start, start + window_min)` of `date`.
pub fn estimate_fleet_size(trips: &[TripRecord], date: NaiveDate, window: usize, window_min: f64) -> usize {
    trips
        .iter()
        .filter(|t| t.dropoff_time.date() == date && window_index(&t.dropoff_time, window_min) == window)
        .count()
}

/// Mean drop-off count per window of day over the days of each type.
pub fn fleet_size_profile(trips: &[TripRecord], window_min: f64) -> BTreeMap<DayType, Vec<f64>> {
    let windows_per_day = (1440.0 / window_min).round() as usize;
    let mut per_day: BTreeMap<NaiveDate, Vec<u32>> = BTreeMap::new();
    for t in trips {
        per_day.entry(t.pickup_time.date()).or_insert_with(|| vec![0; windows_per_day]);
        let w = window_index(&t.dropoff_time, window_min).min(windows_per_day - 1);
        per_day.entry(t.dropoff_time.date()).or_insert_with(|| vec![0; windows_per_day])[w] += 1;
    }
    let mut out = BTreeMap::new();
    for dt in [DayType::Weekday, DayType::Weekend] {
        let days: Vec<&Vec<u32>> =
            per_day.iter().filter(|(d, _)| DayType::of(**d) == dt).map(|(_, v)| v).collect();
        if days.is_empty() {
            continue;
        }
        let mean = (0..windows_per_day)
            .map(|w| days.iter().map(|d| d[w] as f64).sum::<f64>() / days.len() as f64)
            .collect();
        out.insert(dt, mean);
    }
    out
}
