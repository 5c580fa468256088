//! Domain model shared by the solvers and the simulator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::Rect;
use crate::GeoPoint;

/// A ride-hailing region: its rectangle, the POI guided EVs drive to, and the
/// mean trip length of rides that start inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    pub poi: GeoPoint,
    pub bounds: Rect,
    pub avg_trip_km: f64,
}

impl Region {
    pub fn new(id: usize, bounds: Rect, poi: GeoPoint, avg_trip_km: f64) -> Result<Self, ModelError> {
        if !bounds.is_valid() || !bounds.contains(&poi) {
            return Err(ModelError::Invalid(format!("region {id}: poi must lie inside valid bounds")));
        }
        if !(avg_trip_km > 0.0) {
            return Err(ModelError::Invalid(format!("region {id}: avg_trip_km must be > 0")));
        }
        Ok(Self { id, poi, bounds, avg_trip_km })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvStatus {
    Idle,
    Guided,
    Serving,
    TravelingToCs,
    Charging,
}

impl EvStatus {
    /// The closed transition graph. `Idle -> Serving` covers EVs matched
    /// without guidance; `Serving -> Idle` covers trips with post-trip charging
    /// disabled.
    pub fn can_transition_to(self, next: EvStatus) -> bool {
        use EvStatus::*;
        matches!(
            (self, next),
            (Idle, Guided)
                | (Idle, Serving)
                | (Guided, Serving)
                | (Guided, Idle)
                | (Serving, TravelingToCs)
                | (Serving, Idle)
                | (TravelingToCs, Charging)
                | (Charging, Idle)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ev {
    pub id: usize,
    pub loc: GeoPoint,
    /// Battery fraction in [0, 1].
    pub soc: f64,
    /// Battery fraction consumed per km.
    pub consumption_rate: f64,
    /// Currency per km of idle (guidance) driving.
    pub idle_cost_per_km: f64,
    pub status: EvStatus,
}

impl Ev {
    pub fn new(id: usize, loc: GeoPoint, soc: f64, consumption_rate: f64, idle_cost_per_km: f64) -> Result<Self, ModelError> {
        if !loc.is_valid() {
            return Err(ModelError::Invalid(format!("ev {id}: invalid location")));
        }
        if !(0.0..=1.0).contains(&soc) {
            return Err(ModelError::Invalid(format!("ev {id}: soc {soc} outside [0,1]")));
        }
        if !(consumption_rate > 0.0) || !(idle_cost_per_km > 0.0) {
            return Err(ModelError::Invalid(format!("ev {id}: rates must be positive")));
        }
        Ok(Self { id, loc, soc, consumption_rate, idle_cost_per_km, status: EvStatus::Idle })
    }

    pub fn transition(&mut self, next: EvStatus) -> Result<(), ModelError> {
        if !self.status.can_transition_to(next) {
            return Err(ModelError::Transition { ev: self.id, from: self.status, to: next });
        }
        self.status = next;
        Ok(())
    }
}

/// Result of draining the battery over some distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocAfterTravel {
    pub soc: f64,
    pub exhausted: bool,
}

pub fn soc_after_travel(ev: &Ev, km: f64) -> SocAfterTravel {
    debug_assert!(km >= 0.0);
    let remaining = ev.soc - ev.consumption_rate * km;
    if remaining < 0.0 {
        SocAfterTravel { soc: 0.0, exhausted: true }
    } else {
        SocAfterTravel { soc: remaining, exhausted: false }
    }
}

/// A ride request. Times are minutes since the start of the simulated day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiderRequest {
    pub id: String,
    pub origin: GeoPoint,
    pub dest: GeoPoint,
    pub req_time: f64,
    pub latest_departure: f64,
    pub trip_km: f64,
}

impl RiderRequest {
    pub fn new(id: impl Into<String>, origin: GeoPoint, dest: GeoPoint, req_time: f64, latest_departure: f64) -> Result<Self, ModelError> {
        let id = id.into();
        if latest_departure < req_time {
            return Err(ModelError::Invalid(format!("rider {id}: latest departure before request")));
        }
        let trip_km = crate::geo::distance(&origin, &dest);
        Ok(Self { id, origin, dest, req_time, latest_departure, trip_km })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingStation {
    pub id: usize,
    pub loc: GeoPoint,
    pub num_chargers: u32,
}

impl ChargingStation {
    pub fn new(id: usize, loc: GeoPoint, num_chargers: u32) -> Result<Self, ModelError> {
        if num_chargers == 0 {
            return Err(ModelError::Invalid(format!("station {id}: needs at least one charger")));
        }
        Ok(Self { id, loc, num_chargers })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchingWindow {
    pub index: usize,
    /// Minutes since the start of the day.
    pub start: f64,
    pub duration: f64,
}

impl BatchingWindow {
    pub fn new(index: usize, duration: f64) -> Self {
        Self { index, start: index as f64 * duration, duration }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// Windows tiling one day; the duration must divide 24 h.
    pub fn day(duration: f64) -> Result<Vec<BatchingWindow>, ModelError> {
        let per_day = 1440.0 / duration;
        if !(duration > 0.0) || (per_day - per_day.round()).abs() > 1e-9 {
            return Err(ModelError::Invalid(format!("window duration {duration} min does not divide a day")));
        }
        Ok((0..per_day.round() as usize).map(|i| BatchingWindow::new(i, duration)).collect())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model value: {0}")]
    Invalid(String),
    #[error("ev {ev}: illegal status transition {from:?} -> {to:?}")]
    Transition { ev: usize, from: EvStatus, to: EvStatus },
}
