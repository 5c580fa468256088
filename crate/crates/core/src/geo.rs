//! Coordinates and the local planar distance used everywhere in the model.
//!
//! Distances use an equirectangular projection: longitude differences are
//! scaled by the cosine of the mid-latitude and the result is treated as a
//! planar Euclidean distance on a sphere of radius 6371 km. Inside a city
//! sized service area the error against great-circle distance is negligible.

use serde::{Deserialize, Serialize};

use crate::num::Scalar;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon<T = f64> {
    pub lat: T,
    pub lon: T,
}

impl<T: Scalar> LatLon<T> {
    pub fn new(lat: T, lon: T) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && self.lat.abs() <= T::lit(90.0)
            && self.lon.abs() <= T::lit(180.0)
    }
}

/// Equirectangular distance in km.
pub fn distance<T: Scalar>(a: &LatLon<T>, b: &LatLon<T>) -> T {
    let to_rad = T::lit(std::f64::consts::PI / 180.0);
    let mid = (a.lat + b.lat) / T::lit(2.0) * to_rad;
    let dx = (b.lon - a.lon) * to_rad * mid.cos();
    let dy = (b.lat - a.lat) * to_rad;
    T::lit(EARTH_RADIUS_KM) * (dx * dx + dy * dy).sqrt()
}

/// Axis-aligned lat/lon rectangle, closed on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<T = f64> {
    pub min_lat: T,
    pub min_lon: T,
    pub max_lat: T,
    pub max_lon: T,
}

impl<T: Scalar> Rect<T> {
    pub fn new(min_lat: T, min_lon: T, max_lat: T, max_lon: T) -> Self {
        Self { min_lat, min_lon, max_lat, max_lon }
    }

    pub fn is_valid(&self) -> bool {
        self.min_lat <= self.max_lat
            && self.min_lon <= self.max_lon
            && LatLon::new(self.min_lat, self.min_lon).is_valid()
            && LatLon::new(self.max_lat, self.max_lon).is_valid()
    }

    pub fn contains(&self, p: &LatLon<T>) -> bool {
        p.lat >= self.min_lat && p.lat <= self.max_lat && p.lon >= self.min_lon && p.lon <= self.max_lon
    }

    pub fn center(&self) -> LatLon<T> {
        let two = T::lit(2.0);
        LatLon::new((self.min_lat + self.max_lat) / two, (self.min_lon + self.max_lon) / two)
    }
}
