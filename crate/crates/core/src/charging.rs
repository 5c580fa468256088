//! Charging-station candidate sets and the queue waiting-time model.
//!
//! Charging one queued EV takes a uniform `U(a, b)` time whose bounds come from
//! the SoC spread of the queue: `a = (target - soc_max) / CR`,
//! `b = (target - soc_min) / CR`. Waiting behind `m = floor(queued / chargers)`
//! such charges is approximated by the central limit theorem as
//! `N(m (a + b) / 2, m^2 (b - a)^2 / 12)`.

use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::geo::distance;
use crate::num::Scalar;
use crate::rng;
use crate::types::ChargingStation;
use crate::GeoPoint;

#[derive(Debug, Error, PartialEq)]
pub enum ChargingError {
    #[error("no charging stations configured")]
    NoStations,
    #[error("invalid wait model input: {0}")]
    Invalid(String),
}

/// Gaussian approximation of the waiting time at one station (minutes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWait<T = f64> {
    pub mean: T,
    pub variance: T,
    pub m: u32,
    pub a: T,
    pub b: T,
}

impl<T: Scalar> GaussianWait<T> {
    pub fn from_uniform(m: u32, a: T, b: T) -> Result<Self, ChargingError> {
        if !(a <= b) || a < T::zero() {
            return Err(ChargingError::Invalid(format!("need 0 <= a <= b, got a={a} b={b}")));
        }
        let mf = T::from_u32(m).expect("m fits scalar");
        let mean = mf * (a + b) / T::lit(2.0);
        let variance = mf * mf * (b - a) * (b - a) / T::lit(12.0);
        Ok(Self { mean, variance, m, a, b })
    }

    pub fn zero() -> Self {
        Self { mean: T::zero(), variance: T::zero(), m: 0, a: T::zero(), b: T::zero() }
    }

    pub fn std_dev(&self) -> T {
        self.variance.sqrt()
    }
}

/// Output of [`wait_distribution`]; `clamped` is set when a queued EV was above
/// the charge target and a bound had to be clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitEstimate<T = f64> {
    pub dist: GaussianWait<T>,
    pub clamped: bool,
}

/// Stations within `radius_km` of `dest` (closed ball). When none qualify the
/// single nearest station is returned; ties go to the lower id.
pub fn stations_near<'a>(
    dest: &GeoPoint,
    stations: &'a [ChargingStation],
    radius_km: f64,
) -> Result<Vec<&'a ChargingStation>, ChargingError> {
    if stations.is_empty() {
        return Err(ChargingError::NoStations);
    }
    let near: Vec<&ChargingStation> = stations.iter().filter(|s| distance(dest, &s.loc) <= radius_km).collect();
    if !near.is_empty() {
        return Ok(near);
    }
    let nearest = stations
        .iter()
        .min_by(|x, y| distance(dest, &x.loc).total_cmp(&distance(dest, &y.loc)).then(x.id.cmp(&y.id)))
        .expect("non-empty");
    log::debug!("no station within {radius_km} km of {dest:?}; falling back to station {}", nearest.id);
    Ok(vec![nearest])
}

/// Waiting-time distribution at `station` with `queued` EVs ahead.
///
/// `rate_per_min` is the charging rate in battery fraction per minute and
/// `target` the SoC at which charging stops.
pub fn wait_distribution<T: Scalar>(
    station: &ChargingStation,
    queued: usize,
    soc_min: T,
    soc_max: T,
    rate_per_min: T,
    target: T,
) -> Result<WaitEstimate<T>, ChargingError> {
    if !(rate_per_min > T::zero()) {
        return Err(ChargingError::Invalid("charging rate must be positive".into()));
    }
    if !(soc_min <= soc_max) || soc_min < T::zero() {
        return Err(ChargingError::Invalid(format!("need 0 <= soc_min <= soc_max, got {soc_min}, {soc_max}")));
    }
    let m = (queued / station.num_chargers as usize) as u32;
    if m == 0 {
        return Ok(WaitEstimate { dist: GaussianWait::zero(), clamped: false });
    }
    let mut clamped = false;
    let mut bound = |soc: T| {
        let v = (target - soc) / rate_per_min;
        if v < T::zero() {
            clamped = true;
            T::zero()
        } else {
            v
        }
    };
    let a = bound(soc_max);
    let b = bound(soc_min);
    Ok(WaitEstimate { dist: GaussianWait::from_uniform(m, a, b)?, clamped })
}

pub fn expected_wait<T: Scalar>(dist: &GaussianWait<T>) -> T {
    dist.mean
}

/// Realized wait for a given standard-normal deviate, truncated at zero.
pub fn wait_from_deviate<T: Scalar>(dist: &GaussianWait<T>, z: T) -> T {
    if dist.m == 0 {
        return T::zero();
    }
    (dist.mean + dist.std_dev() * z).max(T::zero())
}

pub fn standard_deviate(seed: u64) -> f64 {
    StandardNormal.sample(&mut rng::stream(seed, &[]))
}

pub fn sample_wait<T: Scalar>(dist: &GaussianWait<T>, seed: u64) -> T {
    wait_from_deviate(dist, T::lit(standard_deviate(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn station(id: usize, lat: f64, lon: f64, n: u32) -> ChargingStation {
        ChargingStation::new(id, GeoPoint::new(lat, lon), n).unwrap()
    }

    // Point `km` due north of (40.7, -74.0).
    fn north(km: f64) -> (f64, f64) {
        (40.7 + km / (6371.0 * std::f64::consts::PI / 180.0), -74.0)
    }

    #[test]
    fn radius_membership_and_fallback() {
        let dest = GeoPoint::new(40.7, -74.0);
        let (la, lo) = north(2.9);
        let s = vec![station(0, la, lo, 1)];
        assert_eq!(stations_near(&dest, &s, 3.0).unwrap().len(), 1);

        let (a, b) = north(4.0);
        let (c, d) = north(6.0);
        let s = vec![station(1, c, d, 1), station(0, a, b, 1)];
        let got = stations_near(&dest, &s, 3.0).unwrap();
        assert_eq!(got.iter().map(|s| s.id).collect::<Vec<_>>(), vec![0]);

        assert_eq!(stations_near(&dest, &[], 3.0), Err(ChargingError::NoStations));
    }

    #[test]
    fn boundary_is_closed() {
        let dest = GeoPoint::new(40.7, -74.0);
        let (la, lo) = north(3.0);
        let s = vec![station(0, la, lo, 1)];
        let r = distance(&dest, &s[0].loc);
        assert_eq!(stations_near(&dest, &s, r).unwrap().len(), 1);
    }

    #[test]
    fn closed_form_examples() {
        let d = GaussianWait::from_uniform(2, 1.0f64, 3.0).unwrap();
        assert_eq!(d.mean, 4.0);
        assert!((d.variance - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(expected_wait(&d), 4.0);

        let d = GaussianWait::from_uniform(3, 2.0, 2.0).unwrap();
        assert_eq!((d.mean, d.variance), (6.0, 0.0));
        assert_eq!(sample_wait(&d, 1), 6.0);
    }

    #[test]
    fn queue_to_batches() {
        let st = station(0, 40.7, -74.0, 2);
        // a = (0.8 - 0.75) / 0.05 = 1 min, b = (0.8 - 0.65) / 0.05 = 3 min
        let est = wait_distribution(&st, 4, 0.65f64, 0.75, 0.05, 0.8).unwrap();
        assert_eq!(est.dist.m, 2);
        assert!((est.dist.mean - 4.0).abs() < 1e-9);
        assert!((est.dist.variance - 4.0 / 3.0).abs() < 1e-9);
        assert!(!est.clamped);

        let est = wait_distribution(&st, 1, 0.3, 0.5, 0.05, 0.8).unwrap();
        assert_eq!(est.dist.m, 0);
        assert_eq!(expected_wait(&est.dist), 0.0);
        assert_eq!(sample_wait(&est.dist, 99), 0.0);
    }

    #[test]
    fn soc_above_target_is_clamped() {
        let st = station(0, 40.7, -74.0, 1);
        let est = wait_distribution(&st, 2, 0.5f64, 0.9, 0.01, 0.8).unwrap();
        assert!(est.clamped);
        assert_eq!(est.dist.a, 0.0);
        assert!((est.dist.b - 30.0).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_seeded() {
        let d = GaussianWait::from_uniform(2, 1.0, 3.0).unwrap();
        assert_eq!(sample_wait(&d, 5), sample_wait(&d, 5));
        let d32 = GaussianWait::<f32>::from_uniform(2, 1.0, 3.0).unwrap();
        assert!((sample_wait(&d32, 5) as f64 - sample_wait(&d, 5)).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn expected_wait_monotone_in_queue(n in 1u32..5, q in 0usize..40, lo in 0.0f64..0.4, spread in 0.0f64..0.4) {
            let st = station(0, 40.7, -74.0, n);
            let e1 = wait_distribution(&st, q, lo, lo + spread, 0.02, 0.8).unwrap();
            let e2 = wait_distribution(&st, q + 1, lo, lo + spread, 0.02, 0.8).unwrap();
            prop_assert!(expected_wait(&e2.dist) >= expected_wait(&e1.dist));
        }

        #[test]
        fn doubling_queue_and_chargers_is_invariant(n in 1u32..5, q in 0usize..40) {
            let a = wait_distribution(&station(0, 40.7, -74.0, n), q, 0.3, 0.6, 0.02, 0.8).unwrap();
            let b = wait_distribution(&station(0, 40.7, -74.0, 2 * n), 2 * q, 0.3, 0.6, 0.02, 0.8).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
