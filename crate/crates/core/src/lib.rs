//! Proactive guidance of idle electric vehicles and batched rider matching
//! with charging-station selection, plus the rolling-horizon simulator used
//! to compare dispatch policies.
//!
//! Numeric primitives that are independent of the data model (distances,
//! charging-wait distributions, supply penalties) are generic over
//! [`num::Scalar`]; the aliases below fix the usual `f64` instantiation.

pub mod assignment;
pub mod bundle;
pub mod charging;
pub mod config;
pub mod flow;
pub mod forecast;
pub mod geo;
pub mod guidance;
pub mod ingest;
pub mod matching;
pub mod num;
pub mod rng;
pub mod sim;
pub mod synth;
pub mod types;
pub mod validate;

pub type GeoPoint = geo::LatLon<f64>;
pub type GeoRect = geo::Rect<f64>;
pub type WaitDistribution = charging::GaussianWait<f64>;

pub type GeoPoint32 = geo::LatLon<f32>;
pub type WaitDistribution32 = charging::GaussianWait<f32>;

pub use config::Config;
