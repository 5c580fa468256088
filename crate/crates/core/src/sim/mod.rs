//! Policy simulation and reporting.

pub mod engine;
pub mod metrics;
pub mod policy;
pub mod report;

pub use engine::{run, step, DayDemand, FleetState, PolicyRun, RunOptions, SimError, SimInput};
pub use metrics::{metrics_acwt, metrics_mr, metrics_rawt, WindowMetrics};
pub use policy::{GuidanceMode, MatchObjective, Policy};
