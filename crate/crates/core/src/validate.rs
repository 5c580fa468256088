//! Independent feasibility checks for solver output.
//!
//! Constraints are re-evaluated in their literal big-M form on 0/1 decision
//! matrices built from a plan, using raw positions rather than the solver's
//! precomputed pair tables.

use std::fmt;

use crate::assignment::max_cardinality;
use crate::charging::stations_near;
use crate::geo::distance;
use crate::guidance::{GuidanceInstance, GuidancePlan};
use crate::matching::{MatchInstance, MatchPlan};

pub const BIG_M: f64 = 1e9;
pub const OBJECTIVE_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotBinary { row: usize, col: usize },
    EvInManyRegions { ev: usize },
    FleetCap { guided: usize, cap: usize },
    Unreachable { ev: usize, region: usize },
    Battery { ev: usize, region: usize },
    EvReused { ev: usize },
    RiderReused { rider: usize },
    Energy { ev: usize, rider: usize },
    Deadline { ev: usize, rider: usize },
    StationNotCandidate { rider: usize, station: usize },
    Objective { reported: f64, recomputed: f64 },
    NotMaximal { matched: usize, maximum: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= OBJECTIVE_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// `x[region][ev]`
pub fn guidance_matrix(plan: &GuidancePlan, regions: usize) -> Vec<Vec<u8>> {
    let mut x = vec![vec![0u8; plan.assignment.len()]; regions];
    for (j, a) in plan.assignment.iter().enumerate() {
        if let Some(i) = a {
            x[*i][j] = 1;
        }
    }
    x
}

pub fn check_guidance(inst: &GuidanceInstance, x: &[Vec<u8>]) -> Vec<Violation> {
    let p = &inst.params;
    let mut out = Vec::new();
    let d = inst.evs.len();
    for (i, row) in x.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > 1 {
                out.push(Violation::NotBinary { row: i, col: j });
            }
        }
    }
    for j in 0..d {
        if x.iter().map(|row| row[j] as usize).sum::<usize>() > 1 {
            out.push(Violation::EvInManyRegions { ev: j });
        }
    }
    let guided: usize = x.iter().flatten().map(|&v| v as usize).sum();
    let cap = p.fleet_cap.unwrap_or(usize::MAX);
    if guided > cap {
        out.push(Violation::FleetCap { guided, cap });
    }
    for (i, region) in inst.regions.iter().enumerate() {
        for (j, ev) in inst.evs.iter().enumerate() {
            let slack = BIG_M * (1.0 - x[i][j] as f64);
            let g = distance(&ev.loc, &region.poi);
            if g / p.speed_km_per_min > p.window_min + slack {
                out.push(Violation::Unreachable { ev: j, region: i });
            }
            if ev.consumption_rate * (g + region.avg_trip_km) + p.lambda * ev.soc > ev.soc + slack {
                out.push(Violation::Battery { ev: j, region: i });
            }
        }
    }
    out
}

pub fn check_guidance_plan(inst: &GuidanceInstance, plan: &GuidancePlan) -> Vec<Violation> {
    let mut out = check_guidance(inst, &guidance_matrix(plan, inst.regions.len()));
    let recomputed = inst.evaluate(&plan.assignment).total();
    if !rel_close(plan.objective, recomputed) || !rel_close(plan.objective_micros as f64 / 1e6, recomputed) {
        out.push(Violation::Objective { reported: plan.objective, recomputed });
    }
    out
}

/// `y[ev][rider]`
pub fn matching_matrix(plan: &MatchPlan, evs: usize, riders: usize) -> Vec<Vec<u8>> {
    let mut y = vec![vec![0u8; riders]; evs];
    for m in &plan.matches {
        y[m.ev][m.rider] += 1;
    }
    y
}

fn energy_ok(inst: &MatchInstance, j: usize, k: usize, slack: f64) -> bool {
    let (ev, r) = (&inst.evs[j], &inst.riders[k]);
    let near = stations_near(&r.dest, &inst.stations, inst.params.cs_radius_km).expect("instance has stations");
    let furthest = near.iter().map(|s| distance(&r.dest, &s.loc)).fold(0.0, f64::max);
    ev.consumption_rate * (r.trip_km + furthest) <= ev.soc + slack
}

fn deadline_ok(inst: &MatchInstance, j: usize, k: usize, slack: f64) -> bool {
    let (ev, r, p) = (&inst.evs[j], &inst.riders[k], &inst.params);
    p.window_start + p.window_min + distance(&ev.loc, &r.origin) / p.speed_km_per_min <= r.latest_departure + slack
}

pub fn check_matching(inst: &MatchInstance, y: &[Vec<u8>]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (j, row) in y.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if v > 1 {
                out.push(Violation::NotBinary { row: j, col: k });
            }
        }
        if row.iter().map(|&v| v as usize).sum::<usize>() > 1 {
            out.push(Violation::EvReused { ev: j });
        }
    }
    for k in 0..inst.riders.len() {
        if y.iter().map(|row| row[k] as usize).sum::<usize>() > 1 {
            out.push(Violation::RiderReused { rider: k });
        }
    }
    for j in 0..inst.evs.len() {
        for k in 0..inst.riders.len() {
            let slack = BIG_M * (1.0 - y[j][k] as f64);
            if !energy_ok(inst, j, k, slack) {
                out.push(Violation::Energy { ev: j, rider: k });
            }
            if !deadline_ok(inst, j, k, slack) {
                out.push(Violation::Deadline { ev: j, rider: k });
            }
        }
    }
    out
}

/// Size of a maximum matching on the raw eligibility graph.
pub fn max_matchable(inst: &MatchInstance) -> usize {
    let adj: Vec<Vec<usize>> = (0..inst.riders.len())
        .map(|k| {
            (0..inst.evs.len())
                .filter(|&j| energy_ok(inst, j, k, 0.0) && deadline_ok(inst, j, k, 0.0))
                .filter(|&j| inst.evs[j].soc - inst.evs[j].consumption_rate * inst.riders[k].trip_km > 0.0)
                .collect()
        })
        .collect();
    max_cardinality(&adj, inst.evs.len())
}

pub fn check_matching_plan(inst: &MatchInstance, plan: &MatchPlan) -> Vec<Violation> {
    let mut out = check_matching(inst, &matching_matrix(plan, inst.evs.len(), inst.riders.len()));
    for m in &plan.matches {
        if !inst.candidates[m.rider].contains(&m.station) {
            out.push(Violation::StationNotCandidate { rider: m.rider, station: m.station });
        }
    }
    let pairs: Vec<(usize, usize)> = plan.matches.iter().map(|m| (m.ev, m.rider)).collect();
    let recomputed = inst.evaluate(&pairs);
    if !rel_close(plan.cost, recomputed) {
        out.push(Violation::Objective { reported: plan.cost, recomputed });
    }
    let maximum = max_matchable(inst);
    if plan.matches.len() != maximum {
        out.push(Violation::NotMaximal { matched: plan.matches.len(), maximum });
    }
    out
}
