//! Proactive idle-EV guidance under sampled demand.
//!
//! The stochastic objective (idle driving cost plus expected over- and
//! under-supply penalties) is replaced by its sample average over `N` demand
//! scenarios. Reachability and battery constraints only ever switch a single
//! `(EV, region)` pair off, so they are resolved into an eligibility filter
//! when the instance is built. What remains is a transportation problem with
//! a separable convex cost per region, solved exactly as a min-cost flow:
//!
//! ```text
//! source -> EV (cap 1, 0) -> region (cap 1, alpha*g) -> sink (unit arcs, marginal penalty)
//!           EV -> sink (cap 1, 0)  // stay where you are
//! ```
//!
//! All costs are integer micro-units, so the flow optimum and the brute-force
//! oracle agree exactly.

use std::fmt::Write as _;

use thiserror::Error;

use crate::flow::MinCostFlow;
use crate::geo::distance;
use crate::num::{to_micros, Scalar};
use crate::GeoPoint;

#[derive(Debug, Error, PartialEq)]
pub enum GuidanceError {
    #[error("scenario sets must be non-empty and equally sized for every region")]
    Scenarios,
    #[error("region {region}: marginal penalties are not non-decreasing")]
    NonConvex { region: usize },
    #[error("penalty weights must be positive")]
    Weights,
    #[error("brute force supports at most {max_evs} EVs and {max_regions} regions")]
    TooLarge { max_evs: usize, max_regions: usize },
    #[error("instance text: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceParams {
    pub window_min: f64,
    pub speed_km_per_min: f64,
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Cap on the number of guided EVs; `None` disables it.
    pub fleet_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceEv {
    pub id: usize,
    pub loc: GeoPoint,
    pub soc: f64,
    pub consumption_rate: f64,
    pub idle_cost_per_km: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceRegion {
    pub poi: GeoPoint,
    pub avg_trip_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidancePair {
    pub ev: usize,
    pub region: usize,
    pub distance_km: f64,
    pub idle_cost: f64,
    pub idle_cost_micros: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceInstance {
    pub evs: Vec<GuidanceEv>,
    pub regions: Vec<GuidanceRegion>,
    /// `scenarios[region][s]`
    pub scenarios: Vec<Vec<u32>>,
    pub params: GuidanceParams,
    pub pairs: Vec<GuidancePair>,
    /// `penalty_micros[region][n]`: scaled SAA penalty with `n` EVs supplied.
    penalty_micros: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectiveBreakdown {
    pub idle_cost: f64,
    pub over_supply: f64,
    pub under_supply: f64,
}

impl ObjectiveBreakdown {
    pub fn total(&self) -> f64 {
        self.idle_cost + self.over_supply + self.under_supply
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidancePlan {
    /// Region index per EV (instance order), `None` when left in place.
    pub assignment: Vec<Option<usize>>,
    pub objective: f64,
    pub objective_micros: i64,
    pub breakdown: ObjectiveBreakdown,
}

impl GuidancePlan {
    pub fn guided(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    pub fn supply(&self, regions: usize) -> Vec<usize> {
        let mut n = vec![0; regions];
        for r in self.assignment.iter().flatten() {
            n[*r] += 1;
        }
        n
    }
}

/// Reachability within one window and enough battery for the guidance leg,
/// an average trip and the reserve `lambda * soc`.
pub fn eligibility(ev: &GuidanceEv, region: &GuidanceRegion, params: &GuidanceParams) -> bool {
    let g = distance(&ev.loc, &region.poi);
    g / params.speed_km_per_min <= params.window_min
        && ev.consumption_rate * (g + region.avg_trip_km) + params.lambda * ev.soc <= ev.soc
}

/// Sample-average over- plus under-supply penalty with `n` EVs supplied.
pub fn region_penalty<T: Scalar>(n: usize, scenarios: &[u32], beta1: T, beta2: T) -> T {
    let (over, under) = penalty_parts(n, scenarios, beta1, beta2);
    over + under
}

pub fn penalty_parts<T: Scalar>(n: usize, scenarios: &[u32], beta1: T, beta2: T) -> (T, T) {
    let count = T::from_usize(scenarios.len()).expect("scenario count fits scalar");
    let (mut over, mut under) = (T::zero(), T::zero());
    for &d in scenarios {
        let d = d as usize;
        over = over + T::from_usize(n.saturating_sub(d)).expect("fits");
        under = under + T::from_usize(d.saturating_sub(n)).expect("fits");
    }
    (beta1 * over / count, beta2 * under / count)
}

/// Scaled penalty table for `n = 0..=max_n`, built from per-unit marginals
/// `(beta1 * #{d < n} - beta2 * #{d >= n}) / N` so that rounding preserves
/// their monotonicity.
fn penalty_table(scenarios: &[u32], beta1: f64, beta2: f64, max_n: usize) -> Vec<i64> {
    let count = scenarios.len() as f64;
    let base = region_penalty(0, scenarios, beta1, beta2);
    let mut table = Vec::with_capacity(max_n + 1);
    table.push(to_micros(base));
    for n in 1..=max_n {
        let below = scenarios.iter().filter(|&&d| (d as usize) < n).count() as f64;
        let marginal = (beta1 * below - beta2 * (count - below)) / count;
        let prev = *table.last().expect("non-empty");
        table.push(prev + to_micros(marginal));
    }
    table
}

impl GuidanceInstance {
    pub fn build(
        evs: Vec<GuidanceEv>,
        regions: Vec<GuidanceRegion>,
        scenarios: Vec<Vec<u32>>,
        params: GuidanceParams,
    ) -> Result<Self, GuidanceError> {
        if scenarios.len() != regions.len() {
            return Err(GuidanceError::Scenarios);
        }
        let n = scenarios.first().map_or(1, Vec::len);
        if n == 0 || scenarios.iter().any(|s| s.len() != n) {
            return Err(GuidanceError::Scenarios);
        }
        if !(params.beta1 > 0.0 && params.beta2 > 0.0) {
            return Err(GuidanceError::Weights);
        }
        let mut pairs = Vec::new();
        for (j, ev) in evs.iter().enumerate() {
            for (i, region) in regions.iter().enumerate() {
                if eligibility(ev, region, &params) {
                    let g = distance(&ev.loc, &region.poi);
                    let idle_cost = ev.idle_cost_per_km * g;
                    pairs.push(GuidancePair { ev: j, region: i, distance_km: g, idle_cost, idle_cost_micros: to_micros(idle_cost) });
                }
            }
        }
        let penalty_micros: Vec<Vec<i64>> =
            scenarios.iter().map(|s| penalty_table(s, params.beta1, params.beta2, evs.len())).collect();
        for (region, table) in penalty_micros.iter().enumerate() {
            let convex = table.windows(3).all(|w| w[1] - w[0] <= w[2] - w[1]);
            if !convex {
                return Err(GuidanceError::NonConvex { region });
            }
        }
        Ok(Self { evs, regions, scenarios, params, pairs, penalty_micros })
    }

    pub fn scenario_count(&self) -> usize {
        self.scenarios.first().map_or(0, Vec::len)
    }

    pub fn guide_limit(&self) -> usize {
        self.params.fleet_cap.map_or(self.evs.len(), |c| c.min(self.evs.len()))
    }

    pub fn marginals_micros(&self, region: usize) -> Vec<i64> {
        self.penalty_micros[region].windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn penalty_micros(&self, region: usize, n: usize) -> i64 {
        self.penalty_micros[region][n]
    }

    pub fn pair(&self, ev: usize, region: usize) -> Option<&GuidancePair> {
        self.pairs.iter().find(|p| p.ev == ev && p.region == region)
    }

    /// Scaled objective of an assignment; `None` if it uses an ineligible pair
    /// or breaks the fleet cap.
    pub fn objective_micros(&self, assignment: &[Option<usize>]) -> Option<i64> {
        let mut supply = vec![0usize; self.regions.len()];
        let mut total = 0i64;
        for (j, a) in assignment.iter().enumerate() {
            if let Some(i) = a {
                total += self.pair(j, *i)?.idle_cost_micros;
                supply[*i] += 1;
            }
        }
        if supply.iter().sum::<usize>() > self.guide_limit() {
            return None;
        }
        Some(total + supply.iter().enumerate().map(|(i, &n)| self.penalty_micros[i][n]).sum::<i64>())
    }

    /// Unscaled objective and its three components.
    pub fn evaluate(&self, assignment: &[Option<usize>]) -> ObjectiveBreakdown {
        let mut supply = vec![0usize; self.regions.len()];
        let mut idle_cost = 0.0;
        for (j, a) in assignment.iter().enumerate() {
            if let Some(i) = a {
                let ev = &self.evs[j];
                idle_cost += ev.idle_cost_per_km * distance(&ev.loc, &self.regions[*i].poi);
                supply[*i] += 1;
            }
        }
        let (mut over_supply, mut under_supply) = (0.0, 0.0);
        for (i, s) in self.scenarios.iter().enumerate() {
            let (o, u) = penalty_parts(supply[i], s, self.params.beta1, self.params.beta2);
            over_supply += o;
            under_supply += u;
        }
        ObjectiveBreakdown { idle_cost, over_supply, under_supply }
    }

    fn plan(&self, assignment: Vec<Option<usize>>, objective_micros: i64) -> GuidancePlan {
        let breakdown = self.evaluate(&assignment);
        GuidancePlan { objective: breakdown.total(), objective_micros, breakdown, assignment }
    }

    /// Global optimum of the sample-average model.
    pub fn solve(&self) -> GuidancePlan {
        let d = self.evs.len();
        let a = self.regions.len();
        let source = 0;
        let sink = d + a + 1;
        let ev_node = |j: usize| 1 + j;
        let region_node = |i: usize| 1 + d + i;
        let mut g = MinCostFlow::new(d + a + 2);
        for j in 0..d {
            g.add_edge(source, ev_node(j), 1, 0);
        }
        let mut pair_edges = Vec::with_capacity(self.pairs.len());
        for p in &self.pairs {
            pair_edges.push(g.add_edge(ev_node(p.ev), region_node(p.region), 1, p.idle_cost_micros));
        }
        for j in 0..d {
            g.add_edge(ev_node(j), sink, 1, 0);
        }
        let limit = self.guide_limit();
        for i in 0..a {
            let reachable = self.pairs.iter().filter(|p| p.region == i).count().min(limit);
            for (n, m) in self.marginals_micros(i).into_iter().take(reachable).enumerate() {
                let _ = n;
                g.add_edge(region_node(i), sink, 1, m);
            }
        }
        let result = g.run(source, sink, limit as i64);
        let mut assignment = vec![None; d];
        for (p, &e) in self.pairs.iter().zip(&pair_edges) {
            if g.flow(e) > 0 {
                assignment[p.ev] = Some(p.region);
            }
        }
        let base: i64 = (0..a).map(|i| self.penalty_micros[i][0]).sum();
        let objective_micros = result.cost + base;
        debug_assert_eq!(Some(objective_micros), self.objective_micros(&assignment));
        self.plan(assignment, objective_micros)
    }

    pub const BRUTE_FORCE_MAX_EVS: usize = 10;
    pub const BRUTE_FORCE_MAX_REGIONS: usize = 4;

    /// Exhaustive search over all `(regions + 1)^evs` assignments. Among equal
    /// objectives the first in lexicographic order (unassigned before region 0)
    /// wins.
    pub fn solve_bruteforce(&self) -> Result<GuidancePlan, GuidanceError> {
        if self.evs.len() > Self::BRUTE_FORCE_MAX_EVS || self.regions.len() > Self::BRUTE_FORCE_MAX_REGIONS {
            return Err(GuidanceError::TooLarge {
                max_evs: Self::BRUTE_FORCE_MAX_EVS,
                max_regions: Self::BRUTE_FORCE_MAX_REGIONS,
            });
        }
        let d = self.evs.len();
        let a = self.regions.len();
        let mut options: Vec<Vec<(usize, i64)>> = vec![Vec::new(); d];
        for p in &self.pairs {
            options[p.ev].push((p.region, p.idle_cost_micros));
        }
        struct Search<'a> {
            inst: &'a GuidanceInstance,
            options: Vec<Vec<(usize, i64)>>,
            limit: usize,
            current: Vec<Option<usize>>,
            supply: Vec<usize>,
            best: Option<(i64, Vec<Option<usize>>)>,
        }
        impl Search<'_> {
            fn go(&mut self, j: usize, guided: usize, cost: i64) {
                if j == self.current.len() {
                    let total = cost
                        + self.supply.iter().enumerate().map(|(i, &n)| self.inst.penalty_micros[i][n]).sum::<i64>();
                    if self.best.as_ref().map_or(true, |(b, _)| total < *b) {
                        self.best = Some((total, self.current.clone()));
                    }
                    return;
                }
                self.current[j] = None;
                self.go(j + 1, guided, cost);
                if guided < self.limit {
                    for k in 0..self.options[j].len() {
                        let (i, c) = self.options[j][k];
                        self.current[j] = Some(i);
                        self.supply[i] += 1;
                        self.go(j + 1, guided + 1, cost + c);
                        self.supply[i] -= 1;
                    }
                    self.current[j] = None;
                }
            }
        }
        let mut s = Search {
            inst: self,
            options,
            limit: self.guide_limit(),
            current: vec![None; d],
            supply: vec![0; a],
            best: None,
        };
        s.go(0, 0, 0);
        let (objective_micros, assignment) = s.best.expect("the empty assignment is always feasible");
        Ok(self.plan(assignment, objective_micros))
    }

    /// Line-oriented text dump for reproducing a case.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::from("evhail-guidance v1\n");
        let cap = p.fleet_cap.map_or("none".to_string(), |c| c.to_string());
        let _ = writeln!(
            s,
            "params {} {} {} {} {} {cap}",
            p.window_min, p.speed_km_per_min, p.lambda, p.beta1, p.beta2
        );
        for (r, sc) in self.regions.iter().zip(&self.scenarios) {
            let list: Vec<String> = sc.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "region {} {} {} {}", r.poi.lat, r.poi.lon, r.avg_trip_km, list.join(","));
        }
        for e in &self.evs {
            let _ = writeln!(s, "ev {} {} {} {} {} {}", e.id, e.loc.lat, e.loc.lon, e.soc, e.consumption_rate, e.idle_cost_per_km);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GuidanceError> {
        let bad = |m: &str| GuidanceError::Format(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some("evhail-guidance v1") {
            return Err(bad("missing `evhail-guidance v1` header"));
        }
        let f64s = |v: &[&str]| -> Result<Vec<f64>, GuidanceError> {
            v.iter().map(|x| x.parse::<f64>().map_err(|_| bad(&format!("bad number `{x}`")))).collect()
        };
        let mut params = None;
        let (mut regions, mut scenarios, mut evs) = (Vec::new(), Vec::new(), Vec::new());
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            match f[0] {
                "params" if f.len() == 7 => {
                    let v = f64s(&f[1..6])?;
                    let fleet_cap = if f[6] == "none" { None } else { Some(f[6].parse().map_err(|_| bad("bad cap"))?) };
                    params = Some(GuidanceParams {
                        window_min: v[0],
                        speed_km_per_min: v[1],
                        lambda: v[2],
                        beta1: v[3],
                        beta2: v[4],
                        fleet_cap,
                    });
                }
                "region" if f.len() == 5 => {
                    let v = f64s(&f[1..4])?;
                    regions.push(GuidanceRegion { poi: GeoPoint::new(v[0], v[1]), avg_trip_km: v[2] });
                    let sc: Result<Vec<u32>, _> = f[4].split(',').map(|x| x.parse::<u32>()).collect();
                    scenarios.push(sc.map_err(|_| bad("bad scenario list"))?);
                }
                "ev" if f.len() == 7 => {
                    let id = f[1].parse().map_err(|_| bad("bad ev id"))?;
                    let v = f64s(&f[2..7])?;
                    evs.push(GuidanceEv {
                        id,
                        loc: GeoPoint::new(v[0], v[1]),
                        soc: v[2],
                        consumption_rate: v[3],
                        idle_cost_per_km: v[4],
                    });
                }
                _ => return Err(bad(&format!("unrecognised line `{line}`"))),
            }
        }
        let params = params.ok_or_else(|| bad("missing params line"))?;
        Self::build(evs, regions, scenarios, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GuidanceParams {
        GuidanceParams { window_min: 10.0, speed_km_per_min: 0.5, lambda: 0.1, beta1: 5.0, beta2: 10.0, fleet_cap: None }
    }

    // Point `km` due east of the reference POI.
    fn east(km: f64) -> GeoPoint {
        let lat: f64 = 40.75;
        GeoPoint::new(lat, -73.99 + km / (6371.0 * lat.to_radians().cos() * std::f64::consts::PI / 180.0))
    }

    fn ev(id: usize, km: f64, alpha: f64) -> GuidanceEv {
        GuidanceEv { id, loc: east(km), soc: 0.6, consumption_rate: 0.004, idle_cost_per_km: alpha }
    }

    fn region() -> GuidanceRegion {
        GuidanceRegion { poi: east(0.0), avg_trip_km: 3.0 }
    }

    #[test]
    fn time_eligibility() {
        // 4 km at 30 km/h is 8 min, 6 km is 12 min
        assert!(eligibility(&ev(0, 4.0, 1.0), &region(), &params()));
        assert!(!eligibility(&ev(0, 6.0, 1.0), &region(), &params()));
    }

    #[test]
    fn soc_eligibility() {
        // omega * (g + trip) = 0.05, lambda * soc = 0.01, 0.06 <= 0.10
        let e = GuidanceEv { id: 0, loc: east(1.0), soc: 0.10, consumption_rate: 0.05 / 4.0, idle_cost_per_km: 1.0 };
        assert!(eligibility(&e, &region(), &params()));
        let e = GuidanceEv { soc: 0.05, ..e };
        assert!(!eligibility(&e, &region(), &params()));
    }

    #[test]
    fn penalty_examples() {
        assert!((region_penalty(2, &[1, 1, 3], 5.0f64, 10.0) - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(region_penalty(4, &[4, 4, 4], 5.0, 10.0), 0.0);
        assert_eq!(region_penalty(0, &[2], 5.0, 10.0), 20.0);
        assert!((region_penalty(2, &[1u32, 1, 3], 5.0f32, 10.0f32) - 20.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn scaled_table_tracks_real_penalty() {
        let sc = [0, 3, 3, 7, 12, 1, 5];
        let t = penalty_table(&sc, 5.0, 10.0, 15);
        for (n, v) in t.iter().enumerate() {
            let exact = region_penalty(n, &sc, 5.0, 10.0);
            assert!((*v as f64 / 1e6 - exact).abs() <= (n as f64 + 1.0) * 0.5e-6);
        }
    }

    #[test]
    fn single_ev_is_assigned() {
        // alpha * g = 1.0 beats an unmet demand of 1 at beta2 = 10
        let inst = GuidanceInstance::build(vec![ev(0, 1.0, 1.0)], vec![region()], vec![vec![1]], params()).unwrap();
        let plan = inst.solve();
        assert_eq!(plan.assignment, vec![Some(0)]);
        assert!((plan.objective - 1.0).abs() < 1e-9);
        assert_eq!(plan.objective_micros, 1_000_000);
    }

    #[test]
    fn empty_instance() {
        let inst = GuidanceInstance::build(vec![], vec![region(), region()], vec![vec![2, 2], vec![1, 3]], params()).unwrap();
        let plan = inst.solve();
        assert!(plan.assignment.is_empty());
        let expected = 20.0 + 20.0;
        assert!((plan.objective - expected).abs() < 1e-9);
        assert_eq!(inst.solve_bruteforce().unwrap(), plan);
    }

    #[test]
    fn no_eligible_pairs_leaves_everyone() {
        let inst = GuidanceInstance::build(vec![ev(0, 8.0, 1.0)], vec![region()], vec![vec![2]], params()).unwrap();
        let plan = inst.solve();
        assert_eq!(plan.assignment, vec![None]);
        assert!((plan.objective - 20.0).abs() < 1e-9);
    }

    #[test]
    fn only_cheaper_ev_is_guided() {
        // Second EV would add 2.0 + 5 * 1 of over-supply for no gain.
        let inst =
            GuidanceInstance::build(vec![ev(0, 1.0, 1.0), ev(1, 1.0, 2.0)], vec![region()], vec![vec![1]], params()).unwrap();
        let plan = inst.solve();
        assert_eq!(plan.assignment, vec![Some(0), None]);
        assert!((plan.objective - 1.0).abs() < 1e-9);
        assert_eq!(inst.solve_bruteforce().unwrap().objective_micros, plan.objective_micros);
    }

    #[test]
    fn fleet_cap_binds() {
        let p = GuidanceParams { fleet_cap: Some(1), ..params() };
        let inst = GuidanceInstance::build(vec![ev(0, 1.0, 1.0), ev(1, 0.5, 1.0)], vec![region()], vec![vec![5]], p).unwrap();
        let plan = inst.solve();
        assert_eq!(plan.assignment, vec![None, Some(0)]);
        assert_eq!(inst.solve_bruteforce().unwrap().objective_micros, plan.objective_micros);
    }

    #[test]
    fn brute_force_bounds() {
        let evs: Vec<GuidanceEv> = (0..11).map(|j| ev(j, 1.0, 1.0)).collect();
        let inst = GuidanceInstance::build(evs, vec![region()], vec![vec![1]], params()).unwrap();
        assert!(matches!(inst.solve_bruteforce(), Err(GuidanceError::TooLarge { .. })));
    }

    #[test]
    fn text_roundtrip() {
        let inst = GuidanceInstance::build(
            vec![ev(3, 1.0, 0.9), ev(7, 2.5, 1.05)],
            vec![region(), GuidanceRegion { poi: east(2.0), avg_trip_km: 2.2 }],
            vec![vec![1, 4, 2], vec![0, 0, 6]],
            GuidanceParams { fleet_cap: Some(2), ..params() },
        )
        .unwrap();
        let back = GuidanceInstance::from_text(&inst.to_text()).unwrap();
        assert_eq!(back, inst);
        assert!(GuidanceInstance::from_text("nope").is_err());
    }
}
