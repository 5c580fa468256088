//! Rolling-horizon simulation of one operating day per run.
//!
//! Each window: release EVs that finished charging, guide idle EVs (unless
//! the policy has no guidance), pool new and carried-over riders, match at
//! the end of the window, then send matched EVs through pickup, trip and
//! charging in continuous time.
//!
//! Policies that share a guidance mode can share one state trajectory. The
//! trajectory is advanced by the combined-objective policy of that mode; the
//! other members solve their own matching on the same fleet, rider pool and
//! station queues each window, and only their own same-batch charging visits
//! add to the queues they face.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::metrics::{ChargeRecord, WindowMetrics};
use super::policy::{GuidanceMode, MatchObjective, Policy};
use crate::charging::{expected_wait, standard_deviate, wait_distribution, wait_from_deviate, ChargingError};
use crate::config::{Config, ConfigError, QueueSource};
use crate::bundle::Bundle;
use crate::forecast::{self, point_forecast, sample_scenarios, ForecastModel};
use crate::geo::distance;
use crate::guidance::{GuidanceError, GuidanceEv, GuidanceInstance, GuidanceParams, GuidanceRegion};
use crate::ingest::{bin_demand, fleet_size_profile, minute_of_day, DayType, TripRecord};
use crate::matching::{MatchEv, MatchInstance, MatchParams, MatchPlan, MatchingError};
use crate::rng::{derive_seed, stream, STREAM_CHARGE_WAIT, STREAM_FLEET, STREAM_SCENARIOS};
use crate::types::{soc_after_travel, ChargingStation, Ev, EvStatus, ModelError, Region, RiderRequest};
use crate::validate;
use crate::{GeoPoint, WaitDistribution};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Charging(#[from] ChargingError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayDemand {
    pub date: NaiveDate,
    pub day_type: DayType,
    /// Sorted by request time.
    pub riders: Vec<RiderRequest>,
}

/// Everything a run needs besides the policies and the seed.
#[derive(Debug, Clone)]
pub struct SimInput {
    pub config: Config,
    pub regions: Vec<Region>,
    pub stations: Vec<ChargingStation>,
    pub forecast: ForecastModel,
    /// Historical drop-offs per window, by day type.
    pub fleet_cap: BTreeMap<DayType, Vec<f64>>,
    pub days: Vec<DayDemand>,
}

impl SimInput {
    /// Fits the forecaster on the bundle history unless one is supplied.
    pub fn from_bundle(config: Config, bundle: &Bundle, forecast: Option<ForecastModel>) -> Result<Self, SimError> {
        config.validate()?;
        let regions = build_regions(&config, &bundle.history)?;
        let forecast = forecast.unwrap_or_else(|| fit_forecast(&config, &bundle.history));
        if forecast.num_regions != regions.len() || (forecast.window_min - config.window_min).abs() > 1e-9 {
            return Err(SimError::Invalid(format!(
                "forecast covers {} regions at {} min windows, config has {} regions at {} min",
                forecast.num_regions,
                forecast.window_min,
                regions.len(),
                config.window_min
            )));
        }
        let fleet_cap = fleet_size_profile(&bundle.history, config.window_min);
        let days = build_days(&bundle.trips, config.rider_patience_min)?;
        Ok(Self { stations: bundle.stations.clone(), config, regions, forecast, fleet_cap, days })
    }
}

pub fn fit_forecast(cfg: &Config, history: &[TripRecord]) -> ForecastModel {
    let series = bin_demand(history, &cfg.regions, cfg.window_min);
    forecast::fit(&series, cfg.gmm_components, cfg.em_max_iter)
}

/// Regions from the configured rectangles, with average trip length taken
/// from `history` or the configured fallback.
pub fn build_regions(cfg: &Config, history: &[TripRecord]) -> Result<Vec<Region>, ModelError> {
    cfg.regions
        .iter()
        .enumerate()
        .map(|(i, rect)| {
            let avg = crate::ingest::estimate_avg_trip(history, rect).unwrap_or(cfg.avg_trip_fallback_km);
            Region::new(i, *rect, cfg.poi(i), avg)
        })
        .collect()
}

/// Groups trips by pickup date into rider requests.
pub fn build_days(trips: &[TripRecord], patience_min: f64) -> Result<Vec<DayDemand>, ModelError> {
    let mut by_day: BTreeMap<NaiveDate, Vec<&TripRecord>> = BTreeMap::new();
    for t in trips {
        by_day.entry(t.pickup_time.date()).or_default().push(t);
    }
    by_day
        .into_iter()
        .map(|(date, mut ts)| {
            ts.sort_by(|a, b| a.pickup_time.cmp(&b.pickup_time));
            let riders = ts
                .iter()
                .enumerate()
                .map(|(n, t)| {
                    let req = minute_of_day(&t.pickup_time);
                    RiderRequest::new(format!("{}-{n}", date.format("%Y%m%d")), t.pickup, t.dropoff, req, req + patience_min)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(DayDemand { date, day_type: DayType::of(date), riders })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEv {
    pub ev: Ev,
    /// When a busy EV rejoins the idle pool.
    pub available_at: f64,
}

impl SimEv {
    fn is_available(&self) -> bool {
        matches!(self.ev.status, EvStatus::Idle | EvStatus::Guided)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeEntry {
    pub ev: usize,
    pub station: usize,
    pub arrival: f64,
    pub soc_arrival: f64,
    pub charge_end: f64,
}

/// EVs sent to each station and when they leave it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChargeLedger {
    pub entries: Vec<ChargeEntry>,
}

impl ChargeLedger {
    /// Arrival SoCs of EVs headed to or still at `station` at time `t`.
    pub fn targeted(&self, station: usize, t: f64) -> Vec<f64> {
        self.entries.iter().filter(|e| e.station == station && e.charge_end > t).map(|e| e.soc_arrival).collect()
    }

    pub fn prune(&mut self, t: f64) {
        self.entries.retain(|e| e.charge_end > t);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SocChange {
    Travel { km: f64 },
    Charge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocEvent {
    pub ev: usize,
    pub time: f64,
    pub before: f64,
    pub after: f64,
    pub change: SocChange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetState {
    pub day: usize,
    pub day_type: DayType,
    pub evs: Vec<SimEv>,
    pub pending: Vec<RiderRequest>,
    pub ledger: ChargeLedger,
    next_rider: usize,
    pub soc_log: Option<Vec<SocEvent>>,
}


/// Fleet at the start of a day: uniform positions inside random regions.
pub fn init_fleet(cfg: &Config, regions: &[Region], seed: u64, day: usize) -> Result<Vec<SimEv>, ModelError> {
    let mut rng = stream(seed, &[STREAM_FLEET, day as u64]);
    let rates = cfg.consumption_rates();
    (0..cfg.fleet_size)
        .map(|id| {
            let r = &regions[rng.gen_range(0..regions.len())].bounds;
            let loc = GeoPoint::new(rng.gen_range(r.min_lat..=r.max_lat), rng.gen_range(r.min_lon..=r.max_lon));
            let soc = rng.gen_range(cfg.soc_init_min..=cfg.soc_init_max);
            let rate = *rates.choose(&mut rng).expect("validated non-empty");
            let alpha = rng.gen_range(cfg.alpha_min..=cfg.alpha_max);
            Ok(SimEv { ev: Ev::new(id, loc, soc, rate, alpha)?, available_at: 0.0 })
        })
        .collect()
}

impl FleetState {
    pub fn new(input: &SimInput, seed: u64, day: usize, audit: bool) -> Result<Self, SimError> {
        Ok(Self {
            day,
            day_type: input.days[day].day_type,
            evs: init_fleet(&input.config, &input.regions, seed, day)?,
            pending: Vec::new(),
            ledger: ChargeLedger::default(),
            next_rider: 0,
            soc_log: audit.then(Vec::new),
        })
    }

    fn travel(&mut self, j: usize, km: f64, time: f64) -> bool {
        let before = self.evs[j].ev.soc;
        let after = soc_after_travel(&self.evs[j].ev, km);
        self.evs[j].ev.soc = after.soc;
        if let Some(log) = self.soc_log.as_mut() {
            log.push(SocEvent { ev: j, time, before, after: after.soc, change: SocChange::Travel { km } });
        }
        after.exhausted
    }
}

/// Options for [`run`].
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub policies: Vec<Policy>,
    /// Simulate only the first `n` windows of each day.
    pub windows: Option<usize>,
    /// Re-check every plan with the independent validators.
    pub validate: bool,
    /// Keep the SoC event log.
    pub audit: bool,
}

impl RunOptions {
    pub fn new(policies: Vec<Policy>) -> Self {
        Self { policies, windows: None, validate: false, audit: false }
    }
}

/// A trajectory driver and the requested policies evaluated on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub driver: Policy,
    pub members: Vec<Policy>,
}

pub fn groups(policies: &[Policy], shared: bool) -> Vec<Group> {
    if !shared {
        return policies.iter().map(|&p| Group { driver: p, members: vec![p] }).collect();
    }
    let mut out: Vec<Group> = Vec::new();
    for &p in policies {
        let driver = Policy { guidance: p.guidance, matching: MatchObjective::Combined };
        match out.iter_mut().find(|g| g.driver == driver) {
            Some(g) => g.members.push(p),
            None => out.push(Group { driver, members: vec![p] }),
        }
    }
    out
}

/// Per-window outcome of every policy in a group, driver first.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub metrics: Vec<(Policy, WindowMetrics)>,
    /// Eligible `(ev, rider)` pairs seen by each policy.
    pub eligible: Vec<Vec<(usize, usize)>>,
}

struct Realized {
    ev: usize,
    rider: usize,
    station: usize,
    pickup_km: f64,
    cs_km: f64,
    soc_matched: f64,
    soc_arrival: f64,
    dropoff: f64,
    wait: f64,
    charge_end: f64,
    rider_wait: f64,
}

fn wait_dist(cfg: &Config, station: &ChargingStation, socs: &[f64]) -> Result<WaitDistribution, ChargingError> {
    if socs.is_empty() {
        return Ok(WaitDistribution::zero());
    }
    let lo = socs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = socs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(wait_distribution(station, socs.len(), lo, hi, cfg.charge_rate / 60.0, cfg.charge_target_soc)?.dist)
}

fn rate_per_min(cfg: &Config) -> f64 {
    cfg.charge_rate / 60.0
}

struct Ctx<'a> {
    input: &'a SimInput,
    seed: u64,
    window: usize,
    start: f64,
    dispatch: f64,
}

impl Ctx<'_> {
    fn cfg(&self) -> &Config {
        &self.input.config
    }

    /// Waiting-time distribution of every station for this window.
    fn station_waits(&self, state: &FleetState, ledger: &ChargeLedger) -> Result<Vec<WaitDistribution>, ChargingError> {
        let cfg = self.cfg();
        self.input
            .stations
            .iter()
            .enumerate()
            .map(|(u, st)| {
                let socs = match cfg.queue_source {
                    QueueSource::Targeted => ledger.targeted(u, self.dispatch),
                    QueueSource::Radius => state
                        .evs
                        .iter()
                        .filter(|e| e.is_available() && distance(&e.ev.loc, &st.loc) <= cfg.cs_radius_km)
                        .map(|e| e.ev.soc)
                        .collect(),
                };
                wait_dist(cfg, st, &socs)
            })
            .collect()
    }

    fn solve_matching(
        &self,
        state: &FleetState,
        waits: &[WaitDistribution],
        policy: Policy,
        avail: &[usize],
        pool: &[RiderRequest],
    ) -> Result<(MatchInstance, MatchPlan), SimError> {
        let cfg = self.cfg();
        let (theta1, theta2, cs_choice) = policy.match_weights(cfg);
        let params = MatchParams {
            window_start: self.start,
            window_min: cfg.window_min,
            speed_km_per_min: cfg.speed_km_per_min(),
            theta1,
            theta2,
            pi1: cfg.pi1,
            pi2: cfg.pi2,
            cs_radius_km: cfg.cs_radius_km,
            cs_choice,
        };
        let evs = avail
            .iter()
            .map(|&j| {
                let e = &state.evs[j].ev;
                MatchEv { id: e.id, loc: e.loc, soc: e.soc, consumption_rate: e.consumption_rate }
            })
            .collect();
        let expected = waits.iter().map(expected_wait).collect();
        let inst = MatchInstance::build(evs, pool.to_vec(), self.input.stations.clone(), expected, params)?;
        let plan = inst.solve();
        Ok((inst, plan))
    }

    /// Times, energy and realized charging waits for a plan; appends the
    /// charging visits to `ledger`. Each realized wait is a draw from the
    /// chosen station's distribution for this window.
    fn realize(
        &self,
        state: &FleetState,
        waits: &[WaitDistribution],
        ledger: &mut ChargeLedger,
        inst: &MatchInstance,
        plan: &MatchPlan,
        avail: &[usize],
    ) -> Vec<Realized> {
        let cfg = self.cfg();
        let v = cfg.speed_km_per_min();
        let mut out: Vec<Realized> = plan
            .matches
            .iter()
            .map(|m| {
                let j = avail[m.ev];
                let e = &state.evs[j].ev;
                let r = &inst.riders[m.rider];
                let st = &inst.stations[m.station];
                let pickup_km = distance(&e.loc, &r.origin);
                let cs_km = if cfg.charge_after_trip { distance(&r.dest, &st.loc) } else { 0.0 };
                let dropoff = self.dispatch + (pickup_km + r.trip_km) / v;
                let soc_arrival = (e.soc - e.consumption_rate * (pickup_km + r.trip_km + cs_km)).max(0.0);
                Realized {
                    ev: j,
                    rider: m.rider,
                    station: m.station,
                    pickup_km,
                    cs_km,
                    soc_matched: e.soc,
                    soc_arrival,
                    dropoff,
                    wait: 0.0,
                    charge_end: dropoff,
                    rider_wait: inst.pair(m.ev, m.rider).expect("matched pair is eligible").w2,
                }
            })
            .collect();
        if !cfg.charge_after_trip {
            return out;
        }
        let arrival = |x: &Realized| x.dropoff + x.cs_km / v;
        out.sort_by(|a, b| arrival(a).total_cmp(&arrival(b)).then(a.ev.cmp(&b.ev)));
        for x in out.iter_mut() {
            let t = arrival(x);
            let z = standard_deviate(derive_seed(
                self.seed,
                &[STREAM_CHARGE_WAIT, state.day as u64, self.window as u64, state.evs[x.ev].ev.id as u64],
            ));
            x.wait = wait_from_deviate(&waits[x.station], z);
            let charge = (cfg.charge_target_soc - x.soc_arrival).max(0.0) / rate_per_min(cfg);
            x.charge_end = t + x.wait + charge;
            ledger.entries.push(ChargeEntry {
                ev: x.ev,
                station: x.station,
                arrival: t,
                soc_arrival: x.soc_arrival,
                charge_end: x.charge_end,
            });
        }
        out.sort_by_key(|x| x.ev);
        out
    }
}

fn check(violations: Vec<validate::Violation>, what: &str) -> Result<(), SimError> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SimError::Invalid(format!("{what}: {violations:?}")))
    }
}

/// Advances `state` by one window under `driver`, evaluating `shadows` on
/// the same state.
pub fn step(
    input: &SimInput,
    state: &mut FleetState,
    shadows: &[Policy],
    driver: Policy,
    window: usize,
    seed: u64,
    validate_plans: bool,
) -> Result<StepResult, SimError> {
    let cfg = &input.config;
    let start = window as f64 * cfg.window_min;
    let ctx = Ctx { input, seed, window, start, dispatch: start + cfg.window_min };

    // Release EVs whose trip or charging has finished.
    for j in 0..state.evs.len() {
        let e = &state.evs[j];
        if e.is_available() || e.available_at > start {
            continue;
        }
        if e.ev.status == EvStatus::Charging {
            let time = e.available_at;
            let before = e.ev.soc;
            let after = before.max(cfg.charge_target_soc);
            state.evs[j].ev.soc = after;
            if let Some(log) = state.soc_log.as_mut() {
                log.push(SocEvent { ev: j, time, before, after, change: SocChange::Charge });
            }
        }
        state.evs[j].ev.transition(EvStatus::Idle)?;
    }
    state.ledger.prune(start);

    // Guidance.
    let mut guided = 0;
    let mut exhausted = 0;
    let mut origins: Vec<Option<GeoPoint>> = vec![None; state.evs.len()];
    if driver.guidance != GuidanceMode::None {
        let idle: Vec<usize> = (0..state.evs.len()).filter(|&j| state.evs[j].ev.status == EvStatus::Idle).collect();
        let evs: Vec<GuidanceEv> = idle
            .iter()
            .map(|&j| {
                let e = &state.evs[j].ev;
                GuidanceEv { id: e.id, loc: e.loc, soc: e.soc, consumption_rate: e.consumption_rate, idle_cost_per_km: e.idle_cost_per_km }
            })
            .collect();
        let regions: Vec<GuidanceRegion> =
            input.regions.iter().map(|r| GuidanceRegion { poi: r.poi, avg_trip_km: r.avg_trip_km }).collect();
        let scenarios: Vec<Vec<u32>> = match driver.guidance {
            GuidanceMode::Stochastic => {
                let s = derive_seed(seed, &[STREAM_SCENARIOS, state.day as u64, window as u64]);
                sample_scenarios(&input.forecast, state.day_type, window, cfg.scenarios, s).samples
            }
            _ => (0..regions.len()).map(|i| vec![point_forecast(&input.forecast, state.day_type, i, window)]).collect(),
        };
        let fleet_cap = if cfg.fleet_cap {
            input.fleet_cap.get(&state.day_type).and_then(|p| p.get(window)).map(|c| c.round() as usize)
        } else {
            None
        };
        let params = GuidanceParams {
            window_min: cfg.window_min,
            speed_km_per_min: cfg.speed_km_per_min(),
            lambda: cfg.lambda,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            fleet_cap,
        };
        let inst = GuidanceInstance::build(evs, regions, scenarios, params)?;
        let plan = inst.solve();
        if validate_plans {
            check(validate::check_guidance_plan(&inst, &plan), "guidance plan")?;
        }
        for (k, a) in plan.assignment.iter().enumerate() {
            if let Some(i) = a {
                let j = idle[k];
                let poi = input.regions[*i].poi;
                let km = distance(&state.evs[j].ev.loc, &poi);
                exhausted += usize::from(state.travel(j, km, start));
                origins[j] = Some(state.evs[j].ev.loc);
                state.evs[j].ev.loc = poi;
                state.evs[j].ev.transition(EvStatus::Guided)?;
                guided += 1;
            }
        }
    }

    // Rider pool.
    let day = &input.days[state.day];
    let mut pool = std::mem::take(&mut state.pending);
    let mut new_requests = 0;
    while state.next_rider < day.riders.len() && day.riders[state.next_rider].req_time < ctx.dispatch {
        pool.push(day.riders[state.next_rider].clone());
        state.next_rider += 1;
        new_requests += 1;
    }
    let avail: Vec<usize> = (0..state.evs.len()).filter(|&j| state.evs[j].is_available()).collect();

    // Matching for every policy on the pre-dispatch state.
    let next_dispatch = ctx.dispatch + cfg.window_min;
    let mut results = Vec::with_capacity(1 + shadows.len());
    let mut eligible = Vec::with_capacity(1 + shadows.len());
    let mut driver_realized = Vec::new();
    let mut driver_plan = None;
    let snapshot = state.ledger.clone();
    let station_waits = ctx.station_waits(state, &snapshot)?;
    for s in 0..=shadows.len() {
        let policy = if s == 0 { driver } else { shadows[s - 1] };
        let mut ledger = snapshot.clone();
        let (inst, plan) = ctx.solve_matching(state, &station_waits, policy, &avail, &pool)?;
        if validate_plans {
            check(validate::check_matching_plan(&inst, &plan), "matching plan")?;
        }
        let realized = ctx.realize(state, &station_waits, &mut ledger, &inst, &plan, &avail);
        if s == 0 {
            state.ledger = ledger;
        }
        let waits: Vec<f64> = realized.iter().map(|x| x.rider_wait).collect();
        let charges: Vec<ChargeRecord> = if cfg.charge_after_trip {
            realized.iter().map(|x| ChargeRecord { soc: x.soc_matched, wait: x.wait }).collect()
        } else {
            Vec::new()
        };
        let mut m = WindowMetrics::from_outcome(window, pool.len(), new_requests, &waits, &charges);
        let (carried, expired) =
            plan.unmatched_riders.iter().partition::<Vec<usize>, _>(|&&k| pool[k].latest_departure >= next_dispatch);
        m.carried_over = carried.len();
        m.expired = expired.len();
        m.guided = guided;
        m.idle_evs = avail.len();
        eligible.push(inst.pairs.iter().map(|p| (avail[p.ev], p.rider)).collect());
        results.push((policy, m));
        if s == 0 {
            driver_realized = realized;
            driver_plan = Some(plan);
        }
    }

    // Advance the driver's trajectory.
    for x in &driver_realized {
        let j = x.ev;
        let r = &pool[x.rider];
        exhausted += usize::from(state.travel(j, x.pickup_km, ctx.dispatch));
        exhausted += usize::from(state.travel(j, r.trip_km, ctx.dispatch));
        state.evs[j].ev.transition(EvStatus::Serving)?;
        if cfg.charge_after_trip {
            exhausted += usize::from(state.travel(j, x.cs_km, x.dropoff));
            debug_assert!((state.evs[j].ev.soc - x.soc_arrival).abs() < 1e-12);
            state.evs[j].ev.loc = input.stations[x.station].loc;
            state.evs[j].ev.transition(EvStatus::TravelingToCs)?;
            state.evs[j].ev.transition(EvStatus::Charging)?;
            state.evs[j].available_at = x.charge_end;
        } else {
            state.evs[j].ev.loc = r.dest;
            state.evs[j].available_at = x.dropoff;
        }
    }
    for j in 0..state.evs.len() {
        if state.evs[j].ev.status == EvStatus::Guided {
            if !cfg.keep_guided_at_poi {
                let back = origins[j].expect("guided EVs have an origin");
                let km = distance(&state.evs[j].ev.loc, &back);
                exhausted += usize::from(state.travel(j, km, ctx.dispatch));
                state.evs[j].ev.loc = back;
            }
            state.evs[j].ev.transition(EvStatus::Idle)?;
        }
    }
    let plan = driver_plan.expect("driver always solves");
    state.pending = plan
        .unmatched_riders
        .iter()
        .filter(|&&k| pool[k].latest_departure >= next_dispatch)
        .map(|&k| pool[k].clone())
        .collect();
    results[0].1.exhausted = exhausted;
    Ok(StepResult { metrics: results, eligible })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayRun {
    pub date: NaiveDate,
    pub day_type: DayType,
    pub windows: Vec<WindowMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub policy: Policy,
    pub days: Vec<DayRun>,
}

/// Output of one group on one day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayOutcome {
    pub runs: Vec<(Policy, DayRun)>,
    pub final_state: FleetState,
    /// Per window, the eligible pairs of each member.
    pub eligible: Vec<Vec<Vec<(usize, usize)>>>,
}

pub fn simulate_day(input: &SimInput, group: &Group, day: usize, seed: u64, opts: &RunOptions) -> Result<DayOutcome, SimError> {
    let cfg = &input.config;
    let per_day = (1440.0 / cfg.window_min).round() as usize;
    let windows = opts.windows.map_or(per_day, |w| w.min(per_day));
    let mut state = FleetState::new(input, seed, day, opts.audit)?;
    let shadows: Vec<Policy> = group.members.iter().copied().filter(|&p| p != group.driver).collect();
    let mut per_policy: Vec<(Policy, Vec<WindowMetrics>)> = Vec::new();
    let mut eligible = Vec::new();
    for w in 0..windows {
        let res = step(input, &mut state, &shadows, group.driver, w, seed, opts.validate)?;
        for (p, m) in res.metrics {
            match per_policy.iter_mut().find(|(q, _)| *q == p) {
                Some((_, v)) => v.push(m),
                None => per_policy.push((p, vec![m])),
            }
        }
        eligible.push(res.eligible);
    }
    let d = &input.days[day];
    let runs = per_policy
        .into_iter()
        .filter(|(p, _)| group.members.contains(p))
        .map(|(p, windows)| (p, DayRun { date: d.date, day_type: d.day_type, windows }))
        .collect();
    Ok(DayOutcome { runs, final_state: state, eligible })
}

/// Runs every requested policy over every day. Days start from a fresh
/// fleet drawn from the seed, so all policies see the same fleet, demand and
/// charging-wait draws.
pub fn run(input: &SimInput, opts: &RunOptions, seed: u64) -> Result<Vec<PolicyRun>, SimError> {
    input.config.validate()?;
    if input.stations.is_empty() {
        return Err(ChargingError::NoStations.into());
    }
    let groups = groups(&opts.policies, input.config.shared_sg_trajectory);
    let jobs: Vec<(usize, usize)> = (0..groups.len()).flat_map(|g| (0..input.days.len()).map(move |d| (g, d))).collect();
    let outcomes: Vec<DayOutcome> =
        jobs.par_iter().map(|&(g, d)| simulate_day(input, &groups[g], d, seed, opts)).collect::<Result<_, _>>()?;
    let mut runs: Vec<PolicyRun> = opts.policies.iter().map(|&p| PolicyRun { policy: p, days: Vec::new() }).collect();
    for out in outcomes {
        for (p, day) in out.runs {
            runs.iter_mut().find(|r| r.policy == p).expect("requested").days.push(day);
        }
    }
    for r in runs.iter_mut() {
        r.days.sort_by_key(|d| d.date);
    }
    Ok(runs)
}
