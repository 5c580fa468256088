//! Acceptance criteria 1 to 10. Each test writes one `criterion N: PASS|FAIL`
//! line to stderr (outside the test harness capture) before asserting.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use evhail_core::charging::{sample_wait, wait_distribution, GaussianWait};
use evhail_core::forecast::{sample_region, Mixture};
use evhail_core::geo::distance;
use evhail_core::guidance::{region_penalty, GuidanceEv, GuidanceInstance, GuidanceParams, GuidanceRegion};
use evhail_core::matching::{CsChoice, MatchEv, MatchInstance, MatchParams};
use evhail_core::sim::engine::{groups, simulate_day};
use evhail_core::sim::metrics::{daily, Tally};
use evhail_core::sim::{run, Policy, PolicyRun, RunOptions, SimInput};
use evhail_core::synth::{generate, SynthOptions};
use evhail_core::types::{ChargingStation, RiderRequest};
use evhail_core::{validate, Config, GeoPoint};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, ok: bool, detail: &str) {
    let line = format!("criterion {n}: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {n} failed: {detail}");
}

const LAT: f64 = 40.75;
const LON: f64 = -73.99;

fn point(rng: &mut ChaCha8Rng, km: f64) -> GeoPoint {
    let dlat = km / 111.19;
    let dlon = km / (111.19 * LAT.to_radians().cos());
    GeoPoint::new(LAT + rng.gen_range(-dlat..dlat), LON + rng.gen_range(-dlon..dlon))
}

fn guidance_instance(seed: u64) -> GuidanceInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=8);
    let a = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=20);
    let evs = (0..d)
        .map(|id| GuidanceEv {
            id,
            loc: point(&mut rng, 4.0),
            soc: rng.gen_range(0.01..0.8),
            consumption_rate: rng.gen_range(0.003..0.03),
            idle_cost_per_km: rng.gen_range(0.8..1.1),
        })
        .collect();
    let regions = (0..a).map(|_| GuidanceRegion { poi: point(&mut rng, 3.0), avg_trip_km: rng.gen_range(1.0..5.0) }).collect();
    let scenarios = (0..a).map(|_| (0..n).map(|_| rng.gen_range(0..6)).collect()).collect();
    let fleet_cap = if rng.gen_bool(0.5) { Some(rng.gen_range(0..=d)) } else { None };
    let params = GuidanceParams { window_min: 10.0, speed_km_per_min: 0.5, lambda: 0.1, beta1: 5.0, beta2: 10.0, fleet_cap };
    GuidanceInstance::build(evs, regions, scenarios, params).unwrap()
}

fn matching_instance(seed: u64) -> MatchInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=7);
    let r = rng.gen_range(1..=7);
    let ns = rng.gen_range(1..=4);
    let stations: Vec<ChargingStation> =
        (0..ns).map(|id| ChargingStation::new(id + 1, point(&mut rng, 5.0), rng.gen_range(1..=2)).unwrap()).collect();
    let waits = (0..ns).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..30.0) }).collect();
    let evs = (0..d)
        .map(|id| MatchEv { id, loc: point(&mut rng, 4.0), soc: rng.gen_range(0.02..0.8), consumption_rate: rng.gen_range(0.003..0.05) })
        .collect();
    let riders = (0..r)
        .map(|k| {
            let req = rng.gen_range(0.0..10.0);
            let ldt = req + rng.gen_range(5.0..25.0);
            RiderRequest::new(format!("r{k}"), point(&mut rng, 3.0), point(&mut rng, 4.0), req, ldt).unwrap()
        })
        .collect();
    let (theta1, theta2) = [(0.0, 10.0), (1.0, 0.0), (1.0, 10.0)][rng.gen_range(0..3)];
    let params = MatchParams {
        window_start: 0.0,
        window_min: 10.0,
        speed_km_per_min: 0.5,
        theta1,
        theta2,
        pi1: 1.0,
        pi2: 10.0,
        cs_radius_km: 3.0,
        cs_choice: if rng.gen_bool(0.2) { CsChoice::Nearest } else { CsChoice::MinCost },
    };
    MatchInstance::build(evs, riders, stations, waits, params).unwrap()
}

// Raw-constraint oracles, written out here rather than shared with the validators.

fn candidate_stations(inst: &MatchInstance, k: usize) -> Vec<usize> {
    let dest = &inst.riders[k].dest;
    let d: Vec<f64> = inst.stations.iter().map(|s| distance(dest, &s.loc)).collect();
    let within: Vec<usize> = (0..d.len()).filter(|&u| d[u] <= inst.params.cs_radius_km).collect();
    if !within.is_empty() {
        return within;
    }
    let best = (0..d.len()).min_by(|&x, &y| d[x].total_cmp(&d[y]).then(inst.stations[x].id.cmp(&inst.stations[y].id))).unwrap();
    vec![best]
}

fn energy_feasible(inst: &MatchInstance, j: usize, k: usize) -> bool {
    let (ev, r) = (&inst.evs[j], &inst.riders[k]);
    let furthest = candidate_stations(inst, k).iter().map(|&u| distance(&r.dest, &inst.stations[u].loc)).fold(0.0, f64::max);
    ev.consumption_rate * (r.trip_km + furthest) <= ev.soc
}

fn deadline_feasible(inst: &MatchInstance, j: usize, k: usize) -> bool {
    let p = &inst.params;
    p.window_start + p.window_min + distance(&inst.evs[j].loc, &inst.riders[k].origin) / p.speed_km_per_min <= inst.riders[k].latest_departure
}

/// Pairs the matching may use: raw constraints plus a positive SoC left after the trip.
fn matchable(inst: &MatchInstance, j: usize, k: usize) -> bool {
    energy_feasible(inst, j, k)
        && deadline_feasible(inst, j, k)
        && inst.evs[j].soc - inst.evs[j].consumption_rate * inst.riders[k].trip_km > 0.0
}

fn max_cardinality(adj: &[Vec<usize>], cols: usize) -> usize {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                if owner[v].map_or(true, |w| augment(w, adj, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; cols];
    (0..adj.len()).filter(|&u| augment(u, adj, &mut vec![false; cols], &mut owner)).count()
}

fn guidance_violated(inst: &GuidanceInstance, x: &[Vec<u8>]) -> bool {
    let p = &inst.params;
    let d = inst.evs.len();
    let per_ev = |j: usize| x.iter().map(|row| row[j] as usize).sum::<usize>();
    let total: usize = x.iter().flatten().map(|&v| v as usize).sum();
    if (0..d).any(|j| per_ev(j) > 1) || p.fleet_cap.is_some_and(|c| total > c) {
        return true;
    }
    inst.regions.iter().enumerate().any(|(i, region)| {
        inst.evs.iter().enumerate().any(|(j, ev)| {
            let g = distance(&ev.loc, &region.poi);
            x[i][j] == 1
                && (g / p.speed_km_per_min > p.window_min
                    || ev.consumption_rate * (g + region.avg_trip_km) + p.lambda * ev.soc > ev.soc)
        })
    })
}

fn matching_violated(inst: &MatchInstance, y: &[Vec<u8>]) -> bool {
    let (d, r) = (inst.evs.len(), inst.riders.len());
    (0..d).any(|j| y[j].iter().map(|&v| v as usize).sum::<usize>() > 1)
        || (0..r).any(|k| (0..d).map(|j| y[j][k] as usize).sum::<usize>() > 1)
        || (0..d).any(|j| (0..r).any(|k| y[j][k] == 1 && !(energy_feasible(inst, j, k) && deadline_feasible(inst, j, k))))
}

#[test]
fn criterion_01_guidance_optimality() {
    let started = Instant::now();
    let mut mismatches = 0;
    let mut guided = 0;
    for seed in 0..500 {
        let inst = guidance_instance(seed);
        let flow = inst.solve();
        let brute = inst.solve_bruteforce().unwrap();
        mismatches += usize::from(flow.objective_micros != brute.objective_micros);
        guided += usize::from(flow.guided() > 0);
    }
    let elapsed = started.elapsed();
    let ok = mismatches == 0 && guided > 100 && elapsed < Duration::from_secs(10);
    verdict(1, ok, &format!("500 instances, {mismatches} mismatches, {guided} guide someone, {elapsed:.2?}"));
}

#[test]
fn criterion_02_matching_optimality() {
    let started = Instant::now();
    let (mut mismatches, mut not_maximum, mut partial) = (0, 0, 0);
    for seed in 0..500 {
        let inst = matching_instance(seed);
        let plan = inst.solve();
        let brute = inst.solve_bruteforce().unwrap();
        mismatches += usize::from(plan.objective_micros != brute.objective_micros);
        let adj: Vec<Vec<usize>> =
            (0..inst.riders.len()).map(|k| (0..inst.evs.len()).filter(|&j| matchable(&inst, j, k)).collect()).collect();
        not_maximum += usize::from(plan.matches.len() != max_cardinality(&adj, inst.evs.len()));
        partial += usize::from(!plan.matches.is_empty() && !plan.unmatched_riders.is_empty());
    }
    let elapsed = started.elapsed();
    let ok = mismatches == 0 && not_maximum == 0 && partial > 50 && elapsed < Duration::from_secs(10);
    verdict(
        2,
        ok,
        &format!("500 instances, {mismatches} objective mismatches, {not_maximum} below maximum cardinality, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_03_charging_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut wrong = 0;
    for _ in 0..1000 {
        let chargers = rng.gen_range(1..=4u32);
        let station = ChargingStation::new(0, GeoPoint::new(LAT, LON), chargers).unwrap();
        let queued = rng.gen_range(0..=20usize);
        let (s1, s2): (f64, f64) = (rng.gen_range(0.0..0.8), rng.gen_range(0.0..0.8));
        let (lo, hi) = (s1.min(s2), s1.max(s2));
        let rate = rng.gen_range(0.005..0.05);
        let dist = wait_distribution(&station, queued, lo, hi, rate, 0.8).unwrap().dist;
        let m = (queued / chargers as usize) as f64;
        let (a, b) = if m == 0.0 { (0.0, 0.0) } else { ((0.8 - hi) / rate, (0.8 - lo) / rate) };
        let mean = m * (a + b) / 2.0;
        let variance = m * m * (b - a) * (b - a) / 12.0;
        wrong += usize::from(dist.mean != mean || dist.variance != variance || dist.m as f64 != m);
    }
    let n = 100_000;
    let dist = GaussianWait::from_uniform(2, 1.0, 3.0).unwrap();
    let empirical = (0..n).map(|s| sample_wait(&dist, s as u64)).sum::<f64>() / n as f64;
    let bound = 3.0 * dist.std_dev() / (n as f64).sqrt();
    let ok = wrong == 0 && (empirical - dist.mean).abs() <= bound;
    verdict(
        3,
        ok,
        &format!("{wrong}/1000 closed-form mismatches; sample mean {empirical:.4} vs {} within {bound:.4}", dist.mean),
    );
}

#[test]
fn criterion_04_saa_convergence() {
    let mix = Mixture { weights: vec![0.45, 0.55], means: vec![3.0, 8.0], variances: vec![2.0, 4.0] };
    let supplies = [2usize, 5, 8, 11];
    let reference_samples = sample_region(&mix, 1_000_000, 0);
    let reference: Vec<f64> = supplies.iter().map(|&n| region_penalty(n, &reference_samples, 5.0, 10.0)).collect();
    let reps = 40;
    let mut errors = Vec::new();
    for (e, size) in [10usize, 100, 1000, 10_000].into_iter().enumerate() {
        let mut total = 0.0;
        for rep in 0..reps {
            let s = sample_region(&mix, size, 1 + (e * reps + rep) as u64);
            for (i, &n) in supplies.iter().enumerate() {
                total += (region_penalty(n, &s, 5.0, 10.0) - reference[i]).abs() / reference[i];
            }
        }
        errors.push(total / (reps * supplies.len()) as f64);
    }
    let shrinking = errors.windows(2).all(|w| w[1] < w[0]);
    let last = *errors.last().unwrap();
    let ok = shrinking && last < 0.02;
    let shown: Vec<String> = errors.iter().map(|e| format!("{:.2}%", e * 100.0)).collect();
    verdict(4, ok, &format!("mean relative error at N = 10, 100, 1000, 10000: {}", shown.join(", ")));
}

struct Trend {
    input: SimInput,
    runs: Vec<PolicyRun>,
}

fn trend() -> &'static Trend {
    static CELL: OnceLock<Trend> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = Config::default();
        let bundle = generate(&cfg, &SynthOptions::default(), cfg.seed).unwrap();
        let input = SimInput::from_bundle(cfg.clone(), &bundle, None).unwrap();
        let runs = run(&input, &RunOptions::new(Policy::ALL.to_vec()), cfg.seed).unwrap();
        Trend { input, runs }
    })
}

fn days_of(t: &Trend, p: Policy) -> Vec<evhail_core::sim::metrics::DailyMetrics> {
    t.runs.iter().find(|r| r.policy == p).unwrap().days.iter().map(|d| daily(&d.windows)).collect()
}

fn pooled_low_soc(t: &Trend, p: Policy) -> Tally {
    let mut tally = Tally::default();
    for d in &t.runs.iter().find(|r| r.policy == p).unwrap().days {
        for w in &d.windows {
            tally.merge(&w.charge_wait_low);
        }
    }
    tally
}

#[test]
fn criterion_05_matching_rate_trend() {
    let t = trend();
    let (ng, dg, sg) = (days_of(t, Policy::BMCSS_NG), days_of(t, Policy::BMCSS_DG), days_of(t, Policy::BMCSS_SG));
    let n = ng.len();
    let ordered = (0..n).filter(|&i| sg[i].mr.unwrap() >= dg[i].mr.unwrap() && dg[i].mr.unwrap() >= ng[i].mr.unwrap()).count();
    let mean = |v: &[evhail_core::sim::metrics::DailyMetrics]| v.iter().map(|d| d.mr.unwrap()).sum::<f64>() / n as f64;
    let (m_ng, m_dg, m_sg) = (mean(&ng), mean(&dg), mean(&sg));
    let ok = n == 12 && ordered >= 10 && m_sg >= m_dg && m_dg >= m_ng && m_sg - m_ng >= 0.05;
    verdict(
        5,
        ok,
        &format!(
            "mean MR NG {:.2}% DG {:.2}% SG {:.2}%, SG-NG {:.2} pp, ordering on {ordered}/{n} days",
            m_ng * 100.0,
            m_dg * 100.0,
            m_sg * 100.0,
            (m_sg - m_ng) * 100.0
        ),
    );
}

#[test]
fn criterion_06_rider_wait_trend() {
    let t = trend();
    let (rw, css, cw, ng) =
        (days_of(t, Policy::BMRWT_SG), days_of(t, Policy::BMCSS_SG), days_of(t, Policy::BMCWT_SG), days_of(t, Policy::BMCSS_NG));
    let n = rw.len();
    let ok_days = (0..n)
        .filter(|&i| {
            let (a, b, c, d) = (rw[i].rawt.unwrap(), css[i].rawt.unwrap(), cw[i].rawt.unwrap(), ng[i].rawt.unwrap());
            a <= b && b <= c && b < d
        })
        .count();
    let mean = |v: &[evhail_core::sim::metrics::DailyMetrics]| v.iter().map(|d| d.rawt.unwrap()).sum::<f64>() / n as f64;
    verdict(
        6,
        n == 12 && ok_days >= 10,
        &format!(
            "mean RAWT RWT-SG {:.2} CSS-SG {:.2} CWT-SG {:.2} CSS-NG {:.2} min, ordering on {ok_days}/{n} days",
            mean(&rw),
            mean(&css),
            mean(&cw),
            mean(&ng)
        ),
    );
}

#[test]
fn criterion_07_low_soc_charging_wait() {
    let t = trend();
    let rw = pooled_low_soc(t, Policy::BMRWT_SG);
    let css = pooled_low_soc(t, Policy::BMCSS_SG);
    let cw = pooled_low_soc(t, Policy::BMCWT_SG);
    let (rw_m, css_m, cw_m) = (rw.mean().unwrap(), css.mean().unwrap(), cw.mean().unwrap());
    let gap = css_m <= 0.5 * rw_m;
    let cwt_first = cw_m <= css_m;
    verdict(
        7,
        gap && cwt_first,
        &format!(
            "low-SoC ACWT RWT-SG {rw_m:.2} (n={}) CSS-SG {css_m:.2} (n={}) CWT-SG {cw_m:.2} (n={}); CSS/RWT {:.1}% [{}]; CWT <= CSS [{}]",
            rw.count,
            css.count,
            cw.count,
            css_m / rw_m * 100.0,
            if gap { "ok" } else { "fails" },
            if cwt_first { "ok" } else { "fails" }
        ),
    );
}

#[test]
fn criterion_08_structural_mr_equality() {
    let t = trend();
    let sg = [Policy::BMRWT_SG, Policy::BMCWT_SG, Policy::BMCSS_SG];
    let mr = |p: Policy| -> Vec<u64> {
        t.runs.iter().find(|r| r.policy == p).unwrap().days.iter().flat_map(|d| d.windows.iter().map(|w| w.mr.to_bits())).collect()
    };
    let base = mr(sg[0]);
    let same_mr = sg.iter().all(|&p| mr(p) == base);
    let group = &groups(&sg, t.input.config.shared_sg_trajectory)[0];
    let opts = RunOptions::new(sg.to_vec());
    let mut same_graph = true;
    for day in 0..t.input.days.len() {
        let out = simulate_day(&t.input, group, day, t.input.config.seed, &opts).unwrap();
        same_graph &= out.eligible.iter().all(|per| per.windows(2).all(|w| w[0] == w[1]));
    }
    verdict(
        8,
        same_mr && same_graph && base.len() == 12 * 144,
        &format!("{} windows; identical MR {same_mr}; identical eligibility graphs {same_graph}", base.len()),
    );
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_09_determinism_and_budget() {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_evhail");
    let status = Command::new(bin).args(["synth", "--out", "data"]).current_dir(tmp.path()).status().unwrap();
    assert!(status.success());
    let mut times = Vec::new();
    for out in ["a", "b"] {
        let started = Instant::now();
        let o = Command::new(bin)
            .args(["simulate", "--data", "data", "--policy", "all", "--seed", "1", "--out", out])
            .current_dir(tmp.path())
            .output()
            .unwrap();
        times.push(started.elapsed());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = read_tree(&tmp.path().join("a"));
    let identical = a == read_tree(&tmp.path().join("b")) && a.len() >= 8;
    let windows = 12 * 144;
    let slowest = times.iter().max().unwrap();
    let per_window = slowest.as_secs_f64() * 1000.0 / windows as f64;
    let ok = identical && *slowest < Duration::from_secs(300) && per_window < 50.0;
    verdict(
        9,
        ok,
        &format!("{} report files identical {identical}; {slowest:.2?} for {windows} windows x 5 policies, {per_window:.2} ms/window", a.len()),
    );
}

enum Perturbed {
    Guidance(usize, Vec<Vec<u8>>),
    Matching(usize, Vec<Vec<u8>>),
}

fn perturb(
    rng: &mut ChaCha8Rng,
    g: &[(GuidanceInstance, Vec<Vec<u8>>)],
    m: &[(MatchInstance, Vec<Vec<u8>>)],
) -> Option<(Perturbed, usize)> {
    let kind = rng.gen_range(0..7);
    if kind < 3 {
        let idx = rng.gen_range(0..g.len());
        let (inst, x0) = &g[idx];
        let mut x = x0.clone();
        let (a, d) = (inst.regions.len(), inst.evs.len());
        match kind {
            0 => {
                if a < 2 {
                    return None;
                }
                let j = rng.gen_range(0..d);
                let regions: Vec<usize> = (0..a).collect();
                for &i in regions.choose_multiple(rng, 2) {
                    x[i][j] = 1;
                }
            }
            1 => {
                let cap = inst.params.fleet_cap?;
                if cap >= d {
                    return None;
                }
                let mut evs: Vec<usize> = (0..d).collect();
                evs.shuffle(rng);
                for row in x.iter_mut() {
                    row.iter_mut().for_each(|v| *v = 0);
                }
                for &j in &evs[..=cap] {
                    x[rng.gen_range(0..a)][j] = 1;
                }
            }
            _ => {
                let p = &inst.params;
                let bad: Vec<(usize, usize)> = (0..a)
                    .flat_map(|i| (0..d).map(move |j| (i, j)))
                    .filter(|&(i, j)| {
                        let (ev, region) = (&inst.evs[j], &inst.regions[i]);
                        let g = distance(&ev.loc, &region.poi);
                        g / p.speed_km_per_min > p.window_min
                            || ev.consumption_rate * (g + region.avg_trip_km) + p.lambda * ev.soc > ev.soc
                    })
                    .collect();
                let &(i, j) = bad.choose(rng)?;
                for row in x.iter_mut() {
                    row[j] = 0;
                }
                x[i][j] = 1;
            }
        }
        return Some((Perturbed::Guidance(idx, x), kind));
    }
    let idx = rng.gen_range(0..m.len());
    let (inst, y0) = &m[idx];
    let mut y = y0.clone();
    let (d, r) = (inst.evs.len(), inst.riders.len());
    match kind {
        3 => {
            if r < 2 {
                return None;
            }
            let j = rng.gen_range(0..d);
            let riders: Vec<usize> = (0..r).collect();
            for &k in riders.choose_multiple(rng, 2) {
                y[j][k] = 1;
            }
        }
        4 => {
            if d < 2 {
                return None;
            }
            let k = rng.gen_range(0..r);
            let evs: Vec<usize> = (0..d).collect();
            for &j in evs.choose_multiple(rng, 2) {
                y[j][k] = 1;
            }
        }
        _ => {
            let bad: Vec<(usize, usize)> = (0..d)
                .flat_map(|j| (0..r).map(move |k| (j, k)))
                .filter(|&(j, k)| if kind == 5 { !energy_feasible(inst, j, k) } else { !deadline_feasible(inst, j, k) })
                .collect();
            let &(j, k) = bad.choose(rng)?;
            // Free the pair's row and column so only the infeasible pair is new.
            y[j].iter_mut().for_each(|v| *v = 0);
            y.iter_mut().for_each(|row| row[k] = 0);
            y[j][k] = 1;
        }
    }
    Some((Perturbed::Matching(idx, y), kind))
}

#[test]
fn criterion_10_validators_reject_perturbations() {
    let g: Vec<(GuidanceInstance, Vec<Vec<u8>>)> = (0..400)
        .map(|s| {
            let inst = guidance_instance(10_000 + s);
            let x = validate::guidance_matrix(&inst.solve(), inst.regions.len());
            (inst, x)
        })
        .collect();
    let m: Vec<(MatchInstance, Vec<Vec<u8>>)> = (0..400)
        .map(|s| {
            let inst = matching_instance(10_000 + s);
            let y = validate::matching_matrix(&inst.solve(), inst.evs.len(), inst.riders.len());
            (inst, y)
        })
        .collect();
    let false_rejects = g.iter().filter(|(i, x)| !validate::check_guidance(i, x).is_empty()).count()
        + m.iter().filter(|(i, y)| !validate::check_matching(i, y).is_empty()).count();

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let target = 1_000_000;
    let (mut tried, mut false_accepts) = (0usize, 0usize);
    let mut per_kind = [0usize; 7];
    while tried < target {
        let Some((p, kind)) = perturb(&mut rng, &g, &m) else { continue };
        let (truly, rejected) = match &p {
            Perturbed::Guidance(i, x) => (guidance_violated(&g[*i].0, x), !validate::check_guidance(&g[*i].0, x).is_empty()),
            Perturbed::Matching(i, y) => (matching_violated(&m[*i].0, y), !validate::check_matching(&m[*i].0, y).is_empty()),
        };
        assert!(truly, "perturbation kind {kind} did not violate any constraint");
        tried += 1;
        per_kind[kind] += 1;
        false_accepts += usize::from(!rejected);
    }
    verdict(
        10,
        false_accepts == 0 && false_rejects == 0 && per_kind.iter().all(|&c| c > 10_000),
        &format!("{tried} violating perturbations, {false_accepts} accepted; per kind {per_kind:?}; {false_rejects} optimal plans rejected"),
    );
}
