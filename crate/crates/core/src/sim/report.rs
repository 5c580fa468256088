//! Report files: one CSV per metric averaged by window of day, per-day and
//! per-window detail, and a JSON summary with daily statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::engine::PolicyRun;
use super::metrics::{daily, DailyMetrics, Tally, WindowMetrics};
use crate::ingest::DayType;

pub const SCHEMA: &str = "evhail-report v1";
pub const METRICS: [&str; 5] = ["mr", "rawt", "acwt", "acwt_low_soc", "acwt_mid_soc"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("reports are not comparable: {0}")]
    Schema(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub sd: f64,
    pub days: usize,
}

/// Mean, extremes and sample standard deviation; `None` for no values.
pub fn stats(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Some(Stats {
        mean,
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        sd: var.sqrt(),
        days: values.len(),
    })
}

fn metric_of(d: &DailyMetrics, metric: &str) -> Option<f64> {
    match metric {
        "mr" => d.mr,
        "rawt" => d.rawt,
        "acwt" => d.acwt,
        "acwt_low_soc" => d.acwt_low_soc,
        "acwt_mid_soc" => d.acwt_mid_soc,
        _ => None,
    }
}

fn window_metric(w: &WindowMetrics, metric: &str) -> Option<f64> {
    match metric {
        "mr" => (w.requests > 0).then_some(w.mr),
        "rawt" => w.rawt,
        "acwt" => w.acwt(),
        "acwt_low_soc" => w.acwt_low_soc(),
        "acwt_mid_soc" => w.acwt_mid_soc(),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    /// `day type -> metric -> statistics of daily values`; day type is
    /// `weekday`, `weekend` or `all`.
    pub daily: BTreeMap<String, BTreeMap<String, Option<Stats>>>,
    /// Charging waits pooled over every EV of the day type.
    pub pooled: BTreeMap<String, BTreeMap<String, Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub seed: u64,
    pub config: String,
    pub dates: Vec<String>,
    pub policies: Vec<PolicySummary>,
}

impl Summary {
    pub fn policy(&self, name: &str) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.policy == name)
    }

    pub fn mean(&self, policy: &str, day_type: &str, metric: &str) -> Option<f64> {
        self.policy(policy)?.daily.get(day_type)?.get(metric)?.map(|s| s.mean)
    }
}

fn day_type_keys() -> [(&'static str, Option<DayType>); 3] {
    [("weekday", Some(DayType::Weekday)), ("weekend", Some(DayType::Weekend)), ("all", None)]
}

pub fn summarize(runs: &[PolicyRun], config: &str, seed: u64) -> Summary {
    let mut dates: Vec<String> = runs.iter().flat_map(|r| r.days.iter().map(|d| d.date.to_string())).collect();
    dates.sort();
    dates.dedup();
    let policies = runs
        .iter()
        .map(|run| {
            let mut daily_stats = BTreeMap::new();
            let mut pooled = BTreeMap::new();
            for (key, dt) in day_type_keys() {
                let days: Vec<_> = run.days.iter().filter(|d| dt.map_or(true, |t| d.day_type == t)).collect();
                let values: Vec<DailyMetrics> = days.iter().map(|d| daily(&d.windows)).collect();
                let per_metric = METRICS
                    .iter()
                    .map(|m| {
                        let v: Vec<f64> = values.iter().filter_map(|d| metric_of(d, m)).collect();
                        (m.to_string(), stats(&v))
                    })
                    .collect();
                daily_stats.insert(key.to_string(), per_metric);
                let (mut all, mut low, mut mid) = (Tally::default(), Tally::default(), Tally::default());
                for d in &days {
                    for w in &d.windows {
                        all.merge(&w.charge_wait);
                        low.merge(&w.charge_wait_low);
                        mid.merge(&w.charge_wait_mid);
                    }
                }
                let p: BTreeMap<String, Option<f64>> = [("acwt", all), ("acwt_low_soc", low), ("acwt_mid_soc", mid)]
                    .into_iter()
                    .map(|(k, t)| (k.to_string(), t.mean()))
                    .collect();
                pooled.insert(key.to_string(), p);
            }
            PolicySummary { policy: run.policy.name().to_string(), daily: daily_stats, pooled }
        })
        .collect();
    Summary { schema: SCHEMA.to_string(), seed, config: config.to_string(), dates, policies }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x}"))
}

/// Writes the report files into `dir`, creating it if needed.
pub fn write(dir: &Path, runs: &[PolicyRun], summary: &Summary) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let per_day = runs.iter().flat_map(|r| r.days.iter().map(|d| d.windows.len())).max().unwrap_or(0);
    for metric in METRICS {
        let path = dir.join(format!("{metric}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["policy", "day_type", "window_index", "value"])?;
        for run in runs {
            for (key, dt) in day_type_keys().into_iter().take(2) {
                let days: Vec<_> = run.days.iter().filter(|d| Some(d.day_type) == dt).collect();
                if days.is_empty() {
                    continue;
                }
                for t in 0..per_day {
                    let v: Vec<f64> = days.iter().filter_map(|d| d.windows.get(t).and_then(|w| window_metric(w, metric))).collect();
                    let mean = (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
                    w.write_record([run.policy.name(), key, &t.to_string(), &fmt_opt(mean)])?;
                }
            }
        }
        w.flush().map_err(io_err(&path))?;
    }

    let path = dir.join("daily.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["policy", "date", "day_type", "mr", "rawt", "acwt", "acwt_low_soc", "acwt_mid_soc", "requests", "matched", "expired"])?;
    for run in runs {
        for d in &run.days {
            let m = daily(&d.windows);
            w.write_record([
                run.policy.name().to_string(),
                d.date.to_string(),
                d.day_type.as_str().to_string(),
                fmt_opt(m.mr),
                fmt_opt(m.rawt),
                fmt_opt(m.acwt),
                fmt_opt(m.acwt_low_soc),
                fmt_opt(m.acwt_mid_soc),
                m.requests.to_string(),
                m.matched.to_string(),
                m.expired.to_string(),
            ])?;
        }
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("windows.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "policy", "date", "day_type", "window_index", "requests", "new_requests", "matched", "carried_over", "expired",
        "guided", "idle_evs", "exhausted", "mr", "rawt", "charge_wait_sum", "charge_count", "low_soc_wait_sum",
        "low_soc_count", "mid_soc_wait_sum", "mid_soc_count",
    ])?;
    for run in runs {
        for d in &run.days {
            for x in &d.windows {
                w.write_record([
                    run.policy.name().to_string(),
                    d.date.to_string(),
                    d.day_type.as_str().to_string(),
                    x.window.to_string(),
                    x.requests.to_string(),
                    x.new_requests.to_string(),
                    x.matched.to_string(),
                    x.carried_over.to_string(),
                    x.expired.to_string(),
                    x.guided.to_string(),
                    x.idle_evs.to_string(),
                    x.exhausted.to_string(),
                    x.mr.to_string(),
                    fmt_opt(x.rawt),
                    x.charge_wait.sum.to_string(),
                    x.charge_wait.count.to_string(),
                    x.charge_wait_low.sum.to_string(),
                    x.charge_wait_low.count.to_string(),
                    x.charge_wait_mid.sum.to_string(),
                    x.charge_wait_mid.count.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    let path = dir.join("config.txt");
    fs::write(&path, &summary.config).map_err(io_err(&path))?;
    Ok(())
}

pub fn read_summary(dir: &Path) -> Result<Summary, ReportError> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let summary: Summary = serde_json::from_str(&text)
        .map_err(|e| ReportError::Parse { path: path.display().to_string(), reason: e.to_string() })?;
    if summary.schema != SCHEMA {
        return Err(ReportError::Schema(format!("{} has schema `{}`, expected `{SCHEMA}`", path.display(), summary.schema)));
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta {
    pub policy: String,
    pub against: String,
    pub day_type: String,
    pub metric: String,
    pub base: f64,
    pub value: f64,
    pub delta: f64,
    /// Relative change in percent; `None` when the base is zero.
    pub pct: Option<f64>,
}

fn delta(policy: &str, against: &str, day_type: &str, metric: &str, base: f64, value: f64) -> Delta {
    Delta {
        policy: policy.into(),
        against: against.into(),
        day_type: day_type.into(),
        metric: metric.into(),
        base,
        value,
        delta: value - base,
        pct: (base != 0.0).then(|| (value - base) / base.abs() * 100.0),
    }
}

/// Per-policy changes from report `a` to report `b`.
pub fn compare(a: &Summary, b: &Summary) -> Result<Vec<Delta>, ReportError> {
    if a.schema != b.schema {
        return Err(ReportError::Schema(format!("`{}` vs `{}`", a.schema, b.schema)));
    }
    let mut out = Vec::new();
    for pb in &b.policies {
        let Some(pa) = a.policy(&pb.policy) else { continue };
        for (dt, metrics) in &pb.daily {
            for (m, s) in metrics {
                let base = pa.daily.get(dt).and_then(|x| x.get(m)).copied().flatten();
                if let (Some(base), Some(s)) = (base, s) {
                    out.push(delta(&pb.policy, &pb.policy, dt, m, base.mean, s.mean));
                }
            }
        }
    }
    if out.is_empty() && !a.policies.is_empty() && !b.policies.is_empty() {
        return Err(ReportError::Schema("no policy in common".into()));
    }
    Ok(out)
}

/// Changes of `reference` relative to every other policy in one report.
pub fn compare_policies(s: &Summary, reference: &str) -> Result<Vec<Delta>, ReportError> {
    let r = s.policy(reference).ok_or_else(|| ReportError::Schema(format!("report has no policy `{reference}`")))?;
    let mut out = Vec::new();
    for other in s.policies.iter().filter(|p| p.policy != reference) {
        for (dt, metrics) in &r.daily {
            for (m, v) in metrics {
                let base = other.daily.get(dt).and_then(|x| x.get(m)).copied().flatten();
                if let (Some(base), Some(v)) = (base, v) {
                    out.push(delta(reference, &other.policy, dt, m, base.mean, v.mean));
                }
            }
        }
    }
    Ok(out)
}

pub fn render_deltas(deltas: &[Delta]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<10} {:<10} {:<8} {:<13} {:>10} {:>10} {:>10} {:>9}", "policy", "vs", "days", "metric", "base", "value", "delta", "pct");
    for d in deltas {
        let pct = d.pct.map_or("-".to_string(), |p| format!("{p:+.1}%"));
        let _ = writeln!(
            s,
            "{:<10} {:<10} {:<8} {:<13} {:>10.4} {:>10.4} {:>+10.4} {:>9}",
            d.policy, d.against, d.day_type, d.metric, d.base, d.value, d.delta, pct
        );
    }
    s
}

/// Daily statistics per metric, one block per metric.
pub fn render_tables(s: &Summary) -> String {
    let mut out = String::new();
    for metric in METRICS {
        let _ = writeln!(out, "{metric}");
        let _ = writeln!(out, "  {:<8} {:<10} {:>10} {:>10} {:>10} {:>10}", "days", "policy", "mean", "max", "min", "sd");
        for dt in ["weekday", "weekend"] {
            for p in &s.policies {
                let Some(Some(st)) = p.daily.get(dt).and_then(|m| m.get(metric)) else { continue };
                let scale = if metric == "mr" { 100.0 } else { 1.0 };
                let _ = writeln!(
                    out,
                    "  {:<8} {:<10} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
                    dt,
                    p.policy,
                    st.mean * scale,
                    st.max * scale,
                    st.min * scale,
                    st.sd * scale
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_basic() {
        let s = stats(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.max, s.min, s.sd, s.days), (2.0, 3.0, 1.0, 1.0, 3));
        assert_eq!(stats(&[5.0]).unwrap().sd, 0.0);
        assert!(stats(&[]).is_none());
    }
}
