use serde::{Deserialize, Serialize};

pub const LOW_SOC_MAX: f64 = 0.3;
pub const MID_SOC_MIN: f64 = 0.3;
pub const MID_SOC_MAX: f64 = 0.6;

/// Share of riders matched; an empty window counts as fully served.
pub fn metrics_mr(matched: usize, requests: usize) -> f64 {
    if requests == 0 {
        1.0
    } else {
        matched as f64 / requests as f64
    }
}

/// Mean rider wait; `None` without matches.
pub fn metrics_rawt(waits: &[f64]) -> Option<f64> {
    mean(waits)
}

/// Mean realized charging wait; `None` when nobody went charging.
pub fn metrics_acwt(waits: &[f64]) -> Option<f64> {
    mean(waits)
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// One EV sent to charge after a trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeRecord {
    /// SoC when matched, before the trip.
    pub soc: f64,
    pub wait: f64,
}

/// Sum and count, so that sparse buckets can be pooled across windows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub sum: f64,
    pub count: usize,
}

impl Tally {
    pub fn add(&mut self, v: f64) {
        self.sum += v;
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Tally) {
        self.sum += other.sum;
        self.count += other.count;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

pub fn acwt_bucket(records: &[ChargeRecord], lo: f64, hi: f64) -> Tally {
    let mut t = Tally::default();
    for r in records.iter().filter(|r| r.soc >= lo && r.soc <= hi) {
        t.add(r.wait);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub window: usize,
    /// Riders in the pool: new this window plus carried in.
    pub requests: usize,
    pub new_requests: usize,
    pub matched: usize,
    pub carried_over: usize,
    pub expired: usize,
    pub guided: usize,
    pub idle_evs: usize,
    pub exhausted: usize,
    pub mr: f64,
    pub rawt: Option<f64>,
    pub rider_wait: Tally,
    pub charge_wait: Tally,
    pub charge_wait_low: Tally,
    pub charge_wait_mid: Tally,
}

impl WindowMetrics {
    pub fn acwt(&self) -> Option<f64> {
        self.charge_wait.mean()
    }

    pub fn acwt_low_soc(&self) -> Option<f64> {
        self.charge_wait_low.mean()
    }

    pub fn acwt_mid_soc(&self) -> Option<f64> {
        self.charge_wait_mid.mean()
    }

    pub fn from_outcome(window: usize, requests: usize, new_requests: usize, rider_waits: &[f64], charges: &[ChargeRecord]) -> Self {
        let mut rider_wait = Tally::default();
        rider_waits.iter().for_each(|&w| rider_wait.add(w));
        let mut charge_wait = Tally::default();
        charges.iter().for_each(|c| charge_wait.add(c.wait));
        Self {
            window,
            requests,
            new_requests,
            matched: rider_waits.len(),
            mr: metrics_mr(rider_waits.len(), requests),
            rawt: metrics_rawt(rider_waits),
            rider_wait,
            charge_wait,
            charge_wait_low: acwt_bucket(charges, 0.0, LOW_SOC_MAX),
            charge_wait_mid: acwt_bucket(charges, MID_SOC_MIN, MID_SOC_MAX),
            ..Default::default()
        }
    }
}

/// Daily values: MR and RAWT average the windows where they are defined;
/// charging waits pool all EVs of the day.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DailyMetrics {
    pub mr: Option<f64>,
    pub rawt: Option<f64>,
    pub acwt: Option<f64>,
    pub acwt_low_soc: Option<f64>,
    pub acwt_mid_soc: Option<f64>,
    pub requests: usize,
    pub matched: usize,
    pub expired: usize,
}

pub fn daily(windows: &[WindowMetrics]) -> DailyMetrics {
    let mrs: Vec<f64> = windows.iter().filter(|w| w.requests > 0).map(|w| w.mr).collect();
    let rawts: Vec<f64> = windows.iter().filter_map(|w| w.rawt).collect();
    let (mut all, mut low, mut mid) = (Tally::default(), Tally::default(), Tally::default());
    for w in windows {
        all.merge(&w.charge_wait);
        low.merge(&w.charge_wait_low);
        mid.merge(&w.charge_wait_mid);
    }
    DailyMetrics {
        mr: mean(&mrs),
        rawt: mean(&rawts),
        acwt: all.mean(),
        acwt_low_soc: low.mean(),
        acwt_mid_soc: mid.mean(),
        requests: windows.iter().map(|w| w.new_requests).sum(),
        matched: windows.iter().map(|w| w.matched).sum(),
        expired: windows.iter().map(|w| w.expired).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mr_examples() {
        assert_eq!(metrics_mr(3, 4), 0.75);
        assert_eq!(metrics_mr(0, 5), 0.0);
        assert_eq!(metrics_mr(4, 4), 1.0);
        assert_eq!(metrics_mr(0, 0), 1.0);
    }

    #[test]
    fn rawt_examples() {
        assert_eq!(metrics_rawt(&[10.0, 20.0]), Some(15.0));
        assert_eq!(metrics_rawt(&[7.0]), Some(7.0));
        assert_eq!(metrics_rawt(&[]), None);
    }

    #[test]
    fn acwt_examples() {
        assert_eq!(metrics_acwt(&[4.0, 8.0]), Some(6.0));
        assert_eq!(metrics_acwt(&[0.0, 0.0, 0.0]), Some(0.0));
    }

    #[test]
    fn soc_buckets() {
        let recs = [
            ChargeRecord { soc: 0.25, wait: 10.0 },
            ChargeRecord { soc: 0.45, wait: 4.0 },
            ChargeRecord { soc: 0.55, wait: 8.0 },
        ];
        assert_eq!(acwt_bucket(&recs, 0.0, LOW_SOC_MAX).mean(), Some(10.0));
        assert_eq!(acwt_bucket(&recs, MID_SOC_MIN, MID_SOC_MAX).mean(), Some(6.0));
        assert_eq!(acwt_bucket(&recs, 0.7, 1.0).mean(), None);
    }

    #[test]
    fn empty_window() {
        let w = WindowMetrics::from_outcome(0, 0, 0, &[], &[]);
        assert_eq!(w.mr, 1.0);
        assert_eq!((w.requests, w.matched), (0, 0));
        assert_eq!(w.rawt, None);
        assert_eq!(w.acwt(), None);
    }

    #[test]
    fn daily_skips_undefined_windows() {
        let a = WindowMetrics::from_outcome(0, 4, 4, &[10.0, 20.0, 30.0], &[ChargeRecord { soc: 0.2, wait: 6.0 }]);
        let b = WindowMetrics::from_outcome(1, 0, 0, &[], &[]);
        let c = WindowMetrics::from_outcome(2, 2, 2, &[], &[]);
        let d = daily(&[a, b, c]);
        assert_eq!(d.mr, Some((0.75 + 0.0) / 2.0));
        assert_eq!(d.rawt, Some(20.0));
        assert_eq!(d.acwt_low_soc, Some(6.0));
        assert_eq!(d.acwt_mid_soc, None);
    }
}
