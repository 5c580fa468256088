//! One-dimensional Gaussian mixtures fitted by expectation-maximization.

use serde::{Deserialize, Serialize};

/// Variances never drop below this; the data are integer counts.
pub const VARIANCE_FLOOR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl Mixture {
    pub fn single(mean: f64, variance: f64) -> Self {
        Self { weights: vec![1.0], means: vec![mean.max(0.0)], variances: vec![variance.max(VARIANCE_FLOOR)] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.means).map(|(w, m)| w * m).sum()
    }

    pub fn is_valid(&self) -> bool {
        let wsum: f64 = self.weights.iter().sum();
        !self.is_empty()
            && self.means.len() == self.len()
            && self.variances.len() == self.len()
            && (wsum - 1.0).abs() <= 1e-9
            && self.weights.iter().all(|w| *w >= 0.0)
            && self.variances.iter().all(|v| *v > 0.0)
            && self.means.iter().all(|m| *m >= 0.0)
    }

    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|x| self.density(*x).max(f64::MIN_POSITIVE).ln()).sum()
    }

    pub fn density(&self, x: f64) -> f64 {
        (0..self.len()).map(|k| self.weights[k] * normal_pdf(x, self.means[k], self.variances[k])).sum()
    }
}

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

pub fn sample_mean_variance(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = if data.len() > 1 { data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// EM fit with `k` components. Initial means sit at evenly spaced sample
/// quantiles so the result is a deterministic function of the data.
pub fn fit_em(data: &[f64], k: usize, max_iter: usize) -> Mixture {
    assert!(!data.is_empty() && k >= 1);
    let (mean, var) = sample_mean_variance(data);
    if k == 1 {
        return Mixture::single(mean, var);
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = data.len();
    let mut mix = Mixture {
        weights: vec![1.0 / k as f64; k],
        means: (0..k)
            .map(|j| {
                let q = ((j as f64 + 0.5) / k as f64 * n as f64).floor() as usize;
                sorted[q.min(n - 1)]
            })
            .collect(),
        variances: vec![var.max(VARIANCE_FLOOR); k],
    };
    let mut resp = vec![0.0; n * k];
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..max_iter {
        // E-step
        let mut ll = 0.0;
        for (i, x) in data.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            let mut total = 0.0;
            for j in 0..k {
                row[j] = mix.weights[j] * normal_pdf(*x, mix.means[j], mix.variances[j]);
                total += row[j];
            }
            if total <= f64::MIN_POSITIVE {
                row.iter_mut().for_each(|r| *r = 1.0 / k as f64);
                total = f64::MIN_POSITIVE;
            } else {
                row.iter_mut().for_each(|r| *r /= total);
            }
            ll += total.ln();
        }
        // M-step
        for j in 0..k {
            let nk: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            if nk < 1e-12 {
                mix.weights[j] = 0.0;
                continue;
            }
            let mu = (0..n).map(|i| resp[i * k + j] * data[i]).sum::<f64>() / nk;
            let v = (0..n).map(|i| resp[i * k + j] * (data[i] - mu).powi(2)).sum::<f64>() / nk;
            mix.weights[j] = nk / n as f64;
            mix.means[j] = mu;
            mix.variances[j] = v.max(VARIANCE_FLOOR);
        }
        let wsum: f64 = mix.weights.iter().sum();
        mix.weights.iter_mut().for_each(|w| *w /= wsum);
        if (ll - prev_ll).abs() <= 1e-10 * n as f64 {
            break;
        }
        prev_ll = ll;
    }
    prune(mix)
}

// Drops empty components and clamps means at zero.
fn prune(mix: Mixture) -> Mixture {
    let keep: Vec<usize> = (0..mix.len()).filter(|&j| mix.weights[j] > 1e-12).collect();
    let wsum: f64 = keep.iter().map(|&j| mix.weights[j]).sum();
    Mixture {
        weights: keep.iter().map(|&j| mix.weights[j] / wsum).collect(),
        means: keep.iter().map(|&j| mix.means[j].max(0.0)).collect(),
        variances: keep.iter().map(|&j| mix.variances[j]).collect(),
    }
}
