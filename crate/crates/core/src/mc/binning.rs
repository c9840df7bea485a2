//! Logarithmic binning of a per-sweep series. Sweep 0 forms bin 0 and bin
//! `k >= 1` covers sweeps `[2^(k-1), 2^k)`, so each bin is as long as all
//! earlier bins together. After `2^tau` equilibration sweeps and `2^tau`
//! measurement sweeps the last two bins are the second half of the
//! equilibration phase and the whole measurement phase.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Sub-blocks per bin used for the error of the bin mean.
pub const SUB_BLOCKS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Bin {
    count: u64,
    sum: f64,
    sum_sq: f64,
    sub_sum: Vec<f64>,
    sub_count: Vec<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LogBins {
    bins: Vec<Bin>,
}

/// Bin index of 0-based sweep `t`.
pub fn bin_index(t: u64) -> usize {
    (64 - t.leading_zeros()) as usize
}

/// First sweep and length of bin `k`.
pub fn bin_range(k: usize) -> (u64, u64) {
    if k == 0 {
        (0, 1)
    } else {
        (1 << (k - 1), 1 << (k - 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub index: usize,
    pub start: u64,
    pub length: u64,
    pub count: u64,
    pub mean: f64,
    pub error: f64,
}

impl LogBins {
    pub fn push(&mut self, t: u64, x: f64) {
        let k = bin_index(t);
        while self.bins.len() <= k {
            self.bins.push(Bin {
                count: 0,
                sum: 0.0,
                sum_sq: 0.0,
                sub_sum: vec![0.0; SUB_BLOCKS],
                sub_count: vec![0; SUB_BLOCKS],
            });
        }
        let (start, len) = bin_range(k);
        let sub = (((t - start) * SUB_BLOCKS as u64) / len) as usize;
        let b = &mut self.bins[k];
        b.count += 1;
        b.sum += x;
        b.sum_sq += x * x;
        b.sub_sum[sub] += x;
        b.sub_count[sub] += 1;
    }

    pub fn summaries(&self) -> Vec<BinSummary> {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, b)| b.count > 0)
            .map(|(k, b)| {
                let (start, length) = bin_range(k);
                let n = b.count as f64;
                let mean = b.sum / n;
                let filled: Vec<f64> = b
                    .sub_sum
                    .iter()
                    .zip(&b.sub_count)
                    .filter(|(_, &c)| c > 0)
                    .map(|(s, &c)| s / c as f64)
                    .collect();
                let error = if filled.len() == SUB_BLOCKS {
                    let m = filled.iter().sum::<f64>() / SUB_BLOCKS as f64;
                    let var = filled.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (SUB_BLOCKS - 1) as f64;
                    (var / SUB_BLOCKS as f64).sqrt()
                } else if b.count > 1 {
                    let var = (b.sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
                    (var / n).sqrt()
                } else {
                    0.0
                };
                BinSummary {
                    index: k,
                    start,
                    length,
                    count: b.count,
                    mean,
                    error,
                }
            })
            .collect()
    }
}

/// Drift between the last two bins in units of their combined error.
pub fn last_bins_z(summaries: &[BinSummary]) -> Option<f64> {
    let n = summaries.len();
    if n < 2 {
        return None;
    }
    let (a, b) = (&summaries[n - 2], &summaries[n - 1]);
    let d = (b.mean - a.mean).abs();
    let s = a.error.hypot(b.error);
    Some(if s > 0.0 {
        d / s
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY
    })
}

/// Threshold on per-rung drift z-scores: a two-sided normal quantile at
/// family-wise level `alpha` split over `rungs` comparisons.
pub fn drift_threshold(rungs: usize, alpha: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(1.0 - alpha / (2.0 * rungs.max(1) as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibrationReport {
    pub equilibrated: bool,
    pub threshold: f64,
    /// Per-rung drift between the last two bins; `None` with fewer than two
    /// bins.
    pub z_scores: Vec<Option<f64>>,
    pub max_z: f64,
}

pub const FAMILY_ALPHA: f64 = 0.01;

pub fn equilibration_report(bins: &[Vec<BinSummary>]) -> EquilibrationReport {
    let threshold = drift_threshold(bins.len(), FAMILY_ALPHA);
    let z_scores: Vec<Option<f64>> = bins.iter().map(|b| last_bins_z(b)).collect();
    let max_z = z_scores.iter().flatten().copied().fold(0.0, f64::max);
    let equilibrated = !z_scores.is_empty() && z_scores.iter().all(|z| matches!(z, Some(v) if *v <= threshold));
    EquilibrationReport {
        equilibrated,
        threshold,
        z_scores,
        max_z,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_layout() {
        assert_eq!(bin_index(0), 0);
        assert_eq!(bin_index(1), 1);
        assert_eq!(bin_index(2), 2);
        assert_eq!(bin_index(3), 2);
        assert_eq!(bin_index(4), 3);
        assert_eq!(bin_index(1023), 10);
        assert_eq!(bin_range(11), (1024, 1024));
        for t in 0..5000u64 {
            let (s, l) = bin_range(bin_index(t));
            assert!(t >= s && t < s + l);
        }
    }

    #[test]
    fn stationary_series_passes_drift_series_fails() {
        let mut flat = LogBins::default();
        let mut drift = LogBins::default();
        let mut x = 0x12345u64;
        for t in 0..(1u64 << 12) {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let noise = (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            flat.push(t, noise);
            drift.push(t, noise - 200.0 / (1.0 + t as f64).sqrt());
        }
        let zf = last_bins_z(&flat.summaries()).unwrap();
        let zd = last_bins_z(&drift.summaries()).unwrap();
        assert!(zf < 4.0, "{zf}");
        assert!(zd > 5.0, "{zd}");
        assert_eq!(flat.summaries().len(), 13);
    }

    #[test]
    fn threshold_grows_with_rungs() {
        assert!((drift_threshold(1, 0.01) - 2.5758).abs() < 1e-3);
        assert!(drift_threshold(55, 0.01) > drift_threshold(5, 0.01));
    }
}
