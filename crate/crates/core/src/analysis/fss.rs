//! Finite-size extrapolation of specific-heat peak positions with the
//! shift ansatz `T(L) = a L^-b + T_c`.

use super::{CriticalPointEstimate, FitDiagnostics, Method};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizePeak {
    pub linear_size: usize,
    pub temperature: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FssOptions {
    /// Fixed shift exponent; `None` fits it.
    pub exponent: Option<f64>,
    /// Search interval for a fitted exponent.
    pub exponent_range: (f64, f64),
    pub resamples: usize,
    pub seed: u64,
}

impl Default for FssOptions {
    fn default() -> Self {
        Self {
            exponent: None,
            exponent_range: (0.1, 8.0),
            resamples: 400,
            seed: 0x00f5_5eed,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct LinearFit {
    amplitude: f64,
    tc: f64,
    chi2: f64,
    var_amplitude: f64,
    var_tc: f64,
}

/// Weighted least squares of `y = a x + t` at fixed exponent.
fn fit_fixed(peaks: &[SizePeak], exponent: f64) -> LinearFit {
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for pk in peaks {
        let w = 1.0 / (pk.error * pk.error);
        let x = (pk.linear_size as f64).powf(-exponent);
        s += w;
        sx += w * x;
        sy += w * pk.temperature;
        sxx += w * x * x;
        sxy += w * x * pk.temperature;
    }
    let det = s * sxx - sx * sx;
    let amplitude = (s * sxy - sx * sy) / det;
    let tc = (sxx * sy - sx * sxy) / det;
    let chi2 = peaks
        .iter()
        .map(|pk| {
            let x = (pk.linear_size as f64).powf(-exponent);
            ((pk.temperature - amplitude * x - tc) / pk.error).powi(2)
        })
        .sum();
    LinearFit {
        amplitude,
        tc,
        chi2,
        var_amplitude: s / det,
        var_tc: sxx / det,
    }
}

/// Minimizes chi^2 over the exponent: log-spaced scan, then golden-section
/// refinement around the best grid point.
fn fit_profile(peaks: &[SizePeak], range: (f64, f64)) -> (f64, LinearFit) {
    const GRID: usize = 240;
    let (lo, hi) = (range.0.ln(), range.1.ln());
    let at = |k: usize| (lo + (hi - lo) * k as f64 / (GRID - 1) as f64).exp();
    let mut best = 0;
    let mut best_chi2 = f64::INFINITY;
    for k in 0..GRID {
        let c = fit_fixed(peaks, at(k)).chi2;
        if k == 0 || c < best_chi2 * (1.0 - 1e-12) {
            best_chi2 = c;
            best = k;
        }
    }
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(GRID - 1)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if fit_fixed(peaks, c).chi2 <= fit_fixed(peaks, d).chi2 {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = 0.5 * (a + b);
    let grid_fit = fit_fixed(peaks, at(best));
    let fit = fit_fixed(peaks, refined);
    if fit.chi2 <= grid_fit.chi2 {
        (refined, fit)
    } else {
        (at(best), grid_fit)
    }
}

fn validate(peaks: &[SizePeak]) -> Result<Vec<SizePeak>> {
    let mut sorted = peaks.to_vec();
    sorted.sort_by(|a, b| {
        a.linear_size
            .cmp(&b.linear_size)
            .then(a.temperature.total_cmp(&b.temperature))
    });
    let mut sizes: Vec<usize> = sorted.iter().map(|p| p.linear_size).collect();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "peak extrapolation needs at least 3 system sizes, got {}",
            sizes.len()
        )));
    }
    if let Some(bad) = sorted
        .iter()
        .find(|p| !(p.error > 0.0) || !p.temperature.is_finite() || p.linear_size == 0)
    {
        return Err(Error::InvalidParameter(format!("invalid peak {bad:?}")));
    }
    Ok(sorted)
}

/// Extrapolates peak positions to infinite size with default options.
pub fn heat_peak_fss(peaks: &[SizePeak]) -> Result<CriticalPointEstimate> {
    heat_peak_fss_with(peaks, &FssOptions::default())
}

pub fn heat_peak_fss_with(peaks: &[SizePeak], options: &FssOptions) -> Result<CriticalPointEstimate> {
    let peaks = validate(peaks)?;
    let fit_once = |data: &[SizePeak]| match options.exponent {
        Some(b) => (b, fit_fixed(data, b)),
        None => fit_profile(data, options.exponent_range),
    };
    let (exponent, fit) = fit_once(&peaks);
    let mut notes = Vec::new();
    if options.exponent.is_none() {
        let at_edge = (exponent - options.exponent_range.0).abs() < 1e-6 * exponent
            || (exponent - options.exponent_range.1).abs() < 1e-6 * exponent;
        let amplitude_significant = fit.amplitude.abs() > 2.0 * fit.var_amplitude.sqrt();
        if at_edge && amplitude_significant {
            return Err(Error::Fit(format!(
                "shift exponent ran to the search boundary b = {exponent:.3} \
                 (a = {:.4}, T_c = {:.4}, chi2 = {:.3}); fix the exponent or add sizes",
                fit.amplitude, fit.tc, fit.chi2
            )));
        }
        if !amplitude_significant {
            notes.push("shift amplitude consistent with zero; exponent undetermined".into());
        }
    }

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(options.seed);
    let mut samples = Vec::with_capacity(options.resamples);
    let mut trial = peaks.clone();
    for _ in 0..options.resamples {
        for (t, pk) in trial.iter_mut().zip(&peaks) {
            let z: f64 = StandardNormal.sample(&mut rng);
            t.temperature = pk.temperature + pk.error * z;
        }
        let (_, f) = fit_once(&trial);
        if f.tc.is_finite() {
            samples.push(f.tc);
        }
    }
    let boot_error = if samples.len() >= 2 {
        let m = samples.iter().sum::<f64>() / samples.len() as f64;
        (samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (samples.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let error = boot_error.max(fit.var_tc.sqrt());
    let residuals = peaks
        .iter()
        .map(|pk| pk.temperature - fit.amplitude * (pk.linear_size as f64).powf(-exponent) - fit.tc)
        .collect();
    notes.push(format!("amplitude a = {:.6}", fit.amplitude));
    let free = if options.exponent.is_some() { 2 } else { 3 };
    Ok(CriticalPointEstimate {
        p: 0.0,
        tc: fit.tc,
        error,
        method: Method::HeatPeakFss,
        diagnostics: FitDiagnostics {
            exponent: Some(exponent),
            chi2: Some(fit.chi2),
            dof: Some(peaks.len().saturating_sub(free)),
            residuals,
            notes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(a: f64, b: f64, tc: f64, noise: f64, seed: u64) -> Vec<SizePeak> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        [4usize, 6, 8, 10, 12, 16]
            .iter()
            .map(|&l| {
                let z: f64 = StandardNormal.sample(&mut rng);
                SizePeak {
                    linear_size: l,
                    temperature: a * (l as f64).powf(-b) + tc + noise * z,
                    error: noise,
                }
            })
            .collect()
    }

    #[test]
    fn recovers_synthetic_critical_point() {
        let est = heat_peak_fss(&synth(2.0, 1.5, 8.77, 0.005, 7)).unwrap();
        assert!((est.tc - 8.77).abs() < 3.0 * est.error, "{est:?}");
        assert!(est.error > 0.0);
        assert_eq!(est.method, Method::HeatPeakFss);
    }

    #[test]
    fn constant_peaks() {
        let peaks: Vec<SizePeak> = [4, 6, 8]
            .iter()
            .map(|&l| SizePeak {
                linear_size: l,
                temperature: 5.0,
                error: 0.01,
            })
            .collect();
        let est = heat_peak_fss(&peaks).unwrap();
        assert!((est.tc - 5.0).abs() < 1e-9);
        assert!(est.error > 0.0);
    }

    #[test]
    fn order_independent() {
        let peaks = synth(1.0, 2.0, 3.0, 0.01, 9);
        let mut rev = peaks.clone();
        rev.reverse();
        assert_eq!(heat_peak_fss(&peaks).unwrap(), heat_peak_fss(&rev).unwrap());
    }

    #[test]
    fn needs_three_sizes() {
        let peaks = &synth(1.0, 2.0, 3.0, 0.01, 9)[..2];
        assert!(matches!(heat_peak_fss(peaks), Err(Error::InsufficientData(_))));
    }
}
