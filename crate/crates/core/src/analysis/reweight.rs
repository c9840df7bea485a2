//! Specific-heat curves between ladder rungs by single-histogram
//! reweighting, and location of their maximum.

use super::bootstrap::{bootstrap, Estimate};
use crate::error::{Error, Result};
use crate::observables::RungSeries;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use std::collections::BTreeMap;

/// `<E>` and `<E^2>` at `target` from a histogram sampled at `source`.
pub fn reweighted_moments(histogram: &BTreeMap<i64, u64>, source: f64, target: f64) -> Result<(f64, f64)> {
    if histogram.is_empty() {
        return Err(Error::InsufficientData("empty energy histogram".into()));
    }
    let db = 1.0 / target - 1.0 / source;
    let logw: Vec<(f64, f64)> = histogram
        .iter()
        .map(|(&e, &c)| (e as f64, (c as f64).ln() - db * e as f64))
        .collect();
    let shift = logw.iter().map(|(_, w)| *w).fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (e, w) in logw {
        let x = (w - shift).exp();
        z += x;
        m1 += x * e;
        m2 += x * e * e;
    }
    Ok((m1 / z, m2 / z))
}

fn nearest_rung(temps: &[f64], t: f64) -> usize {
    let mut best = 0;
    for (k, &tk) in temps.iter().enumerate() {
        if (1.0 / tk - 1.0 / t).abs() < (1.0 / temps[best] - 1.0 / t).abs() {
            best = k;
        }
    }
    best
}

/// Specific heat of one ladder at `t`, reweighted from the nearest rung.
fn heat_at(hists: &[BTreeMap<i64, u64>], temps: &[f64], n_spins: usize, t: f64) -> Result<f64> {
    let k = nearest_rung(temps, t);
    let (e1, e2) = reweighted_moments(&hists[k], temps[k], t)?;
    Ok((e2 - e1 * e1).max(0.0) / (n_spins as f64 * t * t))
}

struct Ladder {
    temps: Vec<f64>,
    hists: Vec<BTreeMap<i64, u64>>,
}

fn ladder_of(rungs: &[RungSeries], skip_block: Option<usize>) -> Ladder {
    let temps = rungs.iter().map(|r| r.temperature).collect();
    let hists = rungs
        .iter()
        .map(|r| {
            let mut h = BTreeMap::new();
            for (i, b) in r.blocks.iter().enumerate() {
                if Some(i) == skip_block {
                    continue;
                }
                for (e, c) in &b.histogram {
                    *h.entry(*e).or_default() += c;
                }
            }
            h
        })
        .collect();
    Ladder { temps, hists }
}

/// Disorder-averaged `c(T)` on a grid of temperatures.
fn mean_curve(ladders: &[Ladder], n_spins: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.len()];
    for l in ladders {
        for (acc, &t) in out.iter_mut().zip(grid) {
            *acc += heat_at(&l.hists, &l.temps, n_spins, t)?;
        }
    }
    let n = ladders.len() as f64;
    Ok(out.into_iter().map(|c| c / n).collect())
}

fn argmax_refined<F: Fn(f64) -> Result<f64>>(grid: &[f64], values: &[f64], f: F) -> Result<(f64, f64)> {
    let (k, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..50 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c)? >= f(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let t = 0.5 * (a + b);
    let v = f(t)?;
    if v >= values[k] {
        Ok((t, v))
    } else {
        Ok((grid[k], values[k]))
    }
}

fn peak_of(ladders: &[Ladder], n_spins: usize, points_per_rung: usize) -> Result<(f64, f64)> {
    let temps = &ladders[0].temps;
    let (lo, hi) = (temps[0], *temps.last().unwrap());
    let n = (temps.len() * points_per_rung).max(8);
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let values = mean_curve(ladders, n_spins, &grid)?;
    argmax_refined(&grid, &values, |t| {
        mean_curve(ladders, n_spins, &[t]).map(|v| v[0])
    })
}

/// Location and height of the maximum of the disorder-averaged specific
/// heat. `samples[s]` holds the rung series of disorder sample `s`, all on
/// the same ladder with energy histograms recorded. The error on the
/// location is a bootstrap over samples, or a jackknife over time blocks
/// for a single sample.
pub fn heat_peak(samples: &[Vec<RungSeries>], n_spins: usize) -> Result<(Estimate, f64)> {
    if samples.is_empty() || samples[0].len() < 2 {
        return Err(Error::InsufficientData("peak search needs a ladder of at least 2 rungs".into()));
    }
    let temps: Vec<f64> = samples[0].iter().map(|r| r.temperature).collect();
    for s in samples {
        if s.iter().map(|r| r.temperature).collect::<Vec<_>>() != temps {
            return Err(Error::Structure("disorder samples use different ladders".into()));
        }
        if s.iter().any(|r| r.histogram().is_empty()) {
            return Err(Error::InsufficientData(
                "energy histograms were not recorded for every rung".into(),
            ));
        }
    }
    const DENSITY: usize = 12;
    let full: Vec<Ladder> = samples.iter().map(|s| ladder_of(s, None)).collect();
    let (t_peak, height) = peak_of(&full, n_spins, DENSITY)?;
    let error = if samples.len() >= 2 {
        let idx: Vec<usize> = (0..samples.len()).collect();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x4ea7);
        let stat = |pick: &[usize]| {
            let sub: Vec<Ladder> = pick.iter().map(|&i| ladder_of(&samples[i], None)).collect();
            peak_of(&sub, n_spins, DENSITY).map(|p| p.0).unwrap_or(f64::NAN)
        };
        bootstrap(&idx, stat, 100, &mut rng)?.error
    } else {
        let nblocks = samples[0].iter().map(|r| r.blocks.len()).min().unwrap_or(0);
        let mut vals = Vec::new();
        for b in 0..nblocks {
            let lad = vec![ladder_of(&samples[0], Some(b))];
            if lad[0].hists.iter().any(|h| h.is_empty()) {
                continue;
            }
            vals.push(peak_of(&lad, n_spins, DENSITY)?.0);
        }
        let n = vals.len();
        if n < 2 {
            0.0
        } else {
            let m = vals.iter().sum::<f64>() / n as f64;
            (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64).sqrt()
        }
    };
    Ok((Estimate::new(t_peak, error.max(seam_resolution(&temps, t_peak))), height))
}

/// Half the rung interval when `t` sits on the boundary between the
/// reweighting ranges of two rungs, else zero. A maximum there usually
/// means the two energy histograms do not overlap, so it is located only
/// to within that interval, whatever the block-to-block scatter says.
fn seam_resolution(temps: &[f64], t: f64) -> f64 {
    let below = nearest_rung(temps, t * (1.0 - 1e-9));
    let above = nearest_rung(temps, t * (1.0 + 1e-9));
    if below == above {
        0.0
    } else {
        0.5 * (temps[above] - temps[below]).abs()
    }
}

/// Specific heat on an arbitrary temperature grid, for tables and plots.
pub fn heat_curve(samples: &[Vec<RungSeries>], n_spins: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let ladders: Vec<Ladder> = samples.iter().map(|s| ladder_of(s, None)).collect();
    mean_curve(&ladders, n_spins, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seam_resolution_only_at_boundaries() {
        let temps = [1.0, 2.0, 4.0];
        // Nearest rung is decided in inverse temperature: the seam between
        // 1 and 2 sits at beta = 0.75.
        let seam = 1.0 / 0.75;
        assert!((seam_resolution(&temps, seam) - 0.5).abs() < 1e-12);
        assert_eq!(seam_resolution(&temps, 1.1), 0.0);
        assert_eq!(seam_resolution(&temps, 3.9), 0.0);
    }

    #[test]
    fn identity_reweighting() {
        let h: BTreeMap<i64, u64> = [(-4, 3), (0, 1), (4, 2)].into_iter().collect();
        let (m1, m2) = reweighted_moments(&h, 2.0, 2.0).unwrap();
        assert!((m1 - (-12.0 + 8.0) / 6.0).abs() < 1e-12);
        assert!((m2 - (48.0 + 32.0) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn exact_density_of_states_reweights_exactly() {
        // One 4-body term: g(-1) = 8, g(+1) = 8. Histogram at T = 1 is
        // proportional to g(E) exp(-E); reweighting must give -tanh(1/T).
        let w = |e: f64| 8.0 * (-e).exp();
        let scale = 1e6;
        let h: BTreeMap<i64, u64> = [(-1, (w(-1.0) * scale) as u64), (1, (w(1.0) * scale) as u64)]
            .into_iter()
            .collect();
        for t in [0.8, 1.0, 1.3] {
            let (m1, _) = reweighted_moments(&h, 1.0, t).unwrap();
            assert!((m1 + (1.0 / t).tanh()).abs() < 1e-6, "{t}: {m1}");
        }
    }
}
