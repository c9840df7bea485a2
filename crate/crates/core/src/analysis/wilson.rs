//! Perimeter versus area scaling of Wilson loops:
//! `-ln <W(l)> / l = a l + b + c ln l`, with `a > 0` in the confined phase.

use super::bootstrap::Estimate;
use crate::error::{Error, Result};
use crate::observables::WilsonAverage;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonPoint {
    pub size: usize,
    /// `-ln <W> / l`.
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonFit {
    pub a: Estimate,
    pub b: Estimate,
    pub c: Estimate,
    pub chi2: f64,
    pub dof: usize,
    pub points: usize,
}

impl WilsonFit {
    /// True when `a` is positive beyond two standard errors.
    pub fn confined(&self) -> bool {
        self.a.value > 2.0 * self.a.error
    }
}

/// Smallest error bar assigned to a point. Loops equal to one in every
/// sample carry exactly zero variance, which would otherwise give an
/// infinite weight.
pub const MIN_POINT_ERROR: f64 = 1e-9;

/// Converts loop averages into fit points, dropping entries below the noise
/// floor.
pub fn wilson_points(averages: &[WilsonAverage]) -> Vec<WilsonPoint> {
    averages
        .iter()
        .filter(|w| w.size > 0 && w.loggable && w.value > 0.0)
        .map(|w| {
            let l = w.size as f64;
            WilsonPoint {
                size: w.size,
                value: -w.value.ln() / l,
                error: (w.error / (w.value * l)).max(MIN_POINT_ERROR),
            }
        })
        .collect()
}

/// Distinct loop sizes needed to fit the logarithmic term; with fewer the
/// fit drops it and reports `c = 0 ± 0`.
pub const LOG_TERM_MIN_SIZES: usize = 4;

/// Weighted least squares on the basis `(l, 1, ln l)`, or `(l, 1)` when
/// fewer than [`LOG_TERM_MIN_SIZES`] loop sizes survive the noise floor.
/// Three sizes determine the three coefficients exactly, which makes `a`
/// swing wildly with the noise in the largest loop.
pub fn wilson_fit(points: &[WilsonPoint]) -> Result<WilsonFit> {
    let mut pts = points.to_vec();
    pts.sort_by(|x, y| x.size.cmp(&y.size).then(x.value.total_cmp(&y.value)));
    let mut sizes: Vec<usize> = pts.iter().map(|p| p.size).collect();
    sizes.dedup();
    if pts.len() < 3 || sizes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Wilson fit needs at least 3 points over 2 loop sizes, got {} points over {} sizes",
            pts.len(),
            sizes.len()
        )));
    }
    if let Some(bad) = pts.iter().find(|p| p.size == 0 || !(p.error > 0.0) || !p.value.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid Wilson point {bad:?}")));
    }
    let k = if sizes.len() >= LOG_TERM_MIN_SIZES { 3 } else { 2 };
    let n = pts.len();
    let x = DMatrix::from_fn(n, k, |i, j| {
        let l = pts[i].size as f64;
        let basis = [l, 1.0, l.ln()];
        basis[j] / pts[i].error
    });
    let y = DVector::from_fn(n, |i, _| pts[i].value / pts[i].error);
    let normal = x.transpose() * &x;
    let cov = normal
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular normal matrix in Wilson fit".into()))?;
    let coef = &cov * (x.transpose() * &y);
    let resid = &y - &x * &coef;
    let est = |j: usize| {
        if j < k {
            Estimate::new(coef[j], cov[(j, j)].max(0.0).sqrt())
        } else {
            Estimate::new(0.0, 0.0)
        }
    };
    Ok(WilsonFit {
        a: est(0),
        b: est(1),
        c: est(2),
        chi2: resid.norm_squared(),
        dof: n - k,
        points: n,
    })
}

/// Indices `(lo, hi)` into `series` sorted by abscissa where the trailing
/// run of significantly positive values (see [`WilsonFit::confined`])
/// begins: `hi` is the first point of that run, which must reach the end
/// of the series, and `lo = hi - 1`. Sign flips within the error bars
/// below it are ignored.
pub fn confinement_onset(series: &[(f64, Estimate)]) -> Option<(usize, usize)> {
    let significant = |a: &Estimate| a.value > 2.0 * a.error;
    let last_unconfined = series.iter().rposition(|(_, a)| !significant(a))?;
    let hi = last_unconfined + 1;
    (hi < series.len()).then_some((last_unconfined, hi))
}

/// Where a coefficient turns positive for good, inside the bracket given by
/// [`confinement_onset`]. In order of preference:
///
/// 1. the zero of the line through the first two confined points, when it
///    rises and its root falls inside the bracket; a third confined point,
///    if any, bounds the curvature error;
/// 2. linear interpolation across the bracket when the lower point is
///    significantly negative, with at least half the bracket as error since
///    nothing between the two points constrains the shape of the onset;
/// 3. the bracket midpoint with half its width as error.
///
/// A lower point consistent with zero carries no information about where
/// inside the bracket the coefficient turns on, so it is never interpolated.
pub fn wilson_zero_crossing(series: &[(f64, Estimate)]) -> Option<Estimate> {
    let mut s = series.to_vec();
    s.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (lo, hi) = confinement_onset(&s)?;
    let (t1, a1) = s[lo];
    let (t2, a2) = s[hi];
    let floor = |t: f64, err: f64| Estimate::new(t, err.max(f64::EPSILON * t.abs()));

    if let Some(root) = s.get(hi + 1).and_then(|&p3| linear_root(s[hi], p3)) {
        if root.value >= t1 && root.value <= t2 {
            let spread = s
                .get(hi + 2)
                .and_then(|&p4| linear_root(s[hi], p4))
                .map_or(0.0, |r| (r.value - root.value).abs());
            return Some(floor(root.value, root.error.max(spread)));
        }
    }
    if a1.value < -2.0 * a1.error {
        let d = a2.value - a1.value;
        let t = t1 + (t2 - t1) * (-a1.value) / d;
        let g1 = (t2 - t1) * a2.value / (d * d);
        let g2 = (t2 - t1) * (-a1.value) / (d * d);
        let err = (g1 * a1.error).hypot(g2 * a2.error).max(0.5 * (t2 - t1));
        return Some(Estimate::new(t, err));
    }
    Some(Estimate::new(0.5 * (t1 + t2), 0.5 * (t2 - t1)))
}

/// Zero of the line through two points, with propagated error. `None`
/// unless the line rises.
fn linear_root((t2, a2): (f64, Estimate), (t3, a3): (f64, Estimate)) -> Option<Estimate> {
    let d = a3.value - a2.value;
    if d <= 0.0 {
        return None;
    }
    let h = t3 - t2;
    let t = t2 - a2.value * h / d;
    let err = h / (d * d) * (a3.value * a2.error).hypot(a2.value * a3.error);
    Some(Estimate::new(t, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn synth(a: f64, b: f64, c: f64, noise: f64, seed: u64) -> Vec<WilsonPoint> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        (1..=8)
            .map(|l| {
                let lf = l as f64;
                let z: f64 = StandardNormal.sample(&mut rng);
                WilsonPoint {
                    size: l,
                    value: a * lf + b + c * lf.ln() + noise * z,
                    error: noise,
                }
            })
            .collect()
    }

    #[test]
    fn recovers_coefficients() {
        let fit = wilson_fit(&synth(0.3, 1.0, -0.2, 0.01, 4)).unwrap();
        assert!((fit.a.value - 0.3).abs() < 2.0 * fit.a.error + 1e-9, "{fit:?}");
        assert!((fit.b.value - 1.0).abs() < 2.0 * fit.b.error + 1e-9);
        assert!((fit.c.value + 0.2).abs() < 2.0 * fit.c.error + 1e-9);
        assert_eq!(fit.dof, 5);
    }

    #[test]
    fn perimeter_law_has_zero_slope() {
        let fit = wilson_fit(&synth(0.0, 0.8, 0.0, 0.01, 5)).unwrap();
        assert!(fit.a.value.abs() < 3.0 * fit.a.error);
        assert!(!fit.confined());
    }

    #[test]
    fn underdetermined() {
        assert!(wilson_fit(&synth(0.0, 0.8, 0.0, 0.01, 5)[..2]).is_err());
    }

    #[test]
    fn few_sizes_drop_the_log_term() {
        let fit = wilson_fit(&synth(0.3, 1.0, 0.0, 1e-6, 6)[..3]).unwrap();
        assert_eq!(fit.c, Estimate::new(0.0, 0.0));
        assert_eq!(fit.dof, 1);
        assert!((fit.a.value - 0.3).abs() < 1e-4, "{fit:?}");
    }

    #[test]
    fn noise_floor_drops_points() {
        let avgs = [
            WilsonAverage { size: 1, value: 0.5, error: 0.01, loggable: true },
            WilsonAverage { size: 2, value: 0.01, error: 0.02, loggable: false },
        ];
        let pts = wilson_points(&avgs);
        assert_eq!(pts.len(), 1);
        assert!((pts[0].value - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_crossing_interpolates() {
        let s = [
            (0.5, Estimate::new(-0.2, 0.01)),
            (0.7, Estimate::new(-0.1, 0.01)),
            (0.9, Estimate::new(0.1, 0.01)),
        ];
        let z = wilson_zero_crossing(&s).unwrap();
        assert!((z.value - 0.8).abs() < 1e-12);
        assert!((z.error - 0.1).abs() < 1e-12, "{z:?}");
        assert!(wilson_zero_crossing(&s[..2]).is_none());
    }

    #[test]
    fn zero_crossing_ignores_flicker_below() {
        let s = [
            (0.4, Estimate::new(0.0, 1e-9)),
            (0.5, Estimate::new(1e-9, 1e-9)),
            (0.6, Estimate::new(-1e-9, 1e-9)),
            (0.7, Estimate::new(-0.1, 0.01)),
            (0.9, Estimate::new(0.1, 0.01)),
            (1.1, Estimate::new(0.3, 0.01)),
        ];
        let z = wilson_zero_crossing(&s).unwrap();
        assert!((z.value - 0.8).abs() < 1e-12);
    }

    #[test]
    fn insignificant_positive_below_onset_gives_midpoint() {
        let s = [
            (0.6, Estimate::new(-0.001, 0.004)),
            (0.7, Estimate::new(0.008, 0.018)),
            (0.9, Estimate::new(0.6, 0.1)),
        ];
        let z = wilson_zero_crossing(&s).unwrap();
        assert!((z.value - 0.8).abs() < 1e-12 && (z.error - 0.1).abs() < 1e-12, "{z:?}");
    }

    #[test]
    fn onset_must_reach_the_top() {
        let s = [
            (0.5, Estimate::new(-0.1, 0.01)),
            (0.7, Estimate::new(0.2, 0.01)),
            (0.9, Estimate::new(0.1, 0.2)),
        ];
        assert_eq!(confinement_onset(&s), None);
        assert!(wilson_zero_crossing(&s).is_none());
        let all = [(0.5, Estimate::new(0.2, 0.01)), (0.7, Estimate::new(0.3, 0.01))];
        assert_eq!(confinement_onset(&all), None);
    }

    #[test]
    fn zero_crossing_extrapolates_the_confined_branch() {
        // a = T - 1.1 above the onset; the lower point is consistent with zero.
        let s = [
            (1.0, Estimate::new(-0.001, 0.002)),
            (1.2, Estimate::new(0.1, 0.001)),
            (1.4, Estimate::new(0.3, 0.001)),
            (1.6, Estimate::new(0.5, 0.001)),
        ];
        let z = wilson_zero_crossing(&s).unwrap();
        assert!((z.value - 1.1).abs() < 1e-12 && z.error < 0.01, "{z:?}");
    }

    #[test]
    fn jump_at_the_onset_gives_midpoint() {
        // The coefficient overshoots and then falls: no usable extrapolation.
        let s = [
            (0.8, Estimate::new(0.0, 1e-4)),
            (0.9, Estimate::new(2.7, 0.1)),
            (1.0, Estimate::new(1.0, 0.01)),
        ];
        let z = wilson_zero_crossing(&s).unwrap();
        assert!((z.value - 0.85).abs() < 1e-12 && (z.error - 0.05).abs() < 1e-12, "{z:?}");
        // A steep rise whose root lands below the bracket is also rejected.
        let steep = [
            (0.8, Estimate::new(0.0, 1e-4)),
            (0.9, Estimate::new(1.0, 0.01)),
            (1.0, Estimate::new(1.2, 0.01)),
        ];
        assert!((wilson_zero_crossing(&steep).unwrap().value - 0.85).abs() < 1e-12);
    }
}
