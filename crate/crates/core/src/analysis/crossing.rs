//! Crossings of normalized correlation-length curves `xi_L / L` between
//! system sizes.

use super::{CriticalPointEstimate, FitDiagnostics, Method};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub temperature: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeCurve {
    pub linear_size: usize,
    pub points: Vec<CurvePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CrossingOutcome {
    Transition(CriticalPointEstimate),
    NoTransition,
    /// The curves coincide; no crossing can be located.
    Indeterminate,
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InsufficientData("interpolation needs at least 2 points".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("abscissae must be strictly increasing".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = Self::end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = Self::end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

/// Linear interpolation of the error bars.
fn interp_error(points: &[CurvePoint], t: f64) -> f64 {
    let k = points.partition_point(|p| p.temperature <= t).clamp(1, points.len() - 1);
    let (a, b) = (&points[k - 1], &points[k]);
    let s = ((t - a.temperature) / (b.temperature - a.temperature)).clamp(0.0, 1.0);
    a.error + s * (b.error - a.error)
}

struct Prepared<'a> {
    size: usize,
    points: &'a [CurvePoint],
    interp: Pchip,
}

fn prepare(curve: &SizeCurve) -> Result<Prepared<'_>> {
    let interp = Pchip::new(
        curve.points.iter().map(|p| p.temperature).collect(),
        curve.points.iter().map(|p| p.value).collect(),
    )?;
    Ok(Prepared {
        size: curve.linear_size,
        points: &curve.points,
        interp,
    })
}

const SCAN: usize = 512;

enum PairResult {
    Crossing { t: f64, err: f64 },
    None,
    Identical,
}

/// Crossing of a smaller and a larger size where the larger curve passes
/// from above (ordered side, low T) to below (high T).
fn pair_crossing(small: &Prepared, large: &Prepared) -> Result<PairResult> {
    let lo = small.interp.domain().0.max(large.interp.domain().0);
    let hi = small.interp.domain().1.min(large.interp.domain().1);
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "temperature ranges of L = {} and L = {} do not overlap",
            small.size, large.size
        )));
    }
    let diff = |t: f64| large.interp.eval(t) - small.interp.eval(t);
    let scale = small
        .points
        .iter()
        .chain(large.points)
        .map(|p| p.value.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let grid: Vec<f64> = (0..=SCAN).map(|k| lo + (hi - lo) * k as f64 / SCAN as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| diff(t)).collect();
    if vals.iter().all(|v| v.abs() <= 1e-12 * scale) {
        return Ok(PairResult::Identical);
    }
    for k in 0..SCAN {
        if vals[k] > 0.0 && vals[k + 1] <= 0.0 {
            let (mut a, mut b) = (grid[k], grid[k + 1]);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if diff(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let t = 0.5 * (a + b);
            let h = (hi - lo) * 1e-4;
            let slope = (diff((t + h).min(hi)) - diff((t - h).max(lo))) / ((t + h).min(hi) - (t - h).max(lo));
            let sigma = interp_error(small.points, t).hypot(interp_error(large.points, t));
            let err = if slope.abs() > 0.0 { sigma / slope.abs() } else { hi - lo };
            return Ok(PairResult::Crossing {
                t,
                err: err.min(hi - lo).max(f64::EPSILON * t.abs()),
            });
        }
    }
    Ok(PairResult::None)
}

/// Locates the crossing of `xi_L / L` curves. Every pair of sizes is
/// examined; pairwise crossings are combined by inverse-variance weighting.
pub fn xi_crossing(curves: &[SizeCurve]) -> Result<CrossingOutcome> {
    let mut curves: Vec<&SizeCurve> = curves.iter().collect();
    curves.sort_by_key(|c| c.linear_size);
    if curves.len() < 2 || curves.windows(2).any(|w| w[0].linear_size == w[1].linear_size) {
        return Err(Error::InsufficientData(
            "crossing analysis needs at least 2 distinct sizes".into(),
        ));
    }
    let prepared: Vec<Prepared> = curves.iter().map(|c| prepare(c)).collect::<Result<_>>()?;
    let mut found = Vec::new();
    let mut identical = 0;
    let mut pairs = 0;
    let mut notes = Vec::new();
    for i in 0..prepared.len() {
        for j in i + 1..prepared.len() {
            pairs += 1;
            match pair_crossing(&prepared[i], &prepared[j])? {
                PairResult::Crossing { t, err } => {
                    notes.push(format!(
                        "L = {} x L = {}: T = {t:.5} +- {err:.5}",
                        prepared[i].size, prepared[j].size
                    ));
                    found.push((t, err));
                }
                PairResult::Identical => identical += 1,
                PairResult::None => {}
            }
        }
    }
    if found.is_empty() {
        return Ok(if identical == pairs {
            CrossingOutcome::Indeterminate
        } else {
            CrossingOutcome::NoTransition
        });
    }
    let wsum: f64 = found.iter().map(|(_, e)| 1.0 / (e * e)).sum();
    let tc = found.iter().map(|(t, e)| t / (e * e)).sum::<f64>() / wsum;
    let mut error = wsum.sqrt().recip();
    if found.len() > 1 {
        let m = found.iter().map(|(t, _)| t).sum::<f64>() / found.len() as f64;
        let spread = (found.iter().map(|(t, _)| (t - m).powi(2)).sum::<f64>() / (found.len() - 1) as f64).sqrt();
        error = error.max(spread / (found.len() as f64).sqrt());
    }
    Ok(CrossingOutcome::Transition(CriticalPointEstimate {
        p: 0.0,
        tc,
        error,
        method: Method::XiCrossing,
        diagnostics: FitDiagnostics {
            residuals: found.iter().map(|(t, _)| t - tc).collect(),
            notes,
            ..Default::default()
        },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(l: usize, f: impl Fn(f64) -> f64) -> SizeCurve {
        SizeCurve {
            linear_size: l,
            points: (0..21)
                .map(|k| {
                    let t = 2.0 + 0.05 * k as f64;
                    CurvePoint {
                        temperature: t,
                        value: f(t),
                        error: 0.002,
                    }
                })
                .collect(),
        }
    }

    fn scaling(l: usize) -> impl Fn(f64) -> f64 {
        move |t| 0.5 - 0.5 * ((l as f64) * (t - 2.56)).tanh()
    }

    #[test]
    fn finds_synthetic_crossing() {
        let out = xi_crossing(&[curve(4, scaling(4)), curve(8, scaling(8))]).unwrap();
        match out {
            CrossingOutcome::Transition(e) => {
                assert!((e.tc - 2.56).abs() < 0.01, "{e:?}");
                assert!(e.error > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parallel_curves() {
        let out = xi_crossing(&[curve(4, |t| 1.0 - 0.1 * t), curve(8, |t| 0.9 - 0.1 * t)]).unwrap();
        assert_eq!(out, CrossingOutcome::NoTransition);
    }

    #[test]
    fn identical_curves() {
        let out = xi_crossing(&[curve(4, scaling(4)), curve(8, scaling(4))]).unwrap();
        assert_eq!(out, CrossingOutcome::Indeterminate);
    }

    #[test]
    fn disjoint_ranges() {
        let mut far = curve(8, scaling(8));
        for p in &mut far.points {
            p.temperature += 10.0;
        }
        assert!(xi_crossing(&[curve(4, scaling(4)), far]).is_err());
    }

    #[test]
    fn pchip_reproduces_nodes_and_stays_monotone() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let y = vec![0.0, 0.1, 5.0, 5.1];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-12);
        }
        let mut prev = p.eval(0.0);
        for k in 1..=300 {
            let v = p.eval(3.0 * k as f64 / 300.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}
