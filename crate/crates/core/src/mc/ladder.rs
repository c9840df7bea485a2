//! Temperature ladders for parallel tempering.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderMode {
    Geometric,
    Explicit,
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureLadder {
    temperatures: Vec<f64>,
    mode: LadderMode,
}

impl TemperatureLadder {
    /// A ladder from explicit temperatures, which must be positive and
    /// strictly increasing.
    pub fn explicit(temperatures: Vec<f64>) -> Result<Self> {
        Self::checked(temperatures, LadderMode::Explicit)
    }

    fn checked(temperatures: Vec<f64>, mode: LadderMode) -> Result<Self> {
        if temperatures.is_empty() {
            return Err(Error::InvalidParameter("empty temperature ladder".into()));
        }
        if temperatures.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidParameter("temperatures must be positive and finite".into()));
        }
        if temperatures.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("temperatures must be strictly increasing".into()));
        }
        Ok(Self { temperatures, mode })
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn betas(&self) -> Vec<f64> {
        self.temperatures.iter().map(|t| 1.0 / t).collect()
    }

    pub fn len(&self) -> usize {
        self.temperatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperatures.is_empty()
    }

    pub fn mode(&self) -> LadderMode {
        self.mode
    }

    pub fn t_min(&self) -> f64 {
        self.temperatures[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.temperatures.last().unwrap()
    }

    /// Redistributes rungs so every adjacent pair sees the same swap
    /// acceptance, given measured rates `acceptance[k]` between rungs `k`
    /// and `k + 1`. Endpoints stay fixed.
    ///
    /// Acceptance between neighbours behaves like `exp(-c dbeta^2)`, so
    /// `sqrt(-ln A)` is a local distance along the ladder. New rungs are
    /// placed at equal cumulative distance, interpolating linearly in
    /// `beta` within each old interval.
    pub fn equalized(&self, acceptance: &[f64]) -> Result<Self> {
        let n = self.len();
        if acceptance.len() + 1 != n || n < 2 {
            return Err(Error::InvalidParameter(format!(
                "{} acceptance rates for a ladder of {n} rungs",
                acceptance.len()
            )));
        }
        let betas = self.betas();
        let dist: Vec<f64> = acceptance
            .iter()
            .map(|&a| (-(a.clamp(1e-4, 1.0)).ln()).sqrt().max(1e-3))
            .collect();
        let mut cum = vec![0.0];
        for d in &dist {
            cum.push(cum.last().unwrap() + d);
        }
        let total = *cum.last().unwrap();
        let mut out = Vec::with_capacity(n);
        out.push(self.t_min());
        for j in 1..n - 1 {
            let target = total * j as f64 / (n - 1) as f64;
            let k = cum.partition_point(|&c| c <= target).clamp(1, n - 1) - 1;
            let s = (target - cum[k]) / (cum[k + 1] - cum[k]);
            let beta = betas[k] + s * (betas[k + 1] - betas[k]);
            out.push(1.0 / beta);
        }
        out.push(self.t_max());
        Self::checked(out, LadderMode::Adaptive)
    }
}

/// Builds a ladder between `t_min` and `t_max`. `Geometric` spaces rungs by
/// a constant ratio; `Adaptive` starts from the same geometric ladder, to be
/// refined by [`TemperatureLadder::equalized`] from pilot-run swap rates.
/// Explicit ladders come from [`TemperatureLadder::explicit`].
pub fn build_ladder(t_min: f64, t_max: f64, rungs: usize, mode: LadderMode) -> Result<TemperatureLadder> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ladder bounds need 0 < T_min < T_max, got ({t_min}, {t_max})"
        )));
    }
    if rungs < 2 {
        return Err(Error::InvalidParameter(format!("ladder needs at least 2 rungs, got {rungs}")));
    }
    if mode == LadderMode::Explicit {
        return Err(Error::InvalidParameter(
            "explicit ladders are built from a temperature list".into(),
        ));
    }
    let ratio = t_max / t_min;
    let mut temps: Vec<f64> = (0..rungs)
        .map(|k| t_min * ratio.powf(k as f64 / (rungs - 1) as f64))
        .collect();
    temps[0] = t_min;
    temps[rungs - 1] = t_max;
    TemperatureLadder::checked(temps, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_table_row() {
        let l = build_ladder(2.40, 12.80, 55, LadderMode::Geometric).unwrap();
        assert_eq!(l.len(), 55);
        assert_eq!(l.t_min(), 2.40);
        assert_eq!(l.t_max(), 12.80);
        let r = l.temperatures()[1] / l.temperatures()[0];
        for w in l.temperatures().windows(2) {
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_and_minimal() {
        assert!(build_ladder(1.0, 1.0, 5, LadderMode::Geometric).is_err());
        assert!(build_ladder(0.0, 1.0, 5, LadderMode::Geometric).is_err());
        assert!(build_ladder(1.0, 2.0, 1, LadderMode::Geometric).is_err());
        let l = build_ladder(1.5, 3.0, 2, LadderMode::Geometric).unwrap();
        assert_eq!(l.temperatures(), &[1.5, 3.0]);
    }

    #[test]
    fn explicit_validation() {
        assert!(TemperatureLadder::explicit(vec![1.0, 0.5]).is_err());
        assert!(TemperatureLadder::explicit(vec![1.0, 2.0, 2.0]).is_err());
        assert_eq!(TemperatureLadder::explicit(vec![1.0, 2.0]).unwrap().mode(), LadderMode::Explicit);
    }

    #[test]
    fn equalizing_flat_rates_is_stable() {
        let l = build_ladder(1.0, 4.0, 6, LadderMode::Adaptive).unwrap();
        // Uniform spacing in beta with uniform acceptance stays put.
        let betas: Vec<f64> = (0..6).map(|k| 1.0 - 0.15 * k as f64).collect();
        let l2 = TemperatureLadder::explicit(betas.iter().map(|b| 1.0 / b).collect()).unwrap();
        let eq = l2.equalized(&[0.4; 5]).unwrap();
        for (a, b) in eq.temperatures().iter().zip(l2.temperatures()) {
            assert!((a - b).abs() < 1e-9);
        }
        // A bottleneck pulls rungs into the slow interval.
        let eq = l.equalized(&[0.9, 0.9, 0.01, 0.9, 0.9]).unwrap();
        let gap_before = l.temperatures()[3] - l.temperatures()[2];
        let inside = eq
            .temperatures()
            .iter()
            .filter(|&&t| t > l.temperatures()[2] && t < l.temperatures()[3])
            .count();
        assert!(inside >= 1, "{:?} gap {gap_before}", eq.temperatures());
    }
}
