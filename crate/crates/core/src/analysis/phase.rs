//! Phase-diagram assembly and threshold brackets.

use super::bootstrap::Estimate;
use super::nishimori::nishimori_temperature;
use super::wilson::{confinement_onset, wilson_zero_crossing, WilsonFit};
use super::{CriticalPointEstimate, Method};
use crate::error::{Error, Result};
use crate::models::ModelKind;
use serde::{Deserialize, Serialize};

/// Outcome of a temperature scan at one disorder strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PhasePoint {
    Transition(CriticalPointEstimate),
    NoTransition { p: f64, method: Method },
}

impl PhasePoint {
    pub fn p(&self) -> f64 {
        match self {
            PhasePoint::Transition(e) => e.p,
            PhasePoint::NoTransition { p, .. } => *p,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NishimoriSample {
    pub p: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoTransitionRecord {
    pub p: f64,
    pub method: Method,
}

/// Threshold bracket from a scan in `p` at fixed temperature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedTemperatureScan {
    #[serde(rename = "T")]
    pub temperature: f64,
    /// `(p, a)` with `a` the Wilson fit slope coefficient.
    pub slopes: Vec<(f64, Estimate)>,
    pub bracket: Option<(f64, f64)>,
    pub crossing: Option<Estimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub kind: ModelKind,
    pub points: Vec<CriticalPointEstimate>,
    pub no_transition: Vec<NoTransitionRecord>,
    pub p_c_bracket: Option<(f64, f64)>,
    pub p_c: Option<f64>,
    pub nishimori_samples: Vec<NishimoriSample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed_temperature_scans: Vec<FixedTemperatureScan>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl PhaseDiagram {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn nishimori_curve() -> Vec<NishimoriSample> {
    (1..=49)
        .map(|k| k as f64 / 100.0)
        .filter_map(|p| {
            nishimori_temperature(p)
                .ok()
                .map(|t| NishimoriSample { p, temperature: t })
        })
        .collect()
}

/// Sorts points by `p` and brackets the threshold: a transition whose
/// critical temperature lies at or above the Nishimori temperature puts the
/// Nishimori point in the ordered phase; a missing transition, or one below
/// the Nishimori temperature, puts it in the disordered phase.
pub fn assemble_phase_diagram(points: &[PhasePoint], kind: ModelKind) -> Result<PhaseDiagram> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no phase points to assemble".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.p().total_cmp(&b.p()));
    let mut estimates = Vec::new();
    let mut none = Vec::new();
    let mut ordered_at_nishimori = Vec::new();
    let mut disordered_at_nishimori = Vec::new();
    for pt in &sorted {
        match pt {
            PhasePoint::Transition(e) => {
                estimates.push(e.clone());
                let tn = if e.p == 0.0 { 0.0 } else { nishimori_temperature(e.p)? };
                if e.tc + e.error >= tn {
                    ordered_at_nishimori.push(e.p);
                } else {
                    disordered_at_nishimori.push(e.p);
                }
            }
            PhasePoint::NoTransition { p, method } => {
                none.push(NoTransitionRecord { p: *p, method: *method });
                disordered_at_nishimori.push(*p);
            }
        }
    }
    let mut notes = Vec::new();
    let lower = ordered_at_nishimori.iter().copied().fold(f64::NAN, f64::max);
    let bracket = if lower.is_nan() {
        None
    } else {
        let upper = disordered_at_nishimori
            .iter()
            .copied()
            .filter(|&p| p > lower)
            .fold(f64::NAN, f64::min);
        if disordered_at_nishimori.iter().any(|&p| p < lower) {
            notes.push("disordered points found below the largest ordered point".into());
        }
        (!upper.is_nan()).then_some((lower, upper))
    };
    Ok(PhaseDiagram {
        kind,
        points: estimates,
        no_transition: none,
        p_c_bracket: bracket,
        p_c: bracket.map(|(a, b)| 0.5 * (a + b)),
        nishimori_samples: nishimori_curve(),
        fixed_temperature_scans: Vec::new(),
        notes,
    })
}

/// Threshold at fixed temperature from Wilson fits at several `p`. The
/// bracket runs from the last `p` whose slope coefficient is not
/// significantly positive to the first of the trailing run of `p` values
/// with an area law (see [`confinement_onset`]). Sign flips of `a` inside
/// its error bar do not count, so an unresolved scan has no bracket and no
/// crossing.
pub fn fixed_temperature_scan(temperature: f64, fits: &[(f64, WilsonFit)]) -> Result<FixedTemperatureScan> {
    if fits.len() < 2 {
        return Err(Error::InsufficientData("a fixed-temperature scan needs at least 2 values of p".into()));
    }
    let mut slopes: Vec<(f64, Estimate)> = fits.iter().map(|(p, f)| (*p, f.a)).collect();
    slopes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let bracket = confinement_onset(&slopes).map(|(lo, hi)| (slopes[lo].0, slopes[hi].0));
    let crossing = wilson_zero_crossing(&slopes);
    Ok(FixedTemperatureScan {
        temperature,
        crossing,
        slopes,
        bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(a: f64, err: f64) -> WilsonFit {
        WilsonFit {
            a: Estimate::new(a, err),
            b: Estimate::new(0.0, 0.0),
            c: Estimate::new(0.0, 0.0),
            chi2: 0.0,
            dof: 1,
            points: 4,
        }
    }

    #[test]
    fn scan_brackets_only_significant_confinement() {
        let noisy = [(0.02, fit(0.003, 0.004)), (0.03, fit(-0.002, 0.01)), (0.04, fit(0.006, 0.01))];
        let s = fixed_temperature_scan(0.45, &noisy).unwrap();
        assert_eq!(s.bracket, None);
        assert_eq!(s.crossing, None);

        let resolved = [(0.02, fit(-0.001, 0.004)), (0.03, fit(0.002, 0.004)), (0.04, fit(0.05, 0.01))];
        let s = fixed_temperature_scan(0.45, &resolved).unwrap();
        assert_eq!(s.bracket, Some((0.03, 0.04)));
        let c = s.crossing.unwrap();
        assert!(c.value > 0.03 && c.value < 0.04, "{c:?}");
    }

    fn transition(p: f64, tc: f64) -> PhasePoint {
        PhasePoint::Transition(CriticalPointEstimate {
            p,
            tc,
            error: 0.04,
            method: Method::XiCrossing,
            diagnostics: Default::default(),
        })
    }

    #[test]
    fn four_body_bracket() {
        let pts = [
            PhasePoint::NoTransition { p: 0.28, method: Method::XiCrossing },
            transition(0.27, 2.56),
            transition(0.0, 8.77),
        ];
        let d = assemble_phase_diagram(&pts, ModelKind::FourBodyVertex).unwrap();
        assert_eq!(d.p_c_bracket, Some((0.27, 0.28)));
        assert_eq!(d.points.len(), 2);
        assert!(d.points[0].p < d.points[1].p);
        let back = PhaseDiagram::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn six_body_bracket() {
        let pts = [
            transition(0.018, 0.75),
            PhasePoint::NoTransition { p: 0.021, method: Method::WilsonFit },
        ];
        let d = assemble_phase_diagram(&pts, ModelKind::SixBodyEdge).unwrap();
        assert_eq!(d.p_c_bracket, Some((0.018, 0.021)));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(assemble_phase_diagram(&[], ModelKind::Rpim).is_err());
    }

    #[test]
    fn json_field_names() {
        let d = assemble_phase_diagram(&[transition(0.1, 5.0)], ModelKind::FourBodyVertex).unwrap();
        let v: serde_json::Value = serde_json::from_str(&d.to_json().unwrap()).unwrap();
        assert_eq!(v["kind"], "four-body-vertex");
        assert_eq!(v["points"][0]["Tc"], 5.0);
        assert_eq!(v["points"][0]["method"], "xi_crossing");
        assert!(v["nishimori_samples"].as_array().unwrap().len() > 10);
        assert!(v["p_c_bracket"].is_null());
    }
}
