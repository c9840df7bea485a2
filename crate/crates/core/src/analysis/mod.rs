//! From observable tables to critical points and phase diagrams.

pub mod bootstrap;
pub mod crossing;
pub mod fss;
pub mod nishimori;
pub mod phase;
pub mod reweight;
pub mod wilson;

pub use bootstrap::{bootstrap, Estimate};
pub use crossing::{xi_crossing, CrossingOutcome, CurvePoint, SizeCurve};
pub use fss::{heat_peak_fss, heat_peak_fss_with, FssOptions, SizePeak};
pub use nishimori::{dual_temperature, nishimori_beta, nishimori_temperature, self_dual_temperature};
pub use phase::{assemble_phase_diagram, fixed_temperature_scan, FixedTemperatureScan, PhaseDiagram, PhasePoint};
pub use wilson::{confinement_onset, wilson_fit, wilson_points, wilson_zero_crossing, WilsonFit, WilsonPoint};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    HeatPeakFss,
    XiCrossing,
    WilsonFit,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::HeatPeakFss => "heat_peak_fss",
            Method::XiCrossing => "xi_crossing",
            Method::WilsonFit => "wilson_fit",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "heat_peak_fss" | "heat" => Ok(Method::HeatPeakFss),
            "xi_crossing" | "xi" => Ok(Method::XiCrossing),
            "wilson_fit" | "wilson" => Ok(Method::WilsonFit),
            other => Err(crate::Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Goodness-of-fit details attached to an estimate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Shift exponent for the peak fit (`1/nu` for continuous transitions).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointEstimate {
    pub p: f64,
    #[serde(rename = "Tc")]
    pub tc: f64,
    #[serde(rename = "err")]
    pub error: f64,
    pub method: Method,
    #[serde(default)]
    pub diagnostics: FitDiagnostics,
}

impl CriticalPointEstimate {
    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.tc, self.error)
    }
}
