//! Exact-oracle suites run by the `oracle` subcommand.

use crate::error::Result;
use crate::mc::RunSchedule;
use crate::models::{compile_model, DisorderConfig, ModelInstance, ModelKind};
use crate::oracle::{
    default_lemma_grid, distribution_check, identity_suite, lemma_check, thermal_check, DistributionCheck,
    IdentityReport, LemmaReport, SmallCSSCode, ThermalCheck, ToyCode, EXACT_TOLERANCE,
};
use serde::{Deserialize, Serialize};

pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const DISTRIBUTION_MIN_P_VALUE: f64 = 0.01;
pub const THERMAL_MAX_Z: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identity,
    Lemma,
    MonteCarlo,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Identity, Suite::Lemma, Suite::MonteCarlo];
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Suite::Identity),
            "lemma" => Ok(Suite::Lemma),
            "mc" | "monte-carlo" => Ok(Suite::MonteCarlo),
            other => Err(crate::Error::InvalidParameter(format!("unknown oracle suite {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub distribution: Vec<DistributionCheck>,
    pub thermal: Vec<ThermalCheck>,
    pub min_p_value: f64,
    pub max_z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub identity: Vec<IdentityReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lemma: Vec<LemmaReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloReport>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct OracleOptions {
    pub identity_codes: Vec<ToyCode>,
    pub identity_cases: usize,
    pub lemma_codes: Vec<ToyCode>,
    pub lemma_grid: Vec<f64>,
    pub seed: u64,
    /// Samples per temperature in the state-histogram test.
    pub distribution_samples: u64,
    /// Equilibration exponent of the L = 2 thermal comparison.
    pub thermal_tau: u32,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            identity_codes: vec![ToyCode::TwoTetrahedra, ToyCode::Toric(2), ToyCode::Repetition(5)],
            identity_cases: 20,
            lemma_codes: vec![
                ToyCode::Repetition(3),
                ToyCode::Repetition(5),
                ToyCode::Toric(2),
                ToyCode::Toric(3),
            ],
            lemma_grid: default_lemma_grid(),
            seed: 7,
            distribution_samples: 20_000,
            thermal_tau: 14,
        }
    }
}

pub fn identity_reports(opts: &OracleOptions) -> Result<Vec<IdentityReport>> {
    opts.identity_codes
        .iter()
        .map(|c| {
            let code = SmallCSSCode::new(c.to_string(), c.build()?)?;
            identity_suite(&code, opts.identity_cases, opts.seed, IDENTITY_TOLERANCE)
        })
        .collect()
}

pub fn lemma_reports(opts: &OracleOptions) -> Result<Vec<LemmaReport>> {
    opts.lemma_codes
        .iter()
        .map(|c| {
            let code = SmallCSSCode::new(c.to_string(), c.build()?)?;
            lemma_check(&code, &opts.lemma_grid, EXACT_TOLERANCE)
        })
        .collect()
}

/// State histogram of the single tetrahedron at three temperatures and
/// energy and specific heat of the clean L = 2 RPIM against enumeration.
pub fn monte_carlo_report(opts: &OracleOptions) -> Result<MonteCarloReport> {
    let chain = ToyCode::SingleTetrahedron.build()?;
    let tet = compile_model(&chain, &DisorderConfig::clean(1), ModelKind::Generic)?;
    let distribution = [1.0, 2.0, 5.0]
        .iter()
        .enumerate()
        .map(|(i, &t)| distribution_check(&tet, t, opts.distribution_samples, 4, opts.seed + i as u64))
        .collect::<Result<Vec<_>>>()?;
    let inst = ModelInstance::build(ModelKind::Rpim, 2, 0.0, 0)?;
    let temps = [0.8, 1.0, 1.2, 1.5, 2.0, 3.0];
    let thermal = thermal_check(&inst.model, &temps, &RunSchedule::new(opts.thermal_tau, opts.seed))?;
    let min_p_value = distribution.iter().map(|d| d.p_value).fold(f64::INFINITY, f64::min);
    let max_z = thermal.iter().map(|c| c.z).fold(0.0, f64::max);
    Ok(MonteCarloReport {
        pass: min_p_value > DISTRIBUTION_MIN_P_VALUE && max_z < THERMAL_MAX_Z,
        distribution,
        thermal,
        min_p_value,
        max_z,
    })
}

pub fn run_oracle(suites: &[Suite], opts: &OracleOptions) -> Result<OracleReport> {
    let mut report = OracleReport::default();
    for s in suites {
        match s {
            Suite::Identity => report.identity = identity_reports(opts)?,
            Suite::Lemma => report.lemma = lemma_reports(opts)?,
            Suite::MonteCarlo => report.monte_carlo = Some(monte_carlo_report(opts)?),
        }
    }
    report.pass = report.identity.iter().all(|r| r.pass)
        && report.lemma.iter().all(|r| r.pass)
        && report.monte_carlo.as_ref().is_none_or(|m| m.pass);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_suites_pass() {
        let opts = OracleOptions {
            identity_cases: 5,
            lemma_codes: vec![ToyCode::Repetition(3), ToyCode::Toric(2)],
            ..Default::default()
        };
        let r = run_oracle(&[Suite::Identity, Suite::Lemma], &opts).unwrap();
        assert!(r.pass, "{r:#?}");
        assert!(r.monte_carlo.is_none());
        let back: OracleReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
