//! Monte Carlo against exact enumeration.

use super::partition::{check_enumerable, state_distribution, ExactSpectrum};
use crate::complex::{Color, Lattice};
use crate::error::{Error, Result};
use crate::gf2::{EchelonBasis, Gf2Vec};
use crate::mc::{metropolis_sweep, run_pt, RunSchedule, TemperatureLadder};
use crate::models::{symmetry_support, CouplingModel, ModelKind, SpinState, SymmetryGenerator};
use crate::observables::{specific_heat, ObservablePlan, ObservableSeries};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson test of sampled states against the Boltzmann distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionCheck {
    pub temperature: f64,
    pub samples: u64,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Samples the state every `thin` Metropolis sweeps after `thin * 10`
/// burn-in sweeps and compares the histogram with exact probabilities.
pub fn distribution_check(
    model: &CouplingModel,
    temperature: f64,
    samples: u64,
    thin: u64,
    seed: u64,
) -> Result<DistributionCheck> {
    let n = model.num_spins();
    check_enumerable(n)?;
    if n > 16 {
        return Err(Error::TooLarge("state histograms are limited to 16 spins".into()));
    }
    if samples == 0 || thin == 0 {
        return Err(Error::InvalidParameter("samples and thinning must be positive".into()));
    }
    let probs = state_distribution(model, 1.0 / temperature)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut state = SpinState::random(n, &mut rng);
    for _ in 0..thin * 10 {
        metropolis_sweep(model, &mut state, temperature, &mut rng)?;
    }
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..samples {
        for _ in 0..thin {
            metropolis_sweep(model, &mut state, temperature, &mut rng)?;
        }
        let bits = state
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .fold(0usize, |b, (i, _)| b | 1 << i);
        counts[bits] += 1;
    }
    let total = samples as f64;
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (c, p) in counts.iter().zip(&probs) {
        let expected = p * total;
        if expected > 0.0 {
            chi2 += (*c as f64 - expected).powi(2) / expected;
            cells += 1;
        }
    }
    let dof = cells.max(2) - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .sf(chi2);
    Ok(DistributionCheck {
        temperature,
        samples,
        chi2,
        dof,
        p_value,
    })
}

/// Monte Carlo energy and specific heat next to the exact values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalCheck {
    pub temperature: f64,
    pub exact_energy: f64,
    pub mc_energy: f64,
    pub mc_energy_error: f64,
    pub exact_heat: f64,
    pub mc_heat: f64,
    pub mc_heat_error: f64,
    /// Largest deviation of the two, in standard errors.
    pub z: f64,
}

pub fn thermal_check(
    model: &CouplingModel,
    temperatures: &[f64],
    schedule: &RunSchedule,
) -> Result<Vec<ThermalCheck>> {
    let spectrum = ExactSpectrum::of(model)?;
    let ladder = TemperatureLadder::explicit(temperatures.to_vec())?;
    let plan = ObservablePlan::energy_only(model.num_spins());
    let record = run_pt(model, &plan, &ladder, schedule)?;
    record
        .series
        .iter()
        .map(|s| {
            let t = s.temperature;
            let exact = spectrum.thermal(t)?;
            let series = ObservableSeries::new(vec![s.clone()]);
            let e = series.estimate(|a| a.energy)?;
            let c = specific_heat(&series, t, model.num_spins())?;
            let z = |v: f64, x: f64, err: f64| {
                if err > 0.0 {
                    (v - x).abs() / err
                } else if v == x {
                    0.0
                } else {
                    f64::INFINITY
                }
            };
            Ok(ThermalCheck {
                temperature: t,
                exact_energy: exact.energy,
                mc_energy: e.value,
                mc_energy_error: e.error,
                exact_heat: exact.specific_heat,
                mc_heat: c.value,
                mc_heat_error: c.error,
                z: z(e.value, exact.energy, e.error).max(z(c.value, exact.specific_heat, c.error)),
            })
        })
        .collect()
}

/// Ground-state degeneracy split into local gauge orbits and global classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateCheck {
    pub ground_energy: i64,
    pub ground_states: u64,
    /// Order of the group generated by the local symmetries.
    pub gauge_order: u64,
    /// `ground_states / gauge_order`.
    pub classes: u64,
    pub consistent: bool,
}

/// Every local symmetry generator of the model on its lattice.
pub fn local_generators(model: &CouplingModel, lattice: &Lattice) -> Vec<SymmetryGenerator> {
    let colors = [Color::Red, Color::Green, Color::Blue, Color::Yellow];
    match (model.kind(), lattice) {
        (ModelKind::Rpim, Lattice::Cubic(cx)) => (0..cx.num_vertices())
            .map(|vertex| SymmetryGenerator::VertexStar { vertex })
            .collect(),
        (ModelKind::SixBodyEdge, Lattice::Bcc(cx)) => {
            let mut out = Vec::new();
            for v in 0..cx.vertices().len() {
                let own = cx.color(v);
                let others: Vec<Color> = colors.into_iter().filter(|&c| c != own).collect();
                for i in 0..others.len() {
                    for j in i + 1..others.len() {
                        out.push(SymmetryGenerator::EdgeStar {
                            vertex: v,
                            colors: [others[i], others[j]],
                        });
                    }
                }
            }
            out
        }
        (ModelKind::FourBodyVertex, Lattice::Bcc(_)) => {
            let mut out = Vec::new();
            for i in 0..4 {
                for j in i + 1..4 {
                    out.push(SymmetryGenerator::ColorPair([colors[i], colors[j]]));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Enumerates the ground states of a clean model and checks that their
/// number is a multiple of the gauge-group order.
pub fn ground_state_check(model: &CouplingModel, lattice: &Lattice) -> Result<GroundStateCheck> {
    let spectrum = ExactSpectrum::of(model)?;
    let n = model.num_spins();
    let mut span = EchelonBasis::new(n);
    for g in local_generators(model, lattice) {
        span.insert(Gf2Vec::from_indices(n, symmetry_support(model, lattice, g)?));
    }
    let gauge_order = 1u64 << span.rank();
    let ground_states = spectrum.ground_state_count();
    Ok(GroundStateCheck {
        ground_energy: spectrum.ground_energy(),
        ground_states,
        gauge_order,
        classes: ground_states / gauge_order,
        consistent: ground_states % gauge_order == 0,
    })
}
