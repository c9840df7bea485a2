//! Exact energy spectra by Gray-code enumeration of all spin states.

use crate::error::{Error, Result};
use crate::models::{CouplingModel, SpinState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest number of spins (or error bits) enumerated exhaustively.
pub const MAX_ENUMERATION_BITS: usize = 24;

// Top bits fixed per parallel chunk.
const PREFIX_BITS: usize = 6;

/// Density of states: how many of the `2^N` spin states have each energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSpectrum {
    pub num_spins: usize,
    /// `(energy, multiplicity)` sorted by energy.
    pub levels: Vec<(i64, u64)>,
}

/// Exact thermal quantities at one temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactThermal {
    pub temperature: f64,
    pub log_partition: f64,
    pub energy: f64,
    pub energy_sq: f64,
    /// `(<E^2> - <E>^2) / (N T^2)`, the convention of the Monte Carlo
    /// estimator.
    pub specific_heat: f64,
}

pub fn check_enumerable(num_spins: usize) -> Result<()> {
    if num_spins > MAX_ENUMERATION_BITS {
        return Err(Error::TooLarge(format!(
            "{num_spins} spins exceed the enumeration ceiling of {MAX_ENUMERATION_BITS}"
        )));
    }
    Ok(())
}

impl ExactSpectrum {
    /// Enumerates all states. Chunks over the top spins run in parallel;
    /// integer counts make the merge order irrelevant.
    pub fn of(model: &CouplingModel) -> Result<Self> {
        let n = model.num_spins();
        check_enumerable(n)?;
        let offset = model.num_terms() as i64;
        let prefix = n.min(PREFIX_BITS);
        let low = n - prefix;
        let counts = (0..1u64 << prefix)
            .into_par_iter()
            .map(|hi| {
                let mut hist = vec![0u64; 2 * model.num_terms() + 1];
                let mut state = SpinState::from_bits(n, hi << low);
                let mut e = model.energy(&state).expect("state sized to model");
                hist[(e + offset) as usize] += 1;
                for t in 1..1u64 << low {
                    let i = t.trailing_zeros() as usize;
                    e += model.delta_energy(&state, i);
                    state.flip(i);
                    hist[(e + offset) as usize] += 1;
                }
                hist
            })
            .reduce(
                || vec![0u64; 2 * model.num_terms() + 1],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        let levels = counts
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(k, c)| (k as i64 - offset, c))
            .collect();
        Ok(Self { num_spins: n, levels })
    }

    pub fn total_states(&self) -> u64 {
        self.levels.iter().map(|(_, c)| c).sum()
    }

    pub fn ground_energy(&self) -> i64 {
        self.levels[0].0
    }

    pub fn ground_state_count(&self) -> u64 {
        self.levels[0].1
    }

    /// `log Z(beta)` by log-sum-exp over levels.
    pub fn log_partition(&self, beta: f64) -> f64 {
        log_sum_exp(
            self.levels
                .iter()
                .map(|&(e, c)| (c as f64).ln() - beta * e as f64),
        )
    }

    pub fn thermal(&self, temperature: f64) -> Result<ExactThermal> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        let beta = 1.0 / temperature;
        let log_z = self.log_partition(beta);
        let (mut e1, mut e2) = (0.0, 0.0);
        for &(e, c) in &self.levels {
            let w = ((c as f64).ln() - beta * e as f64 - log_z).exp();
            e1 += w * e as f64;
            e2 += w * (e * e) as f64;
        }
        let heat = if self.num_spins == 0 {
            0.0
        } else {
            (e2 - e1 * e1) / (self.num_spins as f64 * temperature * temperature)
        };
        Ok(ExactThermal {
            temperature,
            log_partition: log_z,
            energy: e1,
            energy_sq: e2,
            specific_heat: heat,
        })
    }
}

/// `log Z = log sum_s exp(-beta H(s))`.
pub fn exact_partition(model: &CouplingModel, beta: f64) -> Result<f64> {
    Ok(ExactSpectrum::of(model)?.log_partition(beta))
}

/// Boltzmann probability of every state, indexed as in
/// [`SpinState::from_bits`].
pub fn state_distribution(model: &CouplingModel, beta: f64) -> Result<Vec<f64>> {
    let n = model.num_spins();
    check_enumerable(n)?;
    let energies: Vec<i64> = (0..1u64 << n)
        .map(|b| model.energy(&SpinState::from_bits(n, b)))
        .collect::<Result<_>>()?;
    let log_z = log_sum_exp(energies.iter().map(|&e| -beta * e as f64));
    Ok(energies
        .iter()
        .map(|&e| (-beta * e as f64 - log_z).exp())
        .collect())
}

/// Numerically stable `log sum exp(x_i)`; empty or all `-inf` gives `-inf`.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Gf2Vec;
    use crate::models::{compile_model, DisorderConfig, ModelKind};
    use crate::oracle::toy;
    use approx::assert_relative_eq;

    fn tetra(sign_flipped: bool) -> CouplingModel {
        let chain = toy::single_tetrahedron().unwrap();
        let flips = Gf2Vec::from_indices(1, if sign_flipped { vec![0] } else { vec![] });
        compile_model(&chain, &DisorderConfig::from_flips(flips, 0.0), ModelKind::Generic).unwrap()
    }

    #[test]
    fn single_term_partition_function() {
        for beta in [0.1, 0.5, 1.7] {
            let z = exact_partition(&tetra(false), beta).unwrap().exp();
            assert_relative_eq!(z, 16.0 * f64::cosh(beta), max_relative = 1e-13);
            // Flipping spin 0 maps the two sign choices onto each other.
            let zf = exact_partition(&tetra(true), beta).unwrap().exp();
            assert_relative_eq!(z, zf, max_relative = 1e-13);
        }
    }

    #[test]
    fn zero_beta_counts_states() {
        let chain = toy::ToyCode::Rpim(2).build().unwrap();
        let m = compile_model(&chain, &DisorderConfig::clean(chain.dim1()), ModelKind::Rpim).unwrap();
        let s = ExactSpectrum::of(&m).unwrap();
        assert_eq!(s.total_states(), 1 << 24);
        assert_relative_eq!(s.log_partition(0.0), 24.0 * 2f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn single_term_thermal() {
        let th = ExactSpectrum::of(&tetra(false)).unwrap().thermal(2.0).unwrap();
        assert_relative_eq!(th.energy, -(0.5f64).tanh(), max_relative = 1e-13);
        // d<E>/dT for <E> = -tanh(1/T), spread over four spins.
        let c_one_term = (1.0 - (0.5f64).tanh().powi(2)) / 4.0;
        assert_relative_eq!(th.specific_heat, c_one_term / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn distribution_is_normalized() {
        let d = state_distribution(&tetra(false), 1.0).unwrap();
        assert_eq!(d.len(), 16);
        assert_relative_eq!(d.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn too_large_is_rejected() {
        assert!(matches!(check_enumerable(25), Err(Error::TooLarge(_))));
    }
}
