//! Single-spin Metropolis updates in fixed scan order.

use crate::error::{Error, Result};
use crate::models::{CouplingModel, SpinState};
use rand::RngCore;
use serde::{Deserialize, Serialize};

/// Acceptance thresholds for uphill moves at one temperature. A move that
/// raises the energy by `2h` (h = local field) is accepted when a uniform
/// 64-bit draw falls below `thresholds[h]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptanceTable {
    thresholds: Vec<u64>,
}

impl AcceptanceTable {
    pub fn new(temperature: f64, max_degree: usize) -> Self {
        let thresholds = (0..=max_degree)
            .map(|h| {
                let p = (-2.0 * h as f64 / temperature).exp();
                // Saturating conversion; p = 1 maps to u64::MAX.
                (p * 18_446_744_073_709_551_616.0) as u64
            })
            .collect();
        Self { thresholds }
    }

    #[inline]
    fn accept<R: RngCore + ?Sized>(&self, local: i32, rng: &mut R) -> bool {
        local <= 0 || rng.next_u64() < self.thresholds[local as usize]
    }
}

/// A spin configuration with cached term values `sign_j prod s_i` and
/// energy, so that a flip costs one pass over the spin's incident terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replica {
    spins: Vec<i8>,
    terms: Vec<i8>,
    energy: i64,
}

impl Replica {
    pub fn new(model: &CouplingModel, state: SpinState) -> Result<Self> {
        if state.len() != model.num_spins() {
            return Err(Error::Structure(format!(
                "state has {} spins, model has {}",
                state.len(),
                model.num_spins()
            )));
        }
        let terms: Vec<i8> = (0..model.num_terms()).map(|j| model.term_value(&state, j)).collect();
        let energy = -terms.iter().map(|&t| t as i64).sum::<i64>();
        Ok(Self {
            spins: state.as_slice().to_vec(),
            terms,
            energy,
        })
    }

    pub fn energy(&self) -> i64 {
        self.energy
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn state(&self) -> SpinState {
        SpinState::from_spins(self.spins.clone()).expect("replica spins are always +-1")
    }

    /// Recomputes terms and energy from the spins and compares with the
    /// cached values.
    pub fn is_coherent(&self, model: &CouplingModel) -> bool {
        match Replica::new(model, self.state()) {
            Ok(fresh) => fresh.terms == self.terms && fresh.energy == self.energy,
            Err(_) => false,
        }
    }

    #[inline]
    fn flip(&mut self, model: &CouplingModel, i: usize, local: i32) {
        self.spins[i] = -self.spins[i];
        for &j in model.spin_terms(i) {
            self.terms[j as usize] = -self.terms[j as usize];
        }
        self.energy += 2 * local as i64;
    }

    /// One sweep: every spin proposed once in index order. Returns the
    /// number of accepted flips.
    pub fn sweep<R: RngCore + ?Sized>(&mut self, model: &CouplingModel, table: &AcceptanceTable, rng: &mut R) -> u64 {
        let mut accepted = 0;
        for i in 0..self.spins.len() {
            let local: i32 = model
                .spin_terms(i)
                .iter()
                .map(|&j| self.terms[j as usize] as i32)
                .sum();
            if table.accept(local, rng) {
                self.flip(model, i, local);
                accepted += 1;
            }
        }
        accepted
    }
}

/// One Metropolis sweep of `state` at temperature `temperature`; returns
/// the new energy.
pub fn metropolis_sweep<R: RngCore + ?Sized>(
    model: &CouplingModel,
    state: &mut SpinState,
    temperature: f64,
    rng: &mut R,
) -> Result<i64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter(format!("T = {temperature} must be positive")));
    }
    let mut replica = Replica::new(model, state.clone())?;
    replica.sweep(model, &AcceptanceTable::new(temperature, model.max_degree()), rng);
    *state = replica.state();
    Ok(replica.energy)
}

/// `min(1, exp((E_k - E_{k+1}) (1/T_k - 1/T_{k+1})))`.
pub fn swap_probability(e_k: f64, e_next: f64, t_k: f64, t_next: f64) -> f64 {
    let x = (e_k - e_next) * (1.0 / t_k - 1.0 / t_next);
    if x >= 0.0 {
        1.0
    } else {
        x.exp()
    }
}
