//! Replica-exchange driver: ensemble state, swap rounds, the resumable
//! simulation state machine and the run record it produces.

use super::binning::{equilibration_report, BinSummary, EquilibrationReport, LogBins};
use super::checkpoint::{read_checkpoint, write_checkpoint};
use super::ladder::TemperatureLadder;
use super::metropolis::{AcceptanceTable, Replica};
use crate::error::{Error, Result};
use crate::models::{CouplingModel, ModelKind, SpinState};
use crate::observables::{ObservablePlan, RungSeries};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Initial configuration of every replica.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Independent uniformly random spins per rung.
    #[default]
    Random,
    /// All spins up: the clean ground state. Useful where random starts
    /// coarsen too slowly to reach the low-temperature phase.
    Ordered,
}

impl InitialState {
    pub fn is_random(&self) -> bool {
        *self == InitialState::Random
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSchedule {
    /// `2^tau` equilibration sweeps.
    pub equilibration_exponent: u32,
    /// Measurement sweeps after equilibration; defaults to `2^tau`.
    #[serde(default)]
    pub measurement_sweeps: Option<u64>,
    #[serde(default = "default_stride")]
    pub stride: u64,
    /// Rounds between checkpoints when a checkpoint path is given.
    #[serde(default)]
    pub checkpoint_interval: Option<u64>,
    pub seed: u64,
    // Always written: checkpoints use a non-self-describing format.
    #[serde(default)]
    pub start: InitialState,
}

fn default_stride() -> u64 {
    1
}

impl RunSchedule {
    pub fn new(equilibration_exponent: u32, seed: u64) -> Self {
        Self {
            equilibration_exponent,
            measurement_sweeps: None,
            stride: 1,
            checkpoint_interval: None,
            seed,
            start: InitialState::Random,
        }
    }

    pub fn with_start(mut self, start: InitialState) -> Self {
        self.start = start;
        self
    }

    pub fn with_measurement_sweeps(mut self, sweeps: u64) -> Self {
        self.measurement_sweeps = Some(sweeps);
        self
    }

    pub fn with_stride(mut self, stride: u64) -> Self {
        self.stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=40).contains(&self.equilibration_exponent) {
            return Err(Error::InvalidParameter(format!(
                "equilibration exponent {} outside 1..=40",
                self.equilibration_exponent
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("measurement stride must be at least 1".into()));
        }
        if self.checkpoint_interval == Some(0) {
            return Err(Error::InvalidParameter("checkpoint interval must be at least 1".into()));
        }
        Ok(())
    }

    pub fn equilibration_sweeps(&self) -> u64 {
        1 << self.equilibration_exponent
    }

    pub fn measurement_sweeps(&self) -> u64 {
        self.measurement_sweeps.unwrap_or(self.equilibration_sweeps())
    }

    pub fn total_sweeps(&self) -> u64 {
        self.equilibration_sweeps() + self.measurement_sweeps()
    }

    pub fn measurements(&self) -> u64 {
        self.measurement_sweeps() / self.stride
    }
}

/// One configuration per rung, per-rung random streams and a separate
/// stream for swap decisions. Configurations move between rungs; streams
/// stay with their rung.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaEnsemble {
    replicas: Vec<Replica>,
    /// Identity of the configuration currently at each rung.
    labels: Vec<u32>,
    rngs: Vec<Xoshiro256PlusPlus>,
    swap_rng: Xoshiro256PlusPlus,
    swap_attempts: Vec<u64>,
    swap_accepts: Vec<u64>,
}

impl ReplicaEnsemble {
    /// Random initial configurations, one stream per rung obtained by
    /// successive jumps of a generator seeded from `seed`.
    pub fn new(model: &CouplingModel, rungs: usize, seed: u64) -> Result<Self> {
        Self::with_start(model, rungs, seed, InitialState::Random)
    }

    pub fn with_start(model: &CouplingModel, rungs: usize, seed: u64, start: InitialState) -> Result<Self> {
        if rungs == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one rung".into()));
        }
        let mut base = Xoshiro256PlusPlus::seed_from_u64(seed);
        let swap_rng = base.clone();
        let mut rngs = Vec::with_capacity(rungs);
        for _ in 0..rungs {
            base.jump();
            rngs.push(base.clone());
        }
        let replicas = rngs
            .iter_mut()
            .map(|rng| {
                let state = match start {
                    InitialState::Random => SpinState::random(model.num_spins(), rng),
                    InitialState::Ordered => SpinState::all_up(model.num_spins()),
                };
                Replica::new(model, state)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            replicas,
            labels: (0..rungs as u32).collect(),
            rngs,
            swap_rng,
            swap_attempts: vec![0; rungs.saturating_sub(1)],
            swap_accepts: vec![0; rungs.saturating_sub(1)],
        })
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }

    pub fn replicas(&self) -> &[Replica] {
        &self.replicas
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn energies(&self) -> Vec<i64> {
        self.replicas.iter().map(Replica::energy).collect()
    }

    pub fn swap_attempts(&self) -> &[u64] {
        &self.swap_attempts
    }

    pub fn swap_accepts(&self) -> &[u64] {
        &self.swap_accepts
    }

    pub fn acceptance_rates(&self) -> Vec<f64> {
        self.swap_attempts
            .iter()
            .zip(&self.swap_accepts)
            .map(|(&n, &a)| if n == 0 { 0.0 } else { a as f64 / n as f64 })
            .collect()
    }

    pub fn is_coherent(&self, model: &CouplingModel) -> bool {
        self.replicas.iter().all(|r| r.is_coherent(model))
    }

    /// One Metropolis sweep at every rung. Rungs are independent, so the
    /// result does not depend on whether or how they run in parallel.
    pub fn sweep_all(&mut self, model: &CouplingModel, tables: &[AcceptanceTable], pool: Option<&ThreadPool>) {
        let work = |((rep, rng), table): ((&mut Replica, &mut Xoshiro256PlusPlus), &AcceptanceTable)| {
            rep.sweep(model, table, rng);
        };
        match pool {
            Some(p) if p.current_num_threads() > 1 => p.install(|| {
                self.replicas
                    .par_iter_mut()
                    .zip(self.rngs.par_iter_mut())
                    .zip(tables.par_iter())
                    .for_each(work)
            }),
            _ => self
                .replicas
                .iter_mut()
                .zip(self.rngs.iter_mut())
                .zip(tables.iter())
                .for_each(work),
        }
    }
}

/// Attempts exchanges between rungs `(k, k + 1)` for every `k` with
/// `k % 2 == parity`.
pub fn attempt_swaps(ensemble: &mut ReplicaEnsemble, ladder: &TemperatureLadder, parity: usize) {
    let temps = ladder.temperatures();
    let n = ensemble.len().min(temps.len());
    let mut k = parity % 2;
    while k + 1 < n {
        let e0 = ensemble.replicas[k].energy() as f64;
        let e1 = ensemble.replicas[k + 1].energy() as f64;
        let x = (e0 - e1) * (1.0 / temps[k] - 1.0 / temps[k + 1]);
        ensemble.swap_attempts[k] += 1;
        let accept = x >= 0.0 || ensemble.swap_rng.gen::<f64>() < x.exp();
        if accept {
            ensemble.replicas.swap(k, k + 1);
            ensemble.labels.swap(k, k + 1);
            ensemble.swap_accepts[k] += 1;
        }
        k += 2;
    }
}

/// Complete serializable state of a run in progress.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtState {
    pub fingerprint: String,
    pub ladder: TemperatureLadder,
    pub schedule: RunSchedule,
    pub histograms: bool,
    pub round: u64,
    pub measured: u64,
    pub ensemble: ReplicaEnsemble,
    pub bins: Vec<LogBins>,
    pub series: Vec<RungSeries>,
}

pub struct PtSimulation<'a> {
    model: &'a CouplingModel,
    plan: &'a ObservablePlan,
    pool: Option<&'a ThreadPool>,
    tables: Vec<AcceptanceTable>,
    state: PtState,
}

impl<'a> PtSimulation<'a> {
    pub fn new(
        model: &'a CouplingModel,
        plan: &'a ObservablePlan,
        ladder: &TemperatureLadder,
        schedule: &RunSchedule,
    ) -> Result<Self> {
        schedule.validate()?;
        if plan.num_spins() != model.num_spins() {
            return Err(Error::Structure("observable plan built for a different model".into()));
        }
        let ensemble = ReplicaEnsemble::with_start(model, ladder.len(), schedule.seed, schedule.start)?;
        let series = ladder
            .temperatures()
            .iter()
            .map(|&t| RungSeries::new(t, plan, schedule.measurements()))
            .collect();
        let state = PtState {
            fingerprint: model.fingerprint(),
            ladder: ladder.clone(),
            schedule: schedule.clone(),
            histograms: plan.histograms,
            round: 0,
            measured: 0,
            ensemble,
            bins: vec![LogBins::default(); ladder.len()],
            series,
        };
        Ok(Self::from_state(model, plan, state))
    }

    fn from_state(model: &'a CouplingModel, plan: &'a ObservablePlan, state: PtState) -> Self {
        let tables = state
            .ladder
            .temperatures()
            .iter()
            .map(|&t| AcceptanceTable::new(t, model.max_degree()))
            .collect();
        Self {
            model,
            plan,
            pool: None,
            tables,
            state,
        }
    }

    /// Rungs sweep on `pool` when it has more than one thread.
    pub fn with_pool(mut self, pool: Option<&'a ThreadPool>) -> Self {
        self.pool = pool;
        self
    }

    /// Resumes from a checkpoint written for the same model and plan. The
    /// cached energies are recomputed and must match.
    pub fn restore(model: &'a CouplingModel, plan: &'a ObservablePlan, path: &Path) -> Result<Self> {
        let state: PtState = read_checkpoint(path)?;
        if state.fingerprint != model.fingerprint() {
            return Err(Error::Checkpoint("checkpoint belongs to a different model".into()));
        }
        if state.series.first().map(|s| &s.labels) != Some(&plan.labels()) {
            return Err(Error::Checkpoint("checkpoint measures a different observable set".into()));
        }
        if !state.ensemble.is_coherent(model) {
            return Err(Error::Checkpoint("cached energies disagree with the stored spins".into()));
        }
        Ok(Self::from_state(model, plan, state))
    }

    pub fn checkpoint(&self, path: &Path) -> Result<()> {
        write_checkpoint(path, &self.state)
    }

    pub fn state(&self) -> &PtState {
        &self.state
    }

    pub fn round(&self) -> u64 {
        self.state.round
    }

    pub fn is_done(&self) -> bool {
        self.state.round >= self.state.schedule.total_sweeps()
    }

    fn step(&mut self) {
        let st = &mut self.state;
        st.ensemble.sweep_all(self.model, &self.tables, self.pool);
        attempt_swaps(&mut st.ensemble, &st.ladder, (st.round % 2) as usize);
        for (bins, rep) in st.bins.iter_mut().zip(st.ensemble.replicas()) {
            bins.push(st.round, rep.energy() as f64);
        }
        let eq = st.schedule.equilibration_sweeps();
        if st.round >= eq
            && (st.round - eq + 1) % st.schedule.stride == 0
            && st.measured < st.schedule.measurements()
        {
            let plan = self.plan;
            let reps = st.ensemble.replicas();
            let obs: Vec<Vec<f64>> = match self.pool {
                Some(p) if p.current_num_threads() > 1 => {
                    p.install(|| reps.par_iter().map(|r| plan.measure(r.spins())).collect())
                }
                _ => reps.iter().map(|r| plan.measure(r.spins())).collect(),
            };
            for ((series, rep), o) in st.series.iter_mut().zip(reps).zip(&obs) {
                series.record(rep.energy(), o, st.histograms);
            }
            st.measured += 1;
        }
        st.round += 1;
    }

    /// Runs up to `rounds` more sweep rounds; stops at the end of the
    /// schedule.
    pub fn advance(&mut self, rounds: u64) {
        let end = (self.state.round + rounds).min(self.state.schedule.total_sweeps());
        while self.state.round < end {
            self.step();
        }
    }

    /// Runs to the end of the schedule, writing a checkpoint every
    /// `checkpoint_interval` rounds when a path is given.
    pub fn run_to_end(&mut self, checkpoint: Option<&Path>) -> Result<()> {
        let total = self.state.schedule.total_sweeps();
        let interval = self.state.schedule.checkpoint_interval.unwrap_or(total.max(1));
        while !self.is_done() {
            self.advance(interval);
            if let Some(path) = checkpoint {
                if !self.is_done() {
                    self.checkpoint(path)?;
                }
            }
            log::debug!("round {}/{}", self.state.round, total);
        }
        Ok(())
    }

    pub fn finish(self) -> RunRecord {
        let st = self.state;
        let bins: Vec<Vec<BinSummary>> = st.bins.iter().map(LogBins::summaries).collect();
        let equilibration = equilibration_report(&bins);
        if !equilibration.equilibrated {
            log::warn!(
                "run not equilibrated: max drift z = {:.2} above threshold {:.2}",
                equilibration.max_z,
                equilibration.threshold
            );
        }
        RunRecord {
            kind: self.model.kind(),
            num_spins: self.model.num_spins(),
            num_terms: self.model.num_terms(),
            fingerprint: st.fingerprint,
            temperatures: st.ladder.temperatures().to_vec(),
            schedule: st.schedule,
            sweeps: st.round,
            measurements: st.measured,
            swap_acceptance: st.ensemble.acceptance_rates(),
            final_energies: st.ensemble.energies(),
            bins,
            equilibration,
            series: st.series,
        }
    }
}

/// Binned series and metadata of one parallel-tempering run on one
/// disorder sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: ModelKind,
    pub num_spins: usize,
    pub num_terms: usize,
    pub fingerprint: String,
    pub temperatures: Vec<f64>,
    pub schedule: RunSchedule,
    pub sweeps: u64,
    pub measurements: u64,
    pub swap_acceptance: Vec<f64>,
    pub final_energies: Vec<i64>,
    pub bins: Vec<Vec<BinSummary>>,
    pub equilibration: EquilibrationReport,
    pub series: Vec<RungSeries>,
}

impl RunRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Per-rung log-bin summaries as CSV.
    pub fn write_bins_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["rung", "T", "bin", "start", "length", "count", "mean_energy", "error"])?;
        for (k, (bins, t)) in self.bins.iter().zip(&self.temperatures).enumerate() {
            for b in bins {
                w.write_record([
                    k.to_string(),
                    format!("{t}"),
                    b.index.to_string(),
                    b.start.to_string(),
                    b.length.to_string(),
                    b.count.to_string(),
                    format!("{}", b.mean),
                    format!("{}", b.error),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs a full schedule sequentially.
pub fn run_pt(
    model: &CouplingModel,
    plan: &ObservablePlan,
    ladder: &TemperatureLadder,
    schedule: &RunSchedule,
) -> Result<RunRecord> {
    run_pt_on(model, plan, ladder, schedule, None)
}

/// Runs a full schedule with rungs distributed over `pool`.
pub fn run_pt_on(
    model: &CouplingModel,
    plan: &ObservablePlan,
    ladder: &TemperatureLadder,
    schedule: &RunSchedule,
    pool: Option<&ThreadPool>,
) -> Result<RunRecord> {
    let mut sim = PtSimulation::new(model, plan, ladder, schedule)?.with_pool(pool);
    sim.run_to_end(None)?;
    Ok(sim.finish())
}

/// Refines a ladder from short pilot runs so swap acceptance is roughly
/// equal along it.
pub fn adapt_ladder(
    model: &CouplingModel,
    ladder: &TemperatureLadder,
    pilot: &RunSchedule,
    iterations: usize,
) -> Result<TemperatureLadder> {
    let plan = ObservablePlan::energy_only(model.num_spins());
    let mut current = ladder.clone();
    for it in 0..iterations {
        let sched = RunSchedule {
            seed: pilot.seed.wrapping_add(it as u64),
            ..pilot.clone()
        }
        .with_measurement_sweeps(0);
        let rec = run_pt(model, &plan, &current, &sched)?;
        current = current.equalized(&rec.swap_acceptance)?;
    }
    Ok(current)
}
