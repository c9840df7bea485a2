//! Parallel-tempering Metropolis Monte Carlo.

pub mod binning;
pub mod checkpoint;
pub mod ladder;
pub mod metropolis;
pub mod pt;

pub use binning::{BinSummary, EquilibrationReport};
pub use ladder::{build_ladder, LadderMode, TemperatureLadder};
pub use metropolis::{metropolis_sweep, swap_probability, AcceptanceTable, Replica};
pub use pt::{adapt_ladder, attempt_swaps, InitialState, run_pt, run_pt_on, PtSimulation, PtState, ReplicaEnsemble, RunRecord, RunSchedule};
