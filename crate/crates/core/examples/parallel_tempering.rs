//! Runs parallel tempering on a clean L = 6 RPIM and prints per-rung
//! energies, swap acceptance and the equilibration verdict.
use rcim::mc::{build_ladder, run_pt, LadderMode, RunSchedule};
use rcim::models::{ModelInstance, ModelKind};
use rcim::observables::{ObservablePlan, ObservableSeries};

fn main() -> rcim::Result<()> {
    let inst = ModelInstance::build(ModelKind::Rpim, 6, 0.0, 1)?;
    let plan = ObservablePlan::for_instance(&inst);
    let ladder = build_ladder(0.9, 2.0, 12, LadderMode::Geometric)?;
    let record = run_pt(&inst.model, &plan, &ladder, &RunSchedule::new(11, 42))?;
    let n = record.num_spins as f64;
    println!("{} sweeps, {} measurements per rung", record.sweeps, record.measurements);
    for (k, s) in record.series.iter().enumerate() {
        let e = ObservableSeries::new(vec![s.clone()]).estimate(|a| a.energy / n)?;
        let swap = record.swap_acceptance.get(k).copied().unwrap_or(f64::NAN);
        println!("T={:.4}  E/N={:+.5} ± {:.5}  swap(k,k+1)={swap:.3}", s.temperature, e.value, e.error);
    }
    println!("equilibrated: {}", record.equilibration.equilibrated);
    Ok(())
}
