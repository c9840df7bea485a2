//! Specific heat, susceptibilities, the second-moment correlation length
//! and Wilson loops from one parallel-tempering run of the clean RPIM.
use rcim::mc::{build_ladder, run_pt, LadderMode, RunSchedule};
use rcim::models::{ModelInstance, ModelKind};
use rcim::observables::{
    correlation_length, specific_heat, susceptibility_symmetrized, wilson_average, ObservablePlan, ObservableSeries,
};

fn main() -> rcim::Result<()> {
    let l = 6;
    let inst = ModelInstance::build(ModelKind::Rpim, l, 0.0, 1)?;
    let plan = ObservablePlan::for_instance(&inst);
    let ladder = build_ladder(1.0, 1.8, 10, LadderMode::Geometric)?;
    let record = run_pt(&inst.model, &plan, &ladder, &RunSchedule::new(11, 7))?;
    println!("T        c        W(1)      W(2)      W(3)");
    for s in &record.series {
        let series = ObservableSeries::new(vec![s.clone()]);
        let c = specific_heat(&series, s.temperature, record.num_spins)?;
        let w: Vec<f64> = (1..=l / 2).map(|k| wilson_average(&series, k).map(|w| w.value)).collect::<rcim::Result<_>>()?;
        println!("{:.4}  {:.4}  {:+.5}  {:+.5}  {:+.5}", s.temperature, c.value, w[0], w[1], w[2]);
    }

    // Susceptibilities and correlation length need color classes: bcc only.
    let inst = ModelInstance::build(ModelKind::FourBodyVertex, 4, 0.0, 1)?;
    let plan = ObservablePlan::for_instance(&inst);
    let ladder = build_ladder(6.0, 12.0, 8, LadderMode::Geometric)?;
    let record = run_pt(&inst.model, &plan, &ladder, &RunSchedule::new(11, 7))?;
    println!("\nT        chi(0)    chi(k0)   xi/L");
    for s in &record.series {
        let series = ObservableSeries::new(vec![s.clone()]);
        let c0 = susceptibility_symmetrized(&series, false)?;
        let ck = susceptibility_symmetrized(&series, true)?;
        let xi = correlation_length(c0.value, ck.value, 4)?;
        println!("{:.4}  {:.4}  {:.4}  {xi:?}", s.temperature, c0.value, ck.value);
    }
    Ok(())
}
