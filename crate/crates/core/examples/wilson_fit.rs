//! Fits -ln<W(l)> = a l + b + c ln l across loop sizes and sizes, and finds
//! the temperature where the area coefficient turns positive.
use rcim::analysis::{wilson_fit, wilson_points, wilson_zero_crossing, Estimate};
use rcim::mc::{build_ladder, run_pt, LadderMode, RunSchedule};
use rcim::models::{ModelInstance, ModelKind};
use rcim::observables::{wilson_average, ObservablePlan, ObservableSeries};

fn main() -> rcim::Result<()> {
    let ladder = build_ladder(1.0, 1.7, 10, LadderMode::Geometric)?;
    let mut runs = Vec::new();
    for l in [6, 8] {
        let inst = ModelInstance::build(ModelKind::Rpim, l, 0.0, 1)?;
        let plan = ObservablePlan::for_instance(&inst);
        runs.push((l, run_pt(&inst.model, &plan, &ladder, &RunSchedule::new(11, l as u64))?));
    }
    let mut slopes: Vec<(f64, Estimate)> = Vec::new();
    for (r, &t) in ladder.temperatures().iter().enumerate() {
        let mut points = Vec::new();
        for (l, rec) in &runs {
            let series = ObservableSeries::new(vec![rec.series[r].clone()]);
            let avgs: Vec<_> = (1..=l / 2).filter_map(|k| wilson_average(&series, k).ok()).collect();
            points.extend(wilson_points(&avgs));
        }
        match wilson_fit(&points) {
            Ok(fit) => {
                println!("T={t:.4} a={:+.5} ± {:.5} chi2/dof={:.2}/{}", fit.a.value, fit.a.error, fit.chi2, fit.dof);
                slopes.push((t, fit.a));
            }
            Err(e) => println!("T={t:.4} no fit: {e}"),
        }
    }
    println!("a(T) turns positive at {:?}", wilson_zero_crossing(&slopes));
    Ok(())
}
