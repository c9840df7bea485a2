//! Crossing of xi_L / L curves for the disordered 4-body model at small
//! sizes, averaged over a handful of disorder samples.
use rcim::analysis::{xi_crossing, CurvePoint, SizeCurve};
use rcim::campaign::analyze::xi_point;
use rcim::mc::{build_ladder, run_pt, LadderMode, RunSchedule};
use rcim::models::{ModelInstance, ModelKind};
use rcim::observables::ObservablePlan;

fn main() -> rcim::Result<()> {
    let p = 0.2;
    let ladder = build_ladder(2.0, 6.0, 10, LadderMode::Geometric)?;
    let mut curves = Vec::new();
    for l in [4, 6] {
        let mut per_rung = vec![Vec::new(); ladder.len()];
        for sample in 0..6 {
            let inst = ModelInstance::build(ModelKind::FourBodyVertex, l, p, 100 + sample)?;
            let plan = ObservablePlan::for_instance(&inst);
            let rec = run_pt(&inst.model, &plan, &ladder, &RunSchedule::new(10, sample))?;
            for (r, s) in rec.series.into_iter().enumerate() {
                per_rung[r].push(s);
            }
        }
        let points: Vec<CurvePoint> = per_rung.iter().filter_map(|s| xi_point(s, l)).collect();
        for pt in &points {
            println!("L={l} T={:.3} xi/L={:.4} ± {:.4}", pt.temperature, pt.value, pt.error);
        }
        curves.push(SizeCurve { linear_size: l, points });
    }
    println!("{:?}", xi_crossing(&curves)?);
    Ok(())
}
