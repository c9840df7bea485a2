//! Assembles a phase diagram from per-p outcomes and brackets the
//! threshold on the Nishimori line. The points are illustrative.
use rcim::analysis::{assemble_phase_diagram, CriticalPointEstimate, Method, PhasePoint};
use rcim::models::ModelKind;

fn main() -> rcim::Result<()> {
    let point = |p: f64, tc: f64| {
        PhasePoint::Transition(CriticalPointEstimate {
            p,
            tc,
            error: 0.01,
            method: Method::WilsonFit,
            diagnostics: Default::default(),
        })
    };
    let points = vec![
        point(0.0, 1.316),
        point(0.01, 1.24),
        point(0.02, 1.12),
        point(0.03, 0.85),
        PhasePoint::NoTransition { p: 0.04, method: Method::WilsonFit },
    ];
    let diagram = assemble_phase_diagram(&points, ModelKind::Rpim)?;
    println!("threshold bracket {:?}", diagram.p_c_bracket);
    println!("{}", diagram.to_json()?);
    Ok(())
}
