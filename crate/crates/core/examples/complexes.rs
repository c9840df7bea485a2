//! Builds the bcc color complex and the cubic complex and prints their
//! cell counts, Euler characteristics and chain-condition checks.
use rcim::complex::{to_chain_complex, ChainKind, ComplexSummary};
use rcim::models::ModelKind;

fn main() -> rcim::Result<()> {
    for (kind, l) in [(ModelKind::FourBodyVertex, 4), (ModelKind::FourBodyVertex, 6), (ModelKind::Rpim, 4)] {
        let lattice = kind.lattice(l)?;
        let s = ComplexSummary::of(&lattice);
        println!(
            "{} L={}: V={} E={} F={} volumes={} chi={} colors={:?}",
            s.lattice, s.linear_size, s.vertices, s.edges, s.faces, s.volumes, s.euler_characteristic, s.color_histogram
        );
    }
    // The chain constructor verifies d1 * d2 = 0 over GF(2).
    for kind in [ChainKind::XCorrection, ChainKind::ZCorrection] {
        let cx = to_chain_complex(&ModelKind::FourBodyVertex.lattice(4)?, kind)?;
        println!("{kind:?}: C2={} C1={} C0={}", cx.dim2(), cx.dim1(), cx.dim0());
    }
    Ok(())
}
