//! Compiles the three coupling models from their chain complexes, with and
//! without disorder, and checks that local symmetries leave the energy
//! unchanged.
use rcim::models::{apply_symmetry, ModelInstance, ModelKind, SpinState, SymmetryGenerator};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

fn main() -> rcim::Result<()> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    for (kind, l) in [(ModelKind::FourBodyVertex, 4), (ModelKind::SixBodyEdge, 4), (ModelKind::Rpim, 4)] {
        for p in [0.0, 0.1] {
            let inst = ModelInstance::build(kind, l, p, 11)?;
            let m = &inst.model;
            let s = SpinState::random(m.num_spins(), &mut rng);
            println!(
                "{:>16} L={l} p={p}: spins={} terms={} arity={:?} negative={} E(random)={} E(all up)={}",
                kind.name(),
                m.num_spins(),
                m.num_terms(),
                m.arity_histogram(),
                m.negative_terms(),
                m.energy(&s)?,
                m.energy(&SpinState::all_up(m.num_spins()))?,
            );
        }
    }
    let inst = ModelInstance::build(ModelKind::Rpim, 4, 0.1, 5)?;
    let s = SpinState::random(inst.model.num_spins(), &mut rng);
    let flipped = apply_symmetry(&inst.model, &inst.lattice, &s, SymmetryGenerator::VertexStar { vertex: 7 })?;
    println!(
        "vertex-star gauge flip keeps the RPIM energy: {} == {}",
        inst.model.energy(&s)?,
        inst.model.energy(&flipped)?
    );
    Ok(())
}
