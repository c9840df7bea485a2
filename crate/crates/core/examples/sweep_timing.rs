//! Metropolis sweep cost per model and size, for sizing campaign budgets.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rcim::mc::metropolis_sweep;
use rcim::models::{ModelInstance, ModelKind, SpinState};
use std::time::Instant;

fn main() -> rcim::Result<()> {
    for (kind, l, t) in [
        (ModelKind::FourBodyVertex, 4, 8.8),
        (ModelKind::FourBodyVertex, 8, 8.8),
        (ModelKind::SixBodyEdge, 4, 0.92),
        (ModelKind::SixBodyEdge, 8, 0.92),
        (ModelKind::Rpim, 8, 1.3),
        (ModelKind::Rpim, 12, 1.3),
    ] {
        let inst = ModelInstance::build(kind, l, 0.0, 1)?;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        let mut s = SpinState::random(inst.model.num_spins(), &mut rng);
        let n = 200;
        let start = Instant::now();
        for _ in 0..n {
            metropolis_sweep(&inst.model, &mut s, t, &mut rng)?;
        }
        let dt = start.elapsed().as_secs_f64() / n as f64;
        println!(
            "{:>16} L={l:<3} spins={:<6} {:.3} ms/sweep  {:.1} ns/spin",
            kind.name(),
            inst.model.num_spins(),
            dt * 1e3,
            dt * 1e9 / inst.model.num_spins() as f64
        );
    }
    Ok(())
}
