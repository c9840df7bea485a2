//! Exact enumeration on small complexes: partition functions, error-class
//! probabilities, the class/partition-function identity and the optimal
//! decoder.
use rcim::gf2::Gf2Vec;
use rcim::oracle::{exact_partition, identity_suite, optimal_decode, success_probability, ExactSpectrum, SmallCSSCode, ToyCode};
use rcim::models::{ModelInstance, ModelKind};

fn main() -> rcim::Result<()> {
    let inst = ModelInstance::build(ModelKind::Rpim, 2, 0.0, 0)?;
    let spectrum = ExactSpectrum::of(&inst.model)?;
    println!("RPIM L=2: {} states, ground energy {}, {} ground states", spectrum.total_states(), spectrum.ground_energy(), spectrum.ground_state_count());
    for t in [1.0, 1.5, 2.0] {
        let th = spectrum.thermal(t)?;
        println!("T={t}: ln Z = {:.6} (direct {:.6}), E = {:.4}, c = {:.4}", th.log_partition, exact_partition(&inst.model, 1.0 / t)?, th.energy, th.specific_heat);
    }

    let toric = ToyCode::Toric(3);
    let code = SmallCSSCode::new(toric.to_string(), toric.build()?)?;
    let p = 0.08;
    let probs = code.log_class_probabilities(p)?;
    println!("\n{}: {} qubits, |H1| = {}", code.name(), code.num_qubits(), code.homology_order());
    let trivial = &code.sectors()[&Gf2Vec::zeros(code.chain().dim0())];
    let trivial: Vec<f64> = trivial.iter().map(|&c| probs[c].exp()).collect();
    println!("class probabilities in the trivial-syndrome sector: {trivial:.5?}");
    let error = Gf2Vec::from_indices(code.num_qubits(), [0, 4]);
    let syndrome = code.chain().boundary1().apply(&error);
    let d = optimal_decode(&code, &syndrome, p)?;
    println!("decoded weight-2 error into class {} with probability {:.4}", d.class_index, d.probability);
    println!("optimal success probability at p={p}: {:.5}", success_probability(&code, p)?);

    let report = identity_suite(&code, 20, 1, 1e-10)?;
    println!("identity: max relative deviation {:.2e}, pass = {}", report.max_relative_deviation, report.pass);
    Ok(())
}
