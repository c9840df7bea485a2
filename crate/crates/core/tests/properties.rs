use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rcim::analysis::nishimori::{nishimori_probability, nishimori_temperature};
use rcim::analysis::{assemble_phase_diagram, dual_temperature, CriticalPointEstimate, Method, PhaseDiagram, PhasePoint};
use rcim::campaign::run::derive_seed;
use rcim::campaign::{preset, CampaignConfig, PRESET_NAMES};
use rcim::complex::to_chain_complex;
use rcim::gf2::{Gf2Vec, SparseGf2};
use rcim::mc::{build_ladder, LadderMode};
use rcim::models::{ModelInstance, ModelKind, SpinState};
use rcim::oracle::{SmallCSSCode, ToyCode};

fn gf2_vec(len: usize) -> impl Strategy<Value = Gf2Vec> {
    proptest::collection::vec(any::<bool>(), len).prop_map(move |bits| {
        Gf2Vec::from_indices(len, bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    })
}

fn sparse(rows: usize, cols: usize) -> impl Strategy<Value = SparseGf2> {
    proptest::collection::vec(proptest::collection::btree_set(0..rows, 0..=rows), cols)
        .prop_map(move |c| SparseGf2::from_columns(rows, c.into_iter().map(|s| s.into_iter().collect()).collect()))
}

proptest! {
    #[test]
    fn gf2_xor_is_a_group(a in gf2_vec(70), b in gf2_vec(70), c in gf2_vec(70)) {
        prop_assert_eq!(a.xor(&b).xor(&c), a.xor(&b.xor(&c)));
        prop_assert_eq!(a.xor(&b), b.xor(&a));
        prop_assert!(a.xor(&a).is_zero());
        prop_assert!(a.xor(&b).weight() <= a.weight() + b.weight());
    }

    #[test]
    fn gf2_apply_is_linear((m, x, y) in (sparse(9, 12), gf2_vec(12), gf2_vec(12))) {
        prop_assert_eq!(m.apply(&x.xor(&y)), m.apply(&x).xor(&m.apply(&y)));
    }

    #[test]
    fn gf2_rank_nullity(m in sparse(8, 11)) {
        let kernel = m.kernel_basis();
        prop_assert_eq!(m.rank() + kernel.len(), m.cols());
        for k in &kernel {
            prop_assert!(m.apply(k).is_zero());
        }
        prop_assert_eq!(m.transpose().rank(), m.rank());
    }

    #[test]
    fn class_probabilities_sum_to_one(p in 0.001f64..0.5) {
        for toy in [ToyCode::Repetition(5), ToyCode::Toric(2), ToyCode::TwoTetrahedra] {
            let code = SmallCSSCode::new(toy.to_string(), toy.build().unwrap()).unwrap();
            let total: f64 = code.log_class_probabilities(p).unwrap().iter().map(|l| l.exp()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "{toy}: {total}");
        }
    }

    #[test]
    fn local_energy_change_matches_total(
        kind in prop_oneof![Just(ModelKind::FourBodyVertex), Just(ModelKind::SixBodyEdge), Just(ModelKind::Rpim)],
        p in 0.0f64..0.5,
        seed in any::<u64>(),
        flips in proptest::collection::vec(any::<prop::sample::Index>(), 1..20),
    ) {
        let inst = ModelInstance::build(kind, 2, p, seed).unwrap();
        let m = &inst.model;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut s = SpinState::random(m.num_spins(), &mut rng);
        for f in flips {
            let i = f.index(m.num_spins());
            let before = m.energy(&s).unwrap();
            let de = m.delta_energy(&s, i);
            s.flip(i);
            prop_assert_eq!(m.energy(&s).unwrap() - before, de);
        }
    }

    #[test]
    fn duality_is_an_involution(t in 0.2f64..20.0) {
        let d = dual_temperature(t).unwrap();
        assert_relative_eq!(dual_temperature(d).unwrap(), t, max_relative = 1e-9);
        // The dual reverses order around the self-dual point.
        prop_assert!(dual_temperature(t * 1.01).unwrap() < d);
    }

    #[test]
    fn nishimori_line_inverts(p in 0.001f64..0.49) {
        let t = nishimori_temperature(p).unwrap();
        assert_relative_eq!(nishimori_probability(t).unwrap(), p, max_relative = 1e-9);
    }

    #[test]
    fn geometric_ladder_is_monotone(t_min in 0.1f64..5.0, span in 0.1f64..10.0, rungs in 2usize..40) {
        let l = build_ladder(t_min, t_min + span, rungs, LadderMode::Geometric).unwrap();
        let t = l.temperatures();
        prop_assert_eq!(t.len(), rungs);
        assert_relative_eq!(t[0], t_min, max_relative = 1e-12);
        assert_relative_eq!(t[rungs - 1], t_min + span, max_relative = 1e-12);
        prop_assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn task_seeds_separate_every_coordinate(master in any::<u64>(), l in 2usize..30, sample in 0usize..1000) {
        let base = derive_seed(master, ModelKind::Rpim, l, 0.03, sample, "mc");
        prop_assert_eq!(base, derive_seed(master, ModelKind::Rpim, l, 0.03, sample, "mc"));
        prop_assert_ne!(base, derive_seed(master, ModelKind::Rpim, l, 0.03, sample, "disorder"));
        prop_assert_ne!(base, derive_seed(master, ModelKind::Rpim, l, 0.03, sample + 1, "mc"));
        prop_assert_ne!(base, derive_seed(master, ModelKind::Rpim, l + 1, 0.03, sample, "mc"));
        prop_assert_ne!(base, derive_seed(master, ModelKind::SixBodyEdge, l, 0.03, sample, "mc"));
        prop_assert_ne!(base, derive_seed(master.wrapping_add(1), ModelKind::Rpim, l, 0.03, sample, "mc"));
    }

    #[test]
    fn config_toml_round_trips(p in 0.0f64..0.1, samples in 1usize..50, tau in 4u32..20, seed in 0..=i64::MAX as u64) {
        let mut cfg = preset("smoke").unwrap();
        cfg.master_seed = seed;
        cfg.rows[0].p = p;
        cfg.rows[0].samples = samples;
        cfg.rows[0].tau = tau;
        let back = CampaignConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn seeds_outside_toml_range_are_rejected(seed in (i64::MAX as u64 + 1)..=u64::MAX) {
        let mut cfg = preset("smoke").unwrap();
        cfg.master_seed = seed;
        prop_assert!(matches!(cfg.validate(), Err(rcim::Error::Config(_))));
    }

    #[test]
    fn phase_diagram_json_round_trips(tcs in proptest::collection::vec((0.0f64..0.05, 0.3f64..1.4, 0.001f64..0.1), 1..6)) {
        let points: Vec<PhasePoint> = tcs
            .iter()
            .map(|&(p, tc, error)| PhasePoint::Transition(CriticalPointEstimate {
                p,
                tc,
                error,
                method: Method::WilsonFit,
                diagnostics: Default::default(),
            }))
            .collect();
        let d = assemble_phase_diagram(&points, ModelKind::Rpim).unwrap();
        prop_assert_eq!(PhaseDiagram::from_json(&d.to_json().unwrap()).unwrap(), d);
    }
}

#[test]
fn boundaries_compose_to_zero() {
    for (kind, sizes) in [
        (ModelKind::FourBodyVertex, vec![2, 4]),
        (ModelKind::SixBodyEdge, vec![2, 4]),
        (ModelKind::Rpim, vec![2, 3, 4, 5]),
    ] {
        for l in sizes {
            let c = to_chain_complex(&kind.lattice(l).unwrap(), kind.chain_kind()).unwrap();
            assert!(c.boundary1().compose(c.boundary2()).is_zero(), "{kind:?} L = {l}");
        }
    }
}

#[test]
fn every_preset_validates_and_round_trips() {
    for name in PRESET_NAMES {
        let cfg = preset(name).unwrap();
        cfg.validate().unwrap();
        assert_eq!(CampaignConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg, "{name}");
    }
}

#[test]
fn unknown_config_fields_are_rejected() {
    let text = preset("smoke").unwrap().to_toml().unwrap() + "\nbogus = 1\n";
    assert!(matches!(CampaignConfig::from_toml(&text), Err(rcim::Error::Config(_))));
}
