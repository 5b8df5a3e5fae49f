//! Property suites over randomly generated machines, stacks, and tensors.

use nnpda_core::util::{is_one_hot, one_hot, sup_distance, sup_norm};
use nnpda_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec_strategy() -> impl Strategy<Value = PdaSpec> {
    (1usize..=5, 1usize..=4, 1usize..=3, any::<u64>()).prop_map(|(n, m1, m2, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_spec(n, m1, m2, &mut rng)
    })
}

proptest! {
    #[test]
    fn random_specs_validate(spec in spec_strategy()) {
        prop_assert!(validate_spec(&spec).is_ok());
    }

    #[test]
    fn encode_extract_round_trip(spec in spec_strategy()) {
        let tensors = encode_weights(&spec);
        prop_assert_eq!(extract_rules(&tensors, &spec.naming()).unwrap(), spec);
    }

    #[test]
    fn extraction_survives_sub_half_noise(
        spec in spec_strategy(),
        amplitude in 0.0..0.49f64,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy = encode_weights(&spec).with_noise(amplitude, &mut rng);
        prop_assert_eq!(extract_rules(&noisy, &spec.naming()).unwrap(), spec);
    }

    #[test]
    fn budget_matches_allocated_elements(spec in spec_strategy(), capacity in 0usize..100) {
        let budget = weight_counts(&spec, capacity);
        prop_assert_eq!(budget.total_weights, encode_weights(&spec).element_count());
        prop_assert_eq!(budget.stack_footprint, capacity * spec.stack_alphabet_size());
        prop_assert_eq!(budget.state_neurons, spec.state_count());
    }

    #[test]
    fn spec_text_round_trip(spec in spec_strategy()) {
        prop_assert_eq!(parse_spec_text(&write_spec_text(&spec)).unwrap(), spec);
    }

    #[test]
    fn tensor_text_round_trip_bit_exact(
        spec in spec_strategy(),
        amplitude in 0.0..0.5f64,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy = encode_weights(&spec).with_noise(amplitude, &mut rng);
        prop_assert_eq!(parse_tensors(&write_tensors(&noisy)).unwrap(), noisy);
    }

    /// The exact vectorized machine never leaves the one-hot lattice and
    /// decodes to the classical trace, on random machines and random walks.
    #[test]
    fn ideal_orbit_decodes_to_classical_orbit(
        spec in spec_strategy(),
        walk in proptest::collection::vec(any::<u16>(), 0..40),
    ) {
        let tensors = encode_weights(&spec);
        let n = spec.state_count();
        let m1 = spec.input_alphabet_size();
        let m2 = spec.stack_alphabet_size();
        let mut state = spec.start_state;
        let mut stack = ClassicalStack::new();
        let mut ideal = IdealState::start(n, m2, spec.start_state);
        for raw in walk {
            let a = raw as usize % m1;
            ideal = step_ideal_vectorized(&tensors, &ideal, &one_hot(m1, a));
            prop_assert!(ideal.is_valid());
            let (next, next_stack) = step_classical(&spec, state, &stack, a);
            state = next;
            stack = next_stack;
            prop_assert_eq!(ideal.decode().unwrap(), (state, stack.clone()));
        }
    }

    /// Stack operator range preservation: stored components stay in [0,1],
    /// the live region ends at a level of sup norm at least 1/2, and one
    /// application grows the stack by at most one level.
    #[test]
    fn operator_preserves_ranges(
        levels in proptest::collection::vec(
            proptest::collection::vec(0.0..=1.0f64, 3), 0..6),
        p_plus in 0.0..=1.0f64,
        p_minus in 0.0..=1.0f64,
        candidate in proptest::collection::vec(0.0..=1.0f64, 3),
        h in 0.5..200.0f64,
    ) {
        let stack = DiffStack::from_levels(3, 16, levels.clone()).unwrap();
        let action = StackAction { p_plus, p_minus, push_vector: candidate };
        let next = apply_operator(&stack, &action, Sensitivity::new(h).unwrap()).unwrap();
        prop_assert!(next.size() <= levels.len() + 1);
        for level in next.levels() {
            for &x in level {
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
        if next.size() > 0 {
            prop_assert!(sup_norm(next.level(next.size() - 1).unwrap()) >= 0.5);
        }
        prop_assert!(next.level(next.size()).is_none());
    }

    /// Reading distance equals top-level distance, bitwise, whenever the
    /// reference top is one-hot and the perturbed top is within 0.4 of it.
    #[test]
    fn reading_isometry_for_one_hot_tops(
        m in 1usize..6,
        hot_seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(hot_seed);
        use rand::Rng;
        let hot = rng.random_range(0..m);
        let top: Vec<f64> = (0..m)
            .map(|j| if j == hot { rng.random_range(0.6..=1.0) } else { rng.random_range(0.0..=0.4) })
            .collect();
        let stack = DiffStack::from_levels(m, 4, vec![top]).unwrap();
        let ideal = IdealStack::from_symbols(m, &[hot]);
        let k_distance = stack_distance(&stack, &ideal);
        let r_distance = sup_distance(reading(&stack).as_slice(), ideal_reading(&ideal).as_slice());
        prop_assert_eq!(k_distance, r_distance);
    }

    /// Argmax-decoded acceptance of the network agrees with the exact
    /// machine on random walks over the built-in grammars.
    #[test]
    fn network_classification_matches_oracle(
        which in 0usize..3,
        walk in proptest::collection::vec(any::<u16>(), 0..32),
    ) {
        let spec = builtin(Builtin::ALL[which]);
        let tensors = encode_weights(&spec);
        let m1 = spec.input_alphabet_size();
        let input: Vec<usize> = walk.iter().map(|&w| w as usize % m1).collect();
        let expected = run_classical(&spec, &input).unwrap().accept;
        let report = nn_run(
            &tensors,
            &input,
            Sensitivity::new(60.0).unwrap(),
            spec.start_state,
            &spec.accept_states,
            &RunOptions::default(),
        ).unwrap();
        prop_assert!(!report.low_confidence);
        prop_assert_eq!(report.accept, expected);
    }

    /// Generated corpora only ever carry oracle labels.
    #[test]
    fn corpus_labels_are_oracle_labels(which in 0usize..3, seed in any::<u64>()) {
        let spec = builtin(Builtin::ALL[which]);
        let end = default_end_symbol(&spec);
        let corpus = gen_corpus(&spec, end, CorpusMode::Random { count: 40, max_len: 24, seed }).unwrap();
        for entry in &corpus.entries {
            prop_assert_eq!(entry.accept, run_classical(&spec, &entry.symbols).unwrap().accept);
        }
    }
}

/// One-hot checking is shared by the decode paths; pin its semantics.
#[test]
fn one_hot_semantics() {
    assert!(is_one_hot(&[0.0, 1.0]));
    assert!(!is_one_hot(&[1.0 - 1e-12, 0.0]));
}
