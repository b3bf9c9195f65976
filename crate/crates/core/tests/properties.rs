//! Property tests over randomized inputs: exact-arithmetic round trips,
//! series-to-tree structure, and the engine's cross-cutting invariants
//! (level correspondence, witness soundness, verdict monotonicity,
//! refinement neutrality, direction symmetry, enumeration bounds).

mod common;

use mt_interleave::engine::{augment, extend_trees, generate_candidates, SearchConfig, Witness};
use mt_interleave::ingest::merge_tree_of_series;
use mt_interleave::{
    compute_interleaving_distance, is_eps_interleaved, MergeTree, ScalarValue,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn fraction_display_parse_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
        let value: ScalarValue = format!("{n}/{d}").parse().unwrap();
        let again: ScalarValue = value.to_string().parse().unwrap();
        prop_assert_eq!(again, value);
    }

    #[test]
    fn decimal_literals_parse_to_exact_fractions(
        negative in any::<bool>(),
        whole in 0i64..1000,
        frac in 0u32..10_000u32,
    ) {
        let sign = if negative { "-" } else { "" };
        let text = format!("{sign}{whole}.{frac:04}");
        let parsed: ScalarValue = text.parse().unwrap();
        let expected: ScalarValue = format!("{sign}{}/10000", whole * 10_000 + frac as i64)
            .parse()
            .unwrap();
        prop_assert_eq!(parsed, expected);
    }

    #[test]
    fn addition_and_subtraction_cancel_exactly(
        a_n in -500i64..500, a_d in 1i64..100,
        b_n in -500i64..500, b_d in 1i64..100,
    ) {
        let a: ScalarValue = format!("{a_n}/{a_d}").parse().unwrap();
        let b: ScalarValue = format!("{b_n}/{b_d}").parse().unwrap();
        let sum = &a + &b;
        prop_assert_eq!(&sum - &b, a);
    }

    #[test]
    fn series_trees_have_the_local_minima_as_leaves(values in prop::collection::vec(0i64..30, 1..40)) {
        // Collapse adjacent duplicates so the series is plateau-free.
        let mut cleaned: Vec<i64> = Vec::new();
        for v in values {
            if cleaned.last() != Some(&v) {
                cleaned.push(v);
            }
        }
        let series = mt_interleave::ingest::ScalarSeries::from_values(
            cleaned.iter().copied().map(ScalarValue::from_integer).collect(),
        )
        .unwrap();
        let tree = merge_tree_of_series(&series).unwrap();

        let mut minima: Vec<i64> = Vec::new();
        for (i, &v) in cleaned.iter().enumerate() {
            let left_up = i == 0 || cleaned[i - 1] > v;
            let right_up = i + 1 == cleaned.len() || cleaned[i + 1] > v;
            if left_up && right_up {
                minima.push(v);
            }
        }
        minima.sort_unstable();
        let mut leaf_values: Vec<i64> = tree
            .leaves()
            .iter()
            .map(|&l| tree.value(l).to_string().parse::<i64>().unwrap())
            .collect();
        leaf_values.sort_unstable();
        prop_assert_eq!(leaf_values, minima);

        // The root sits at the global maximum.
        let max = cleaned.iter().max().unwrap();
        prop_assert_eq!(tree.value(tree.root()).to_string(), max.to_string());

        // Reading the series backwards builds an isomorphic tree.
        let reversed = merge_tree_of_series(&series.reversed()).unwrap();
        prop_assert_eq!(reversed.canonical_form(), tree.canonical_form());
    }
}

/// Re-derives every engine guarantee for one witness from public API only.
fn assert_witness_sound(witness: &Witness) {
    let aug = &witness.aug;
    let eps = witness.epsilon.value();

    // The assignment covers every source leaf, each target exactly ε above.
    assert_eq!(witness.assignment.len(), aug.aug_f.leaf_count());
    for &(leaf, target) in witness.assignment.entries() {
        assert!(aug.aug_f.node(leaf).unwrap().is_leaf());
        assert_eq!(
            aug.aug_g.value(target),
            &(aug.aug_f.value(leaf) + eps),
            "assignment target is not ε above its leaf"
        );
    }

    // The map is total, shifts by exactly ε, and preserves ancestry.
    assert_eq!(witness.map.len(), aug.aug_f.len());
    for (node, image) in witness.map.iter() {
        assert_eq!(aug.aug_g.value(image), &(aug.aug_f.value(node) + eps));
        if let Some(parent) = aug.aug_f.node(node).unwrap().parent {
            let image_path = aug.aug_g.node_to_root_path(image).unwrap();
            assert!(
                image_path.contains(witness.map.get(parent)),
                "parent image is not an ancestor of the child image"
            );
        }
    }
}

fn pair(seed: u64) -> (MergeTree, MergeTree) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mf = common::random_tree_up_to(&mut rng, 3);
    let mg = common::random_tree_up_to(&mut rng, 3);
    (mf, mg)
}

#[test]
fn augmentation_keeps_levels_corresponding_at_every_candidate() {
    for seed in 0..40 {
        let (mf, mg) = pair(seed);
        for eps in generate_candidates(&mf, &mg).iter() {
            let (ef, eg) = extend_trees(&mf, &mg, eps);
            let aug = augment(&ef, &eg, eps);
            assert_eq!(aug.verify_level_correspondence(), Ok(()), "seed {seed}, ε = {eps}");

            let (eg2, ef2) = extend_trees(&mg, &mf, eps);
            let aug2 = augment(&eg2, &ef2, eps);
            assert_eq!(aug2.verify_level_correspondence(), Ok(()), "seed {seed}, ε = {eps}, swapped");
        }
    }
}

#[test]
fn verdicts_are_monotone_and_witnesses_sound_across_candidates() {
    let cfg = SearchConfig::default();
    for seed in 100..140 {
        let (mf, mg) = pair(seed);
        let mut previous = false;
        for eps in generate_candidates(&mf, &mg).iter() {
            let result = is_eps_interleaved(&mf, &mg, eps, &cfg).unwrap();
            assert!(
                !previous || result.interleaved,
                "verdict flipped back to false at ε = {eps} (seed {seed})"
            );
            previous = result.interleaved;
            assert_eq!(result.interleaved, result.witness.is_some());
            if let Some(witness) = &result.witness {
                assert_witness_sound(witness);
            }
        }
        assert!(previous, "the largest candidate must interleave (seed {seed})");
    }
}

#[test]
fn refinement_changes_work_but_never_verdicts() {
    let on = SearchConfig::default();
    let off = SearchConfig {
        refinement: false,
        ..SearchConfig::default()
    };
    for seed in 200..240 {
        let (mf, mg) = pair(seed);
        for eps in generate_candidates(&mf, &mg).iter() {
            let with = is_eps_interleaved(&mf, &mg, eps, &on).unwrap();
            let without = is_eps_interleaved(&mf, &mg, eps, &off).unwrap();
            assert_eq!(with.interleaved, without.interleaved, "seed {seed}, ε = {eps}");
            assert!(
                with.maps_enumerated <= without.maps_enumerated,
                "refinement did more work at ε = {eps} (seed {seed})"
            );
        }
    }
}

#[test]
fn distances_are_symmetric_and_enumeration_stays_bounded() {
    let cfg = SearchConfig::default();
    for seed in 300..340 {
        let (mf, mg) = pair(seed);
        let forward = compute_interleaving_distance(&mf, &mg, &cfg).unwrap();
        let backward = compute_interleaving_distance(&mg, &mf, &cfg).unwrap();
        assert_eq!(
            forward.epsilon_star, backward.epsilon_star,
            "distance changed under argument swap (seed {seed})"
        );

        // Every probe stays within the raw assignment-space bound.
        let eta_f = mf.leaf_count() as u128;
        let eta_g = mg.leaf_count() as u128;
        let bound = eta_g.pow(eta_f as u32).max(eta_f.pow(eta_g as u32));
        for probe in &forward.trace {
            assert!(
                (probe.maps_enumerated as u128) <= bound,
                "probe at ε = {} exceeded the assignment bound (seed {seed})",
                probe.epsilon
            );
        }

        // The distance is realized inside the candidate list.
        let candidates = generate_candidates(&mf, &mg);
        assert!(candidates.iter().any(|e| *e == forward.epsilon_star));
    }
}

#[test]
fn random_series_trees_are_valid_and_reversal_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..60 {
        let len = rng.gen_range(1..=30);
        let series = common::random_series(&mut rng, len);
        let tree = merge_tree_of_series(&series).unwrap();
        assert!(tree.validate().is_ok());
        let mirrored = merge_tree_of_series(&series.reversed()).unwrap();
        assert_eq!(tree.canonical_form(), mirrored.canonical_form());
    }
}
