//! Shared generators for the integration suites: seeded random merge trees
//! and scalar series with small, known bounds.

#![allow(dead_code)]

use mt_interleave::ingest::ScalarSeries;
use mt_interleave::{MergeTree, ScalarValue};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A random merge tree with exactly `leaf_count` leaves: integer leaf values
/// in [0, 8], every merge 1 to 3 above its tallest child, and an occasional
/// three-way merge. Node ids are sequential from 0.
pub fn random_tree(rng: &mut ChaCha8Rng, leaf_count: usize) -> MergeTree {
    assert!(leaf_count >= 1);
    let mut nodes: Vec<(u64, i64, Option<u64>)> = Vec::new();
    let mut components: Vec<(u64, i64)> = Vec::new();
    let mut next_id = 0u64;
    for _ in 0..leaf_count {
        let value = rng.gen_range(0..=8);
        nodes.push((next_id, value, None));
        components.push((next_id, value));
        next_id += 1;
    }
    while components.len() > 1 {
        let arity = if components.len() >= 3 && rng.gen_bool(0.2) {
            3
        } else {
            2
        };
        let mut merged = Vec::new();
        for _ in 0..arity {
            let i = rng.gen_range(0..components.len());
            merged.push(components.swap_remove(i));
        }
        let tallest = merged.iter().map(|&(_, v)| v).max().unwrap();
        let value = tallest + rng.gen_range(1..=3);
        let id = next_id;
        next_id += 1;
        nodes.push((id, value, None));
        for &(child, _) in &merged {
            nodes[child as usize].2 = Some(id);
        }
        components.push((id, value));
    }
    MergeTree::from_records(
        nodes
            .into_iter()
            .map(|(id, v, p)| (id, ScalarValue::from_integer(v), p)),
    )
    .expect("generated records form a valid tree")
}

/// A random tree with 1 to `max_leaves` leaves.
pub fn random_tree_up_to(rng: &mut ChaCha8Rng, max_leaves: usize) -> MergeTree {
    let leaves = rng.gen_range(1..=max_leaves);
    random_tree(rng, leaves)
}

/// A random integer-valued series of the given length with no two adjacent
/// samples equal, values in [0, 20].
pub fn random_series(rng: &mut ChaCha8Rng, len: usize) -> ScalarSeries {
    assert!(len >= 1);
    let mut values: Vec<i64> = Vec::with_capacity(len);
    for i in 0..len {
        let mut v = rng.gen_range(0..=20);
        if i > 0 && v == values[i - 1] {
            v = if v == 20 { 19 } else { v + 1 };
        }
        values.push(v);
    }
    ScalarSeries::from_values(values.into_iter().map(ScalarValue::from_integer).collect())
        .expect("positions 0..len are strictly increasing")
}

/// Shifts every sample of `series` by an exact rational drawn from
/// {-num, …, num}/den, resampling until no two adjacent values collide.
/// Returns the shifted series and the largest absolute shift applied.
pub fn perturb_series(
    rng: &mut ChaCha8Rng,
    series: &ScalarSeries,
    num: i64,
    den: i64,
) -> (ScalarSeries, ScalarValue) {
    assert!(num >= 0 && den >= 1);
    'attempt: loop {
        let mut samples = Vec::with_capacity(series.len());
        let mut max_shift = ScalarValue::zero();
        for (position, value) in series.samples() {
            let jitter = rng.gen_range(-num..=num);
            let delta: ScalarValue = format!("{jitter}/{den}").parse().unwrap();
            let shifted = value + &delta;
            if delta.abs() > max_shift {
                max_shift = delta.abs();
            }
            samples.push((position.clone(), shifted));
        }
        for window in samples.windows(2) {
            if window[0].1 == window[1].1 {
                continue 'attempt;
            }
        }
        let shifted =
            ScalarSeries::new(samples).expect("positions are unchanged and still ascending");
        return (shifted, max_shift);
    }
}
