//! A brute-force verifier for the distance engine.
//!
//! The oracle answers the same question as the engine but by the dumbest
//! sound method available: scan the candidate list linearly, enumerate every
//! leaf assignment in both mapping directions with no refinement and no
//! early exits, glue maps by walking paths and matching values, and check
//! goodness directly against first principles. It shares only the tree and
//! augmentation primitives with the engine, and re-verifies the
//! augmentation invariant instead of trusting it. Deliberately exponential:
//! a hard leaf-count guard keeps it on desk-scale instances.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{augment, extend_trees, AugmentedPair, Epsilon, TreeMap};
use crate::tree::{MergeTree, NodeId};

/// Most source-tree leaves the oracle accepts.
pub const MAX_SOURCE_LEAVES: usize = 4;
/// Most target-tree leaves the oracle accepts.
pub const MAX_TARGET_LEAVES: usize = 5;

/// Refusals of the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    /// The instance exceeds the exhaustive-enumeration guard.
    #[error(
        "instance too large for exhaustive verification: {eta_f} and {eta_g} leaves \
         exceed the {MAX_SOURCE_LEAVES}/{MAX_TARGET_LEAVES} guard"
    )]
    InstanceTooLarge { eta_f: usize, eta_g: usize },
}

/// The oracle's full account: the distance, the verdict at every candidate
/// value in ascending order, and how many assignments were ground through.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub epsilon_star: Epsilon,
    pub verdicts: Vec<(Epsilon, bool)>,
    pub total_maps_checked: u64,
}

/// The candidate values derived from scratch: cross-tree value differences
/// and halved within-tree differences, deduplicated and ascending.
fn oracle_candidates(mf: &MergeTree, mg: &MergeTree) -> Vec<Epsilon> {
    let mut values = BTreeSet::new();
    for a in mf.iter() {
        for b in mg.iter() {
            values.insert(a.value.abs_diff(&b.value));
        }
    }
    for tree in [mf, mg] {
        for a in tree.iter() {
            for b in tree.iter() {
                if a.id != b.id {
                    values.insert(a.value.abs_diff(&b.value).half());
                }
            }
        }
    }
    values
        .into_iter()
        .map(|v| Epsilon::new(v).expect("absolute differences are non-negative"))
        .collect()
}

/// Checks ε-goodness straight from the definition, with no reliance on the
/// engine's tabulated shortcuts:
///
/// (a) the map is total and shifts every value by exactly ε;
/// (b) any two equal-value source nodes sent to one image must have their
///     LCA within 2ε of them (otherwise the map merges branches too early);
/// (c) every target node outside the image, not just every leaf, must be
///     within 2ε of its nearest image ancestor.
pub fn oracle_eps_good_check(map: &TreeMap, aug: &AugmentedPair, eps: &Epsilon) -> bool {
    let bound = eps.doubled();

    if map.len() != aug.aug_f.len() {
        return false;
    }
    for (node, image) in map.iter() {
        if *aug.aug_g.value(image) != aug.aug_f.value(node) + eps.value() {
            return false;
        }
    }

    let nodes: Vec<NodeId> = aug.aug_f.node_ids().collect();
    for (i, &x) in nodes.iter().enumerate() {
        for &y in &nodes[i + 1..] {
            if aug.aug_f.value(x) == aug.aug_f.value(y) && map.get(x) == map.get(y) {
                let lca = aug
                    .aug_f
                    .find_lca(x, y)
                    .expect("nodes of one tree share an ancestor");
                if aug.aug_f.value(lca) - aug.aug_f.value(x) > bound {
                    return false;
                }
            }
        }
    }

    for node in aug.aug_g.iter() {
        if map.image_contains(node.id) {
            continue;
        }
        let mut current = node.id;
        let nearest = loop {
            match aug
                .aug_g
                .node(current)
                .expect("walk stays inside the tree")
                .parent
            {
                Some(parent) if map.image_contains(parent) => break parent,
                Some(parent) => current = parent,
                None => return false,
            }
        };
        if aug.aug_g.value(nearest) - &node.value > bound {
            return false;
        }
    }
    true
}

/// Glues one assignment into a total map by walking every leaf's path and
/// its target's path upward in lockstep, insisting that values match at each
/// step and that no source node receives two different images. Returns
/// `None` when the assignment does not make a map at all.
fn glue_by_value_walk(
    aug: &AugmentedPair,
    picks: &[(NodeId, NodeId)],
    eps: &Epsilon,
) -> Option<TreeMap> {
    let mut entries: HashMap<NodeId, NodeId> = HashMap::new();
    for &(leaf, target) in picks {
        let mut source = Some(leaf);
        let mut image = Some(target);
        loop {
            match (source, image) {
                (Some(s), Some(t)) => {
                    if *aug.aug_g.value(t) != aug.aug_f.value(s) + eps.value() {
                        return None;
                    }
                    if let Some(previous) = entries.insert(s, t) {
                        if previous != t {
                            return None;
                        }
                    }
                    source = aug.aug_f.node(s).expect("path node exists").parent;
                    image = aug.aug_g.node(t).expect("path node exists").parent;
                }
                (None, None) => break,
                _ => return None,
            }
        }
    }
    Some(TreeMap::from_entries(entries))
}

/// Exhaustively decides whether any assignment of source leaves to
/// value-matched target nodes glues into an ε-good map, counting every
/// tested assignment into `total`.
fn direction_accepts(
    source: &MergeTree,
    target: &MergeTree,
    eps: &Epsilon,
    total: &mut u64,
) -> bool {
    let (extended_source, extended_target) = extend_trees(source, target, eps);
    let aug = augment(&extended_source, &extended_target, eps);
    assert_eq!(
        aug.verify_level_correspondence(),
        Ok(()),
        "augmentation broke the level correspondence"
    );

    let leaves: Vec<NodeId> = aug.aug_f.leaves().to_vec();
    let lists: Vec<Vec<NodeId>> = leaves
        .iter()
        .map(|&leaf| {
            let level = aug.aug_f.value(leaf) + eps.value();
            aug.aug_g
                .iter()
                .filter(|n| n.value == level)
                .map(|n| n.id)
                .collect()
        })
        .collect();
    if lists.iter().any(Vec::is_empty) {
        return false;
    }

    let mut counters = vec![0usize; lists.len()];
    loop {
        *total += 1;
        let picks: Vec<(NodeId, NodeId)> = leaves
            .iter()
            .zip(&counters)
            .enumerate()
            .map(|(i, (&leaf, &c))| (leaf, lists[i][c]))
            .collect();
        if let Some(map) = glue_by_value_walk(&aug, &picks, eps) {
            if oracle_eps_good_check(&map, &aug, eps) {
                return true;
            }
        }

        let mut i = lists.len();
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            counters[i] += 1;
            if counters[i] < lists[i].len() {
                break;
            }
            counters[i] = 0;
        }
    }
}

/// Scans the whole candidate list in ascending order, enumerating both
/// mapping directions at each value, and reports the first accepted value
/// as the distance.
///
/// Two invariants are asserted along the way: the two directions agree at
/// every ε (interleaving is symmetric), and the verdict vector is monotone
/// (once interleaved, always interleaved at larger ε). Either assertion
/// firing means a theory or engine-primitive bug, which is exactly what the
/// oracle exists to surface.
pub fn oracle_distance(mf: &MergeTree, mg: &MergeTree) -> Result<OracleReport, OracleError> {
    let eta_f = mf.leaf_count();
    let eta_g = mg.leaf_count();
    if eta_f > MAX_SOURCE_LEAVES || eta_g > MAX_TARGET_LEAVES {
        return Err(OracleError::InstanceTooLarge { eta_f, eta_g });
    }

    let mut verdicts = Vec::new();
    let mut total: u64 = 0;
    for eps in oracle_candidates(mf, mg) {
        let forward = direction_accepts(mf, mg, &eps, &mut total);
        let backward = direction_accepts(mg, mf, &eps, &mut total);
        assert_eq!(
            forward, backward,
            "mapping directions disagree at ε = {eps}"
        );
        verdicts.push((eps, forward));
    }
    assert!(
        verdicts.windows(2).all(|w| !w[0].1 || w[1].1),
        "verdicts over ascending candidates are not monotone"
    );

    let epsilon_star = verdicts
        .iter()
        .find(|(_, accepted)| *accepted)
        .map(|(eps, _)| eps.clone())
        .expect("the largest candidate value always interleaves");
    Ok(OracleReport {
        epsilon_star,
        verdicts,
        total_maps_checked: total,
    })
}
