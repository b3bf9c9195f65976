//! Per-leaf-pair dictionaries consulted during map verification.
//!
//! For every unordered pair of source-tree leaves two facts are precomputed:
//! their least common ancestor, and the first equal-value node pair below it
//! (descending) whose gap to the ancestor exceeds 2ε. A map can only be
//! ε-good if it keeps the images of such a pair distinct, so tabulating them
//! once lets every enumerated assignment be checked cheaply.

use std::collections::BTreeMap;

use crate::engine::augment::AugmentedPair;
use crate::engine::candidates::Epsilon;
use crate::tree::{MergeTree, NodeId, NodePath};

/// An equal-value node pair below a leaf pair's LCA, further than 2ε from it.
/// Oriented to the normalized (smaller id, larger id) leaf-pair key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoEpsilonPair {
    pub on_first: NodeId,
    pub on_second: NodeId,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// LCA and 2ε-pair lookups, keyed by every unordered pair of distinct
/// source-tree leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTables {
    lcas: BTreeMap<(NodeId, NodeId), NodeId>,
    two_eps: BTreeMap<(NodeId, NodeId), Option<TwoEpsilonPair>>,
}

impl PairTables {
    /// Number of tabulated leaf pairs.
    pub fn len(&self) -> usize {
        self.lcas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lcas.is_empty()
    }

    /// LCA of two distinct leaves. Panics when the pair was never tabulated,
    /// which signals caller misuse.
    pub fn lca(&self, a: NodeId, b: NodeId) -> NodeId {
        *self
            .lcas
            .get(&key(a, b))
            .unwrap_or_else(|| panic!("leaf pair ({a}, {b}) is not tabulated"))
    }

    /// The 2ε-pair of two distinct leaves, oriented so the first node lies on
    /// `a`'s path and the second on `b`'s.
    pub fn two_eps_pair(&self, a: NodeId, b: NodeId) -> Option<(NodeId, NodeId)> {
        let k = key(a, b);
        let entry = self
            .two_eps
            .get(&k)
            .unwrap_or_else(|| panic!("leaf pair ({a}, {b}) is not tabulated"));
        entry.as_ref().map(|p| {
            if k.0 == a {
                (p.on_first, p.on_second)
            } else {
                (p.on_second, p.on_first)
            }
        })
    }

    /// All leaf pairs that do have a 2ε-pair, with the pair itself.
    pub fn present_two_eps_pairs(
        &self,
    ) -> impl Iterator<Item = ((NodeId, NodeId), (NodeId, NodeId))> + '_ {
        self.two_eps.iter().filter_map(|(leaves, entry)| {
            entry.as_ref().map(|p| (*leaves, (p.on_first, p.on_second)))
        })
    }
}

/// Walks both paths downward from the LCA in lockstep (augmentation keeps
/// their levels synchronized) and returns the first equal-value pair whose
/// gap below the LCA exceeds 2ε; `None` when every shared level is within
/// 2ε. "First" means the greatest such value.
fn find_two_eps_pair(
    tree: &MergeTree,
    path_a: &NodePath,
    path_b: &NodePath,
    lca: NodeId,
    two_eps: &crate::scalar::ScalarValue,
) -> Option<TwoEpsilonPair> {
    let mut idx_a = path_a.position(lca).expect("LCA lies on the first path");
    let mut idx_b = path_b.position(lca).expect("LCA lies on the second path");
    let lca_value = tree.value(lca);
    while idx_a > 0 && idx_b > 0 {
        idx_a -= 1;
        idx_b -= 1;
        let a = path_a.get(idx_a).expect("index in range");
        let b = path_b.get(idx_b).expect("index in range");
        debug_assert_eq!(
            tree.value(a),
            tree.value(b),
            "augmented paths descend synchronized levels"
        );
        if &(lca_value - tree.value(a)) > two_eps {
            return Some(TwoEpsilonPair {
                on_first: a,
                on_second: b,
            });
        }
    }
    None
}

/// Tabulates LCA and 2ε-pair for every unordered pair of source-tree leaves.
pub fn build_pair_tables(aug: &AugmentedPair, eps: &Epsilon) -> PairTables {
    debug_assert_eq!(*eps, aug.epsilon);
    let tree = &aug.aug_f;
    let leaves = tree.leaves();
    let paths: BTreeMap<NodeId, NodePath> = leaves
        .iter()
        .map(|&leaf| {
            let path = tree
                .node_to_root_path(leaf)
                .expect("leaf belongs to the tree");
            (leaf, path)
        })
        .collect();

    let two_eps_bound = eps.doubled();
    let mut lcas = BTreeMap::new();
    let mut two_eps = BTreeMap::new();
    for (i, &a) in leaves.iter().enumerate() {
        for &b in &leaves[i + 1..] {
            let k = key(a, b);
            let lca = tree.find_lca(a, b).expect("leaves share the root");
            let pair = find_two_eps_pair(tree, &paths[&k.0], &paths[&k.1], lca, &two_eps_bound);
            lcas.insert(k, lca);
            two_eps.insert(k, pair);
        }
    }
    PairTables { lcas, two_eps }
}
