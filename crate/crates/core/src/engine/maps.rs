//! From leaf assignments to verified tree maps.
//!
//! A candidate map is born as a leaf assignment: each source leaf picks a
//! target node exactly ε above it. Zipping the two node-to-root paths of
//! every pick gives per-leaf path maps; they glue into one total map iff
//! every leaf pair agrees at its LCA. The glued map is then judged ε-good by
//! two checks: images of every tabulated 2ε-pair stay distinct, and every
//! uncovered target leaf has a covered ancestor within 2ε.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::engine::augment::AugmentedPair;
use crate::engine::candidates::Epsilon;
use crate::engine::tables::PairTables;
use crate::engine::EngineError;
use crate::scalar::ScalarValue;
use crate::tree::{NodeId, NodePath};

/// One target pick per source-tree leaf, in the leaves' (value, id) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafAssignment {
    entries: Vec<(NodeId, NodeId)>,
}

impl LeafAssignment {
    pub fn new(entries: Vec<(NodeId, NodeId)>) -> Self {
        LeafAssignment { entries }
    }

    pub fn entries(&self) -> &[(NodeId, NodeId)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn target_of(&self, leaf: NodeId) -> Option<NodeId> {
        self.entries
            .iter()
            .find(|(l, _)| *l == leaf)
            .map(|(_, t)| *t)
    }
}

/// The map along a single leaf-to-root path, paired index by index with the
/// path above the leaf's target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathMap {
    pairs: Vec<(NodeId, NodeId)>,
    by_source: HashMap<NodeId, NodeId>,
}

impl PathMap {
    fn new(pairs: Vec<(NodeId, NodeId)>) -> Self {
        let by_source = pairs.iter().copied().collect();
        PathMap { pairs, by_source }
    }

    pub fn get(&self, node: NodeId) -> Option<NodeId> {
        self.by_source.get(&node).copied()
    }

    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// A total, ancestor-preserving, value-shifting map from the augmented
/// source tree into the augmented target tree, with its image set cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMap {
    map: BTreeMap<NodeId, NodeId>,
    image: BTreeSet<NodeId>,
}

impl TreeMap {
    /// Builds a map directly from (source, image) entries without any
    /// invariant checks. Meant for verification tooling that constructs maps
    /// by its own method and validates them explicitly afterwards.
    pub fn from_entries(entries: impl IntoIterator<Item = (NodeId, NodeId)>) -> TreeMap {
        let map: BTreeMap<NodeId, NodeId> = entries.into_iter().collect();
        let image = map.values().copied().collect();
        TreeMap { map, image }
    }

    /// Image of a source node. Panics on an id outside the source tree,
    /// which signals caller misuse.
    pub fn get(&self, node: NodeId) -> NodeId {
        *self
            .map
            .get(&node)
            .unwrap_or_else(|| panic!("node {node} is outside the map's domain"))
    }

    pub fn image_contains(&self, node: NodeId) -> bool {
        self.image.contains(&node)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.map.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }
}

/// All target-tree nodes at exactly `level`, ascending by id; at most one
/// per leaf-to-root path, so never more than the target tree's leaf count.
pub fn target_nodes(aug: &AugmentedPair, level: &ScalarValue) -> Vec<NodeId> {
    let targets = aug.targets_at(level).to_vec();
    debug_assert!(targets.len() <= aug.aug_g.leaf_count());
    targets
}

/// Zips a leaf-to-root path with the path above the leaf's target, index by
/// index. Augmentation makes both paths walk the same ε-shifted levels, so
/// unequal lengths mean the augmentation is broken, not the input.
pub fn extend_assignment(
    u: NodeId,
    target: NodeId,
    p: &NodePath,
    p_prime: &NodePath,
) -> Result<PathMap, EngineError> {
    debug_assert_eq!(p.start(), u);
    debug_assert_eq!(p_prime.start(), target);
    if p.len() != p_prime.len() {
        return Err(EngineError::PathLengthMismatch {
            source_len: p.len(),
            target_len: p_prime.len(),
        });
    }
    let pairs = p
        .nodes()
        .iter()
        .copied()
        .zip(p_prime.nodes().iter().copied())
        .collect();
    Ok(PathMap::new(pairs))
}

fn path_map_for(aug: &AugmentedPair, leaf: NodeId, target: NodeId) -> PathMap {
    let p = aug
        .aug_f
        .node_to_root_path(leaf)
        .expect("leaf belongs to the source tree");
    let p_prime = aug
        .aug_g
        .node_to_root_path(target)
        .expect("target belongs to the target tree");
    extend_assignment(leaf, target, &p, &p_prime)
        .expect("augmented paths above matched levels have equal lengths")
}

/// Glues the per-leaf path maps into one total map, or returns `None` when
/// two of them disagree at their leaves' LCA (the map would be ill-defined).
pub fn construct_map(
    phi: &LeafAssignment,
    aug: &AugmentedPair,
    tables: &PairTables,
) -> Option<TreeMap> {
    let path_maps: Vec<(NodeId, PathMap)> = phi
        .entries()
        .iter()
        .map(|&(leaf, target)| (leaf, path_map_for(aug, leaf, target)))
        .collect();

    for (i, (u_i, pm_i)) in path_maps.iter().enumerate() {
        for (u_j, pm_j) in &path_maps[i + 1..] {
            let lca = tables.lca(*u_i, *u_j);
            if pm_i.get(lca) != pm_j.get(lca) {
                return None;
            }
        }
    }

    let mut map = BTreeMap::new();
    for (_, pm) in &path_maps {
        for &(node, image) in pm.pairs() {
            if let Some(previous) = map.insert(node, image) {
                debug_assert_eq!(
                    previous, image,
                    "path maps agreeing at LCAs agree everywhere above them"
                );
            }
        }
    }
    let image = map.values().copied().collect();
    let tree_map = TreeMap { map, image };
    debug_assert!(tree_map_invariants_hold(&tree_map, aug));
    Some(tree_map)
}

/// Debug-only structural audit: totality, the exact ε-shift at every node,
/// and ancestor preservation along every edge.
fn tree_map_invariants_hold(map: &TreeMap, aug: &AugmentedPair) -> bool {
    if map.len() != aug.aug_f.len() {
        return false;
    }
    let eps = aug.epsilon.value();
    for (node, image) in map.iter() {
        if *aug.aug_g.value(image) != aug.aug_f.value(node) + eps {
            return false;
        }
        if let Some(parent) = aug.aug_f.node(node).expect("domain node exists").parent {
            let image_path = aug
                .aug_g
                .node_to_root_path(image)
                .expect("image node exists");
            if !image_path.contains(map.get(parent)) {
                return false;
            }
        }
    }
    true
}

/// The ε-goodness verdict for a well-defined map: images of every tabulated
/// 2ε-pair stay distinct, and every target leaf missed by the image has a
/// covered ancestor within 2ε (the root is always covered, so the upward
/// walk terminates).
pub fn is_eps_good(
    map: &TreeMap,
    aug: &AugmentedPair,
    tables: &PairTables,
    eps: &Epsilon,
) -> bool {
    debug_assert_eq!(*eps, aug.epsilon);
    for (_, (u_r, u_s)) in tables.present_two_eps_pairs() {
        if map.get(u_r) == map.get(u_s) {
            return false;
        }
    }

    let bound = eps.doubled();
    for &leaf in aug.aug_g.leaves() {
        if map.image_contains(leaf) {
            continue;
        }
        let mut current = leaf;
        let nearest = loop {
            match aug
                .aug_g
                .node(current)
                .expect("walk stays inside the target tree")
                .parent
            {
                Some(parent) if map.image_contains(parent) => break parent,
                Some(parent) => current = parent,
                None => unreachable!("the target root is always in the image"),
            }
        };
        if aug.aug_g.value(nearest) - aug.aug_g.value(leaf) > bound {
            return false;
        }
    }
    true
}

/// Prunes the target list of one leaf: a target survives iff for every other
/// leaf at least one of its targets is compatible, meaning the two path maps
/// agree at the pair's LCA and, when the pair has a 2ε-pair, map it to
/// distinct nodes. An empty result proves no ε-good map uses this leaf at
/// all, letting the caller skip enumeration entirely.
pub fn refined_target_nodes(
    u_k: NodeId,
    aug: &AugmentedPair,
    tables: &PairTables,
    eps: &Epsilon,
) -> Vec<NodeId> {
    debug_assert_eq!(*eps, aug.epsilon);
    debug_assert!(aug
        .aug_f
        .node(u_k)
        .expect("leaf belongs to the source tree")
        .is_leaf());

    let leaves = aug.aug_f.leaves();
    let mut raw: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    let mut path_maps: HashMap<(NodeId, NodeId), PathMap> = HashMap::new();
    for &leaf in leaves {
        let level = aug.aug_f.value(leaf) + eps.value();
        let targets = target_nodes(aug, &level);
        for &target in &targets {
            path_maps.insert((leaf, target), path_map_for(aug, leaf, target));
        }
        raw.insert(leaf, targets);
    }

    let mut kept = Vec::new();
    'candidates: for &candidate in &raw[&u_k] {
        let pm_k = &path_maps[&(u_k, candidate)];
        for &other in leaves.iter().filter(|&&l| l != u_k) {
            let lca = tables.lca(u_k, other);
            let pair = tables.two_eps_pair(u_k, other);
            let compatible = raw[&other].iter().any(|&t| {
                let pm_l = &path_maps[&(other, t)];
                pm_k.get(lca) == pm_l.get(lca)
                    && pair.is_none_or(|(r, s)| pm_k.get(r) != pm_l.get(s))
            });
            if !compatible {
                continue 'candidates;
            }
        }
        kept.push(candidate);
    }
    debug_assert!(kept.len() <= aug.aug_g.leaf_count());
    kept
}
