//! Root extension and level-set augmentation.
//!
//! Before maps are enumerated the two trees are normalized: first the roots
//! are aligned so the target tree's root sits exactly ε above the source
//! tree's root, then degree-2 nodes are inserted so that every level of one
//! tree has its ε-shifted counterpart in the other. After this step a
//! leaf-to-root path in the source tree and the path above its target node
//! walk levels in lockstep, which is what makes path zipping total.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::candidates::Epsilon;
use crate::scalar::ScalarValue;
use crate::tree::{MergeTree, NodeId};

/// Aligns the roots: returns clones of the input trees where the second
/// root's value equals the first root's value plus ε. Whichever tree is too
/// short gains a fresh root; an already aligned pair is returned unchanged.
pub fn extend_trees(mf: &MergeTree, mg: &MergeTree, eps: &Epsilon) -> (MergeTree, MergeTree) {
    let mut ef = mf.clone();
    let mut eg = mg.clone();
    let shifted = ef.value(ef.root()) + eps.value();
    let root_g = eg.value(eg.root()).clone();
    if root_g < shifted {
        eg.attach_root(shifted)
            .expect("shifted root value exceeds the current root value");
    } else if root_g > shifted {
        ef.attach_root(&root_g - eps.value())
            .expect("unshifted root value exceeds the current root value");
    }
    (ef, eg)
}

/// Both trees after level-set augmentation, with bookkeeping for the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedPair {
    pub aug_f: MergeTree,
    pub aug_g: MergeTree,
    /// Augmented-node id → the id it had in the original tree, or `None` for
    /// nodes minted by extension or augmentation.
    pub origin_f: BTreeMap<NodeId, Option<NodeId>>,
    pub origin_g: BTreeMap<NodeId, Option<NodeId>>,
    /// Node ids per exact value, ascending by id.
    pub levels_f: BTreeMap<ScalarValue, Vec<NodeId>>,
    pub levels_g: BTreeMap<ScalarValue, Vec<NodeId>>,
    pub epsilon: Epsilon,
}

impl AugmentedPair {
    /// All target-tree nodes sitting at exactly `level`, ascending by id.
    pub fn targets_at(&self, level: &ScalarValue) -> &[NodeId] {
        self.levels_g.get(level).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn origin_of_f(&self, id: NodeId) -> Option<NodeId> {
        self.origin_f.get(&id).copied().flatten()
    }

    pub fn origin_of_g(&self, id: NodeId) -> Option<NodeId> {
        self.origin_g.get(&id).copied().flatten()
    }

    /// Re-expresses the origin maps relative to the caller's original trees,
    /// so that roots minted by extension also count as synthetic.
    pub fn clip_origins(&mut self, original_f: &MergeTree, original_g: &MergeTree) {
        for origin in self.origin_f.values_mut() {
            if origin.is_some_and(|id| !original_f.contains(id)) {
                *origin = None;
            }
        }
        for origin in self.origin_g.values_mut() {
            if origin.is_some_and(|id| !original_g.contains(id)) {
                *origin = None;
            }
        }
    }

    /// Checks the level correspondence both ways: every node value `h` of the
    /// source tree has a node at `h + ε` in the target tree unless `h + ε`
    /// falls below the target tree's span, and conversely. Root alignment is
    /// checked as well. Returns a diagnostic on the first violation.
    pub fn verify_level_correspondence(&self) -> Result<(), String> {
        let eps = self.epsilon.value();
        let root_f = self.aug_f.value(self.aug_f.root());
        let root_g = self.aug_g.value(self.aug_g.root());
        if *root_g != root_f + eps {
            return Err(format!(
                "roots are not aligned: source root {root_f} + {eps} != target root {root_g}"
            ));
        }
        let min_f = self.aug_f.value(self.aug_f.min_leaf()).clone();
        let min_g = self.aug_g.value(self.aug_g.min_leaf()).clone();
        for h in self.levels_f.keys() {
            let shifted = h + eps;
            if shifted >= min_g && !self.levels_g.contains_key(&shifted) {
                return Err(format!(
                    "source level {h} has no target node at {shifted}"
                ));
            }
        }
        for h in self.levels_g.keys() {
            let lowered = h - eps;
            if lowered >= min_f && !self.levels_f.contains_key(&lowered) {
                return Err(format!(
                    "target level {h} has no source node at {lowered}"
                ));
            }
        }
        Ok(())
    }
}

/// Inserts a degree-2 node on every edge that strictly crosses a level.
fn insert_levels(tree: &mut MergeTree, levels: &BTreeSet<ScalarValue>) {
    for level in levels {
        let existing: Vec<NodeId> = tree.node_ids().collect();
        for id in existing {
            let crosses = {
                let node = tree.node(id).expect("snapshot id stays valid");
                match node.parent {
                    Some(parent) => node.value < *level && *level < *tree.value(parent),
                    None => false,
                }
            };
            if crosses {
                tree.insert_node_on_edge(id, level.clone())
                    .expect("crossing level is interior to the edge");
            }
        }
    }
}

fn level_table(tree: &MergeTree) -> BTreeMap<ScalarValue, Vec<NodeId>> {
    let mut table: BTreeMap<ScalarValue, Vec<NodeId>> = BTreeMap::new();
    for node in tree.iter() {
        table.entry(node.value.clone()).or_default().push(node.id);
    }
    table
}

/// Inserts all cross-tree levels into both (already extended) trees: the
/// source tree receives every target value shifted down by ε, the target
/// tree every source value shifted up by ε, plus each tree's own values.
/// Levels outside a tree's span insert nothing, and existing nodes are never
/// duplicated, because insertion only happens on strictly crossing edges.
///
/// Panics when the roots are not aligned, since that means the caller
/// skipped [`extend_trees`].
pub fn augment(mf: &MergeTree, mg: &MergeTree, eps: &Epsilon) -> AugmentedPair {
    let shifted_root = mf.value(mf.root()) + eps.value();
    assert!(
        *mg.value(mg.root()) == shifted_root,
        "augment requires extended trees with aligned roots"
    );

    let mut source_levels: BTreeSet<ScalarValue> =
        mf.iter().map(|n| n.value.clone()).collect();
    for node in mg.iter() {
        source_levels.insert(&node.value - eps.value());
    }
    let mut target_levels: BTreeSet<ScalarValue> =
        mg.iter().map(|n| n.value.clone()).collect();
    for node in mf.iter() {
        target_levels.insert(&node.value + eps.value());
    }

    let mut aug_f = mf.clone();
    insert_levels(&mut aug_f, &source_levels);
    let mut aug_g = mg.clone();
    insert_levels(&mut aug_g, &target_levels);

    let origin_f = aug_f
        .node_ids()
        .map(|id| (id, mf.contains(id).then_some(id)))
        .collect();
    let origin_g = aug_g
        .node_ids()
        .map(|id| (id, mg.contains(id).then_some(id)))
        .collect();
    let levels_f = level_table(&aug_f);
    let levels_g = level_table(&aug_g);

    let pair = AugmentedPair {
        aug_f,
        aug_g,
        origin_f,
        origin_g,
        levels_f,
        levels_g,
        epsilon: eps.clone(),
    };
    debug_assert_eq!(pair.verify_level_correspondence(), Ok(()));
    pair
}
