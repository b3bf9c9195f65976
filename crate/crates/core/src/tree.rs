//! The merge-tree model and the pure tree queries everything else builds on.
//!
//! A merge tree is a rooted tree whose nodes carry exact scalar values that
//! strictly increase from every node to its parent. Leaves are the minima of
//! the underlying function, internal nodes are the levels where components
//! merge, and the root carries the global maximum. The decision procedure
//! also needs *loci*: points in the interior of an edge at a given value,
//! which is what [`AncestorLocus`] captures.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::ScalarValue;

/// Stable node identifier, unique within one tree for its whole lifetime.
/// Augmentation and root extension mint fresh ids; ids are never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A violation of the merge-tree invariants, naming the first offending node.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("tree has no root (and no nodes at all, or every node has a parent)")]
    NoRoot,
    #[error("multiple roots: nodes {first} and {second} both lack a parent")]
    MultipleRoots { first: NodeId, second: NodeId },
    #[error("node {0} is orphaned: its parent does not exist")]
    OrphanNode(NodeId),
    #[error("cycle detected on the parent chain starting at node {0}")]
    CycleDetected(NodeId),
    #[error("edge {child} -> {parent} does not strictly increase in value")]
    NonIncreasingEdge { child: NodeId, parent: NodeId },
    #[error("parent/children links around node {0} are inconsistent")]
    InconsistentLinks(NodeId),
    #[error("value {value} is not strictly interior to the edge above node {child}")]
    ValueNotInteriorToEdge { child: NodeId, value: ScalarValue },
    #[error("new root value {value} does not exceed the current root value")]
    RootNotAbove { value: ScalarValue },
    #[error("target value {value} lies outside the path from node {node} to the root")]
    TargetOutOfRange { node: NodeId, value: ScalarValue },
}

/// One node of a merge tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeNode {
    pub id: NodeId,
    pub value: ScalarValue,
    /// Absent exactly for the root.
    pub parent: Option<NodeId>,
    /// Semantically unordered; stored sorted by (value, id) for determinism.
    pub children: Vec<NodeId>,
}

impl MergeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A rooted tree with strictly increasing values toward the root.
///
/// Immutable after construction except for the two build-phase mutations
/// ([`insert_node_on_edge`](MergeTree::insert_node_on_edge) and
/// [`attach_root`](MergeTree::attach_root)), both of which preserve the
/// leaf set and every pre-existing ancestor relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTree {
    nodes: BTreeMap<NodeId, MergeNode>,
    root: NodeId,
    /// All childless nodes, sorted by (value, id) ascending.
    leaf_cache: Vec<NodeId>,
    next_id: u64,
}

impl MergeTree {
    /// Builds a tree from `(id, value, parent)` records and validates it.
    pub fn from_records<I>(records: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = (u64, ScalarValue, Option<u64>)>,
    {
        let mut nodes: BTreeMap<NodeId, MergeNode> = BTreeMap::new();
        let mut next_id = 0u64;
        for (id, value, parent) in records {
            let id = NodeId(id);
            let node = MergeNode { id, value, parent: parent.map(NodeId), children: Vec::new() };
            if nodes.insert(id, node).is_some() {
                return Err(TreeError::DuplicateNode(id));
            }
            next_id = next_id.max(id.0 + 1);
        }

        // Link children from the parent pointers (deterministic: id order).
        let ids: Vec<NodeId> = nodes.keys().copied().collect();
        let mut root = None;
        for &id in &ids {
            match nodes[&id].parent {
                Some(p) => {
                    nodes.get_mut(&p).ok_or(TreeError::OrphanNode(id))?.children.push(id);
                }
                None => {
                    if root.is_none() {
                        root = Some(id);
                    }
                }
            }
        }
        let root = root.ok_or(TreeError::NoRoot)?;
        let mut tree = MergeTree { nodes, root, leaf_cache: Vec::new(), next_id };
        tree.sort_children();
        tree.rebuild_leaf_cache();
        tree.validate()?;
        Ok(tree)
    }

    /// Test-friendly constructor taking value literals.
    ///
    /// # Panics
    /// Panics if a value literal does not parse; use [`MergeTree::from_records`]
    /// for untrusted input.
    pub fn from_literals(records: &[(u64, &str, Option<u64>)]) -> Result<Self, TreeError> {
        Self::from_records(records.iter().map(|(id, value, parent)| {
            let value: ScalarValue = value.parse().unwrap_or_else(|e| panic!("bad literal {value:?}: {e}"));
            (*id, value, *parent)
        }))
    }

    fn sort_children(&mut self) {
        let ids: Vec<NodeId> = self.nodes.keys().copied().collect();
        for id in ids {
            let mut children = std::mem::take(&mut self.nodes.get_mut(&id).unwrap().children);
            children.sort_by(|a, b| {
                (&self.nodes[a].value, a).cmp(&(&self.nodes[b].value, b))
            });
            self.nodes.get_mut(&id).unwrap().children = children;
        }
    }

    fn rebuild_leaf_cache(&mut self) {
        let mut leaves: Vec<NodeId> =
            self.nodes.values().filter(|n| n.is_leaf()).map(|n| n.id).collect();
        leaves.sort_by(|a, b| (&self.nodes[a].value, a).cmp(&(&self.nodes[b].value, b)));
        self.leaf_cache = leaves;
    }

    /// Re-checks every structural invariant, reporting the first violation
    /// in a deterministic (id-ordered) sweep.
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.nodes.is_empty() {
            return Err(TreeError::NoRoot);
        }
        // Parent pointers must resolve.
        for node in self.nodes.values() {
            if let Some(p) = node.parent {
                if !self.nodes.contains_key(&p) {
                    return Err(TreeError::OrphanNode(node.id));
                }
            }
        }
        // Parent chains must terminate (no cycles). Parents all resolve, so a
        // chain either reaches a parentless node or revisits one.
        for node in self.nodes.values() {
            let mut seen = HashSet::new();
            let mut cur = node.id;
            while let Some(p) = self.nodes[&cur].parent {
                if !seen.insert(cur) {
                    return Err(TreeError::CycleDetected(node.id));
                }
                cur = p;
            }
        }
        // Exactly one root, and it is the recorded one.
        let mut roots = self.nodes.values().filter(|n| n.parent.is_none()).map(|n| n.id);
        let first = roots.next().ok_or(TreeError::NoRoot)?;
        if let Some(second) = roots.next() {
            return Err(TreeError::MultipleRoots { first, second });
        }
        if first != self.root {
            return Err(TreeError::InconsistentLinks(self.root));
        }
        // Strict monotonicity along every edge.
        for node in self.nodes.values() {
            if let Some(p) = node.parent {
                if node.value >= self.nodes[&p].value {
                    return Err(TreeError::NonIncreasingEdge { child: node.id, parent: p });
                }
            }
        }
        // Children lists mirror the parent pointers, without duplicates,
        // sorted by (value, id).
        for node in self.nodes.values() {
            let mut prev: Option<NodeId> = None;
            for &c in &node.children {
                let child = self.nodes.get(&c).ok_or(TreeError::InconsistentLinks(node.id))?;
                if child.parent != Some(node.id) {
                    return Err(TreeError::InconsistentLinks(node.id));
                }
                if let Some(p) = prev {
                    if (&self.nodes[&p].value, p) >= (&child.value, c) {
                        return Err(TreeError::InconsistentLinks(node.id));
                    }
                }
                prev = Some(c);
            }
            if node.parent.is_some_and(|p| !self.nodes[&p].children.contains(&node.id)) {
                return Err(TreeError::InconsistentLinks(node.id));
            }
        }
        // Leaf cache is exactly the childless nodes in (value, id) order.
        let mut expected: Vec<NodeId> =
            self.nodes.values().filter(|n| n.is_leaf()).map(|n| n.id).collect();
        expected.sort_by(|a, b| (&self.nodes[a].value, a).cmp(&(&self.nodes[b].value, b)));
        if expected != self.leaf_cache {
            return Err(TreeError::InconsistentLinks(self.root));
        }
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Result<&MergeNode, TreeError> {
        self.nodes.get(&id).ok_or(TreeError::UnknownNode(id))
    }

    /// Value of a node known to exist.
    ///
    /// # Panics
    /// Panics on an id foreign to this tree; use [`MergeTree::node`] when the
    /// id comes from untrusted input.
    pub fn value(&self, id: NodeId) -> &ScalarValue {
        &self.nodes.get(&id).unwrap_or_else(|| panic!("node {id} not in tree")).value
    }

    /// Nodes in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &MergeNode> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    /// All childless nodes, sorted by (value, id) ascending.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaf_cache
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_cache.len()
    }

    /// The leaf with the smallest (value, id).
    pub fn min_leaf(&self) -> NodeId {
        self.leaf_cache[0]
    }

    /// `[u, parent(u), ..., root]`, values strictly increasing.
    pub fn node_to_root_path(&self, u: NodeId) -> Result<NodePath, TreeError> {
        self.node(u)?;
        let mut nodes = vec![u];
        let mut cur = u;
        while let Some(p) = self.nodes[&cur].parent {
            nodes.push(p);
            cur = p;
        }
        Ok(NodePath::new(nodes))
    }

    /// Least common ancestor by the root-aligned path walk: both root-to-node
    /// paths share a prefix, and the deepest shared entry is the LCA.
    pub fn find_lca(&self, u: NodeId, v: NodeId) -> Result<NodeId, TreeError> {
        let pu = self.node_to_root_path(u)?;
        let pv = self.node_to_root_path(v)?;
        let mut lca = None;
        for (a, b) in pu.nodes().iter().rev().zip(pv.nodes().iter().rev()) {
            if a == b {
                lca = Some(*a);
            } else {
                break;
            }
        }
        // Both paths end at the same root, so the prefix is never empty.
        Ok(lca.expect("paths share at least the root"))
    }

    /// The unique point at `target` on the u-to-root path: a node when one
    /// sits exactly there, otherwise a locus strictly inside an edge.
    pub fn ancestor_at_value(
        &self,
        u: NodeId,
        target: &ScalarValue,
    ) -> Result<AncestorLocus, TreeError> {
        let node = self.node(u)?;
        if *target < node.value {
            return Err(TreeError::TargetOutOfRange { node: u, value: target.clone() });
        }
        let mut below = u;
        loop {
            let cur = &self.nodes[&below];
            if cur.value == *target {
                return Ok(AncestorLocus::Node(below));
            }
            match cur.parent {
                None => {
                    return Err(TreeError::TargetOutOfRange { node: u, value: target.clone() })
                }
                Some(p) => {
                    if *target < self.nodes[&p].value {
                        return Ok(AncestorLocus::Edge {
                            child: below,
                            parent: p,
                            value: target.clone(),
                        });
                    }
                    below = p;
                }
            }
        }
    }

    /// Splits the edge above `child` with a fresh degree-two node at `value`.
    /// Preserves the leaf set and every pre-existing LCA.
    pub fn insert_node_on_edge(
        &mut self,
        child: NodeId,
        value: ScalarValue,
    ) -> Result<NodeId, TreeError> {
        let child_node = self.node(child)?;
        let parent = child_node.parent.ok_or_else(|| TreeError::ValueNotInteriorToEdge {
            child,
            value: value.clone(),
        })?;
        if value <= child_node.value || value >= self.nodes[&parent].value {
            return Err(TreeError::ValueNotInteriorToEdge { child, value });
        }
        let z = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.insert(
            z,
            MergeNode { id: z, value, parent: Some(parent), children: vec![child] },
        );
        self.nodes.get_mut(&child).unwrap().parent = Some(z);
        let siblings = &mut self.nodes.get_mut(&parent).unwrap().children;
        let slot = siblings.iter().position(|&c| c == child).expect("child linked to parent");
        siblings[slot] = z;
        // The replacement may land out of (value, id) order among siblings.
        let mut siblings = std::mem::take(&mut self.nodes.get_mut(&parent).unwrap().children);
        siblings.sort_by(|a, b| (&self.nodes[a].value, a).cmp(&(&self.nodes[b].value, b)));
        self.nodes.get_mut(&parent).unwrap().children = siblings;
        debug_assert!(self.validate().is_ok());
        Ok(z)
    }

    /// Canonical encoding of the tree as a value-labeled shape, independent
    /// of node ids and child order. Two trees are isomorphic as value-labeled
    /// trees iff their canonical forms are equal.
    pub fn canonical_form(&self) -> String {
        fn encode(tree: &MergeTree, id: NodeId) -> String {
            let node = &tree.nodes[&id];
            let mut parts: Vec<String> =
                node.children.iter().map(|&c| encode(tree, c)).collect();
            parts.sort();
            format!("{}[{}]", node.value, parts.join(","))
        }
        encode(self, self.root)
    }

    /// Mounts a fresh root above the current one at `value`. The old root
    /// keeps its id; leaves are unchanged (a single-node tree stays a leaf).
    pub fn attach_root(&mut self, value: ScalarValue) -> Result<NodeId, TreeError> {
        if value <= self.nodes[&self.root].value {
            return Err(TreeError::RootNotAbove { value });
        }
        let new_root = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.insert(
            new_root,
            MergeNode { id: new_root, value, parent: None, children: vec![self.root] },
        );
        self.nodes.get_mut(&self.root).unwrap().parent = Some(new_root);
        self.root = new_root;
        debug_assert!(self.validate().is_ok());
        Ok(new_root)
    }
}

/// A node-to-root path with O(1) membership and step lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePath {
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
}

impl NodePath {
    fn new(nodes: Vec<NodeId>) -> Self {
        let index = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        NodePath { nodes, index }
    }

    /// The node the path starts from.
    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    /// The root (last entry).
    pub fn root(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a path always contains at least its start node
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn get(&self, i: usize) -> Option<NodeId> {
        self.nodes.get(i).copied()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// The next node toward the root, if `id` is on the path and not its end.
    pub fn parent_of(&self, id: NodeId) -> Option<NodeId> {
        self.position(id).and_then(|i| self.nodes.get(i + 1).copied())
    }

    /// The previous node away from the root, if `id` is on the path and not its start.
    pub fn child_of(&self, id: NodeId) -> Option<NodeId> {
        let i = self.position(id)?;
        if i == 0 {
            None
        } else {
            Some(self.nodes[i - 1])
        }
    }
}

/// A point on a node-to-root path: either a node or a locus strictly inside
/// an edge. This is the codomain of ancestor (shift) queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AncestorLocus {
    Node(NodeId),
    Edge { child: NodeId, parent: NodeId, value: ScalarValue },
}
