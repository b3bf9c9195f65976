//! The finite candidate set the distance search runs over.
//!
//! The interleaving distance of two merge trees is always realized at one of
//! finitely many values: a cross-tree node-value difference, or half a
//! within-tree node-value difference. Collecting all of them (deduplicated,
//! sorted) gives the list the binary search walks.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::ScalarValue;
use crate::tree::MergeTree;

/// A non-negative shift value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epsilon(ScalarValue);

/// Rejected construction of an [`Epsilon`] from a negative value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("epsilon must be non-negative, got {0}")]
pub struct NegativeEpsilon(pub ScalarValue);

impl Epsilon {
    pub fn new(value: ScalarValue) -> Result<Self, NegativeEpsilon> {
        if value.is_negative() {
            return Err(NegativeEpsilon(value));
        }
        Ok(Epsilon(value))
    }

    pub fn zero() -> Self {
        Epsilon(ScalarValue::zero())
    }

    pub fn value(&self) -> &ScalarValue {
        &self.0
    }

    /// 2ε, the gap bound used by the ancestor conditions.
    pub fn doubled(&self) -> ScalarValue {
        self.0.double()
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Strictly ascending, deduplicated candidate shifts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateList(Vec<Epsilon>);

impl CandidateList {
    fn from_set(set: BTreeSet<ScalarValue>) -> Self {
        CandidateList(set.into_iter().map(Epsilon).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Epsilon] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Epsilon> {
        self.0.iter()
    }

    /// The largest candidate; the trees are always interleaved there.
    pub fn max(&self) -> &Epsilon {
        self.0.last().expect("candidate list of non-empty trees is non-empty")
    }
}

/// All values the interleaving distance can take for this pair of trees:
/// `{ |f(u) − g(v)| }` over cross-tree node pairs, plus `{ |f(u) − f(u')|/2 }`
/// and `{ |g(v) − g(v')|/2 }` over distinct within-tree pairs.
pub fn generate_candidates(mf: &MergeTree, mg: &MergeTree) -> CandidateList {
    let f_values: Vec<&ScalarValue> = mf.iter().map(|n| &n.value).collect();
    let g_values: Vec<&ScalarValue> = mg.iter().map(|n| &n.value).collect();

    let mut set = BTreeSet::new();
    for f in &f_values {
        for g in &g_values {
            set.insert(f.abs_diff(g));
        }
    }
    for (i, a) in f_values.iter().enumerate() {
        for b in &f_values[i + 1..] {
            set.insert(a.abs_diff(b).half());
        }
    }
    for (i, a) in g_values.iter().enumerate() {
        for b in &g_values[i + 1..] {
            set.insert(a.abs_diff(b).half());
        }
    }

    let nf = f_values.len();
    let ng = g_values.len();
    debug_assert!(set.len() <= nf * ng + nf * (nf - 1) / 2 + ng * (ng - 1) / 2);
    CandidateList::from_set(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::MergeTree;

    fn strings(list: &CandidateList) -> Vec<String> {
        list.iter().map(|e| e.to_string()).collect()
    }

    #[test]
    fn epsilon_rejects_negative_values() {
        assert!(Epsilon::new("-1".parse().unwrap()).is_err());
        assert_eq!(Epsilon::new("0".parse().unwrap()).unwrap(), Epsilon::zero());
    }

    #[test]
    fn identical_one_node_trees_give_only_zero() {
        let t = MergeTree::from_literals(&[(0, "5", None)]).unwrap();
        let pi = generate_candidates(&t, &t);
        assert_eq!(strings(&pi), ["0"]);
    }

    #[test]
    fn three_by_two_tree_pair_gives_four_candidates() {
        // Node values {0, 2, 4} against {1, 5}: cross differences {1, 3, 5},
        // halved within-tree differences {1, 2} and {2}.
        let mf =
            MergeTree::from_literals(&[(0, "0", Some(2)), (1, "2", Some(2)), (2, "4", None)])
                .unwrap();
        let mg = MergeTree::from_literals(&[(0, "1", Some(1)), (1, "5", None)]).unwrap();
        let pi = generate_candidates(&mf, &mg);
        assert_eq!(strings(&pi), ["1", "2", "3", "5"]);
        assert_eq!(pi.max().to_string(), "5");
    }

    #[test]
    fn shared_node_value_puts_zero_in_the_list() {
        let mf = MergeTree::from_literals(&[(0, "0", Some(1)), (1, "3", None)]).unwrap();
        let mg = MergeTree::from_literals(&[(0, "3", Some(1)), (1, "7", None)]).unwrap();
        let pi = generate_candidates(&mf, &mg);
        assert_eq!(strings(&pi)[0], "0");
    }

    #[test]
    fn halved_differences_are_exact() {
        let mf = MergeTree::from_literals(&[(0, "0", Some(1)), (1, "1", None)]).unwrap();
        let mg = MergeTree::from_literals(&[(0, "0", Some(1)), (1, "4", None)]).unwrap();
        // Within-f half: 1/2; within-g half: 2; cross: 0, 1, 3, 4.
        let pi = generate_candidates(&mf, &mg);
        assert_eq!(strings(&pi), ["0", "1/2", "1", "2", "3", "4"]);
    }
}
