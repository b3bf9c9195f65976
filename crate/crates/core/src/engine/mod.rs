//! The distance engine: an exact decision procedure for ε-interleaving,
//! wrapped in a binary search over the finite candidate set.
//!
//! A single ε-query runs this pipeline:
//!
//! 1. pick the mapping direction with the smaller assignment space;
//! 2. extend the shorter tree so the roots sit exactly ε apart;
//! 3. augment both trees with each other's ε-shifted levels;
//! 4. tabulate LCA and 2ε-pair facts for every source leaf pair;
//! 5. enumerate leaf assignments (refined by default), gluing each into a
//!    total map and checking ε-goodness, until a witness appears or the
//!    space (or budget) runs out.
//!
//! The distance is the least candidate value whose query succeeds.

mod augment;
mod candidates;
mod maps;
mod search;
mod tables;

use thiserror::Error;

pub use augment::{augment, extend_trees, AugmentedPair};
pub use candidates::{generate_candidates, CandidateList, Epsilon, NegativeEpsilon};
pub use maps::{
    construct_map, extend_assignment, is_eps_good, refined_target_nodes, target_nodes,
    LeafAssignment, PathMap, TreeMap,
};
pub use search::{
    choose_direction, compute_interleaving_distance, is_eps_interleaved, Direction,
    DistanceReport, InterleaveResult, ProbeRecord, ReportDocument, SearchConfig, Witness,
    WitnessDocument, WitnessEntry, WitnessNode, DOCUMENT_SCHEMA_VERSION,
};
pub use tables::{build_pair_tables, PairTables, TwoEpsilonPair};

/// Failures the engine can hit while answering a query.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    /// A leaf-to-root path and its target path disagree in length. The
    /// augmentation step makes this impossible, so seeing it means the
    /// engine itself is broken, not the input.
    #[error(
        "paths of unequal length ({source_len} vs {target_len}) cannot be zipped; \
         this indicates a broken augmentation"
    )]
    PathLengthMismatch { source_len: usize, target_len: usize },
    /// The assignment space outgrew the configured budget before a verdict
    /// was reached. Raise `max_maps` or enable refinement.
    #[error(
        "enumeration budget of {budget} assignments exhausted after testing {enumerated}; \
         the query is undecided"
    )]
    SearchBudgetExceeded { enumerated: u64, budget: u64 },
}
