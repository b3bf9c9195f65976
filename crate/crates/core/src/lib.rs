//! Exact interleaving distance between merge trees.
//!
//! A merge tree records how the connected components of sublevel sets of a
//! scalar function appear and join as the threshold grows: leaves are local
//! minima, internal nodes are saddles where components merge, and the root
//! carries the global maximum. The interleaving distance compares two such
//! trees by the smallest shift `eps` that admits a structure-preserving map
//! between them.
//!
//! Deciding that distance is NP-hard in general; this crate implements the
//! fixed-parameter route that is exponential only in the leaf counts of the
//! two trees. Everything is computed in exact rational arithmetic, so all
//! level comparisons and the reported distance are exact.
//!
//! Crate layout:
//! - [`scalar`]: exact rational values parsed from decimal or `p/q` literals.
//! - [`tree`]: the merge-tree model (nodes, validation, paths, ancestors).
//! - [`ingest`]: 1-D scalar series to merge tree, plus the on-disk tree format.
//! - [`engine`]: the leaf-parameterized decision procedure and distance search.
//! - [`oracle`]: an independent brute-force checker for small instances.

pub mod engine;
pub mod ingest;
pub mod oracle;
pub mod scalar;
pub mod tree;

pub use engine::{
    compute_interleaving_distance, generate_candidates, is_eps_interleaved, Direction,
    DistanceReport, EngineError, Epsilon, InterleaveResult, SearchConfig,
};
pub use ingest::{
    merge_tree_of_series, parse_series_csv, parse_tree_document, write_tree_document, IngestError,
    ScalarSeries, TreeDocument,
};
pub use oracle::{oracle_distance, OracleError, OracleReport};
pub use scalar::{ScalarParseError, ScalarValue};
pub use tree::{AncestorLocus, MergeNode, MergeTree, NodeId, NodePath, TreeError};
