//! Direction choice, assignment enumeration, and the binary-search driver.
//!
//! One ε-query runs the whole pipeline: pick the cheaper mapping direction,
//! extend and augment the pair, tabulate leaf-pair facts, then enumerate
//! leaf assignments (optionally refined) until an ε-good map appears. The
//! distance itself is the least candidate value whose query succeeds, found
//! by binary search; query monotonicity in ε makes that search valid.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::augment::{augment, extend_trees, AugmentedPair};
use crate::engine::candidates::{generate_candidates, Epsilon};
use crate::engine::maps::{
    construct_map, is_eps_good, refined_target_nodes, target_nodes, LeafAssignment, TreeMap,
};
use crate::engine::tables::{build_pair_tables, PairTables};
use crate::engine::EngineError;
use crate::scalar::ScalarValue;
use crate::tree::{MergeTree, NodeId};

/// Version stamp embedded in every exported witness and report document.
pub const DOCUMENT_SCHEMA_VERSION: u32 = 1;

/// Which tree plays the source role during map enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "f-to-g")]
    FToG,
    #[serde(rename = "g-to-f")]
    GToF,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::FToG => f.write_str("f-to-g"),
            Direction::GToF => f.write_str("g-to-f"),
        }
    }
}

/// Maps from the first tree iff that direction enumerates no more raw
/// assignments than the other: η_g^η_f ≤ η_f^η_g, compared with exact big
/// integers. Ties map from the first tree.
pub fn choose_direction(mf: &MergeTree, mg: &MergeTree) -> Direction {
    let eta_f: u32 = mf.leaf_count().try_into().expect("leaf count fits in u32");
    let eta_g: u32 = mg.leaf_count().try_into().expect("leaf count fits in u32");
    let forward = BigUint::from(eta_g).pow(eta_f);
    let backward = BigUint::from(eta_f).pow(eta_g);
    if forward <= backward {
        Direction::FToG
    } else {
        Direction::GToF
    }
}

/// Knobs for one ε-query or a whole distance computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Prune per-leaf target lists by pairwise compatibility before
    /// enumerating. Never changes a verdict, only the work done.
    pub refinement: bool,
    /// Hard cap on assignments tested per ε-query; exceeding it is an error,
    /// never a silent "not interleaved".
    pub max_maps: u64,
    /// Spread assignment testing across threads. Verdicts and distances are
    /// unaffected; the reported witness may be any valid one.
    pub parallel: bool,
    /// Force sequential enumeration so the witness is the lexicographically
    /// first good assignment, byte-for-byte reproducible.
    pub deterministic_witness: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            refinement: true,
            max_maps: 10_000_000,
            parallel: false,
            deterministic_witness: false,
        }
    }
}

/// A positive ε-query answer: the assignment and glued map that prove it,
/// together with the augmented pair they live in.
#[derive(Debug, Clone)]
pub struct Witness {
    pub direction: Direction,
    pub epsilon: Epsilon,
    pub assignment: LeafAssignment,
    pub map: TreeMap,
    pub aug: AugmentedPair,
}

/// One endpoint of an exported witness entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessNode {
    pub id: u64,
    pub value: ScalarValue,
    /// Id of the corresponding node in the caller's input tree; `None` for
    /// nodes minted by extension or augmentation.
    pub origin: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub from: WitnessNode,
    pub to: WitnessNode,
}

/// Serializable form of a witness: the leaf assignment and the full node
/// map, every node carrying its exact value and its input-tree origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub schema_version: u32,
    pub direction: Direction,
    pub epsilon: ScalarValue,
    pub leaf_assignment: Vec<WitnessEntry>,
    pub node_map: Vec<WitnessEntry>,
}

impl Witness {
    fn entry(&self, source: NodeId, target: NodeId) -> WitnessEntry {
        WitnessEntry {
            from: WitnessNode {
                id: source.0,
                value: self.aug.aug_f.value(source).clone(),
                origin: self.aug.origin_of_f(source).map(|id| id.0),
            },
            to: WitnessNode {
                id: target.0,
                value: self.aug.aug_g.value(target).clone(),
                origin: self.aug.origin_of_g(target).map(|id| id.0),
            },
        }
    }

    pub fn to_document(&self) -> WitnessDocument {
        WitnessDocument {
            schema_version: DOCUMENT_SCHEMA_VERSION,
            direction: self.direction,
            epsilon: self.epsilon.value().clone(),
            leaf_assignment: self
                .assignment
                .entries()
                .iter()
                .map(|&(l, t)| self.entry(l, t))
                .collect(),
            node_map: self.map.iter().map(|(n, i)| self.entry(n, i)).collect(),
        }
    }

    /// Canonical JSON bytes of the document; identical witnesses serialize
    /// identically.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(&self.to_document())
            .expect("witness documents always serialize");
        bytes.push(b'\n');
        bytes
    }
}

/// Outcome of a single ε-query.
#[derive(Debug, Clone)]
pub struct InterleaveResult {
    pub interleaved: bool,
    /// Present exactly when `interleaved` is true.
    pub witness: Option<Witness>,
    /// Assignments actually tested before concluding.
    pub maps_enumerated: u64,
    /// Per-leaf target-list sizes in leaf order (refined sizes when
    /// refinement is on); empty when an early exit fired before any list
    /// was built.
    pub refined_target_sizes: Vec<usize>,
}

/// One binary-search probe, kept for the report trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub epsilon: Epsilon,
    pub interleaved: bool,
    pub maps_enumerated: u64,
    pub refined_target_sizes: Vec<usize>,
}

/// Full account of one distance computation.
#[derive(Debug, Clone)]
pub struct DistanceReport {
    pub epsilon_star: Epsilon,
    pub candidate_count: usize,
    pub trace: Vec<ProbeRecord>,
    pub witness: Witness,
    pub total_maps_enumerated: u64,
    pub wall_time_ms: u64,
}

/// Serializable form of a [`DistanceReport`]. The decimal field is a lossy
/// convenience rendering; the exact value is `epsilon_star`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub epsilon_star: ScalarValue,
    pub epsilon_star_decimal_approx: f64,
    pub candidate_count: usize,
    pub trace: Vec<ProbeRecord>,
    pub witness: WitnessDocument,
    pub total_maps_enumerated: u64,
    pub wall_time_ms: u64,
}

impl DistanceReport {
    pub fn to_document(&self) -> ReportDocument {
        ReportDocument {
            schema_version: DOCUMENT_SCHEMA_VERSION,
            epsilon_star: self.epsilon_star.value().clone(),
            epsilon_star_decimal_approx: self.epsilon_star.value().to_f64_lossy(),
            candidate_count: self.candidate_count,
            trace: self.trace.clone(),
            witness: self.witness.to_document(),
            total_maps_enumerated: self.total_maps_enumerated,
            wall_time_ms: self.wall_time_ms,
        }
    }
}

/// Decodes the mixed-radix index `idx` into one leaf assignment. Index 0 is
/// every leaf's first target; the last leaf's pick advances fastest, so
/// ascending indices walk assignments in lexicographic order.
fn assignment_at(leaves: &[NodeId], lists: &[Vec<NodeId>], mut idx: u128) -> LeafAssignment {
    let mut picks = vec![NodeId(0); leaves.len()];
    for i in (0..leaves.len()).rev() {
        let len = lists[i].len() as u128;
        picks[i] = lists[i][(idx % len) as usize];
        idx /= len;
    }
    debug_assert_eq!(idx, 0, "index within the assignment space");
    LeafAssignment::new(leaves.iter().copied().zip(picks).collect())
}

fn tuple_is_good(
    leaves: &[NodeId],
    lists: &[Vec<NodeId>],
    idx: u128,
    aug: &AugmentedPair,
    tables: &PairTables,
    eps: &Epsilon,
) -> bool {
    let assignment = assignment_at(leaves, lists, idx);
    match construct_map(&assignment, aug, tables) {
        Some(map) => is_eps_good(&map, aug, tables, eps),
        None => false,
    }
}

fn sequential_scan(
    leaves: &[NodeId],
    lists: &[Vec<NodeId>],
    aug: &AugmentedPair,
    tables: &PairTables,
    eps: &Epsilon,
    limit: u128,
) -> (Option<u128>, u64) {
    let mut tested: u64 = 0;
    for idx in 0..limit {
        tested += 1;
        if tuple_is_good(leaves, lists, idx, aug, tables, eps) {
            return (Some(idx), tested);
        }
    }
    (None, tested)
}

fn parallel_scan(
    leaves: &[NodeId],
    lists: &[Vec<NodeId>],
    aug: &AugmentedPair,
    tables: &PairTables,
    eps: &Epsilon,
    limit: u128,
) -> (Option<u128>, u64) {
    const CHUNK: u128 = 4096;
    let tested = AtomicU64::new(0);
    let mut found: Option<u128> = None;
    let mut start: u128 = 0;
    while start < limit && found.is_none() {
        let end = limit.min(start + CHUNK);
        let chunk: Vec<u128> = (start..end).collect();
        found = chunk
            .par_iter()
            .filter_map(|&idx| {
                tested.fetch_add(1, Ordering::Relaxed);
                tuple_is_good(leaves, lists, idx, aug, tables, eps).then_some(idx)
            })
            .min();
        start = end;
    }
    (found, tested.load(Ordering::Relaxed))
}

/// Decides whether the two trees are ε-interleaved.
///
/// Early exits: a target-tree minimum more than ε above the source-tree
/// minimum is unreachable, and an empty (refined) target list for any leaf
/// proves no ε-good map exists. Otherwise assignments are enumerated in
/// lexicographic order (leaves by (value, id), targets by id) up to
/// `cfg.max_maps`; running out of budget with assignments still untested is
/// an error, distinct from a negative verdict.
pub fn is_eps_interleaved(
    mf: &MergeTree,
    mg: &MergeTree,
    eps: &Epsilon,
    cfg: &SearchConfig,
) -> Result<InterleaveResult, EngineError> {
    assert!(cfg.max_maps >= 1, "enumeration budget must admit at least one map");
    let direction = choose_direction(mf, mg);
    let (source, target) = match direction {
        Direction::FToG => (mf, mg),
        Direction::GToF => (mg, mf),
    };

    let min_gap = target.value(target.min_leaf()) - source.value(source.min_leaf());
    if &min_gap > eps.value() {
        return Ok(InterleaveResult {
            interleaved: false,
            witness: None,
            maps_enumerated: 0,
            refined_target_sizes: Vec::new(),
        });
    }

    let (extended_source, extended_target) = extend_trees(source, target, eps);
    let mut aug = augment(&extended_source, &extended_target, eps);
    aug.clip_origins(source, target);
    debug_assert_eq!(aug.verify_level_correspondence(), Ok(()));
    let tables = build_pair_tables(&aug, eps);

    let leaves: Vec<NodeId> = aug.aug_f.leaves().to_vec();
    let mut lists: Vec<Vec<NodeId>> = Vec::with_capacity(leaves.len());
    let mut sizes: Vec<usize> = Vec::with_capacity(leaves.len());
    for &leaf in &leaves {
        let list = if cfg.refinement {
            refined_target_nodes(leaf, &aug, &tables, eps)
        } else {
            let level = aug.aug_f.value(leaf) + eps.value();
            target_nodes(&aug, &level)
        };
        sizes.push(list.len());
        if list.is_empty() {
            return Ok(InterleaveResult {
                interleaved: false,
                witness: None,
                maps_enumerated: 0,
                refined_target_sizes: sizes,
            });
        }
        lists.push(list);
    }

    let total: u128 = lists.iter().map(|l| l.len() as u128).product();
    let limit = total.min(cfg.max_maps as u128);
    let (found, enumerated) = if cfg.parallel && !cfg.deterministic_witness {
        parallel_scan(&leaves, &lists, &aug, &tables, eps, limit)
    } else {
        sequential_scan(&leaves, &lists, &aug, &tables, eps, limit)
    };

    if let Some(idx) = found {
        let assignment = assignment_at(&leaves, &lists, idx);
        let map = construct_map(&assignment, &aug, &tables)
            .expect("a witness assignment glues again on reconstruction");
        return Ok(InterleaveResult {
            interleaved: true,
            witness: Some(Witness {
                direction,
                epsilon: eps.clone(),
                assignment,
                map,
                aug,
            }),
            maps_enumerated: enumerated,
            refined_target_sizes: sizes,
        });
    }
    if total > cfg.max_maps as u128 {
        return Err(EngineError::SearchBudgetExceeded {
            enumerated,
            budget: cfg.max_maps,
        });
    }
    Ok(InterleaveResult {
        interleaved: false,
        witness: None,
        maps_enumerated: enumerated,
        refined_target_sizes: sizes,
    })
}

/// Binary-searches the candidate list for the least ε at which the trees are
/// interleaved and reports it with the witness found there. The largest
/// candidate always interleaves, so the search cannot come back empty unless
/// the engine itself is broken.
pub fn compute_interleaving_distance(
    mf: &MergeTree,
    mg: &MergeTree,
    cfg: &SearchConfig,
) -> Result<DistanceReport, EngineError> {
    let started = Instant::now();
    let candidates = generate_candidates(mf, mg);
    let slice = candidates.as_slice();

    let mut trace = Vec::new();
    let mut total_maps: u64 = 0;
    let mut best: Option<(Epsilon, Witness)> = None;
    let mut lo = 0usize;
    let mut hi = slice.len();
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let eps = &slice[mid];
        let result = is_eps_interleaved(mf, mg, eps, cfg)?;
        total_maps += result.maps_enumerated;
        trace.push(ProbeRecord {
            epsilon: eps.clone(),
            interleaved: result.interleaved,
            maps_enumerated: result.maps_enumerated,
            refined_target_sizes: result.refined_target_sizes,
        });
        if result.interleaved {
            let witness = result
                .witness
                .expect("a positive verdict carries its witness");
            best = Some((eps.clone(), witness));
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }

    let (epsilon_star, witness) =
        best.expect("the largest candidate interleaves any pair; a miss is an engine bug");
    Ok(DistanceReport {
        epsilon_star,
        candidate_count: slice.len(),
        trace,
        witness,
        total_maps_enumerated: total_maps,
        wall_time_ms: u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX),
    })
}
