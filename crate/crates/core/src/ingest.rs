//! Build merge trees from 1-D scalar series and read/write the tree format.
//!
//! A scalar series is a piecewise-linear function given by samples at
//! strictly increasing positions. Its merge tree is computed by sweeping the
//! samples in ascending value with a union-find over index adjacency: strict
//! local minima birth components (leaves), interior local maxima join them
//! (merge nodes), and the global maximum closes the root. Degree-two chain
//! samples never become nodes.
//!
//! The on-disk tree format is line-oriented UTF-8: one record per line,
//! `id<TAB>value<TAB>parent-or-"-"`, with `#` comment lines. Values are exact
//! decimal (`2.5`) or rational (`5/2`) literals. The writer is canonical:
//! records sorted by id, `\n` endings, no trailing whitespace.

use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::ScalarValue;
use crate::tree::{MergeTree, NodeId, TreeError};

/// Current tree-document format version, written as `# mergetree v1`.
const FORMAT_VERSION: u32 = 1;

/// Why a series or tree document was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("series is empty")]
    EmptySeries,
    #[error("series positions must strictly increase (violated at sample {index})")]
    NonIncreasingPosition { index: usize },
    #[error("adjacent samples {index} and {} share the value {value}", .index + 1)]
    EqualAdjacentValues { index: usize, value: ScalarValue },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: duplicate node id {id}")]
    DuplicateId { line: usize, id: NodeId },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

fn syntax(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Syntax { line, reason: reason.into() }
}

/// Samples of a piecewise-linear function at strictly increasing positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarSeries {
    samples: Vec<(ScalarValue, ScalarValue)>,
}

impl ScalarSeries {
    /// Builds a series from `(position, value)` pairs.
    pub fn new(samples: Vec<(ScalarValue, ScalarValue)>) -> Result<Self, IngestError> {
        if samples.is_empty() {
            return Err(IngestError::EmptySeries);
        }
        for i in 1..samples.len() {
            if samples[i].0 <= samples[i - 1].0 {
                return Err(IngestError::NonIncreasingPosition { index: i });
            }
        }
        Ok(ScalarSeries { samples })
    }

    /// Convenience: values at integer positions 0, 1, 2, ...
    pub fn from_values(values: Vec<ScalarValue>) -> Result<Self, IngestError> {
        Self::new(
            values
                .into_iter()
                .enumerate()
                .map(|(i, v)| (ScalarValue::from_integer(i as i64), v))
                .collect(),
        )
    }

    /// Test-friendly variant of [`ScalarSeries::from_values`] taking literals.
    ///
    /// # Panics
    /// Panics if a literal does not parse.
    pub fn from_value_literals(values: &[&str]) -> Result<Self, IngestError> {
        Self::from_values(values.iter().map(|s| s.parse().unwrap()).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty sample lists
    }

    pub fn samples(&self) -> &[(ScalarValue, ScalarValue)] {
        &self.samples
    }

    pub fn values(&self) -> impl Iterator<Item = &ScalarValue> {
        self.samples.iter().map(|(_, v)| v)
    }

    /// The series with positions mirrored (same values, reversed order).
    pub fn reversed(&self) -> ScalarSeries {
        ScalarSeries {
            samples: self
                .samples
                .iter()
                .rev()
                .enumerate()
                .map(|(i, (_, v))| (ScalarValue::from_integer(i as i64), v.clone()))
                .collect(),
        }
    }
}

/// Reads a series from CSV with the exact header `position,value`.
pub fn parse_series_csv(bytes: &[u8]) -> Result<ScalarSeries, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers().map_err(|e| syntax(1, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["position", "value"] {
        return Err(syntax(1, "expected header \"position,value\""));
    }
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = record.map_err(|e| syntax(line, e.to_string()))?;
        if record.len() != 2 {
            return Err(syntax(line, format!("expected 2 fields, found {}", record.len())));
        }
        let position: ScalarValue =
            record[0].parse().map_err(|e| syntax(line, format!("position: {e}")))?;
        let value: ScalarValue =
            record[1].parse().map_err(|e| syntax(line, format!("value: {e}")))?;
        samples.push((position, value));
    }
    ScalarSeries::new(samples)
}

/// Scratch node used while sweeping a series.
struct Draft {
    value: ScalarValue,
    parent: Option<usize>,
    children: Vec<usize>,
    alive: bool,
}

/// Merge tree of the piecewise-linear interpolation of `series`.
///
/// Ascending-value sweep with union-find over index adjacency: a sample with
/// no processed neighbor is a strict local minimum and births a leaf; a
/// sample with two processed neighbors joins two components and becomes a
/// merge node over their representatives; everything else extends a
/// component without creating a node. If the joining value equals an
/// existing representative's value (a multi-way merge of the underlying
/// function), the other component attaches to that node instead of stacking
/// an equal-value parent. The global maximum closes the root.
pub fn merge_tree_of_series(series: &ScalarSeries) -> Result<MergeTree, IngestError> {
    let values: Vec<&ScalarValue> = series.values().collect();
    let m = values.len();
    for i in 0..m.saturating_sub(1) {
        if values[i] == values[i + 1] {
            return Err(IngestError::EqualAdjacentValues { index: i, value: values[i].clone() });
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| (values[a], a).cmp(&(values[b], b)));

    let mut dsu = DisjointSet::new(m);
    let mut active = vec![false; m];
    let mut drafts: Vec<Draft> = Vec::new();
    // Representative draft node of each component, keyed by set root.
    let mut rep: HashMap<usize, usize> = HashMap::new();

    for &idx in &order {
        active[idx] = true;
        let left = idx > 0 && active[idx - 1];
        let right = idx + 1 < m && active[idx + 1];
        match (left, right) {
            (false, false) => {
                // Strict local minimum: a new component is born.
                drafts.push(Draft {
                    value: values[idx].clone(),
                    parent: None,
                    children: Vec::new(),
                    alive: true,
                });
                rep.insert(dsu.find(idx), drafts.len() - 1);
            }
            (true, false) => {
                let r = dsu.find(idx - 1);
                let node = rep[&r];
                let r = dsu.union(idx, idx - 1);
                rep.insert(r, node);
            }
            (false, true) => {
                let r = dsu.find(idx + 1);
                let node = rep[&r];
                let r = dsu.union(idx, idx + 1);
                rep.insert(r, node);
            }
            (true, true) => {
                // Two components join at this value.
                let ra = dsu.find(idx - 1);
                let rb = dsu.find(idx + 1);
                debug_assert_ne!(ra, rb, "a line cannot wrap around an unprocessed sample");
                let a = rep[&ra];
                let b = rep[&rb];
                let value = values[idx];
                let joined = if drafts[a].value == *value && drafts[b].value == *value {
                    // Two equal-value merge nodes meet: collapse into one.
                    let orphans = std::mem::take(&mut drafts[b].children);
                    for &c in &orphans {
                        drafts[c].parent = Some(a);
                    }
                    drafts[a].children.extend(orphans);
                    drafts[b].alive = false;
                    a
                } else if drafts[a].value == *value {
                    drafts[b].parent = Some(a);
                    drafts[a].children.push(b);
                    a
                } else if drafts[b].value == *value {
                    drafts[a].parent = Some(b);
                    drafts[b].children.push(a);
                    b
                } else {
                    drafts.push(Draft {
                        value: value.clone(),
                        parent: None,
                        children: vec![a, b],
                        alive: true,
                    });
                    let node = drafts.len() - 1;
                    drafts[a].parent = Some(node);
                    drafts[b].parent = Some(node);
                    node
                };
                let r = dsu.union(idx, idx - 1);
                let r = dsu.union(r, idx + 1);
                rep.insert(r, joined);
            }
        }
    }

    // The last processed sample carries the global maximum; it closes the
    // root. A node already sits there exactly when the maximum is an
    // interior merge.
    let top = rep[&dsu.find(order[m - 1])];
    let vmax = values[order[m - 1]];
    let root = if drafts[top].value == *vmax {
        top
    } else {
        drafts.push(Draft {
            value: vmax.clone(),
            parent: None,
            children: vec![top],
            alive: true,
        });
        let node = drafts.len() - 1;
        drafts[top].parent = Some(node);
        node
    };
    debug_assert!(drafts[root].parent.is_none());

    // Materialize, skipping absorbed drafts; ids follow creation order.
    let mut id_of: HashMap<usize, u64> = HashMap::new();
    let mut next = 0u64;
    for (i, d) in drafts.iter().enumerate() {
        if d.alive {
            id_of.insert(i, next);
            next += 1;
        }
    }
    let records = drafts.iter().enumerate().filter(|(_, d)| d.alive).map(|(i, d)| {
        (id_of[&i], d.value.clone(), d.parent.map(|p| id_of[&p]))
    });
    Ok(MergeTree::from_records(records)?)
}

/// Union-find over sample indices with path compression.
struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    /// Unites the two sets and returns the new root.
    fn union(&mut self, a: usize, b: usize) -> usize {
        let ra = self.find(a);
        let rb = self.find(b);
        self.parent[ra] = rb;
        rb
    }
}

/// One record of a tree document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeRecord {
    pub id: u64,
    pub value: ScalarValue,
    pub parent: Option<u64>,
}

/// A parsed tree file: version header, optional name, and the records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDocument {
    pub version: u32,
    pub name: Option<String>,
    pub records: Vec<TreeRecord>,
}

impl TreeDocument {
    /// Parses the line-oriented format. Unknown `#` comments are skipped;
    /// `# mergetree v<N>` declares the version and `# name: <text>` a name.
    pub fn parse(bytes: &[u8]) -> Result<TreeDocument, IngestError> {
        let text = std::str::from_utf8(bytes).map_err(|e| syntax(0, format!("not UTF-8: {e}")))?;
        let mut doc = TreeDocument { version: FORMAT_VERSION, name: None, records: Vec::new() };
        let mut seen: HashMap<u64, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(v) = comment.strip_prefix("mergetree v") {
                    doc.version = v
                        .parse()
                        .map_err(|_| syntax(line, format!("bad version header {trimmed:?}")))?;
                    if doc.version != FORMAT_VERSION {
                        return Err(syntax(line, format!("unsupported format version {v}")));
                    }
                } else if let Some(name) = comment.strip_prefix("name:") {
                    doc.name = Some(name.trim().to_string());
                }
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 3 {
                return Err(syntax(
                    line,
                    format!("expected id<TAB>value<TAB>parent, found {} fields", fields.len()),
                ));
            }
            let id: u64 = parse_id(fields[0]).ok_or_else(|| {
                syntax(line, format!("bad node id {:?}", fields[0]))
            })?;
            let value: ScalarValue =
                fields[1].parse().map_err(|e| syntax(line, format!("value: {e}")))?;
            let parent = match fields[2] {
                "-" => None,
                p => Some(parse_id(p).ok_or_else(|| {
                    syntax(line, format!("bad parent id {p:?}"))
                })?),
            };
            if seen.insert(id, line).is_some() {
                return Err(IngestError::DuplicateId { line, id: NodeId(id) });
            }
            doc.records.push(TreeRecord { id, value, parent });
        }
        Ok(doc)
    }

    /// The canonical document for a tree: records sorted by id, no name.
    pub fn from_tree(tree: &MergeTree) -> TreeDocument {
        let records = tree
            .iter()
            .map(|n| TreeRecord { id: n.id.0, value: n.value.clone(), parent: n.parent.map(|p| p.0) })
            .collect();
        TreeDocument { version: FORMAT_VERSION, name: None, records }
    }

    pub fn to_tree(&self) -> Result<MergeTree, IngestError> {
        Ok(MergeTree::from_records(
            self.records.iter().map(|r| (r.id, r.value.clone(), r.parent)),
        )?)
    }

    /// Canonical serialization: version header, optional name, records
    /// sorted by id, `\n` endings, no trailing whitespace.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("# mergetree v{}\n", self.version);
        if let Some(name) = &self.name {
            out.push_str(&format!("# name: {name}\n"));
        }
        let mut records: Vec<&TreeRecord> = self.records.iter().collect();
        records.sort_by_key(|r| r.id);
        for r in records {
            let parent = r.parent.map_or("-".to_string(), |p| p.to_string());
            out.push_str(&format!("{}\t{}\t{}\n", r.id, r.value, parent));
        }
        out.into_bytes()
    }
}

/// Non-negative integer id with no sign or stray characters.
fn parse_id(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses a tree file into a validated merge tree.
pub fn parse_tree_document(bytes: &[u8]) -> Result<MergeTree, IngestError> {
    TreeDocument::parse(bytes)?.to_tree()
}

/// Writes the canonical tree file for `tree`.
pub fn write_tree_document(tree: &MergeTree) -> Vec<u8> {
    TreeDocument::from_tree(tree).to_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[&str]) -> ScalarSeries {
        ScalarSeries::from_value_literals(values).unwrap()
    }

    fn tree_of(values: &[&str]) -> MergeTree {
        merge_tree_of_series(&series(values)).unwrap()
    }

    fn shape(t: &MergeTree) -> String {
        t.canonical_form()
    }

    #[test]
    fn monotone_series_is_a_two_node_chain() {
        let t = tree_of(&["0", "1", "2", "3"]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(shape(&t), "3[0[]]");
    }

    #[test]
    fn single_sample_is_a_single_node() {
        let t = tree_of(&["5"]);
        assert_eq!(t.len(), 1);
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(shape(&t), "5[]");
    }

    #[test]
    fn w_shaped_series_merges_once() {
        let t = tree_of(&["3", "0", "2", "1", "4"]);
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(shape(&t), "4[2[0[],1[]]]");
    }

    #[test]
    fn interior_global_maximum_is_the_root() {
        let t = tree_of(&["0", "4", "1"]);
        assert_eq!(shape(&t), "4[0[],1[]]");
    }

    #[test]
    fn equal_valued_minima_are_distinct_leaves() {
        let t = tree_of(&["2", "0", "1", "0", "2"]);
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(shape(&t), "2[1[0[],0[]]]");
    }

    #[test]
    fn repeated_join_value_collapses_to_one_merge_node() {
        // The sublevel set becomes connected all at once at value 1: the
        // merge node must be ternary, not a stack of equal-value parents.
        let t = tree_of(&["0", "1", "0", "1", "0"]);
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(shape(&t), "1[0[],0[],0[]]");
        assert!(t.validate().is_ok());
    }

    #[test]
    fn two_equal_value_merges_stay_separate_when_joined_higher() {
        let t = tree_of(&["0", "1", "0", "2", "0", "1", "0"]);
        assert_eq!(shape(&t), "2[1[0[],0[]],1[0[],0[]]]");
    }

    #[test]
    fn adjacent_equal_values_are_rejected() {
        let err = merge_tree_of_series(&series(&["0", "1", "1", "2"])).unwrap_err();
        assert_eq!(
            err,
            IngestError::EqualAdjacentValues { index: 1, value: "1".parse().unwrap() }
        );
    }

    #[test]
    fn boundary_minimum_counts_as_a_leaf() {
        // Left endpoint below its neighbor, plus one interior minimum.
        let t = tree_of(&["1", "3", "0", "5"]);
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(shape(&t), "5[3[0[],1[]]]");
    }

    #[test]
    fn node_values_come_from_the_samples() {
        let t = tree_of(&["3", "0", "2", "1", "4"]);
        let samples = ["0", "1", "2", "3", "4"];
        for node in t.iter() {
            assert!(samples.contains(&node.value.to_string().as_str()));
        }
    }

    #[test]
    fn reversal_gives_an_isomorphic_tree() {
        for values in [
            vec!["3", "0", "2", "1", "4"],
            vec!["0", "1", "2", "3"],
            vec!["2", "0", "1", "0", "2"],
            vec!["0", "1", "0", "1", "0"],
            vec!["5"],
        ] {
            let s = series(&values);
            let t = merge_tree_of_series(&s).unwrap();
            let r = merge_tree_of_series(&s.reversed()).unwrap();
            assert_eq!(shape(&t), shape(&r), "series {values:?}");
        }
    }

    #[test]
    fn series_positions_must_increase() {
        let bad = ScalarSeries::new(vec![
            ("0".parse().unwrap(), "1".parse().unwrap()),
            ("0".parse().unwrap(), "2".parse().unwrap()),
        ]);
        assert_eq!(bad.unwrap_err(), IngestError::NonIncreasingPosition { index: 1 });
        assert_eq!(ScalarSeries::new(vec![]).unwrap_err(), IngestError::EmptySeries);
    }

    #[test]
    fn csv_round_trip() {
        let csv = b"position,value\n0,3\n1,0\n2,2\n3,1\n4,4\n";
        let s = parse_series_csv(csv).unwrap();
        assert_eq!(s.len(), 5);
        let t = merge_tree_of_series(&s).unwrap();
        assert_eq!(shape(&t), "4[2[0[],1[]]]");
    }

    #[test]
    fn csv_rejects_bad_headers_and_fields() {
        assert!(matches!(
            parse_series_csv(b"pos,val\n0,1\n").unwrap_err(),
            IngestError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            parse_series_csv(b"position,value\n0,abc\n").unwrap_err(),
            IngestError::Syntax { line: 2, .. }
        ));
    }

    #[test]
    fn csv_values_are_exact() {
        let s = parse_series_csv(b"position,value\n0,0.1\n1,1/3\n").unwrap();
        let vals: Vec<String> = s.values().map(|v| v.to_string()).collect();
        assert_eq!(vals, ["1/10", "1/3"]);
    }

    #[test]
    fn parse_simple_document() {
        let t = parse_tree_document(b"0\t0.5\t1\n1\t2\t-\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.value(NodeId(0)).to_string(), "1/2");
        assert_eq!(t.root(), NodeId(1));
    }

    #[test]
    fn parse_accepts_rational_literals_exactly() {
        let t = parse_tree_document(b"0\t1/3\t1\n1\t2\t-\n").unwrap();
        assert_eq!(t.value(NodeId(0)), &"1/3".parse().unwrap());
    }

    #[test]
    fn parse_rejects_two_roots() {
        let err = parse_tree_document(b"0\t0\t-\n1\t1\t-\n").unwrap_err();
        assert!(matches!(err, IngestError::Tree(TreeError::MultipleRoots { .. })));
    }

    #[test]
    fn parse_rejects_duplicates_and_syntax_errors() {
        assert!(matches!(
            parse_tree_document(b"0\t0\t1\n0\t1\t-\n").unwrap_err(),
            IngestError::DuplicateId { line: 2, id: NodeId(0) }
        ));
        assert!(matches!(
            parse_tree_document(b"0 0 1\n").unwrap_err(),
            IngestError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            parse_tree_document(b"0\t0\t1\n1\tx\t-\n").unwrap_err(),
            IngestError::Syntax { line: 2, .. }
        ));
        assert!(matches!(
            parse_tree_document(b"-1\t0\t-\n").unwrap_err(),
            IngestError::Syntax { line: 1, .. }
        ));
    }

    #[test]
    fn parse_skips_comments_and_blank_lines() {
        let t = parse_tree_document(b"# mergetree v1\n# name: demo\n\n0\t0\t1\n1\t1\t-\n").unwrap();
        assert_eq!(t.len(), 2);
        let doc = TreeDocument::parse(b"# mergetree v1\n# name: demo\n0\t0\t-\n").unwrap();
        assert_eq!(doc.name.as_deref(), Some("demo"));
        assert_eq!(doc.version, 1);
    }

    #[test]
    fn unsupported_version_is_rejected() {
        assert!(matches!(
            parse_tree_document(b"# mergetree v2\n0\t0\t-\n").unwrap_err(),
            IngestError::Syntax { line: 1, .. }
        ));
    }

    #[test]
    fn writer_is_canonical_and_round_trips() {
        let t = tree_of(&["3", "0", "2", "1", "4"]);
        let bytes = write_tree_document(&t);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text, "# mergetree v1\n0\t0\t2\n1\t1\t2\n2\t2\t3\n3\t4\t-\n");
        let back = parse_tree_document(&bytes).unwrap();
        assert_eq!(back, t);
        // Idempotent: rewriting the reparsed tree is byte-identical.
        assert_eq!(write_tree_document(&back), bytes);
    }

    #[test]
    fn writer_handles_single_node_and_rationals() {
        let single = MergeTree::from_literals(&[(0, "7/2", None)]).unwrap();
        let bytes = write_tree_document(&single);
        assert_eq!(String::from_utf8(bytes.clone()).unwrap(), "# mergetree v1\n0\t7/2\t-\n");
        let back = parse_tree_document(&bytes).unwrap();
        assert_eq!(back.value(back.root()), &"7/2".parse().unwrap());
    }
}
