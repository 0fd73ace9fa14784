//! Taxonomy loading and mapping of taxonomy labels onto graph categories.
//!
//! Each label's display name is split into conjunction parts and every part
//! is normalized and looked up against an inverted token index built over
//! normalized category names and redirect aliases. Exact normalized matches
//! are always accepted. Beyond those, the best-scoring remaining candidates
//! of each part (all of them, on a tie) are accepted when their Jaro-Winkler
//! similarity reaches the threshold. Manual overrides replace the automatic result of a label.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CategoryGraph, NodeId};
use crate::textproc::strip_plural;

pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// Shortest token that takes part in prefix retrieval.
const MIN_PREFIX_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("duplicate label id {0:?}")]
    DuplicateId(String),
    #[error("duplicate label name {0:?}")]
    DuplicateName(String),
    #[error("label {label:?} has unknown parent {parent:?}")]
    UnknownParent { label: String, parent: String },
    #[error("label {0:?} is its own ancestor")]
    Cycle(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("override for {label:?} references {node}, which is not a category")]
    OverrideNotCategory { label: String, node: NodeId },
    #[error("override for {label:?} names unknown category {name:?}")]
    OverrideUnknownCategory { label: String, name: String },
    #[error("override for {0:?} is empty")]
    EmptyOverride(String),
    #[error("mapping file references unknown category id {0}")]
    UnknownCategoryId(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyLabel {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub parent: Option<String>,
}

/// `taxonomy.json`: `{"labels": [{"id": str, "name": str, "parent": str|null}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyFile {
    pub labels: Vec<TaxonomyLabel>,
}

/// A validated label forest.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    labels: Vec<TaxonomyLabel>,
    by_id: HashMap<String, usize>,
}

impl Taxonomy {
    pub fn new(labels: Vec<TaxonomyLabel>) -> Result<Self, TaxonomyError> {
        let mut by_id = HashMap::new();
        let mut names = HashSet::new();
        for (i, l) in labels.iter().enumerate() {
            if by_id.insert(l.id.clone(), i).is_some() {
                return Err(TaxonomyError::DuplicateId(l.id.clone()));
            }
            if !names.insert(l.name.as_str()) {
                return Err(TaxonomyError::DuplicateName(l.name.clone()));
            }
        }
        for l in &labels {
            if let Some(p) = &l.parent {
                if !by_id.contains_key(p) {
                    return Err(TaxonomyError::UnknownParent {
                        label: l.id.clone(),
                        parent: p.clone(),
                    });
                }
            }
        }
        let tax = Taxonomy { labels, by_id };
        for l in &tax.labels {
            // walking more than n steps up means we are in a cycle
            let mut cur = l.parent.as_deref();
            let mut steps = 0;
            while let Some(p) = cur {
                steps += 1;
                if p == l.id || steps > tax.labels.len() {
                    return Err(TaxonomyError::Cycle(l.id.clone()));
                }
                cur = tax.get(p).and_then(|x| x.parent.as_deref());
            }
        }
        Ok(tax)
    }

    pub fn from_file(file: TaxonomyFile) -> Result<Self, TaxonomyError> {
        Self::new(file.labels)
    }

    pub fn to_file(&self) -> TaxonomyFile {
        TaxonomyFile {
            labels: self.labels.clone(),
        }
    }

    pub fn labels(&self) -> &[TaxonomyLabel] {
        &self.labels
    }

    pub fn get(&self, id: &str) -> Option<&TaxonomyLabel> {
        self.by_id.get(id).map(|&i| &self.labels[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn parent(&self, id: &str) -> Option<&str> {
        self.get(id).and_then(|l| l.parent.as_deref())
    }

    pub fn by_name(&self, name: &str) -> Option<&TaxonomyLabel> {
        self.labels.iter().find(|l| l.name == name)
    }

    /// Top-level label ids, ascending.
    pub fn roots(&self) -> Vec<&str> {
        let mut r: Vec<&str> = self
            .labels
            .iter()
            .filter(|l| l.parent.is_none())
            .map(|l| l.id.as_str())
            .collect();
        r.sort_unstable();
        r
    }

    /// Direct children of a label, ascending by id.
    pub fn children(&self, id: &str) -> Vec<&str> {
        let mut c: Vec<&str> = self
            .labels
            .iter()
            .filter(|l| l.parent.as_deref() == Some(id))
            .map(|l| l.id.as_str())
            .collect();
        c.sort_unstable();
        c
    }

    /// Labels that have at least one child, ascending by id.
    pub fn internal_labels(&self) -> Vec<&str> {
        let parents: BTreeSet<&str> = self
            .labels
            .iter()
            .filter_map(|l| l.parent.as_deref())
            .collect();
        parents.into_iter().collect()
    }
}

/// Lowercase, punctuation to single spaces, per-token plural stripping,
/// whitespace collapsed.
pub fn normalize_name(name: &str) -> String {
    let spaced: String = name
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .to_lowercase();
    spaced
        .split_whitespace()
        .map(strip_plural)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Jaro similarity over Unicode scalar values.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_used = vec![false; b.len()];
    let mut a_hits = Vec::with_capacity(a.len());
    for (i, &ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_used[j] && b[j] == ca {
                b_used[j] = true;
                a_hits.push(ca);
                break;
            }
        }
    }
    let m = a_hits.len();
    if m == 0 {
        return 0.0;
    }
    let b_hits = b.iter().zip(&b_used).filter(|(_, &u)| u).map(|(&c, _)| c);
    let half_transpositions = a_hits.iter().zip(b_hits).filter(|(x, y)| *x != y).count() as f64 / 2.0;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - half_transpositions) / m) / 3.0
}

/// Jaro-Winkler similarity with prefix scale 0.1 over at most four
/// leading characters.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let j = jaro(a, b);
    let prefix = a
        .chars()
        .zip(b.chars())
        .take(4)
        .take_while(|(x, y)| x == y)
        .count() as f64;
    j + prefix * 0.1 * (1.0 - j)
}

/// Splits a conjunction name on `&`, `/`, `,` and the word "and". The
/// original name always comes first; parts follow only when there is more
/// than one.
pub fn split_conjunctions(name: &str) -> Vec<String> {
    let original = name.trim().to_string();
    let mut parts: Vec<String> = Vec::new();
    for piece in original.split(['&', '/', ',']) {
        let mut current: Vec<&str> = Vec::new();
        for word in piece.split_whitespace() {
            if word.eq_ignore_ascii_case("and") {
                if !current.is_empty() {
                    parts.push(current.join(" "));
                }
                current.clear();
            } else {
                current.push(word);
            }
        }
        if !current.is_empty() {
            parts.push(current.join(" "));
        }
    }
    let mut out = vec![original];
    if parts.len() > 1 {
        for p in parts {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Fuzzy,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedCategory {
    pub node: NodeId,
    pub kind: MatchKind,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelMapping {
    pub label: String,
    pub kind: MatchKind,
    /// Lowest score among the accepted categories.
    pub score: f64,
    /// Sorted by node id.
    pub categories: Vec<MatchedCategory>,
}

impl LabelMapping {
    pub fn nodes(&self) -> Vec<NodeId> {
        self.categories.iter().map(|c| c.node).collect()
    }
}

/// Best candidate of a query part that stayed below the threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearMiss {
    pub label: String,
    pub query: String,
    pub candidate: NodeId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryMapping {
    pub threshold: f64,
    pub mapped: BTreeMap<String, LabelMapping>,
    pub unmapped: Vec<String>,
    pub near_misses: Vec<NearMiss>,
}

impl CategoryMapping {
    pub fn get(&self, label: &str) -> Option<&LabelMapping> {
        self.mapped.get(label)
    }

    pub fn nodes(&self, label: &str) -> Option<Vec<NodeId>> {
        self.get(label).map(LabelMapping::nodes)
    }
}

struct IndexEntry {
    key: String,
    node: NodeId,
}

/// Inverted token index over normalized category names and aliases.
pub struct CategoryIndex {
    entries: Vec<IndexEntry>,
    exact: HashMap<String, Vec<NodeId>>,
    tokens: BTreeMap<String, Vec<u32>>,
}

impl CategoryIndex {
    pub fn build(graph: &CategoryGraph) -> Self {
        let mut entries = Vec::new();
        for c in graph.categories() {
            entries.push(IndexEntry {
                key: normalize_name(graph.name(c)),
                node: c,
            });
        }
        for (alias, node) in graph.aliases() {
            entries.push(IndexEntry {
                key: normalize_name(alias),
                node,
            });
        }
        let mut exact: HashMap<String, Vec<NodeId>> = HashMap::new();
        let mut tokens: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.key.is_empty() {
                continue;
            }
            exact.entry(e.key.clone()).or_default().push(e.node);
            let mut seen = HashSet::new();
            for t in e.key.split(' ') {
                if seen.insert(t) {
                    tokens.entry(t.to_string()).or_default().push(i as u32);
                }
            }
        }
        for nodes in exact.values_mut() {
            nodes.sort_unstable();
            nodes.dedup();
        }
        CategoryIndex {
            entries,
            exact,
            tokens,
        }
    }

    /// Categories whose normalized name or alias equals `key`.
    pub fn exact(&self, key: &str) -> &[NodeId] {
        self.exact.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Entries sharing a token with `key`, or related to one of its tokens
    /// by a prefix of at least four characters.
    fn candidates(&self, key: &str) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for t in key.split(' ').filter(|t| !t.is_empty()) {
            if let Some(ids) = self.tokens.get(t) {
                out.extend(ids);
            }
            if t.chars().count() >= MIN_PREFIX_LEN {
                for (tok, ids) in self.tokens.range(t.to_string()..) {
                    if !tok.starts_with(t) {
                        break;
                    }
                    out.extend(ids);
                }
                for (end, _) in t.char_indices().skip(MIN_PREFIX_LEN) {
                    if let Some(ids) = self.tokens.get(&t[..end]) {
                        out.extend(ids);
                    }
                }
            }
        }
        out
    }

    /// Highest-scoring candidates not in `exclude`, with every node tied at
    /// the best score, ascending.
    pub fn best_fuzzy(&self, key: &str, exclude: &[NodeId]) -> Option<(f64, Vec<NodeId>)> {
        let mut best: Option<(f64, Vec<NodeId>)> = None;
        for i in self.candidates(key) {
            let e = &self.entries[i as usize];
            if exclude.contains(&e.node) {
                continue;
            }
            let s = jaro_winkler(key, &e.key);
            match &mut best {
                Some((b, nodes)) if *b == s => nodes.push(e.node),
                Some((b, _)) if *b > s => {}
                _ => best = Some((s, vec![e.node])),
            }
        }
        best.map(|(s, mut nodes)| {
            nodes.sort_unstable();
            nodes.dedup();
            (s, nodes)
        })
    }
}

enum LabelOutcome {
    Mapped(LabelMapping, Vec<NearMiss>),
    Unmapped(Vec<NearMiss>),
}

fn map_label(index: &CategoryIndex, label: &TaxonomyLabel, threshold: f64) -> LabelOutcome {
    let mut accepted: BTreeMap<NodeId, MatchedCategory> = BTreeMap::new();
    let mut misses = Vec::new();
    for part in split_conjunctions(&label.name) {
        let key = normalize_name(&part);
        if key.is_empty() {
            continue;
        }
        let exact = index.exact(&key);
        for &node in exact {
            accepted.insert(
                node,
                MatchedCategory {
                    node,
                    kind: MatchKind::Exact,
                    score: 1.0,
                },
            );
        }
        match index.best_fuzzy(&key, exact) {
            Some((score, nodes)) if score >= threshold => {
                for node in nodes {
                    accepted.entry(node).or_insert(MatchedCategory {
                        node,
                        kind: MatchKind::Fuzzy,
                        score,
                    });
                }
            }
            Some((score, nodes)) if exact.is_empty() => misses.push(NearMiss {
                label: label.id.clone(),
                query: part.clone(),
                candidate: nodes[0],
                score,
            }),
            _ => {}
        }
    }
    if accepted.is_empty() {
        return LabelOutcome::Unmapped(misses);
    }
    let categories: Vec<MatchedCategory> = accepted.into_values().collect();
    let kind = if categories.iter().any(|c| c.kind == MatchKind::Fuzzy) {
        MatchKind::Fuzzy
    } else {
        MatchKind::Exact
    };
    let score = categories.iter().map(|c| c.score).fold(1.0, f64::min);
    LabelOutcome::Mapped(
        LabelMapping {
            label: label.id.clone(),
            kind,
            score,
            categories,
        },
        misses,
    )
}

/// Maps every taxonomy label onto graph categories.
pub fn map_taxonomy(
    taxonomy: &Taxonomy,
    graph: &CategoryGraph,
    overrides: &BTreeMap<String, Vec<NodeId>>,
    threshold: f64,
) -> Result<CategoryMapping, TaxonomyError> {
    for (label, nodes) in overrides {
        if !taxonomy.contains(label) {
            return Err(TaxonomyError::UnknownLabel(label.clone()));
        }
        if nodes.is_empty() {
            return Err(TaxonomyError::EmptyOverride(label.clone()));
        }
        if let Some(&node) = nodes.iter().find(|&&n| !graph.is_category(n)) {
            return Err(TaxonomyError::OverrideNotCategory {
                label: label.clone(),
                node,
            });
        }
    }
    let index = CategoryIndex::build(graph);
    let outcomes: Vec<LabelOutcome> = taxonomy
        .labels()
        .par_iter()
        .map(|label| match overrides.get(&label.id) {
            Some(nodes) => {
                let set: BTreeSet<NodeId> = nodes.iter().copied().collect();
                LabelOutcome::Mapped(
                    LabelMapping {
                        label: label.id.clone(),
                        kind: MatchKind::Override,
                        score: 1.0,
                        categories: set
                            .into_iter()
                            .map(|node| MatchedCategory {
                                node,
                                kind: MatchKind::Override,
                                score: 1.0,
                            })
                            .collect(),
                    },
                    Vec::new(),
                )
            }
            None => map_label(&index, label, threshold),
        })
        .collect();

    let mut mapping = CategoryMapping {
        threshold,
        mapped: BTreeMap::new(),
        unmapped: Vec::new(),
        near_misses: Vec::new(),
    };
    for (label, outcome) in taxonomy.labels().iter().zip(outcomes) {
        match outcome {
            LabelOutcome::Mapped(m, misses) => {
                mapping.near_misses.extend(misses);
                mapping.mapped.insert(label.id.clone(), m);
            }
            LabelOutcome::Unmapped(misses) => {
                mapping.near_misses.extend(misses);
                mapping.unmapped.push(label.id.clone());
            }
        }
    }
    mapping.unmapped.sort();
    Ok(mapping)
}

/// Resolves `overrides.json` category names against the graph (canonical
/// names first, then aliases).
pub fn resolve_overrides(
    names: &BTreeMap<String, Vec<String>>,
    graph: &CategoryGraph,
) -> Result<BTreeMap<String, Vec<NodeId>>, TaxonomyError> {
    names
        .iter()
        .map(|(label, cats)| {
            let nodes = cats
                .iter()
                .map(|name| {
                    graph.resolve_category(name).ok_or_else(|| {
                        TaxonomyError::OverrideUnknownCategory {
                            label: label.clone(),
                            name: name.clone(),
                        }
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((label.clone(), nodes))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedCategoryRecord {
    pub id: u64,
    pub name: String,
    pub kind: MatchKind,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub label: String,
    pub kind: MatchKind,
    pub score: f64,
    pub categories: Vec<MappedCategoryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearMissRecord {
    pub label: String,
    pub query: String,
    pub candidate_id: u64,
    pub candidate: String,
    pub score: f64,
}

/// `mapping.json`. Category ids are the graph's external ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingFile {
    pub threshold: f64,
    pub labels: Vec<LabelRecord>,
    pub unmapped: Vec<String>,
    #[serde(default)]
    pub near_misses: Vec<NearMissRecord>,
}

impl CategoryMapping {
    pub fn to_file(&self, graph: &CategoryGraph) -> MappingFile {
        MappingFile {
            threshold: self.threshold,
            labels: self
                .mapped
                .values()
                .map(|m| LabelRecord {
                    label: m.label.clone(),
                    kind: m.kind,
                    score: m.score,
                    categories: m
                        .categories
                        .iter()
                        .map(|c| MappedCategoryRecord {
                            id: graph.external_id(c.node),
                            name: graph.name(c.node).to_string(),
                            kind: c.kind,
                            score: c.score,
                        })
                        .collect(),
                })
                .collect(),
            unmapped: self.unmapped.clone(),
            near_misses: self
                .near_misses
                .iter()
                .map(|n| NearMissRecord {
                    label: n.label.clone(),
                    query: n.query.clone(),
                    candidate_id: graph.external_id(n.candidate),
                    candidate: graph.name(n.candidate).to_string(),
                    score: n.score,
                })
                .collect(),
        }
    }

    pub fn from_file(file: &MappingFile, graph: &CategoryGraph) -> Result<Self, TaxonomyError> {
        let resolve = |id: u64| {
            graph
                .node_by_external(id)
                .filter(|&n| graph.is_category(n))
                .ok_or(TaxonomyError::UnknownCategoryId(id))
        };
        let mut mapped = BTreeMap::new();
        for l in &file.labels {
            let mut categories = l
                .categories
                .iter()
                .map(|c| {
                    Ok(MatchedCategory {
                        node: resolve(c.id)?,
                        kind: c.kind,
                        score: c.score,
                    })
                })
                .collect::<Result<Vec<_>, TaxonomyError>>()?;
            categories.sort_by_key(|c| c.node);
            mapped.insert(
                l.label.clone(),
                LabelMapping {
                    label: l.label.clone(),
                    kind: l.kind,
                    score: l.score,
                    categories,
                },
            );
        }
        let near_misses = file
            .near_misses
            .iter()
            .map(|n| {
                Ok(NearMiss {
                    label: n.label.clone(),
                    query: n.query.clone(),
                    candidate: resolve(n.candidate_id)?,
                    score: n.score,
                })
            })
            .collect::<Result<Vec<_>, TaxonomyError>>()?;
        Ok(CategoryMapping {
            threshold: file.threshold,
            mapped,
            unmapped: file.unmapped.clone(),
            near_misses,
        })
    }
}
