//! Competition-based page labeling over the category graph.
//!
//! Every taxonomy label owns one or more root categories. Labels that compete
//! for pages form a [`CompetitionSet`]. For each label a multi-source BFS
//! starts from all of its roots at depth 0 and never enters a root owned by a
//! competing label. A page found this way is a candidate for the label. In
//! the full mode a candidate survives only if at least `coverage_threshold`
//! of its parent categories were reached; survivors get the weight
//!
//! ```text
//! w = sum over root-to-page paths p of 2^-len(p)
//! ```
//!
//! and the weights of all competing labels for one page are normalized to
//! sum to one. Labels whose share is strictly above `assignment_threshold`
//! are assigned.
//!
//! Two path sets are supported. [`PathMode::Dag`] counts the paths of the BFS
//! level DAG (edges that go exactly one level deeper), which is a linear-time
//! dynamic program folded into the BFS itself. [`PathMode::Exact`] enumerates
//! every simple path up to a depth cap and is exponential in the worst case.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CategoryGraph, NodeId};
use crate::taxonomy::{CategoryMapping, Taxonomy};

/// Group name of the single competition set of a coarse task.
pub const COARSE_GROUP: &str = "_all";

const UNSEEN: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("invalid labeling config: {0}")]
    InvalidConfig(String),
    #[error("label {0:?} appears twice in one competition set")]
    DuplicateLabel(String),
    #[error("label {0:?} has no root categories")]
    EmptyRoot(String),
    #[error("root {node} of label {label:?} is not a category")]
    NotACategory { label: String, node: NodeId },
    #[error("category {node} is a root of both {first:?} and {second:?}")]
    SharedRoot {
        node: NodeId,
        first: String,
        second: String,
    },
    #[error("label {0:?} is not part of the competition set")]
    NotInCompetition(String),
    #[error("label {0:?} is not mapped to any category")]
    UnmappedLabel(String),
    #[error("label {0:?} is not in the taxonomy")]
    UnknownLabel(String),
    #[error("page {0} is not a candidate of this traversal")]
    NotACandidate(NodeId),
    #[error("page {0} was removed by parent-coverage pruning")]
    Pruned(NodeId),
    #[error("no candidate labels to normalize")]
    EmptyCandidates,
    #[error("candidate {label:?} has non-positive weight {weight}")]
    NonPositiveWeight { label: String, weight: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A label and the categories it is anchored at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSpec {
    pub label: String,
    pub nodes: Vec<NodeId>,
}

impl RootSpec {
    pub fn new(label: impl Into<String>, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        RootSpec {
            label: label.into(),
            nodes,
        }
    }
}

/// Labels competing for the same pages.
#[derive(Debug, Clone)]
pub struct CompetitionSet {
    pub group: String,
    roots: Vec<RootSpec>,
}

impl CompetitionSet {
    pub fn new(
        group: impl Into<String>,
        roots: Vec<RootSpec>,
        graph: &CategoryGraph,
    ) -> Result<Self, LabelError> {
        let mut owner: BTreeMap<NodeId, &str> = BTreeMap::new();
        let mut labels = HashSet::new();
        for r in &roots {
            if !labels.insert(r.label.as_str()) {
                return Err(LabelError::DuplicateLabel(r.label.clone()));
            }
            if r.nodes.is_empty() {
                return Err(LabelError::EmptyRoot(r.label.clone()));
            }
            for &n in &r.nodes {
                if !graph.is_category(n) {
                    return Err(LabelError::NotACategory {
                        label: r.label.clone(),
                        node: n,
                    });
                }
                if let Some(first) = owner.insert(n, &r.label) {
                    if first != r.label {
                        return Err(LabelError::SharedRoot {
                            node: n,
                            first: first.to_string(),
                            second: r.label.clone(),
                        });
                    }
                }
            }
        }
        Ok(CompetitionSet {
            group: group.into(),
            roots,
        })
    }

    pub fn roots(&self) -> &[RootSpec] {
        &self.roots
    }

    pub fn root(&self, label: &str) -> Option<&RootSpec> {
        self.roots.iter().find(|r| r.label == label)
    }

    /// Copy of the set without `label`.
    pub fn without(&self, label: &str) -> CompetitionSet {
        CompetitionSet {
            group: self.group.clone(),
            roots: self
                .roots
                .iter()
                .filter(|r| r.label != label)
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// All top-level labels compete with each other.
    Coarse,
    /// The children of every internal label compete with each other.
    Fine,
}

/// Builds the competition sets of a task. Every participating label must be
/// mapped.
pub fn competition_sets(
    taxonomy: &Taxonomy,
    mapping: &CategoryMapping,
    graph: &CategoryGraph,
    task: Task,
) -> Result<Vec<CompetitionSet>, LabelError> {
    let groups: Vec<(String, Vec<&str>)> = match task {
        Task::Coarse => vec![(COARSE_GROUP.to_string(), taxonomy.roots())],
        Task::Fine => taxonomy
            .internal_labels()
            .into_iter()
            .map(|p| (p.to_string(), taxonomy.children(p)))
            .collect(),
    };
    groups
        .into_iter()
        .map(|(group, labels)| {
            let roots = labels
                .into_iter()
                .map(|l| {
                    mapping
                        .nodes(l)
                        .map(|nodes| RootSpec::new(l, nodes))
                        .ok_or_else(|| LabelError::UnmappedLabel(l.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            CompetitionSet::new(group, roots, graph)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelingMode {
    Full,
    ChildOnly,
    AllDescendants,
    MinDist,
    NoPruning,
}

impl LabelingMode {
    pub const ALL: [LabelingMode; 5] = [
        LabelingMode::Full,
        LabelingMode::ChildOnly,
        LabelingMode::AllDescendants,
        LabelingMode::MinDist,
        LabelingMode::NoPruning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LabelingMode::Full => "full",
            LabelingMode::ChildOnly => "child_only",
            LabelingMode::AllDescendants => "all_descendants",
            LabelingMode::MinDist => "min_dist",
            LabelingMode::NoPruning => "no_pruning",
        }
    }

    fn prunes_competitors(self) -> bool {
        self != LabelingMode::NoPruning
    }
}

impl std::str::FromStr for LabelingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown labeling mode {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathMode {
    Dag,
    Exact,
}

/// `labelconfig.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelingConfig {
    pub mode: LabelingMode,
    pub coverage_threshold: f64,
    pub assignment_threshold: f64,
    pub max_depth: Option<u32>,
    pub path_mode: PathMode,
    pub exact_path_cap: u32,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        LabelingConfig {
            mode: LabelingMode::Full,
            coverage_threshold: 0.3,
            assignment_threshold: 0.3,
            max_depth: None,
            path_mode: PathMode::Dag,
            exact_path_cap: 8,
        }
    }
}

impl LabelingConfig {
    pub fn with_mode(mode: LabelingMode) -> Self {
        LabelingConfig {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LabelError> {
        for (name, v) in [
            ("coverage_threshold", self.coverage_threshold),
            ("assignment_threshold", self.assignment_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(LabelError::InvalidConfig(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.exact_path_cap == 0 {
            return Err(LabelError::InvalidConfig("exact_path_cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Start nodes and forbidden nodes of one label's traversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalScope {
    pub sources: Vec<NodeId>,
    pub blocked: HashSet<NodeId>,
}

impl TraversalScope {
    /// Scope of `root` within `competitors`. With `prune_competitors` the
    /// roots of every other label are blocked.
    pub fn new(
        root: &RootSpec,
        competitors: &CompetitionSet,
        prune_competitors: bool,
    ) -> Result<Self, LabelError> {
        if competitors.root(&root.label).is_none() {
            return Err(LabelError::NotInCompetition(root.label.clone()));
        }
        let mut blocked = HashSet::new();
        if prune_competitors {
            for other in competitors.roots().iter().filter(|r| r.label != root.label) {
                blocked.extend(other.nodes.iter().copied());
            }
            if let Some(&n) = root.nodes.iter().find(|n| blocked.contains(n)) {
                let other = competitors
                    .roots()
                    .iter()
                    .find(|r| r.label != root.label && r.nodes.contains(&n))
                    .map(|r| r.label.clone())
                    .unwrap_or_default();
                return Err(LabelError::SharedRoot {
                    node: n,
                    first: root.label.clone(),
                    second: other,
                });
            }
        }
        Ok(TraversalScope {
            sources: root.nodes.clone(),
            blocked,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachEntry {
    pub node: NodeId,
    pub depth: u32,
    /// Sum of `2^-len` over level-DAG paths from the sources.
    pub dag_weight: f64,
    /// Fraction of reached parents; pages only, `None` for categories.
    pub coverage: Option<f64>,
}

/// Everything one label's BFS reached.
#[derive(Debug, Clone)]
pub struct ReachableSet {
    pub label: String,
    pub scope: TraversalScope,
    /// In BFS order, so depths are non-decreasing.
    entries: Vec<ReachEntry>,
    /// Entry positions sorted by node id.
    by_node: Vec<u32>,
}

impl ReachableSet {
    pub fn entries(&self) -> &[ReachEntry] {
        &self.entries
    }

    pub fn get(&self, node: NodeId) -> Option<&ReachEntry> {
        self.by_node
            .binary_search_by_key(&node, |&i| self.entries[i as usize].node)
            .ok()
            .map(|i| &self.entries[self.by_node[i] as usize])
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.get(node).is_some()
    }

    pub fn depth(&self, node: NodeId) -> Option<u32> {
        self.get(node).map(|e| e.depth)
    }

    pub fn max_depth(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.depth)
    }

    pub fn reachable_categories<'a>(&'a self, graph: &'a CategoryGraph) -> impl Iterator<Item = NodeId> + 'a {
        self.entries
            .iter()
            .filter(move |e| graph.is_category(e.node))
            .map(|e| e.node)
    }

    /// Candidate pages with their depths, in BFS order.
    pub fn candidate_pages(&self) -> impl Iterator<Item = (NodeId, u32)> + '_ {
        self.entries
            .iter()
            .filter(|e| e.coverage.is_some())
            .map(|e| (e.node, e.depth))
    }

    /// Edges `u -> v` of the traversal with `depth(v) = depth(u) + 1`.
    pub fn level_dag_edges(&self, graph: &CategoryGraph) -> Vec<(NodeId, NodeId)> {
        let mut edges = Vec::new();
        for e in &self.entries {
            if e.depth == 0 {
                continue;
            }
            for &p in graph.inc(e.node) {
                if self.depth(p) == Some(e.depth - 1) {
                    edges.push((p, e.node));
                }
            }
        }
        edges
    }
}

/// Multi-source BFS from the scope's sources, skipping blocked nodes.
/// Nodes at `max_depth` are recorded but not expanded.
pub fn traverse_scope(
    graph: &CategoryGraph,
    label: &str,
    scope: &TraversalScope,
    max_depth: Option<u32>,
) -> ReachableSet {
    let mut pos = vec![UNSEEN; graph.num_nodes()];
    let mut entries: Vec<ReachEntry> = Vec::new();
    for &s in &scope.sources {
        if pos[s.index()] == UNSEEN {
            pos[s.index()] = entries.len() as u32;
            entries.push(ReachEntry {
                node: s,
                depth: 0,
                dag_weight: 1.0,
                coverage: None,
            });
        }
    }
    let mut head = 0;
    while head < entries.len() {
        let ReachEntry {
            node: u,
            depth: du,
            dag_weight: wu,
            ..
        } = entries[head];
        head += 1;
        if !graph.is_category(u) || max_depth.is_some_and(|m| du >= m) {
            continue;
        }
        let half = wu * 0.5;
        for &v in graph.out(u) {
            if scope.blocked.contains(&v) {
                continue;
            }
            match pos[v.index()] {
                UNSEEN => {
                    pos[v.index()] = entries.len() as u32;
                    entries.push(ReachEntry {
                        node: v,
                        depth: du + 1,
                        dag_weight: half,
                        coverage: None,
                    });
                }
                p => {
                    let e = &mut entries[p as usize];
                    if e.depth == du + 1 {
                        e.dag_weight += half;
                    }
                }
            }
        }
    }
    for e in entries.iter_mut() {
        if graph.is_page(e.node) {
            let parents = graph.inc(e.node);
            let reached = parents.iter().filter(|p| pos[p.index()] != UNSEEN).count();
            e.coverage = Some(if parents.is_empty() {
                0.0
            } else {
                reached as f64 / parents.len() as f64
            });
        }
    }
    let mut by_node: Vec<u32> = (0..entries.len() as u32).collect();
    by_node.sort_unstable_by_key(|&i| entries[i as usize].node);
    ReachableSet {
        label: label.to_string(),
        scope: scope.clone(),
        entries,
        by_node,
    }
}

/// BFS of `root` against its competitors. Competitor roots are blocked
/// unless the config's mode is [`LabelingMode::NoPruning`].
pub fn traverse(
    graph: &CategoryGraph,
    root: &RootSpec,
    competitors: &CompetitionSet,
    cfg: &LabelingConfig,
) -> Result<ReachableSet, LabelError> {
    let scope = TraversalScope::new(root, competitors, cfg.mode.prunes_competitors())?;
    Ok(traverse_scope(graph, &root.label, &scope, cfg.max_depth))
}

/// Share of the page's parent categories that the traversal reached. Pages
/// without parents have coverage 0.
pub fn parent_coverage(
    graph: &CategoryGraph,
    page: NodeId,
    reach: &ReachableSet,
) -> Result<f64, LabelError> {
    if !graph.is_page(page) || !reach.contains(page) {
        return Err(LabelError::NotACandidate(page));
    }
    let parents = graph.inc(page);
    if parents.is_empty() {
        return Ok(0.0);
    }
    let reached = parents.iter().filter(|&&p| reach.contains(p)).count();
    Ok(reached as f64 / parents.len() as f64)
}

/// Lengths of all simple paths from any source to `target` that avoid
/// blocked nodes and have at most `cap` edges, ascending.
pub fn enumerate_paths(
    graph: &CategoryGraph,
    scope: &TraversalScope,
    target: NodeId,
    cap: u32,
) -> Vec<u32> {
    struct Search<'a> {
        graph: &'a CategoryGraph,
        blocked: &'a HashSet<NodeId>,
        target: NodeId,
        cap: u32,
        on_path: Vec<bool>,
        lengths: Vec<u32>,
    }

    impl Search<'_> {
        fn visit(&mut self, u: NodeId, len: u32) {
            for &v in self.graph.out(u) {
                if self.on_path[v.index()] || self.blocked.contains(&v) {
                    continue;
                }
                if v == self.target {
                    self.lengths.push(len + 1);
                } else if self.graph.is_category(v) && len + 2 <= self.cap {
                    self.on_path[v.index()] = true;
                    self.visit(v, len + 1);
                    self.on_path[v.index()] = false;
                }
            }
        }
    }

    let mut search = Search {
        graph,
        blocked: &scope.blocked,
        target,
        cap,
        on_path: vec![false; graph.num_nodes()],
        lengths: Vec::new(),
    };
    for &s in &scope.sources {
        if s == target {
            search.lengths.push(0);
            continue;
        }
        if cap == 0 || scope.blocked.contains(&s) {
            continue;
        }
        search.on_path[s.index()] = true;
        search.visit(s, 0);
        search.on_path[s.index()] = false;
    }
    search.lengths.sort_unstable();
    search.lengths
}

/// Raw weight of a candidate page.
pub fn page_weight(
    graph: &CategoryGraph,
    reach: &ReachableSet,
    page: NodeId,
    cfg: &LabelingConfig,
) -> Result<f64, LabelError> {
    let entry = reach
        .get(page)
        .filter(|e| e.coverage.is_some())
        .ok_or(LabelError::NotACandidate(page))?;
    if cfg.mode == LabelingMode::Full && entry.coverage.unwrap_or(0.0) < cfg.coverage_threshold {
        return Err(LabelError::Pruned(page));
    }
    Ok(match cfg.path_mode {
        PathMode::Dag => entry.dag_weight,
        PathMode::Exact => path_weight(&enumerate_paths(graph, &reach.scope, page, cfg.exact_path_cap)),
    })
}

/// `sum 2^-d` over path lengths.
pub fn path_weight(lengths: &[u32]) -> f64 {
    lengths.iter().map(|&d| 0.5f64.powi(d as i32)).sum()
}

/// Normalized shares of each candidate, in input order.
pub fn normalize_weights(candidates: &[(String, f64)]) -> Result<Vec<f64>, LabelError> {
    if candidates.is_empty() {
        return Err(LabelError::EmptyCandidates);
    }
    if let Some((label, w)) = candidates.iter().find(|(_, w)| *w <= 0.0 || !w.is_finite()) {
        return Err(LabelError::NonPositiveWeight {
            label: label.clone(),
            weight: *w,
        });
    }
    let total: f64 = candidates.iter().map(|(_, w)| w).sum();
    Ok(candidates.iter().map(|(_, w)| w / total).collect())
}

/// Normalizes the candidates' weights and keeps those strictly above
/// `threshold`, sorted by descending share then ascending label.
pub fn normalize_and_assign(
    candidates: &[(String, f64)],
    threshold: f64,
) -> Result<Vec<(String, f64)>, LabelError> {
    let shares = normalize_weights(candidates)?;
    let mut out: Vec<(String, f64)> = candidates
        .iter()
        .zip(shares)
        .filter(|&(_, s)| s > threshold)
        .map(|((l, _), s)| (l.clone(), s))
        .collect();
    sort_by_share(&mut out, |x| (&x.0, x.1));
    Ok(out)
}

fn sort_by_share<T>(items: &mut [T], key: impl Fn(&T) -> (&String, f64)) {
    items.sort_by(|a, b| {
        let (la, wa) = key(a);
        let (lb, wb) = key(b);
        wb.total_cmp(&wa).then_with(|| la.cmp(lb))
    });
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub label: String,
    pub w_raw: f64,
    pub w_norm: f64,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageLabels {
    pub page: NodeId,
    /// Sorted by descending `w_norm`, then label.
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub config: LabelingConfig,
    /// Sorted by page id.
    pub records: Vec<PageLabels>,
}

struct Candidate {
    page: NodeId,
    root: usize,
    w_raw: f64,
    depth: u32,
}

fn label_set(
    graph: &CategoryGraph,
    set: &CompetitionSet,
    cfg: &LabelingConfig,
) -> Result<Vec<(NodeId, Vec<Assignment>)>, LabelError> {
    let mode = cfg.mode;
    let max_depth = match mode {
        LabelingMode::ChildOnly => Some(cfg.max_depth.map_or(1, |d| d.min(1))),
        _ => cfg.max_depth,
    };
    let prune_coverage = mode == LabelingMode::Full;
    let per_root: Vec<Vec<Candidate>> = set
        .roots()
        .par_iter()
        .enumerate()
        .map(|(ri, root)| {
            let scope = TraversalScope::new(root, set, mode.prunes_competitors())?;
            let reach = traverse_scope(graph, &root.label, &scope, max_depth);
            let mut out = Vec::new();
            for e in reach.entries() {
                let Some(coverage) = e.coverage else { continue };
                if prune_coverage && coverage < cfg.coverage_threshold {
                    continue;
                }
                let w_raw = match cfg.path_mode {
                    PathMode::Dag => e.dag_weight,
                    PathMode::Exact => {
                        path_weight(&enumerate_paths(graph, &scope, e.node, cfg.exact_path_cap))
                    }
                };
                if w_raw > 0.0 {
                    out.push(Candidate {
                        page: e.node,
                        root: ri,
                        w_raw,
                        depth: e.depth,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_, LabelError>>()?;

    let mut candidates: Vec<Candidate> = per_root.into_iter().flatten().collect();
    candidates.sort_by_key(|c| (c.page, c.root));

    let mut out = Vec::new();
    for group in candidates.chunk_by(|a, b| a.page == b.page) {
        let weights: Vec<(String, f64)> = group
            .iter()
            .map(|c| (set.roots()[c.root].label.clone(), c.w_raw))
            .collect();
        let shares = normalize_weights(&weights)?;
        let assigned: Vec<bool> = match mode {
            LabelingMode::Full | LabelingMode::NoPruning => {
                shares.iter().map(|&s| s > cfg.assignment_threshold).collect()
            }
            LabelingMode::ChildOnly | LabelingMode::AllDescendants => vec![true; group.len()],
            LabelingMode::MinDist => {
                let min = group.iter().map(|c| c.depth).min().unwrap_or(0);
                group.iter().map(|c| c.depth == min).collect()
            }
        };
        let mut assignments: Vec<Assignment> = group
            .iter()
            .zip(weights)
            .zip(shares)
            .zip(assigned)
            .filter(|(_, keep)| *keep)
            .map(|(((c, (label, _)), share), _)| Assignment {
                label,
                w_raw: c.w_raw,
                w_norm: share,
                depth: c.depth,
            })
            .collect();
        sort_by_share(&mut assignments, |a| (&a.label, a.w_norm));
        out.push((group[0].page, assignments));
    }
    Ok(out)
}

/// Labels pages for every competition set. A page that is a candidate in
/// several sets collects the assignments of all of them; a weighted-mode
/// candidate whose shares all stay at or below the threshold is kept with
/// no assignments.
pub fn label_corpus(
    graph: &CategoryGraph,
    sets: &[CompetitionSet],
    cfg: &LabelingConfig,
) -> Result<LabeledCorpus, LabelError> {
    cfg.validate()?;
    let mut merged: BTreeMap<NodeId, Vec<Assignment>> = BTreeMap::new();
    for set in sets {
        for (page, assignments) in label_set(graph, set, cfg)? {
            merged.entry(page).or_default().extend(assignments);
        }
    }
    let records = merged
        .into_iter()
        .map(|(page, mut assignments)| {
            sort_by_share(&mut assignments, |a| (&a.label, a.w_norm));
            PageLabels { page, assignments }
        })
        .collect();
    Ok(LabeledCorpus {
        config: cfg.clone(),
        records,
    })
}

/// One line of `labels.jsonl`. `page` is the external page id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelLine {
    pub page: u64,
    pub assignments: Vec<Assignment>,
    pub mode: LabelingMode,
}

impl LabeledCorpus {
    pub fn get(&self, page: NodeId) -> Option<&PageLabels> {
        self.records
            .binary_search_by_key(&page, |r| r.page)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Pages with at least one assignment.
    pub fn labeled(&self) -> impl Iterator<Item = &PageLabels> {
        self.records.iter().filter(|r| !r.assignments.is_empty())
    }

    /// Number of pages assigned to each label.
    pub fn label_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            for a in &r.assignments {
                *counts.entry(a.label.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Records keyed by external page id.
    pub fn lines(&self, graph: &CategoryGraph) -> Vec<LabelLine> {
        self.records
            .iter()
            .map(|r| LabelLine {
                page: graph.external_id(r.page),
                assignments: r.assignments.clone(),
                mode: self.config.mode,
            })
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, graph: &CategoryGraph, mut out: W) -> std::io::Result<()> {
        for line in self.lines(graph) {
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    /// Reads `labels.jsonl`. The config is not stored in the file; the mode
    /// is taken from the lines and the remaining fields are defaults.
    pub fn read_jsonl<R: BufRead>(graph: &CategoryGraph, input: R) -> Result<Self, LabelError> {
        let mut config = LabelingConfig::default();
        let mut records = Vec::new();
        for (i, line) in read_label_lines(input)?.into_iter().enumerate() {
            let page = graph
                .node_by_external(line.page)
                .filter(|&p| graph.is_page(p))
                .ok_or_else(|| LabelError::Parse {
                    line: i + 1,
                    message: format!("unknown page id {}", line.page),
                })?;
            config.mode = line.mode;
            records.push(PageLabels {
                page,
                assignments: line.assignments,
            });
        }
        records.sort_by_key(|r| r.page);
        Ok(LabeledCorpus { config, records })
    }
}

/// Parses `labels.jsonl` without resolving page ids.
pub fn read_label_lines<R: BufRead>(input: R) -> Result<Vec<LabelLine>, LabelError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| LabelError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
