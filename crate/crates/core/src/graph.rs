//! Immutable in-memory category graph.
//!
//! Categories and pages share one dense id space. Categories take ids
//! `0..num_categories` in the order they were added, pages follow in the
//! order they were added. Adjacency is stored CSR-style in both
//! directions, with every neighbour list sorted by ascending id.
//!
//! The graph is normally loaded from four tab-separated files:
//!
//! | file             | line format                       |
//! |------------------|-----------------------------------|
//! | `categories.tsv` | `id<TAB>name`                     |
//! | `pages.tsv`      | `id<TAB>title`                    |
//! | `edges.tsv`      | `parent_id<TAB>child_id<TAB>kind` |
//! | `redirects.tsv`  | `alias_name<TAB>category_id`      |
//!
//! `kind` is `subcat` (category to category) or `member` (category to page).
//! Ids in the files are arbitrary non-negative integers shared by categories
//! and pages; they are kept as the node's external id.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}:{line}: edge references unknown node id {id}")]
    DanglingEdge { file: String, line: usize, id: u64 },
    #[error("{file}:{line}: redirect references unknown category id {id}")]
    DanglingRedirect { file: String, line: usize, id: u64 },
    #[error("duplicate category name {0:?}")]
    DuplicateName(String),
    #[error("duplicate node id {0}")]
    DuplicateId(u64),
    #[error("node {0} is not a category")]
    NotACategory(NodeId),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
}

impl GraphError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        GraphError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Dense node handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Category,
    Page,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Subcat,
    Member,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Subcat => "subcat",
            EdgeKind::Member => "member",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "subcat" => Some(EdgeKind::Subcat),
            "member" => Some(EdgeKind::Member),
            _ => None,
        }
    }
}

/// Paths of the TSV inputs. The redirects file is optional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFiles {
    pub categories: PathBuf,
    pub pages: PathBuf,
    pub edges: PathBuf,
    #[serde(default)]
    pub redirects: Option<PathBuf>,
}

impl GraphFiles {
    /// The conventional file names inside one directory. `redirects.tsv` is
    /// only used when it exists.
    pub fn in_dir(dir: &Path) -> Self {
        let redirects = dir.join("redirects.tsv");
        GraphFiles {
            categories: dir.join("categories.tsv"),
            pages: dir.join("pages.tsv"),
            edges: dir.join("edges.tsv"),
            redirects: redirects.exists().then_some(redirects),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Drop edges and redirects that point at unknown ids instead of failing.
    pub lenient: bool,
}

/// What the loader discarded along the way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub duplicate_edges: usize,
    pub dropped_edges: usize,
    pub dropped_redirects: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub categories: usize,
    pub pages: usize,
    pub edges: usize,
    pub subcat_edges: usize,
    pub member_edges: usize,
    pub aliases: usize,
}

/// Why a single builder call was rejected. The TSV loader turns these into
/// [`GraphError`]s carrying the file name and line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildIssue {
    DuplicateId(u64),
    DuplicateName(String),
    UnknownId(u64),
    PageAsParent(u64),
    KindMismatch { child: u64, kind: EdgeKind },
    AliasTargetIsPage(u64),
}

impl fmt::Display for BuildIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildIssue::DuplicateId(id) => write!(f, "duplicate node id {id}"),
            BuildIssue::DuplicateName(n) => write!(f, "duplicate category name {n:?}"),
            BuildIssue::UnknownId(id) => write!(f, "unknown node id {id}"),
            BuildIssue::PageAsParent(id) => write!(f, "page {id} cannot have children"),
            BuildIssue::KindMismatch { child, kind } => write!(
                f,
                "`{}` edge cannot point at node {child}",
                kind.as_str()
            ),
            BuildIssue::AliasTargetIsPage(id) => write!(f, "redirect target {id} is a page"),
        }
    }
}

/// Incremental construction of a [`CategoryGraph`].
///
/// All categories must be added before any page, and all nodes before any
/// edge or alias.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    external: Vec<u64>,
    num_categories: usize,
    by_external: HashMap<u64, NodeId>,
    by_name: HashMap<String, NodeId>,
    edges: Vec<(u32, u32)>,
    aliases: BTreeMap<String, NodeId>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_category(&mut self, ext: u64, name: &str) -> Result<NodeId, BuildIssue> {
        assert_eq!(
            self.names.len(),
            self.num_categories,
            "categories must be added before pages"
        );
        if self.by_name.contains_key(name) {
            return Err(BuildIssue::DuplicateName(name.to_string()));
        }
        let id = self.push_node(ext, name)?;
        self.by_name.insert(name.to_string(), id);
        self.num_categories += 1;
        Ok(id)
    }

    pub fn add_page(&mut self, ext: u64, title: &str) -> Result<NodeId, BuildIssue> {
        self.push_node(ext, title)
    }

    fn push_node(&mut self, ext: u64, name: &str) -> Result<NodeId, BuildIssue> {
        if self.by_external.contains_key(&ext) {
            return Err(BuildIssue::DuplicateId(ext));
        }
        let id = NodeId(u32::try_from(self.names.len()).expect("node count exceeds u32"));
        self.by_external.insert(ext, id);
        self.names.push(name.to_string());
        self.external.push(ext);
        Ok(id)
    }

    /// Adds an edge between two external ids. Duplicates are removed in
    /// [`GraphBuilder::build`].
    pub fn add_edge(&mut self, parent: u64, child: u64, kind: EdgeKind) -> Result<(), BuildIssue> {
        let p = *self
            .by_external
            .get(&parent)
            .ok_or(BuildIssue::UnknownId(parent))?;
        let c = *self
            .by_external
            .get(&child)
            .ok_or(BuildIssue::UnknownId(child))?;
        if p.index() >= self.num_categories {
            return Err(BuildIssue::PageAsParent(parent));
        }
        let child_is_cat = c.index() < self.num_categories;
        match (kind, child_is_cat) {
            (EdgeKind::Subcat, true) | (EdgeKind::Member, false) => {}
            _ => return Err(BuildIssue::KindMismatch { child, kind }),
        }
        self.edges.push((p.0, c.0));
        Ok(())
    }

    pub fn add_alias(&mut self, alias: &str, target: u64) -> Result<(), BuildIssue> {
        let t = *self
            .by_external
            .get(&target)
            .ok_or(BuildIssue::UnknownId(target))?;
        if t.index() >= self.num_categories {
            return Err(BuildIssue::AliasTargetIsPage(target));
        }
        self.aliases.insert(alias.to_string(), t);
        Ok(())
    }

    /// Finalizes the graph. Returns the number of duplicate edges dropped.
    pub fn build(mut self) -> (CategoryGraph, usize) {
        let n = self.names.len();
        let raw = self.edges.len();
        self.edges.sort_unstable();
        self.edges.dedup();
        let duplicates = raw - self.edges.len();

        let (child_offsets, children) = csr(n, self.edges.iter().copied());
        let mut reversed: Vec<(u32, u32)> = self.edges.iter().map(|&(p, c)| (c, p)).collect();
        reversed.sort_unstable();
        let (parent_offsets, parents) = csr(n, reversed.into_iter());

        let member_edges = self
            .edges
            .iter()
            .filter(|&&(_, c)| c as usize >= self.num_categories)
            .count();

        let graph = CategoryGraph {
            num_categories: self.num_categories,
            names: self.names,
            external: self.external,
            by_external: self.by_external,
            by_name: self.by_name,
            aliases: self.aliases,
            child_offsets,
            children,
            parent_offsets,
            parents,
            member_edges,
        };
        (graph, duplicates)
    }
}

/// Builds offsets and targets from `(source, target)` pairs sorted by source.
fn csr(n: usize, sorted: impl Iterator<Item = (u32, u32)>) -> (Vec<usize>, Vec<NodeId>) {
    let mut offsets = vec![0usize; n + 1];
    let mut targets = Vec::new();
    for (s, t) in sorted {
        offsets[s as usize + 1] += 1;
        targets.push(NodeId(t));
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    (offsets, targets)
}

#[derive(Debug, Clone)]
pub struct CategoryGraph {
    num_categories: usize,
    names: Vec<String>,
    external: Vec<u64>,
    by_external: HashMap<u64, NodeId>,
    by_name: HashMap<String, NodeId>,
    aliases: BTreeMap<String, NodeId>,
    child_offsets: Vec<usize>,
    children: Vec<NodeId>,
    parent_offsets: Vec<usize>,
    parents: Vec<NodeId>,
    member_edges: usize,
}

impl CategoryGraph {
    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    pub fn num_pages(&self) -> usize {
        self.names.len() - self.num_categories
    }

    pub fn num_edges(&self) -> usize {
        self.children.len()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.names.len()
    }

    pub fn kind(&self, id: NodeId) -> Option<NodeKind> {
        if id.index() < self.num_categories {
            Some(NodeKind::Category)
        } else if id.index() < self.names.len() {
            Some(NodeKind::Page)
        } else {
            None
        }
    }

    #[inline]
    pub fn is_category(&self, id: NodeId) -> bool {
        id.index() < self.num_categories
    }

    #[inline]
    pub fn is_page(&self, id: NodeId) -> bool {
        id.index() >= self.num_categories && id.index() < self.names.len()
    }

    /// Category name or page title.
    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn external_id(&self, id: NodeId) -> u64 {
        self.external[id.index()]
    }

    pub fn node_by_external(&self, ext: u64) -> Option<NodeId> {
        self.by_external.get(&ext).copied()
    }

    /// Exact canonical-name lookup.
    pub fn category_by_name(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    /// Canonical name first, then redirect aliases.
    pub fn resolve_category(&self, name: &str) -> Option<NodeId> {
        self.category_by_name(name)
            .or_else(|| self.aliases.get(name).copied())
    }

    /// First page with the given title, if any. Linear scan.
    pub fn page_by_title(&self, title: &str) -> Option<NodeId> {
        self.pages().find(|&p| self.name(p) == title)
    }

    pub fn aliases(&self) -> impl Iterator<Item = (&str, NodeId)> + '_ {
        self.aliases.iter().map(|(a, &id)| (a.as_str(), id))
    }

    pub fn categories(&self) -> impl Iterator<Item = NodeId> {
        (0..self.num_categories as u32).map(NodeId)
    }

    pub fn pages(&self) -> impl Iterator<Item = NodeId> {
        (self.num_categories as u32..self.names.len() as u32).map(NodeId)
    }

    /// Children of a category in ascending id order.
    pub fn children(&self, cat: NodeId) -> Result<&[NodeId], GraphError> {
        match self.kind(cat) {
            Some(NodeKind::Category) => Ok(self.out(cat)),
            Some(NodeKind::Page) => Err(GraphError::NotACategory(cat)),
            None => Err(GraphError::UnknownNode(cat)),
        }
    }

    /// Parent categories in ascending id order.
    pub fn parents(&self, node: NodeId) -> Result<&[NodeId], GraphError> {
        if self.contains(node) {
            Ok(self.inc(node))
        } else {
            Err(GraphError::UnknownNode(node))
        }
    }

    #[inline]
    pub(crate) fn out(&self, id: NodeId) -> &[NodeId] {
        let i = id.index();
        &self.children[self.child_offsets[i]..self.child_offsets[i + 1]]
    }

    #[inline]
    pub(crate) fn inc(&self, id: NodeId) -> &[NodeId] {
        let i = id.index();
        &self.parents[self.parent_offsets[i]..self.parent_offsets[i + 1]]
    }

    /// All edges as `(parent, child, kind)`, ordered by parent then child.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, EdgeKind)> + '_ {
        self.categories().flat_map(move |p| {
            self.out(p).iter().map(move |&c| {
                let kind = if self.is_category(c) {
                    EdgeKind::Subcat
                } else {
                    EdgeKind::Member
                };
                (p, c, kind)
            })
        })
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            categories: self.num_categories(),
            pages: self.num_pages(),
            edges: self.num_edges(),
            subcat_edges: self.num_edges() - self.member_edges,
            member_edges: self.member_edges,
            aliases: self.aliases.len(),
        }
    }

    /// Writes the deduplicated edge list in `edges.tsv` format, using
    /// external ids.
    pub fn write_edges_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (p, c, kind) in self.edges() {
            writeln!(
                out,
                "{}\t{}\t{}",
                self.external_id(p),
                self.external_id(c),
                kind.as_str()
            )?;
        }
        Ok(())
    }
}

/// Loads and validates a graph from the TSV inputs.
pub fn load_graph(
    files: &GraphFiles,
    opts: LoadOptions,
) -> Result<(CategoryGraph, LoadReport), GraphError> {
    let open = |path: &Path| -> Result<BufReader<File>, GraphError> {
        File::open(path)
            .map(BufReader::new)
            .map_err(|e| GraphError::io(path, e))
    };
    let redirects = match &files.redirects {
        Some(p) => Some((p.display().to_string(), open(p)?)),
        None => None,
    };
    parse_graph(
        (files.categories.display().to_string(), open(&files.categories)?),
        (files.pages.display().to_string(), open(&files.pages)?),
        (files.edges.display().to_string(), open(&files.edges)?),
        redirects,
        opts,
    )
}

/// Same as [`load_graph`] over arbitrary readers. Each source is paired
/// with the name used in error messages.
pub fn parse_graph<R: BufRead>(
    categories: (String, R),
    pages: (String, R),
    edges: (String, R),
    redirects: Option<(String, R)>,
    opts: LoadOptions,
) -> Result<(CategoryGraph, LoadReport), GraphError> {
    let mut builder = GraphBuilder::new();
    let mut report = LoadReport::default();

    for_each_record(categories, 2, |file, line, f| {
        let id = parse_id(file, line, f[0])?;
        builder.add_category(id, f[1]).map_err(|issue| match issue {
            BuildIssue::DuplicateName(n) => GraphError::DuplicateName(n),
            other => parse_err(file, line, other.to_string()),
        })?;
        Ok(())
    })?;

    for_each_record(pages, 2, |file, line, f| {
        let id = parse_id(file, line, f[0])?;
        builder
            .add_page(id, f[1])
            .map_err(|issue| parse_err(file, line, issue.to_string()))?;
        Ok(())
    })?;

    for_each_record(edges, 3, |file, line, f| {
        let parent = parse_id(file, line, f[0])?;
        let child = parse_id(file, line, f[1])?;
        let kind = EdgeKind::parse(f[2])
            .ok_or_else(|| parse_err(file, line, format!("unknown edge kind {:?}", f[2])))?;
        match builder.add_edge(parent, child, kind) {
            Ok(()) => Ok(()),
            Err(BuildIssue::UnknownId(_)) if opts.lenient => {
                report.dropped_edges += 1;
                Ok(())
            }
            Err(BuildIssue::UnknownId(id)) => Err(GraphError::DanglingEdge {
                file: file.to_string(),
                line,
                id,
            }),
            Err(issue) => Err(parse_err(file, line, issue.to_string())),
        }
    })?;

    if let Some(redirects) = redirects {
        for_each_record(redirects, 2, |file, line, f| {
            let target = parse_id(file, line, f[1])?;
            match builder.add_alias(f[0], target) {
                Ok(()) => Ok(()),
                Err(BuildIssue::UnknownId(_)) if opts.lenient => {
                    report.dropped_redirects += 1;
                    Ok(())
                }
                Err(BuildIssue::UnknownId(id)) => Err(GraphError::DanglingRedirect {
                    file: file.to_string(),
                    line,
                    id,
                }),
                Err(issue) => Err(parse_err(file, line, issue.to_string())),
            }
        })?;
    }

    if report.dropped_edges > 0 || report.dropped_redirects > 0 {
        log::warn!(
            "dropped {} dangling edges and {} dangling redirects",
            report.dropped_edges,
            report.dropped_redirects
        );
    }
    let (graph, duplicates) = builder.build();
    report.duplicate_edges = duplicates;
    Ok((graph, report))
}

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_id(file: &str, line: usize, s: &str) -> Result<u64, GraphError> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(file, line, format!("invalid id {s:?}")))
}

/// Calls `f` with the tab-separated fields of every non-blank line. Lines
/// must have exactly `arity` fields.
fn for_each_record<R: BufRead>(
    (file, reader): (String, R),
    arity: usize,
    mut f: impl FnMut(&str, usize, &[&str]) -> Result<(), GraphError>,
) -> Result<(), GraphError> {
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| GraphError::Io {
            path: file.clone(),
            source: e,
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != arity {
            return Err(parse_err(
                &file,
                lineno,
                format!("expected {arity} tab-separated fields, found {}", fields.len()),
            ));
        }
        f(&file, lineno, &fields)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(cats: &str, pages: &str, edges: &str, opts: LoadOptions) -> Result<(CategoryGraph, LoadReport), GraphError> {
        parse_graph(
            ("categories.tsv".into(), cats.as_bytes()),
            ("pages.tsv".into(), pages.as_bytes()),
            ("edges.tsv".into(), edges.as_bytes()),
            None,
            opts,
        )
    }

    const CATS: &str = "10\tVehicles\n11\tTrucks\n12\tBuses\n";
    const PAGES: &str = "20\tFord F-Max\n21\tDouble-decker bus\n";
    const EDGES: &str = "10\t11\tsubcat\n10\t12\tsubcat\n11\t20\tmember\n12\t21\tmember\n";

    #[test]
    fn empty_files_give_empty_graph() {
        let (g, _) = parse("", "", "", LoadOptions::default()).unwrap();
        assert_eq!(g.stats(), GraphStats::default());
    }

    #[test]
    fn small_fixture_counts() {
        let (g, report) = parse(CATS, PAGES, EDGES, LoadOptions::default()).unwrap();
        let s = g.stats();
        assert_eq!((s.categories, s.pages, s.edges), (3, 2, 4));
        assert_eq!((s.subcat_edges, s.member_edges), (2, 2));
        assert_eq!(report.duplicate_edges, 0);
    }

    #[test]
    fn duplicate_edge_counted_once() {
        let edges = format!("{EDGES}10\t11\tsubcat\n");
        let (g, report) = parse(CATS, PAGES, &edges, LoadOptions::default()).unwrap();
        assert_eq!(g.num_edges(), 4);
        assert_eq!(report.duplicate_edges, 1);
        let edges = format!("{EDGES}10\t11\tsubcat\n11\t20\tmember\n10\t11\tsubcat\n");
        let (g, _) = parse(CATS, PAGES, &edges, LoadOptions::default()).unwrap();
        assert_eq!(g.num_edges(), 4);
    }

    #[test]
    fn children_and_parents() {
        let (g, _) = parse(CATS, PAGES, EDGES, LoadOptions::default()).unwrap();
        let vehicles = g.category_by_name("Vehicles").unwrap();
        let trucks = g.category_by_name("Trucks").unwrap();
        let fmax = g.page_by_title("Ford F-Max").unwrap();
        assert_eq!(g.children(vehicles).unwrap().len(), 2);
        assert_eq!(g.children(trucks).unwrap(), &[fmax]);
        assert_eq!(g.parents(fmax).unwrap(), &[trucks]);
        assert!(g.parents(vehicles).unwrap().is_empty());
        assert!(matches!(g.children(fmax), Err(GraphError::NotACategory(_))));
        assert!(matches!(g.parents(NodeId(99)), Err(GraphError::UnknownNode(_))));
    }

    #[test]
    fn leaf_category_has_no_children() {
        let (g, _) = parse("1\tEmpty\n", "", "", LoadOptions::default()).unwrap();
        assert!(g.children(NodeId(0)).unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_file_and_line() {
        let err = parse(CATS, "20\tFord F-Max\nnot a page line\n", "", LoadOptions::default())
            .unwrap_err();
        match err {
            GraphError::Parse { file, line, .. } => {
                assert_eq!(file, "pages.tsv");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
        let err = parse(CATS, PAGES, "10\t11\tsee_also\n", LoadOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("edges.tsv:1:"), "{err}");
    }

    #[test]
    fn dangling_edge_strict_and_lenient() {
        let edges = format!("{EDGES}10\t99\tsubcat\n");
        let err = parse(CATS, PAGES, &edges, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GraphError::DanglingEdge { line: 5, id: 99, .. }));
        let (g, report) = parse(CATS, PAGES, &edges, LoadOptions { lenient: true }).unwrap();
        assert_eq!(g.num_edges(), 4);
        assert_eq!(report.dropped_edges, 1);
    }

    #[test]
    fn duplicate_name_rejected() {
        let err = parse("1\tTrucks\n2\tTrucks\n", "", "", LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GraphError::DuplicateName(n) if n == "Trucks"));
    }

    #[test]
    fn structural_edge_errors() {
        // page as parent
        assert!(parse(CATS, PAGES, "20\t21\tmember\n", LoadOptions { lenient: true }).is_err());
        // member edge to a category
        assert!(parse(CATS, PAGES, "10\t11\tmember\n", LoadOptions::default()).is_err());
        // subcat edge to a page
        assert!(parse(CATS, PAGES, "10\t20\tsubcat\n", LoadOptions::default()).is_err());
        // id shared by a category and a page
        assert!(parse(CATS, "10\tClash\n", "", LoadOptions::default()).is_err());
    }

    #[test]
    fn redirects_resolve_to_categories() {
        let (g, _) = parse_graph(
            ("c".into(), "1\tAttention deficit disorder\n".as_bytes()),
            ("p".into(), "".as_bytes()),
            ("e".into(), "".as_bytes()),
            Some(("r".into(), "A.D.D.\t1\n".as_bytes())),
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(g.resolve_category("A.D.D."), Some(NodeId(0)));
        assert_eq!(g.stats().aliases, 1);
    }

    #[test]
    fn edge_list_round_trip() {
        let (g, _) = parse(CATS, PAGES, EDGES, LoadOptions::default()).unwrap();
        let mut out = Vec::new();
        g.write_edges_tsv(&mut out).unwrap();
        let (g2, _) = parse(CATS, PAGES, std::str::from_utf8(&out).unwrap(), LoadOptions::default()).unwrap();
        let a: Vec<_> = g.edges().collect();
        let b: Vec<_> = g2.edges().collect();
        assert_eq!(a, b);
        let mut lines: Vec<&str> = EDGES.lines().collect();
        lines.sort();
        let mut emitted: Vec<&str> = std::str::from_utf8(&out).unwrap().lines().collect();
        emitted.sort();
        assert_eq!(lines, emitted);
    }
}
