//! Compact binary snapshot of a loaded [`CategoryGraph`].
//!
//! All integers are little-endian. Layout, version 1:
//!
//! ```text
//! magic            8 bytes   b"WIKICATG"
//! version          u32       1
//! num_categories   u64
//! num_pages        u64
//! num_edges        u64
//! num_aliases      u64
//! nodes            num_categories + num_pages records, in id order:
//!                    external_id u64, name_len u32, name (UTF-8)
//! child_offsets    (num_nodes + 1) x u64, CSR offsets into `children`
//! children         num_edges x u32, dense child ids
//! aliases          num_aliases records, sorted by alias:
//!                    alias_len u32, alias (UTF-8), target u32
//! ```
//!
//! Parent adjacency is rebuilt on load. Loading goes through the same
//! [`GraphBuilder`] validation as the TSV path, so a snapshot behaves exactly
//! like the graph it was written from.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::graph::{CategoryGraph, EdgeKind, GraphBuilder, GraphError, NodeId};

pub const MAGIC: &[u8; 8] = b"WIKICATG";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(graph: &CategoryGraph, mut out: W) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    let aliases: Vec<(&str, NodeId)> = graph.aliases().collect();
    for n in [
        graph.num_categories(),
        graph.num_pages(),
        graph.num_edges(),
        aliases.len(),
    ] {
        out.write_all(&(n as u64).to_le_bytes())?;
    }
    for i in 0..graph.num_nodes() {
        let id = NodeId(i as u32);
        out.write_all(&graph.external_id(id).to_le_bytes())?;
        write_str(&mut out, graph.name(id))?;
    }
    let mut offset = 0u64;
    out.write_all(&offset.to_le_bytes())?;
    for i in 0..graph.num_nodes() {
        offset += graph.out(NodeId(i as u32)).len() as u64;
        out.write_all(&offset.to_le_bytes())?;
    }
    for i in 0..graph.num_nodes() {
        for c in graph.out(NodeId(i as u32)) {
            out.write_all(&c.0.to_le_bytes())?;
        }
    }
    for (alias, target) in aliases {
        write_str(&mut out, alias)?;
        out.write_all(&target.0.to_le_bytes())?;
    }
    out.flush()
}

fn write_str<W: Write>(out: &mut W, s: &str) -> std::io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

pub fn save_snapshot(graph: &CategoryGraph, path: &Path) -> Result<(), GraphError> {
    let file = File::create(path).map_err(|e| GraphError::io(path, e))?;
    write_snapshot(graph, BufWriter::new(file)).map_err(|e| GraphError::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<CategoryGraph, GraphError> {
    let file = File::open(path).map_err(|e| GraphError::io(path, e))?;
    read_snapshot(BufReader::new(file))
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], GraphError> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| GraphError::Snapshot(format!("truncated: {e}")))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, GraphError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, GraphError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn string(&mut self) -> Result<String, GraphError> {
        let len = self.u32()? as usize;
        let mut buf = vec![0u8; len];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| GraphError::Snapshot(format!("truncated: {e}")))?;
        String::from_utf8(buf).map_err(|_| GraphError::Snapshot("name is not UTF-8".into()))
    }
}

pub fn read_snapshot<R: Read>(inner: R) -> Result<CategoryGraph, GraphError> {
    let mut r = Reader { inner };
    if &r.bytes::<8>()? != MAGIC {
        return Err(GraphError::Snapshot("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(GraphError::Snapshot(format!("unsupported version {version}")));
    }
    let num_categories = r.u64()? as usize;
    let num_pages = r.u64()? as usize;
    let num_edges = r.u64()? as usize;
    let num_aliases = r.u64()? as usize;
    let num_nodes = num_categories
        .checked_add(num_pages)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| GraphError::Snapshot("node count out of range".into()))?;

    let bad = |issue: crate::graph::BuildIssue| GraphError::Snapshot(issue.to_string());
    let mut builder = GraphBuilder::new();
    let mut external = Vec::with_capacity(num_nodes);
    for i in 0..num_nodes {
        let ext = r.u64()?;
        let name = r.string()?;
        if i < num_categories {
            builder.add_category(ext, &name).map_err(bad)?;
        } else {
            builder.add_page(ext, &name).map_err(bad)?;
        }
        external.push(ext);
    }

    let mut offsets = Vec::with_capacity(num_nodes + 1);
    for _ in 0..=num_nodes {
        offsets.push(r.u64()? as usize);
    }
    if offsets[0] != 0
        || offsets[num_nodes] != num_edges
        || offsets.windows(2).any(|w| w[0] > w[1])
    {
        return Err(GraphError::Snapshot("inconsistent adjacency offsets".into()));
    }
    for parent in 0..num_nodes {
        for _ in offsets[parent]..offsets[parent + 1] {
            let child = r.u32()? as usize;
            if child >= num_nodes {
                return Err(GraphError::Snapshot(format!("child id {child} out of range")));
            }
            let kind = if child < num_categories {
                EdgeKind::Subcat
            } else {
                EdgeKind::Member
            };
            builder
                .add_edge(external[parent], external[child], kind)
                .map_err(bad)?;
        }
    }
    for _ in 0..num_aliases {
        let alias = r.string()?;
        let target = r.u32()? as usize;
        if target >= num_nodes {
            return Err(GraphError::Snapshot(format!("alias target {target} out of range")));
        }
        builder.add_alias(&alias, external[target]).map_err(bad)?;
    }
    let (graph, duplicates) = builder.build();
    if duplicates > 0 {
        return Err(GraphError::Snapshot("duplicate edges".into()));
    }
    Ok(graph)
}
