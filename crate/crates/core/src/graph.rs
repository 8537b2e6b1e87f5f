//! Undirected, unweighted graphs in compressed adjacency form.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::GraphError;

/// Dense node index in `0..n`.
pub type NodeId = usize;

/// Immutable undirected graph.
///
/// Node ids are dense and assigned in first-appearance order; the original
/// token of every node is kept so results can be written back under it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    labels: Vec<String>,
    index: BTreeMap<String, NodeId>,
}

/// What ingestion dropped on the way to a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedGraph {
    pub graph: Graph,
    pub report: IngestReport,
}

impl Graph {
    /// Builds a graph on `n` nodes labelled `"0"..n` from dense edge pairs.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::new();
        for u in 0..n {
            builder.add_node(&u.to_string());
        }
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            builder.add_edge_ids(u, v);
        }
        Ok(builder.build()?.graph)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Sorted neighbours of `u`.
    pub fn neighbors(&self, u: NodeId) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.offsets.windows(2).map(|w| w[1] - w[0])
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }
}

/// Incremental construction from node tokens or dense ids.
///
/// Self-loops and repeated edges (in either direction) are dropped and
/// counted in the [`IngestReport`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: Vec<(u32, u32)>,
    self_loops: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the dense id of `token`, assigning the next free id on first sight.
    pub fn add_node(&mut self, token: &str) -> NodeId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, a: &str, b: &str) {
        let u = self.add_node(a);
        let v = self.add_node(b);
        self.add_edge_ids(u, v);
    }

    fn add_edge_ids(&mut self, u: NodeId, v: NodeId) {
        if u == v {
            self.self_loops += 1;
        } else {
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            self.edges.push((a as u32, b as u32));
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn build(mut self) -> Result<ParsedGraph, GraphError> {
        let n = self.labels.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        self.edges.sort_unstable();
        let raw = self.edges.len();
        self.edges.dedup();
        let duplicate_edges = raw - self.edges.len();

        let mut degree = alloc::vec![0usize; n];
        for &(u, v) in &self.edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = alloc::vec![0u32; 2 * self.edges.len()];
        for &(u, v) in &self.edges {
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for u in 0..n {
            targets[offsets[u]..offsets[u + 1]].sort_unstable();
        }

        Ok(ParsedGraph {
            graph: Graph {
                offsets,
                targets,
                labels: self.labels,
                index: self.index,
            },
            report: IngestReport {
                self_loops: self.self_loops,
                duplicate_edges,
            },
        })
    }
}

/// Parses a whitespace-separated edge list.
///
/// Lines starting with `#` and blank lines are skipped. A line with one token
/// declares a (possibly isolated) node, a line with two tokens an edge.
pub fn parse_edge_list(text: &str) -> Result<ParsedGraph, GraphError> {
    let mut builder = GraphBuilder::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), None, _) => {
                builder.add_node(a);
            }
            (Some(a), Some(b), None) => builder.add_edge(a, b),
            _ => {
                return Err(GraphError::Parse {
                    line: i + 1,
                    message: format!(
                        "expected one or two node tokens, found {}",
                        line.split_whitespace().count()
                    ),
                })
            }
        }
    }
    builder.build()
}
