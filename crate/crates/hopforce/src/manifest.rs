use std::fs;
use std::path::{Path, PathBuf};

use hopforce_core::Graph;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::settings::Settings;

/// Everything needed to rerun an embedding byte-for-byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub input: PathBuf,
    pub graph_digest: String,
    pub nodes: usize,
    pub edges: usize,
    pub config: Settings,
    pub iterations_run: u64,
    pub stop_reason: String,
    pub final_total_force: f64,
    pub wall_time_secs: f64,
    pub embedding_digest: String,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serialises");
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(path, e.line(), e.to_string()))
    }
}

/// SHA-256 over the canonical form of `graph`: every node token, then every
/// edge as a token pair in lexicographic order, both lists sorted. Independent
/// of line order, edge direction and duplicates in the source file.
pub fn graph_digest(graph: &Graph) -> String {
    let mut nodes: Vec<&str> = graph.labels().iter().map(String::as_str).collect();
    nodes.sort_unstable();
    let mut edges: Vec<(&str, &str)> = graph
        .edges()
        .map(|(u, v)| {
            let (a, b) = (graph.label(u), graph.label(v));
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    edges.sort_unstable();

    let mut hasher = Sha256::new();
    for node in nodes {
        hasher.update(b"n\t");
        hasher.update(node.as_bytes());
        hasher.update(b"\n");
    }
    for (a, b) in edges {
        hasher.update(b"e\t");
        hasher.update(a.as_bytes());
        hasher.update(b"\t");
        hasher.update(b.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
