//! Force-directed graph embedding driven by hop distances.
//!
//! Every node of an undirected graph is placed in `R^d`. Nodes attract each
//! other with a strength that decays geometrically in their hop distance and
//! is averaged within each hop shell, and repel each other with a strength
//! proportional to the hop distance that decays exponentially with the
//! Euclidean distance. Each step divides the net force by the node degree
//! (its "mass"), randomly drops gradient components and applies the update to
//! all nodes at once.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. The `parallel` feature (on by default) runs the per-source BFS and
//! the per-node force evaluation on rayon.
//!
//! ```
//! use hopforce_core::{embed, parse_edge_list, EmbedConfig};
//!
//! let parsed = parse_edge_list("0 1\n1 2\n2 0\n").unwrap();
//! let cfg = EmbedConfig { dim: 2, drop_prob: 0.0, seed: 7, ..EmbedConfig::default() };
//! let run = embed(&parsed.graph, &cfg).unwrap();
//! assert_eq!(run.positions.len(), 3);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod drop;
pub mod engine;
pub mod error;
pub mod force;
pub mod geometry;
pub mod graph;
pub mod hops;
pub mod telemetry;

pub use drop::random_drop;
pub use engine::{
    embed, embed_with_hops, step, EmbedConfig, EmbedOutcome, Embedder, EmbeddingState, Execution,
    StopReason,
};
pub use error::{ConfigError, EngineError, GraphError, HopError};
pub use force::{
    attractive_force, net_force, node_gradient, pair_geometry, repulsive_force, ForceField,
    ForceParams, ForceVector, SignConvention, UnreachablePolicy, COINCIDENT_EPS,
};
pub use geometry::Embedding;
pub use graph::{parse_edge_list, Graph, GraphBuilder, IngestReport, NodeId, ParsedGraph};
pub use hops::{
    hop_histogram, hop_matrix, hop_partitions, HopEntry, HopHistogram, HopMatrix, HopPartition,
    HopProfile,
};
pub use telemetry::{pairdist_stats, total_force_norm, DistStats, HopDistStats, IterationRecord};
