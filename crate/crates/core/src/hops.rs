//! All-pairs hop distances by one breadth-first search per source node.

use alloc::collections::TryReserveError;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::HopError;
use crate::graph::{Graph, NodeId};

mod sealed {
    pub trait Sealed {}
    impl Sealed for u8 {}
    impl Sealed for u16 {}
}

/// Unsigned integer type used for hop matrix entries. The maximum value of the
/// type is reserved as the "unreachable" sentinel.
pub trait HopEntry: sealed::Sealed + Copy + Eq + Send + Sync + core::fmt::Debug + 'static {
    const UNREACHABLE: Self;
    const BITS: u32;
    /// Largest storable finite hop count.
    const MAX_FINITE: u32;

    fn from_hops(hops: u32) -> Self;
    fn hops(self) -> u32;

    #[inline]
    fn finite(self) -> Option<u32> {
        if self == Self::UNREACHABLE {
            None
        } else {
            Some(self.hops())
        }
    }
}

impl HopEntry for u8 {
    const UNREACHABLE: Self = u8::MAX;
    const BITS: u32 = 8;
    const MAX_FINITE: u32 = u8::MAX as u32 - 1;

    #[inline]
    fn from_hops(hops: u32) -> Self {
        hops as u8
    }
    #[inline]
    fn hops(self) -> u32 {
        self as u32
    }
}

impl HopEntry for u16 {
    const UNREACHABLE: Self = u16::MAX;
    const BITS: u32 = 16;
    const MAX_FINITE: u32 = u16::MAX as u32 - 1;

    #[inline]
    fn from_hops(hops: u32) -> Self {
        hops as u16
    }
    #[inline]
    fn hops(self) -> u32 {
        self as u32
    }
}

/// Dense `n x n` matrix of shortest-path hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopMatrix<E: HopEntry = u16> {
    n: usize,
    entries: Vec<E>,
    max_finite_hop: u32,
}

impl<E: HopEntry> HopMatrix<E> {
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Largest finite entry, i.e. the diameter taken over reachable pairs.
    pub fn max_finite_hop(&self) -> u32 {
        self.max_finite_hop
    }

    /// Hop count from `i` to `j`, `None` when no path exists.
    #[inline]
    pub fn get(&self, i: NodeId, j: NodeId) -> Option<u32> {
        self.entries[i * self.n + j].finite()
    }

    #[inline]
    pub fn row(&self, i: NodeId) -> &[E] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Builds a matrix from raw row-major entries. Used by oracles and tests.
    pub fn from_entries(n: usize, entries: Vec<E>) -> Self {
        assert_eq!(entries.len(), n * n, "hop matrix must be n x n");
        let max_finite_hop = entries.iter().filter_map(|e| e.finite()).max().unwrap_or(0);
        Self {
            n,
            entries,
            max_finite_hop,
        }
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }
}

fn try_alloc<E: HopEntry>(n: usize) -> Result<Vec<E>, HopError> {
    let bytes = (n as u128) * (n as u128) * (E::BITS as u128 / 8);
    let cap_err = |_: Option<TryReserveError>| HopError::Capacity { n, bytes };
    let len = n.checked_mul(n).ok_or_else(|| cap_err(None))?;
    let mut entries = Vec::new();
    entries.try_reserve_exact(len).map_err(|e| cap_err(Some(e)))?;
    entries.resize(len, E::UNREACHABLE);
    Ok(entries)
}

/// Fills `row` with hop counts from `source`; returns the largest one.
fn bfs_row<E: HopEntry>(
    g: &Graph,
    source: NodeId,
    row: &mut [E],
    queue: &mut Vec<u32>,
) -> Result<u32, HopError> {
    queue.clear();
    row[source] = E::from_hops(0);
    queue.push(source as u32);
    let mut head = 0;
    let mut deepest = 0;
    while head < queue.len() {
        let u = queue[head] as usize;
        head += 1;
        let next = row[u].hops() + 1;
        for &v in g.neighbors(u) {
            let slot = &mut row[v as usize];
            if *slot == E::UNREACHABLE {
                if next > E::MAX_FINITE {
                    return Err(HopError::HopOverflow {
                        node: source,
                        hops: next,
                        bits: E::BITS,
                        max: E::MAX_FINITE,
                    });
                }
                *slot = E::from_hops(next);
                deepest = next;
                queue.push(v);
            }
        }
    }
    Ok(deepest)
}

/// Computes the hop matrix of `g` with one BFS per source node.
///
/// Fails instead of wrapping when a distance does not fit the entry type, and
/// when the `n^2` entries cannot be allocated.
pub fn hop_matrix<E: HopEntry>(g: &Graph) -> Result<HopMatrix<E>, HopError> {
    let n = g.node_count();
    let mut entries = try_alloc::<E>(n)?;
    let max_finite_hop = fill_rows(g, &mut entries)?;
    Ok(HopMatrix {
        n,
        entries,
        max_finite_hop,
    })
}

#[cfg(feature = "parallel")]
fn fill_rows<E: HopEntry>(g: &Graph, entries: &mut [E]) -> Result<u32, HopError> {
    use rayon::prelude::*;
    let n = g.node_count();
    entries
        .par_chunks_mut(n)
        .enumerate()
        .map_init(Vec::new, |queue, (source, row)| bfs_row(g, source, row, queue))
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

#[cfg(not(feature = "parallel"))]
fn fill_rows<E: HopEntry>(g: &Graph, entries: &mut [E]) -> Result<u32, HopError> {
    let n = g.node_count();
    let mut queue = Vec::new();
    let mut max = 0;
    for (source, row) in entries.chunks_mut(n).enumerate() {
        max = max.max(bfs_row(g, source, row, &mut queue)?);
    }
    Ok(max)
}

/// Nodes at exactly `hop` hops from a fixed node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopPartition {
    pub hop: u32,
    pub nodes: Vec<NodeId>,
}

/// Non-empty finite hop shells around `u`, in increasing hop order. The node
/// itself (hop 0) and unreachable nodes are not part of any shell.
pub fn hop_partitions<E: HopEntry>(h: &HopMatrix<E>, u: NodeId) -> Vec<HopPartition> {
    let mut shells: Vec<Vec<NodeId>> = vec![Vec::new(); h.max_finite_hop() as usize + 1];
    for (v, e) in h.row(u).iter().enumerate() {
        if let Some(hop) = e.finite() {
            if hop > 0 {
                shells[hop as usize].push(v);
            }
        }
    }
    shells
        .into_iter()
        .enumerate()
        .filter(|(_, nodes)| !nodes.is_empty())
        .map(|(hop, nodes)| HopPartition {
            hop: hop as u32,
            nodes,
        })
        .collect()
}

/// Per-node hop shell sizes `|N_u^(h)|` for `h` in `0..=max_finite_hop`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopProfile {
    width: usize,
    counts: Vec<u32>,
}

impl HopProfile {
    pub fn new<E: HopEntry>(h: &HopMatrix<E>) -> Self {
        let width = h.max_finite_hop() as usize + 1;
        let mut counts = vec![0u32; h.node_count() * width];
        for (u, shell) in counts.chunks_mut(width).enumerate() {
            for e in h.row(u) {
                if let Some(hop) = e.finite() {
                    shell[hop as usize] += 1;
                }
            }
        }
        Self { width, counts }
    }

    /// Shell sizes of `u`, indexed by hop count.
    #[inline]
    pub fn shells(&self, u: NodeId) -> &[u32] {
        &self.counts[u * self.width..(u + 1) * self.width]
    }

    /// Number of nodes reachable from `u`, excluding `u`.
    pub fn reachable(&self, u: NodeId) -> usize {
        self.shells(u)[1..].iter().map(|&c| c as usize).sum()
    }
}

/// Counts of unordered node pairs per hop distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopHistogram {
    /// `counts[h]` pairs at `h` hops; index 0 is always zero.
    pub counts: Vec<u64>,
    pub unreachable: u64,
}

impl HopHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.unreachable
    }
}

pub fn hop_histogram<E: HopEntry>(h: &HopMatrix<E>) -> HopHistogram {
    let mut counts = vec![0u64; h.max_finite_hop() as usize + 1];
    let mut unreachable = 0;
    for i in 0..h.node_count() {
        for e in &h.row(i)[i + 1..] {
            match e.finite() {
                Some(hop) => counts[hop as usize] += 1,
                None => unreachable += 1,
            }
        }
    }
    HopHistogram {
        counts,
        unreachable,
    }
}
