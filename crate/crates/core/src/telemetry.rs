//! Embedding progression statistics: distance spread per hop shell and total
//! force magnitude.

use alloc::vec;
use alloc::vec::Vec;

use crate::force::ForceVector;
use crate::geometry::Embedding;
use crate::hops::{HopEntry, HopMatrix};

/// Mean and population standard deviation of a set of distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistStats {
    pub count: u64,
    pub mean: f64,
    pub std: f64,
}

/// Distance statistics of the unordered pairs at one hop distance; `stats` is
/// `None` when no pair sits at that distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopDistStats {
    pub hop: u32,
    pub stats: Option<DistStats>,
}

/// One telemetry row per engine step.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: u64,
    pub total_force: f64,
    /// Per-hop distance statistics for `h = 1..=max_finite_hop`, only on the
    /// iterations where they were sampled.
    pub per_hop: Option<Vec<HopDistStats>>,
}

/// Running mean / sum of squared deviations, merged pairwise.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / count as f64;
        self.mean += delta * weight;
        self.m2 += other.m2 + delta * delta * self.count as f64 * weight;
        self.count = count;
    }

    fn finish(&self) -> Option<DistStats> {
        (self.count > 0).then(|| DistStats {
            count: self.count,
            mean: self.mean,
            std: libm::sqrt((self.m2 / self.count as f64).max(0.0)),
        })
    }
}

fn row_moments<E: HopEntry>(positions: &Embedding, h: &HopMatrix<E>, u: usize, acc: &mut [Moments]) {
    for (v, e) in h.row(u).iter().enumerate().skip(u + 1) {
        if let Some(hop) = e.finite() {
            acc[hop as usize].push(positions.distance(u, v));
        }
    }
}

/// Mean and population standard deviation of `|z_u - z_v|` over unordered
/// pairs, grouped by hop distance `1..=max_finite_hop`.
///
/// Rows are accumulated independently (in parallel with the `parallel`
/// feature) and merged in row order, so the result does not depend on the
/// thread count.
pub fn pairdist_stats<E: HopEntry>(positions: &Embedding, h: &HopMatrix<E>) -> Vec<HopDistStats> {
    assert_eq!(positions.len(), h.node_count(), "embedding and hop matrix disagree on n");
    let width = h.max_finite_hop() as usize + 1;
    let n = h.node_count();
    let mut per_row = vec![Moments::default(); n * width];

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        per_row
            .par_chunks_mut(width)
            .enumerate()
            .for_each(|(u, acc)| row_moments(positions, h, u, acc));
    }
    #[cfg(not(feature = "parallel"))]
    for (u, acc) in per_row.chunks_mut(width).enumerate() {
        row_moments(positions, h, u, acc);
    }

    let mut totals = vec![Moments::default(); width];
    for acc in per_row.chunks(width) {
        for (t, a) in totals.iter_mut().zip(acc) {
            t.merge(a);
        }
    }
    totals
        .iter()
        .enumerate()
        .skip(1)
        .map(|(hop, m)| HopDistStats {
            hop: hop as u32,
            stats: m.finish(),
        })
        .collect()
}

/// Sum of the Euclidean norms of the given forces.
pub fn total_force_norm(forces: &[ForceVector]) -> f64 {
    forces.iter().map(ForceVector::norm).sum()
}
