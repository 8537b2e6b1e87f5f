//! Hop-aware attractive and repulsive forces.
//!
//! For a node `u` with position `z_u`, and `z_uv = z_v - z_u`:
//!
//! * attraction: `sum_h 1/|N_u^(h)| * sum_{v in N_u^(h)} alpha^(h-1) * |z_uv| * unit_uv`
//!   over the non-empty finite hop shells of `u`;
//! * repulsion: `1/|V| * sum_{v != u} h_uv * exp(-|z_uv|) * (-unit_uv)`.
//!
//! The reference functions ([`attractive_force`], [`repulsive_force`],
//! [`net_force`]) follow these sums literally. [`ForceField`] is the fused
//! kernel the engine runs: one pass over `v` with the shell weights
//! precomputed.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{self, Embedding};
use crate::hops::{hop_partitions, HopEntry, HopMatrix, HopPartition, HopProfile};

/// Pairs closer than this are treated as coincident: their unit vector is
/// zero and they exert no force on each other.
pub const COINCIDENT_EPS: f64 = 1e-12;

/// How pairs without a connecting path enter the repulsive sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum UnreachablePolicy {
    /// Use `max_finite_hop + 1` as their hop count.
    #[default]
    CapAtDiameterPlusOne,
    /// Leave them out of the repulsive sum.
    Exclude,
}

/// Direction of the repulsive term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum SignConvention {
    /// Repulsion pushes `u` away from `v` (along `-unit_uv`).
    #[default]
    Opposing,
    /// Repulsion carries `+unit_uv` like the attractive term, i.e. both terms
    /// pull `u` toward `v`. Kept for comparison runs only.
    PaperLiteral,
}

impl SignConvention {
    #[inline]
    fn repulsion_sign(self) -> f64 {
        match self {
            SignConvention::Opposing => -1.0,
            SignConvention::PaperLiteral => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceParams {
    pub alpha: f64,
    pub unreachable: UnreachablePolicy,
    pub signs: SignConvention,
}

impl Default for ForceParams {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            unreachable: UnreachablePolicy::default(),
            signs: SignConvention::default(),
        }
    }
}

/// Net force (or gradient) acting on one node.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceVector(pub Vec<f64>);

impl ForceVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn norm(&self) -> f64 {
        geometry::norm(&self.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    fn add_scaled(&mut self, scale: f64, v: &[f64]) {
        for (a, b) in self.0.iter_mut().zip(v) {
            *a += scale * b;
        }
    }
}

impl core::ops::Add for ForceVector {
    type Output = ForceVector;

    fn add(mut self, rhs: ForceVector) -> ForceVector {
        self.add_scaled(1.0, &rhs.0);
        self
    }
}

/// Distance from `z_u` to `z_v` and the unit vector pointing from `u` to `v`.
/// The unit vector is zero for coincident points.
pub fn pair_geometry(z_u: &[f64], z_v: &[f64]) -> (f64, Vec<f64>) {
    debug_assert_eq!(z_u.len(), z_v.len());
    let dist = geometry::distance(z_u, z_v);
    let unit = if dist < COINCIDENT_EPS {
        vec![0.0; z_u.len()]
    } else {
        z_u.iter().zip(z_v).map(|(a, b)| (b - a) / dist).collect()
    };
    (dist, unit)
}

/// Attractive force on `u` given its hop shells.
pub fn attractive_force(
    u: usize,
    positions: &Embedding,
    partitions: &[HopPartition],
    alpha: f64,
) -> ForceVector {
    let z_u = positions.row(u);
    let mut total = ForceVector::zeros(positions.dim());
    for shell in partitions {
        if shell.nodes.is_empty() {
            continue;
        }
        let decay = libm::pow(alpha, f64::from(shell.hop) - 1.0);
        let mut shell_sum = ForceVector::zeros(positions.dim());
        for &v in &shell.nodes {
            let (dist, unit) = pair_geometry(z_u, positions.row(v));
            shell_sum.add_scaled(decay * dist, &unit);
        }
        total.add_scaled(1.0 / shell.nodes.len() as f64, &shell_sum.0);
    }
    total
}

/// Repulsive force on `u` from every other node, averaged over `|V|`.
pub fn repulsive_force<E: HopEntry>(
    u: usize,
    positions: &Embedding,
    hops_row: &[E],
    max_finite_hop: u32,
    policy: UnreachablePolicy,
    signs: SignConvention,
) -> ForceVector {
    let n = positions.len();
    let z_u = positions.row(u);
    let mut total = ForceVector::zeros(positions.dim());
    for (v, &entry) in hops_row.iter().enumerate() {
        let hops = match (entry.finite(), policy) {
            (Some(h), _) => f64::from(h),
            (None, UnreachablePolicy::CapAtDiameterPlusOne) => f64::from(max_finite_hop + 1),
            (None, UnreachablePolicy::Exclude) => continue,
        };
        let (dist, unit) = pair_geometry(z_u, positions.row(v));
        total.add_scaled(signs.repulsion_sign() * hops * libm::exp(-dist), &unit);
    }
    for x in &mut total.0 {
        *x /= n as f64;
    }
    total
}

/// Sum of the attractive and repulsive forces on `u`.
pub fn net_force<E: HopEntry>(
    u: usize,
    positions: &Embedding,
    hops: &HopMatrix<E>,
    params: &ForceParams,
) -> ForceVector {
    attractive_force(u, positions, &hop_partitions(hops, u), params.alpha)
        + repulsive_force(
            u,
            positions,
            hops.row(u),
            hops.max_finite_hop(),
            params.unreachable,
            params.signs,
        )
}

/// Per-step displacement `F / m_u` with mass `m_u = max(deg u, 1)`.
pub fn node_gradient(force: &ForceVector, degree: usize) -> ForceVector {
    let mass = degree.max(1) as f64;
    ForceVector(force.0.iter().map(|f| f / mass).collect())
}

/// Fused force kernel over a fixed hop matrix.
///
/// Equivalent to [`net_force`] up to floating-point reduction order.
#[derive(Debug, Clone)]
pub struct ForceField<'a, E: HopEntry = u16> {
    hops: &'a HopMatrix<E>,
    /// `alpha^(h-1) / |N_u^(h)|` per node and hop, laid out like [`HopProfile`].
    shell_weights: Vec<f64>,
    width: usize,
    unreachable_hops: Option<f64>,
    repulsion_scale: f64,
}

impl<'a, E: HopEntry> ForceField<'a, E> {
    pub fn new(hops: &'a HopMatrix<E>, params: &ForceParams) -> Self {
        let profile = HopProfile::new(hops);
        let width = hops.max_finite_hop() as usize + 1;
        let decay: Vec<f64> = (0..width)
            .map(|h| libm::pow(params.alpha, h as f64 - 1.0))
            .collect();
        let mut shell_weights = vec![0.0; hops.node_count() * width];
        for (u, weights) in shell_weights.chunks_mut(width).enumerate() {
            for (h, (&count, w)) in profile.shells(u).iter().zip(weights).enumerate().skip(1) {
                if count > 0 {
                    *w = decay[h] / f64::from(count);
                }
            }
        }
        let unreachable_hops = match params.unreachable {
            UnreachablePolicy::CapAtDiameterPlusOne => Some(f64::from(hops.max_finite_hop() + 1)),
            UnreachablePolicy::Exclude => None,
        };
        Self {
            hops,
            shell_weights,
            width,
            unreachable_hops,
            repulsion_scale: params.signs.repulsion_sign() / hops.node_count().max(1) as f64,
        }
    }

    pub fn hops(&self) -> &HopMatrix<E> {
        self.hops
    }

    /// Writes the net force on `u` into `out` and returns its norm.
    pub fn force_into(&self, u: usize, positions: &Embedding, out: &mut [f64]) -> f64 {
        let mut norm = [0.0];
        self.block_into(u, positions, out, &mut norm);
        norm[0]
    }

    /// Net forces on the consecutive nodes `first..first + norms.len()`,
    /// written row by row into `out`, with their norms in `norms`.
    ///
    /// Each `z_v` is visited once per block instead of once per node. Every
    /// node still sums its pair terms in increasing `v` order, so the result
    /// is bitwise independent of the block size.
    pub fn block_into(&self, first: usize, positions: &Embedding, out: &mut [f64], norms: &mut [f64]) {
        let dim = positions.dim();
        let rows = norms.len();
        debug_assert_eq!(out.len(), rows * dim);
        out.fill(0.0);
        for v in 0..positions.len() {
            let z_v = positions.row(v);
            for (i, acc) in out.chunks_exact_mut(dim).enumerate() {
                let u = first + i;
                if let Some(coef) = self.pair_coefficient(u, v, positions) {
                    let z_u = positions.row(u);
                    for k in 0..dim {
                        acc[k] += coef * (z_v[k] - z_u[k]);
                    }
                }
            }
        }
        for (acc, norm) in out.chunks_exact(dim).zip(norms.iter_mut()) {
            *norm = geometry::norm(acc);
        }
    }

    /// Scalar multiplying `z_v - z_u` in the force on `u`, or `None` when the
    /// pair does not interact.
    #[inline]
    fn pair_coefficient(&self, u: usize, v: usize, positions: &Embedding) -> Option<f64> {
        if u == v {
            return None;
        }
        let (attraction, hops) = match self.hops.row(u)[v].finite() {
            Some(h) => (self.shell_weights[u * self.width + h as usize], f64::from(h)),
            None => (0.0, self.unreachable_hops?),
        };
        let dist = geometry::distance(positions.row(u), positions.row(v));
        if dist < COINCIDENT_EPS {
            return None;
        }
        Some(attraction + self.repulsion_scale * hops * libm::exp(-dist) / dist)
    }

    pub fn force(&self, u: usize, positions: &Embedding) -> ForceVector {
        let mut out = vec![0.0; positions.dim()];
        self.force_into(u, positions, &mut out);
        ForceVector(out)
    }
}
