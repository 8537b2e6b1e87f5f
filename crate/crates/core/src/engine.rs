//! The embedding loop: random initialisation, then synchronous two-phase
//! steps until the summed force magnitude falls below a threshold.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::drop::random_drop;
use crate::error::{ConfigError, EngineError};
use crate::force::{ForceField, ForceParams, SignConvention, UnreachablePolicy};
use crate::geometry::Embedding;
use crate::graph::Graph;
use crate::hops::{hop_matrix, HopEntry, HopMatrix};
use crate::telemetry::{pairdist_stats, IterationRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    pub dim: usize,
    /// Per-hop attraction decay, in `(0, 1)`.
    pub alpha: f64,
    /// Probability of zeroing each gradient component.
    pub drop_prob: f64,
    /// The run stops once the total force is at most `epsilon_scale * n`.
    pub epsilon_scale: f64,
    pub max_iters: u64,
    pub seed: u64,
    /// Nodes per force-evaluation batch; `None` means all nodes at once.
    pub batch_size: Option<usize>,
    pub unreachable_policy: UnreachablePolicy,
    pub signs: SignConvention,
    /// Stop when the total force moved by at most `plateau_tol` (relative)
    /// over this many iterations. Zero disables the plateau test.
    pub plateau_window: usize,
    pub plateau_tol: f64,
    /// Sample per-hop distance statistics every this many iterations (plus the
    /// first and last). Zero disables them.
    pub stats_every: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            alpha: 0.3,
            drop_prob: 0.5,
            epsilon_scale: 1e-3,
            max_iters: 1000,
            seed: 0,
            batch_size: None,
            unreachable_policy: UnreachablePolicy::default(),
            signs: SignConvention::default(),
            plateau_window: 20,
            plateau_tol: 1e-3,
            stats_every: 10,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dim == 0 {
            return Err(ConfigError::Dim);
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(ConfigError::DropProb(self.drop_prob));
        }
        if !(self.epsilon_scale.is_finite() && self.epsilon_scale >= 0.0) {
            return Err(ConfigError::Epsilon(self.epsilon_scale));
        }
        if self.max_iters == 0 {
            return Err(ConfigError::MaxIters);
        }
        if self.batch_size == Some(0) {
            return Err(ConfigError::BatchSize);
        }
        if !(self.plateau_tol.is_finite() && self.plateau_tol >= 0.0) {
            return Err(ConfigError::PlateauTol(self.plateau_tol));
        }
        Ok(())
    }

    pub fn force_params(&self) -> ForceParams {
        ForceParams {
            alpha: self.alpha,
            unreachable: self.unreachable_policy,
            signs: self.signs,
        }
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    Epsilon,
    Plateau,
    MaxIters,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Epsilon => "epsilon",
            StopReason::Plateau => "plateau",
            StopReason::MaxIters => "max_iters",
        }
    }
}

/// Nodes whose forces are evaluated together against each `z_v`.
const BLOCK: usize = 8;

/// Positions plus everything needed to continue a run deterministically.
#[derive(Debug, Clone)]
pub struct EmbeddingState {
    pub positions: Embedding,
    pub iteration: u64,
    pub rng: ChaCha8Rng,
    pub last_total_force: f64,
}

impl EmbeddingState {
    /// Standard normal coordinates drawn node-major from a generator seeded
    /// with `seed`; the same generator then feeds the random drop.
    pub fn random(n: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self {
            positions: Embedding::from_vec(dim, data),
            iteration: 0,
            rng,
            last_total_force: f64::INFINITY,
        }
    }

    pub fn from_positions(positions: Embedding, seed: u64) -> Self {
        Self {
            positions,
            iteration: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_total_force: f64::INFINITY,
        }
    }
}

/// How phase one (force evaluation) is scheduled. Results are bitwise
/// identical either way: every node's force is reduced sequentially by a
/// single worker. Without the `parallel` feature both run serially.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Result of [`embed`].
#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    pub positions: Embedding,
    pub telemetry: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    pub iterations: u64,
    pub final_total_force: f64,
}

/// Runs steps over one graph and hop matrix, reusing its scratch buffers.
pub struct Embedder<'a, E: HopEntry = u16> {
    graph: &'a Graph,
    field: ForceField<'a, E>,
    cfg: EmbedConfig,
    execution: Execution,
    gradients: Vec<f64>,
    norms: Vec<f64>,
}

impl<'a, E: HopEntry> Embedder<'a, E> {
    pub fn new(graph: &'a Graph, hops: &'a HopMatrix<E>, cfg: &EmbedConfig) -> Result<Self, EngineError> {
        cfg.validate()?;
        let n = graph.node_count();
        if n == 0 || hops.node_count() == 0 {
            return Err(EngineError::EmptyGraph);
        }
        assert_eq!(hops.node_count(), n, "hop matrix does not belong to this graph");
        Ok(Self {
            graph,
            field: ForceField::new(hops, &cfg.force_params()),
            cfg: cfg.clone(),
            execution: Execution::default(),
            gradients: vec![0.0; n * cfg.dim],
            norms: vec![0.0; n],
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn config(&self) -> &EmbedConfig {
        &self.cfg
    }

    pub fn initial_state(&self) -> EmbeddingState {
        EmbeddingState::random(self.graph.node_count(), self.cfg.dim, self.cfg.seed)
    }

    fn check_shape(&self, state: &EmbeddingState) -> Result<(), ConfigError> {
        let n = self.graph.node_count();
        if state.positions.len() != n || state.positions.dim() != self.cfg.dim {
            return Err(ConfigError::Shape {
                rows: state.positions.len(),
                cols: state.positions.dim(),
                n,
                dim: self.cfg.dim,
            });
        }
        Ok(())
    }

    /// Phase one: gradients `F(u) / max(deg u, 1)` for every node against the
    /// current (frozen) positions. Returns the total force magnitude.
    pub fn compute_gradients(&mut self, positions: &Embedding) -> f64 {
        let n = self.graph.node_count();
        let dim = self.cfg.dim;
        let batch = self.cfg.batch_size.unwrap_or(n).min(n);
        let field = &self.field;
        let graph = self.graph;
        let kernel = |first: usize, grads: &mut [f64], norms: &mut [f64]| {
            field.block_into(first, positions, grads, norms);
            for (i, grad) in grads.chunks_exact_mut(dim).enumerate() {
                let mass = graph.degree(first + i).max(1) as f64;
                for g in grad.iter_mut() {
                    *g /= mass;
                }
            }
        };

        for start in (0..n).step_by(batch) {
            let end = (start + batch).min(n);
            let grads = &mut self.gradients[start * dim..end * dim];
            let norms = &mut self.norms[start..end];
            match self.execution {
                #[cfg(feature = "parallel")]
                Execution::Parallel => {
                    use rayon::prelude::*;
                    grads
                        .par_chunks_mut(BLOCK * dim)
                        .zip(norms.par_chunks_mut(BLOCK))
                        .enumerate()
                        .for_each(|(i, (g, nrm))| kernel(start + i * BLOCK, g, nrm));
                }
                _ => {
                    for (i, (g, nrm)) in grads
                        .chunks_mut(BLOCK * dim)
                        .zip(norms.chunks_mut(BLOCK))
                        .enumerate()
                    {
                        kernel(start + i * BLOCK, g, nrm);
                    }
                }
            }
        }
        self.norms.iter().sum()
    }

    /// Gradients from the last [`compute_gradients`](Self::compute_gradients).
    pub fn gradients(&self) -> &[f64] {
        &self.gradients
    }

    /// One synchronous step; returns the total force magnitude measured
    /// before the update.
    pub fn step(&mut self, state: &mut EmbeddingState) -> Result<f64, EngineError> {
        self.check_shape(state)?;
        let iteration = state.iteration + 1;
        let total = self.compute_gradients(&state.positions);
        if let Some(node) = self.norms.iter().position(|x| !x.is_finite()) {
            return Err(EngineError::NonFinite {
                node,
                iteration,
                what: "force",
            });
        }

        let dim = self.cfg.dim;
        for (u, grad) in self.gradients.chunks_mut(dim).enumerate() {
            random_drop(grad, self.cfg.drop_prob, &mut state.rng);
            let row = state.positions.row_mut(u);
            for (z, g) in row.iter_mut().zip(grad.iter()) {
                *z += g;
            }
            if row.iter().any(|z| !z.is_finite()) {
                return Err(EngineError::NonFinite {
                    node: u,
                    iteration,
                    what: "position",
                });
            }
        }
        state.iteration = iteration;
        state.last_total_force = total;
        Ok(total)
    }

    /// Steps until the total force drops to `epsilon_scale * n`, plateaus, or
    /// `max_iters` steps have run. `observer` sees every telemetry row as it is
    /// produced.
    pub fn run<F>(
        &mut self,
        state: &mut EmbeddingState,
        mut observer: F,
    ) -> Result<(StopReason, Vec<IterationRecord>), EngineError>
    where
        F: FnMut(&IterationRecord),
    {
        let epsilon = self.cfg.epsilon_scale * self.graph.node_count() as f64;
        let window = self.cfg.plateau_window;
        let mut records: Vec<IterationRecord> = Vec::new();
        for k in 1..=self.cfg.max_iters {
            let total = self.step(state)?;
            let stop = if total <= epsilon {
                Some(StopReason::Epsilon)
            } else if window > 0
                && records.len() >= window
                && (total - records[records.len() - window].total_force).abs()
                    <= self.cfg.plateau_tol * records[records.len() - window].total_force
            {
                Some(StopReason::Plateau)
            } else if k == self.cfg.max_iters {
                Some(StopReason::MaxIters)
            } else {
                None
            };

            let every = self.cfg.stats_every;
            let sample = every > 0 && (k == 1 || state.iteration.is_multiple_of(every) || stop.is_some());
            let record = IterationRecord {
                iter: state.iteration,
                total_force: total,
                per_hop: sample.then(|| pairdist_stats(&state.positions, self.field.hops())),
            };
            observer(&record);
            records.push(record);
            if let Some(reason) = stop {
                return Ok((reason, records));
            }
        }
        unreachable!("the last iteration always stops")
    }
}

/// Advances `state` by one step. Builds the force kernel on every call; use an
/// [`Embedder`] for repeated steps.
pub fn step<E: HopEntry>(
    state: &mut EmbeddingState,
    graph: &Graph,
    hops: &HopMatrix<E>,
    cfg: &EmbedConfig,
) -> Result<f64, EngineError> {
    Embedder::new(graph, hops, cfg)?.step(state)
}

/// Embeds `graph` from a seeded random start.
pub fn embed(graph: &Graph, cfg: &EmbedConfig) -> Result<EmbedOutcome, EngineError> {
    cfg.validate()?;
    let hops = hop_matrix::<u16>(graph)?;
    embed_with_hops(graph, &hops, cfg)
}

pub fn embed_with_hops<E: HopEntry>(
    graph: &Graph,
    hops: &HopMatrix<E>,
    cfg: &EmbedConfig,
) -> Result<EmbedOutcome, EngineError> {
    let mut embedder = Embedder::new(graph, hops, cfg)?;
    let mut state = embedder.initial_state();
    let (stop_reason, telemetry) = embedder.run(&mut state, |_| {})?;
    Ok(EmbedOutcome {
        iterations: state.iteration,
        final_total_force: state.last_total_force,
        positions: state.positions,
        telemetry,
        stop_reason,
    })
}
