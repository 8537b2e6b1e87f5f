//! The operations behind the `embed`, `hops` and `stats` subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use hopforce_core::{
    hop_histogram, hop_matrix, pairdist_stats, Embedder, Embedding, EngineError, Graph, HopDistStats,
    HopEntry, HopHistogram, HopMatrix, IterationRecord, StopReason,
};

use crate::error::{Error, Result};
use crate::formats::{self, format_value, TelemetryWriter};
use crate::manifest::{file_digest, graph_digest, RunManifest};
use crate::settings::{HopWidth, Settings};

/// Largest graph for which the full hop matrix may be exported.
pub const MATRIX_EXPORT_LIMIT: usize = 2000;

#[derive(Debug, Clone)]
pub struct EmbedRequest {
    pub input: PathBuf,
    pub output: PathBuf,
    pub telemetry: PathBuf,
    pub manifest: PathBuf,
    pub settings: Settings,
}

impl EmbedRequest {
    /// Output paths derived from `output`: `<output>.telemetry.csv` and
    /// `<output>.manifest.json`.
    pub fn with_default_paths(input: PathBuf, output: PathBuf, settings: Settings) -> Self {
        let sibling = |suffix: &str| {
            let mut name = output.as_os_str().to_owned();
            name.push(suffix);
            PathBuf::from(name)
        };
        Self {
            telemetry: sibling(".telemetry.csv"),
            manifest: sibling(".manifest.json"),
            input,
            output,
            settings,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbedReport {
    pub stop_reason: StopReason,
    pub manifest: RunManifest,
    pub ingest: hopforce_core::IngestReport,
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))
}

/// Embeds the graph at `req.input` and writes the embedding, telemetry CSV
/// and run manifest. `progress` sees every telemetry row.
pub fn run_embed<F: FnMut(&IterationRecord) + Send>(req: &EmbedRequest, progress: F) -> Result<EmbedReport> {
    let parsed = formats::read_edge_list(&req.input)?;
    let graph = &parsed.graph;
    let started = Instant::now();
    let pool = thread_pool(req.settings.threads)?;
    let (positions, stop_reason, iterations, final_force) = pool.install(|| match req.settings.hop_width {
        HopWidth::Bits8 => embed_graph::<u8, F>(graph, req, progress),
        HopWidth::Bits16 => embed_graph::<u16, F>(graph, req, progress),
    })?;
    formats::write_embeddings(&req.output, graph.labels(), &positions)?;

    let manifest = RunManifest {
        tool: concat!("hopforce ", env!("CARGO_PKG_VERSION")).to_string(),
        input: req.input.clone(),
        graph_digest: graph_digest(graph),
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        config: req.settings.clone(),
        iterations_run: iterations,
        stop_reason: stop_reason.as_str().to_string(),
        final_total_force: final_force,
        wall_time_secs: started.elapsed().as_secs_f64(),
        embedding_digest: file_digest(&req.output)?,
    };
    manifest.write(&req.manifest)?;
    Ok(EmbedReport {
        stop_reason,
        manifest,
        ingest: parsed.report,
    })
}

fn embed_graph<E: HopEntry, F: FnMut(&IterationRecord) + Send>(
    graph: &Graph,
    req: &EmbedRequest,
    mut progress: F,
) -> Result<(Embedding, StopReason, u64, f64)> {
    let cfg = req.settings.embed_config();
    cfg.validate()?;
    let hops = hop_matrix::<E>(graph)?;
    let mut embedder = Embedder::new(graph, &hops, &cfg)?;
    let mut state = embedder.initial_state();

    let path = &req.telemetry;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut telemetry =
        TelemetryWriter::new(BufWriter::new(file), hops.max_finite_hop()).map_err(|e| Error::io(path, e))?;
    let mut write_error = None;
    let (stop, _) = embedder.run(&mut state, |record| {
        if write_error.is_none() {
            write_error = telemetry.write(record).err();
        }
        progress(record);
    })?;
    if let Some(e) = write_error {
        return Err(Error::io(path, e));
    }
    telemetry.finish().map_err(|e| Error::io(path, e))?;
    Ok((state.positions, stop, state.iteration, state.last_total_force))
}

fn hops_of<E: HopEntry>(graph: &Graph) -> Result<HopMatrix<E>> {
    Ok(hop_matrix::<E>(graph)?)
}

/// Writes the per-hop pair histogram of the graph at `input` to `output`, and
/// optionally the full matrix (graphs up to [`MATRIX_EXPORT_LIMIT`] nodes).
pub fn run_hops(input: &Path, output: &Path, matrix: Option<&Path>, width: HopWidth) -> Result<HopHistogram> {
    let graph = formats::read_edge_list(input)?.graph;
    if matrix.is_some() && graph.node_count() > MATRIX_EXPORT_LIMIT {
        return Err(Error::Config(format!(
            "full matrix export is limited to {MATRIX_EXPORT_LIMIT} nodes, graph has {}",
            graph.node_count()
        )));
    }
    match width {
        HopWidth::Bits8 => export_hops(&graph, &hops_of::<u8>(&graph)?, output, matrix),
        HopWidth::Bits16 => export_hops(&graph, &hops_of::<u16>(&graph)?, output, matrix),
    }
}

fn export_hops<E: HopEntry>(graph: &Graph, hops: &HopMatrix<E>, output: &Path, matrix: Option<&Path>) -> Result<HopHistogram> {
    let hist = hop_histogram(hops);
    let mut text = String::from("hops,pairs\n");
    for (h, &count) in hist.counts.iter().enumerate().skip(1) {
        text.push_str(&format!("{h},{count}\n"));
    }
    if hist.unreachable > 0 {
        text.push_str(&format!("unreachable,{}\n", hist.unreachable));
    }
    std::fs::write(output, text).map_err(|e| Error::io(output, e))?;

    if let Some(path) = matrix {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
            write!(out, "node")?;
            for label in graph.labels() {
                write!(out, ",{label}")?;
            }
            writeln!(out)?;
            for (u, label) in graph.labels().iter().enumerate() {
                write!(out, "{label}")?;
                for e in hops.row(u) {
                    match e.finite() {
                        Some(h) => write!(out, ",{h}")?,
                        None => write!(out, ",inf")?,
                    }
                }
                writeln!(out)?;
            }
            out.flush()
        };
        write(&mut out).map_err(|e| Error::io(path, e))?;
    }
    Ok(hist)
}

/// Per-hop distance statistics of a saved embedding over the graph at
/// `input`. The embedding must cover exactly the graph's nodes.
pub fn run_stats(embeddings: &Path, input: &Path, output: Option<&Path>) -> Result<Vec<HopDistStats>> {
    let graph = formats::read_edge_list(input)?.graph;
    let saved = formats::read_embeddings(embeddings)?;
    let positions = align_embedding(&graph, &saved)?;
    let hops = hop_matrix::<u16>(&graph)?;
    let stats = pairdist_stats(&positions, &hops);
    if let Some(path) = output {
        std::fs::write(path, stats_csv(&stats)).map_err(|e| Error::io(path, e))?;
    }
    Ok(stats)
}

/// Reorders the rows of `saved` into the graph's dense id order.
pub fn align_embedding(graph: &Graph, saved: &formats::LabelledEmbedding) -> Result<Embedding> {
    let n = graph.node_count();
    if saved.labels.len() != n {
        return Err(Error::Mismatch(format!(
            "embedding has {} rows but the graph has {n} nodes",
            saved.labels.len()
        )));
    }
    let dim = saved.positions.dim();
    let mut aligned = Embedding::zeros(n, dim);
    let mut seen = vec![false; n];
    for (row, label) in saved.labels.iter().enumerate() {
        let u = graph
            .node_id(label)
            .ok_or_else(|| Error::Mismatch(format!("embedded node {label} is not in the graph")))?;
        if std::mem::replace(&mut seen[u], true) {
            return Err(Error::Mismatch(format!("node {label} is embedded twice")));
        }
        aligned.row_mut(u).copy_from_slice(saved.positions.row(row));
    }
    Ok(aligned)
}

pub fn stats_csv(stats: &[HopDistStats]) -> String {
    let mut text = String::from("hops,pairs,mean,std\n");
    for s in stats {
        match s.stats {
            Some(d) => text.push_str(&format!(
                "{},{},{},{}\n",
                s.hop,
                d.count,
                format_value(d.mean),
                format_value(d.std)
            )),
            None => text.push_str(&format!("{},0,,\n", s.hop)),
        }
    }
    text
}

/// Human-readable message for a failed command.
pub fn describe(e: &Error) -> String {
    match e {
        Error::Engine(EngineError::NonFinite { .. }) => format!("numerical abort: {e}"),
        _ => e.to_string(),
    }
}
