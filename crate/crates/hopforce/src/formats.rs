//! Text formats read and written by the tools: edge lists, node labels,
//! word2vec-style embedding files and telemetry CSV.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use hopforce_core::{Embedding, HopDistStats, IterationRecord, ParsedGraph};

use crate::error::{Error, Result};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Reads a whole file as UTF-8, transparently inflating gzip input.
pub fn read_text(path: &Path) -> Result<String> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| Error::io(path, e))?;
    let bytes = if raw.starts_with(&GZIP_MAGIC) {
        let mut out = Vec::new();
        MultiGzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        out
    } else {
        raw
    };
    String::from_utf8(bytes).map_err(|e| {
        let line = 1 + e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count();
        Error::format(path, line, "input is not valid UTF-8")
    })
}

pub fn read_edge_list(path: &Path) -> Result<ParsedGraph> {
    let text = read_text(path)?;
    hopforce_core::parse_edge_list(&text).map_err(|source| Error::Graph {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `node<TAB>label` lines into a map keyed by node token. A node listed
/// twice with the same label is accepted; conflicting labels are an error.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_labels(&read_text(path)?, path)
}

pub fn parse_labels(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut labels = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (node, label) = match line.split_once('\t') {
            Some((n, l)) if !l.contains('\t') => (n.trim(), l.trim()),
            _ => {
                return Err(Error::format(path, i + 1, "expected `node<TAB>label`"));
            }
        };
        if node.is_empty() || label.is_empty() {
            return Err(Error::format(path, i + 1, "empty node or label"));
        }
        if let Some(previous) = labels.insert(node.to_string(), label.to_string()) {
            if previous != label {
                return Err(Error::format(
                    path,
                    i + 1,
                    format!("node {node} labelled both {previous} and {label}"),
                ));
            }
        }
    }
    Ok(labels)
}

/// Formats `x` rounded to 9 significant digits, in the shortest form that
/// reads back as the rounded value.
pub fn format_value(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("float formatting round-trips");
    format!("{rounded}")
}

pub fn write_embeddings(path: &Path, labels: &[String], positions: &Embedding) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    encode_embeddings(&mut out, labels, positions)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Word2vec text layout: `n d`, then `label v1 .. vd` per row in id order.
pub fn encode_embeddings<W: Write>(out: &mut W, labels: &[String], positions: &Embedding) -> std::io::Result<()> {
    assert_eq!(labels.len(), positions.len(), "one label per embedding row");
    writeln!(out, "{} {}", positions.len(), positions.dim())?;
    let mut line = String::new();
    for (label, row) in labels.iter().zip(positions.rows()) {
        line.clear();
        line.push_str(label);
        for &x in row {
            line.push(' ');
            line.push_str(&format_value(x));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Embedding rows with the labels they were stored under.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledEmbedding {
    pub labels: Vec<String>,
    pub positions: Embedding,
}

pub fn read_embeddings(path: &Path) -> Result<LabelledEmbedding> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let next_line = |lines: &mut dyn Iterator<Item = (usize, std::io::Result<String>)>| {
        lines
            .next()
            .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(|e| Error::io(path, e)))
            .transpose()
    };

    let (_, header) = next_line(&mut lines)?.ok_or_else(|| Error::format(path, 1, "missing `n d` header"))?;
    let parse_header = || -> Option<(usize, usize)> {
        let mut it = header.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(n)), Some(Ok(d)), None) if d > 0 => Some((n, d)),
            _ => None,
        }
    };
    let (n, dim) = parse_header().ok_or_else(|| Error::format(path, 1, "malformed `n d` header"))?;

    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    while let Some((line_no, line)) = next_line(&mut lines)? {
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().expect("non-blank line has a token");
        let before = data.len();
        for tok in tokens {
            let value: f64 = tok
                .parse()
                .map_err(|_| Error::format(path, line_no, format!("not a number: {tok}")))?;
            data.push(value);
        }
        if data.len() - before != dim {
            return Err(Error::format(
                path,
                line_no,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        labels.push(label.to_string());
    }
    if labels.len() != n {
        return Err(Error::format(
            path,
            1,
            format!("header declares {n} rows, file has {}", labels.len()),
        ));
    }
    Ok(LabelledEmbedding {
        labels,
        positions: Embedding::from_vec(dim, data),
    })
}

/// Telemetry CSV writer. The per-hop columns run up to `max_hop`; rows without
/// sampled statistics, and hops with no pairs, leave their cells empty.
pub struct TelemetryWriter<W: Write> {
    out: W,
    max_hop: u32,
}

impl<W: Write> TelemetryWriter<W> {
    pub fn new(mut out: W, max_hop: u32) -> std::io::Result<Self> {
        let mut header = String::from("iter,total_force");
        for h in 1..=max_hop {
            header.push_str(&format!(",hops{h}_mean,hops{h}_std"));
        }
        writeln!(out, "{header}")?;
        Ok(Self { out, max_hop })
    }

    pub fn write(&mut self, record: &IterationRecord) -> std::io::Result<()> {
        let mut row = format!("{},{}", record.iter, format_value(record.total_force));
        let per_hop: &[HopDistStats] = record.per_hop.as_deref().unwrap_or(&[]);
        for h in 1..=self.max_hop {
            match per_hop.iter().find(|s| s.hop == h).and_then(|s| s.stats) {
                Some(s) => row.push_str(&format!(",{},{}", format_value(s.mean), format_value(s.std))),
                None => row.push_str(",,"),
            }
        }
        writeln!(self.out, "{row}")
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
