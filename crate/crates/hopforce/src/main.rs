use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hopforce::commands::{self, EmbedRequest};
use hopforce::formats::{format_value, read_text};
use hopforce::manifest::RunManifest;
use hopforce::settings::{HopWidth, SettingsArgs};
use hopforce::Result;

#[derive(Debug, Parser)]
#[command(name = "hopforce", version, about = "Force-directed graph embeddings driven by hop distances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Embed a graph and write the embedding, telemetry CSV and run manifest.
    Embed {
        /// Edge list (plain or gzip)
        #[arg(long)]
        input: PathBuf,
        /// Embedding output [default: <input>.emb]
        #[arg(long)]
        output: Option<PathBuf>,
        /// Telemetry CSV [default: <output>.telemetry.csv]
        #[arg(long)]
        telemetry: Option<PathBuf>,
        /// Run manifest [default: <output>.manifest.json]
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// key=value settings file, or a run manifest to replay; flags win
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Export the hop-distance histogram (and optionally the full matrix).
    Hops {
        #[arg(long)]
        input: PathBuf,
        /// Histogram CSV
        #[arg(long)]
        output: PathBuf,
        /// Full hop matrix CSV, graphs of at most 2000 nodes
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "16")]
        hop_width: HopWidth,
    },
    /// Per-hop distance statistics of a saved embedding.
    Stats {
        /// Embedding file written by `embed`
        #[arg(long)]
        embeddings: PathBuf,
        /// Edge list of the embedded graph
        #[arg(long)]
        input: PathBuf,
        /// Also write the table as CSV
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_config(path: &Path) -> Result<SettingsArgs> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        Ok(SettingsArgs::from_settings(&RunManifest::parse(&text, path)?.config))
    } else {
        SettingsArgs::parse_config(&text, path)
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Embed {
            input,
            output,
            telemetry,
            manifest,
            config,
            settings,
        } => {
            let file_settings = match &config {
                Some(path) => load_config(path)?,
                None => SettingsArgs::default(),
            };
            let settings = settings.over(file_settings).resolve()?;
            let output = output.unwrap_or_else(|| {
                let mut name = input.as_os_str().to_owned();
                name.push(".emb");
                PathBuf::from(name)
            });
            let mut req = EmbedRequest::with_default_paths(input, output, settings);
            if let Some(t) = telemetry {
                req.telemetry = t;
            }
            if let Some(m) = manifest {
                req.manifest = m;
            }
            let report = commands::run_embed(&req, |rec| {
                if rec.iter % 10 == 0 {
                    eprintln!("iter {} total_force {}", rec.iter, format_value(rec.total_force));
                }
            })?;
            if report.ingest.self_loops + report.ingest.duplicate_edges > 0 {
                eprintln!(
                    "warning: dropped {} self-loops and {} duplicate edges",
                    report.ingest.self_loops, report.ingest.duplicate_edges
                );
            }
            println!(
                "stop_reason {} iterations {} total_force {}",
                report.stop_reason.as_str(),
                report.manifest.iterations_run,
                format_value(report.manifest.final_total_force)
            );
            println!("wrote {}", req.output.display());
        }
        Command::Hops {
            input,
            output,
            matrix,
            hop_width,
        } => {
            let hist = commands::run_hops(&input, &output, matrix.as_deref(), hop_width)?;
            for (h, count) in hist.counts.iter().enumerate().skip(1) {
                println!("{h}\t{count}");
            }
            if hist.unreachable > 0 {
                println!("unreachable\t{}", hist.unreachable);
            }
        }
        Command::Stats {
            embeddings,
            input,
            output,
        } => {
            let stats = commands::run_stats(&embeddings, &input, output.as_deref())?;
            print!("{}", commands::stats_csv(&stats).replace(',', "\t"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", commands::describe(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
