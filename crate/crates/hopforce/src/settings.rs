//! Run settings shared by the command line, `key=value` config files and run
//! manifests. Every field corresponds to one `--flag` of the same name.

use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use hopforce_core::{EmbedConfig, SignConvention, UnreachablePolicy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyArg {
    /// Unreachable pairs repel with hop count `diameter + 1`.
    #[default]
    #[value(alias = "cap_at_diameter_plus_one")]
    Cap,
    /// Unreachable pairs do not interact.
    Exclude,
}

impl From<PolicyArg> for UnreachablePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Cap => UnreachablePolicy::CapAtDiameterPlusOne,
            PolicyArg::Exclude => UnreachablePolicy::Exclude,
        }
    }
}

/// Width of hop matrix entries in bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum HopWidth {
    #[value(name = "8")]
    #[serde(rename = "8")]
    Bits8,
    #[default]
    #[value(name = "16")]
    #[serde(rename = "16")]
    Bits16,
}

/// Fully resolved settings of one embedding run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub dim: usize,
    pub alpha: f64,
    pub drop_prob: f64,
    pub epsilon_scale: f64,
    pub max_iters: u64,
    pub seed: u64,
    pub batch_size: Option<usize>,
    pub unreachable_policy: PolicyArg,
    pub paper_literal_signs: bool,
    pub plateau_window: usize,
    pub plateau_tol: f64,
    pub stats_every: u64,
    pub hop_width: HopWidth,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
}

impl Default for Settings {
    fn default() -> Self {
        let cfg = EmbedConfig::default();
        Self {
            dim: cfg.dim,
            alpha: cfg.alpha,
            drop_prob: cfg.drop_prob,
            epsilon_scale: cfg.epsilon_scale,
            max_iters: cfg.max_iters,
            seed: cfg.seed,
            batch_size: cfg.batch_size,
            unreachable_policy: PolicyArg::Cap,
            paper_literal_signs: false,
            plateau_window: cfg.plateau_window,
            plateau_tol: cfg.plateau_tol,
            stats_every: cfg.stats_every,
            hop_width: HopWidth::Bits16,
            threads: 0,
        }
    }
}

impl Settings {
    pub fn embed_config(&self) -> EmbedConfig {
        EmbedConfig {
            dim: self.dim,
            alpha: self.alpha,
            drop_prob: self.drop_prob,
            epsilon_scale: self.epsilon_scale,
            max_iters: self.max_iters,
            seed: self.seed,
            batch_size: self.batch_size,
            unreachable_policy: self.unreachable_policy.into(),
            signs: if self.paper_literal_signs {
                SignConvention::PaperLiteral
            } else {
                SignConvention::Opposing
            },
            plateau_window: self.plateau_window,
            plateau_tol: self.plateau_tol,
            stats_every: self.stats_every,
        }
    }
}

/// Partially specified settings, as given on the command line or in a config
/// file. Unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct SettingsArgs {
    /// Embedding dimension [default: 128]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Attraction decay per hop, in (0, 1) [default: 0.3]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Probability of zeroing each gradient component [default: 0.5]
    #[arg(long)]
    pub drop_prob: Option<f64>,
    /// Stop once the total force is at most this times the node count [default: 0.001]
    #[arg(long)]
    pub epsilon_scale: Option<f64>,
    /// Iteration cap [default: 1000]
    #[arg(long)]
    pub max_iters: Option<u64>,
    /// Seed for initial positions and random drop [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Nodes per force-evaluation batch [default: all nodes]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Treatment of node pairs with no connecting path [default: cap]
    #[arg(long, value_enum)]
    pub unreachable_policy: Option<PolicyArg>,
    /// Give the repulsive term the same direction as the attractive one
    #[arg(long)]
    pub paper_literal_signs: bool,
    /// Plateau window in iterations, 0 disables [default: 20]
    #[arg(long)]
    pub plateau_window: Option<usize>,
    /// Relative force change counted as a plateau [default: 0.001]
    #[arg(long)]
    pub plateau_tol: Option<f64>,
    /// Per-hop distance statistics cadence, 0 disables [default: 10]
    #[arg(long)]
    pub stats_every: Option<u64>,
    /// Hop matrix entry width in bits [default: 16]
    #[arg(long, value_enum)]
    pub hop_width: Option<HopWidth>,
    /// Worker threads, 0 = all available. Output is identical for a fixed
    /// thread count. [default: 0]
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value for {key}: {value}")))
}

impl SettingsArgs {
    /// Sets one field from a `key=value` pair. Keys are the flag names with
    /// either `-` or `_` as separator.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "dim" => self.dim = Some(parse_value(&key, value)?),
            "alpha" => self.alpha = Some(parse_value(&key, value)?),
            "drop_prob" => self.drop_prob = Some(parse_value(&key, value)?),
            "epsilon_scale" => self.epsilon_scale = Some(parse_value(&key, value)?),
            "max_iters" => self.max_iters = Some(parse_value(&key, value)?),
            "seed" => self.seed = Some(parse_value(&key, value)?),
            "batch_size" => self.batch_size = Some(parse_value(&key, value)?),
            "unreachable_policy" => {
                self.unreachable_policy =
                    Some(PolicyArg::from_str(value, true).map_err(|_| {
                        Error::Config(format!("invalid value for {key}: {value}"))
                    })?)
            }
            "paper_literal_signs" => self.paper_literal_signs = parse_value(&key, value)?,
            "plateau_window" => self.plateau_window = Some(parse_value(&key, value)?),
            "plateau_tol" => self.plateau_tol = Some(parse_value(&key, value)?),
            "stats_every" => self.stats_every = Some(parse_value(&key, value)?),
            "hop_width" => {
                self.hop_width = Some(
                    HopWidth::from_str(value, true)
                        .map_err(|_| Error::Config(format!("invalid value for {key}: {value}")))?,
                )
            }
            "threads" => self.threads = Some(parse_value(&key, value)?),
            _ => return Err(Error::Config(format!("unknown setting: {key}"))),
        }
        Ok(())
    }

    /// Parses a `key=value` config file; `#` starts a comment line.
    pub fn parse_config(text: &str, path: &Path) -> Result<Self> {
        let mut args = SettingsArgs::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(path, i + 1, "expected key=value"))?;
            args.set(key, value).map_err(|e| match e {
                Error::Config(msg) => Error::format(path, i + 1, msg),
                other => other,
            })?;
        }
        Ok(args)
    }

    /// Every field of a resolved [`Settings`], e.g. from a run manifest.
    pub fn from_settings(s: &Settings) -> Self {
        Self {
            dim: Some(s.dim),
            alpha: Some(s.alpha),
            drop_prob: Some(s.drop_prob),
            epsilon_scale: Some(s.epsilon_scale),
            max_iters: Some(s.max_iters),
            seed: Some(s.seed),
            batch_size: s.batch_size,
            unreachable_policy: Some(s.unreachable_policy),
            paper_literal_signs: s.paper_literal_signs,
            plateau_window: Some(s.plateau_window),
            plateau_tol: Some(s.plateau_tol),
            stats_every: Some(s.stats_every),
            hop_width: Some(s.hop_width),
            threads: Some(s.threads),
        }
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: SettingsArgs) -> SettingsArgs {
        SettingsArgs {
            dim: self.dim.or(lower.dim),
            alpha: self.alpha.or(lower.alpha),
            drop_prob: self.drop_prob.or(lower.drop_prob),
            epsilon_scale: self.epsilon_scale.or(lower.epsilon_scale),
            max_iters: self.max_iters.or(lower.max_iters),
            seed: self.seed.or(lower.seed),
            batch_size: self.batch_size.or(lower.batch_size),
            unreachable_policy: self.unreachable_policy.or(lower.unreachable_policy),
            paper_literal_signs: self.paper_literal_signs || lower.paper_literal_signs,
            plateau_window: self.plateau_window.or(lower.plateau_window),
            plateau_tol: self.plateau_tol.or(lower.plateau_tol),
            stats_every: self.stats_every.or(lower.stats_every),
            hop_width: self.hop_width.or(lower.hop_width),
            threads: self.threads.or(lower.threads),
        }
    }

    /// Fills unset fields with defaults and validates the result.
    pub fn resolve(self) -> Result<Settings> {
        let d = Settings::default();
        let s = Settings {
            dim: self.dim.unwrap_or(d.dim),
            alpha: self.alpha.unwrap_or(d.alpha),
            drop_prob: self.drop_prob.unwrap_or(d.drop_prob),
            epsilon_scale: self.epsilon_scale.unwrap_or(d.epsilon_scale),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            seed: self.seed.unwrap_or(d.seed),
            batch_size: self.batch_size.or(d.batch_size),
            unreachable_policy: self.unreachable_policy.unwrap_or(d.unreachable_policy),
            paper_literal_signs: self.paper_literal_signs,
            plateau_window: self.plateau_window.unwrap_or(d.plateau_window),
            plateau_tol: self.plateau_tol.unwrap_or(d.plateau_tol),
            stats_every: self.stats_every.unwrap_or(d.stats_every),
            hop_width: self.hop_width.unwrap_or(d.hop_width),
            threads: self.threads.unwrap_or(d.threads),
        };
        s.embed_config().validate()?;
        Ok(s)
    }
}
