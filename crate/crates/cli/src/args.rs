use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hubnet_core::Variant;

#[derive(Debug, Parser)]
#[command(name = "hubnet", version, about = "Hub models for grouped data")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// JSON file whose keys mirror the flag names; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw parameters from the simulation design and sample groups.
    Simulate(SimulateArgs),
    /// Estimate hub labels and parameters by hard EM.
    Fit(FitArgs),
    /// Compare a fit with the true parameters and labels.
    Evaluate(EvaluateArgs),
    /// Monte-Carlo replicates over a grid of table cells.
    Replicate(ReplicateArgs),
    /// Check the sufficient identifiability conditions of a parameter set.
    CheckIdentifiability(CheckArgs),
}

/// Hard-EM settings shared by `fit` and `replicate`.
#[derive(Debug, Args)]
pub struct EmArgs {
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long = "max-iterations")]
    pub max_iterations: Option<usize>,
    #[arg(long = "clamp-eps")]
    pub clamp_eps: Option<f64>,
    /// E-step pseudocount; 0 scores with the clamped estimate only.
    #[arg(long)]
    pub smoothing: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long = "nL")]
    pub n_leaders: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "T")]
    pub t: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub pi: Option<f64>,
    /// Preferred-follower range as `lo,hi`.
    #[arg(long = "in-range", value_parser = parse_range)]
    pub in_range: Option<(f64, f64)>,
    /// Range of every other off-diagonal entry as `lo,hi`.
    #[arg(long = "out-range", value_parser = parse_range)]
    pub out_range: Option<(f64, f64)>,
    /// Directory receiving params.json, groups.csv and labels.csv.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Group matrix (groups.csv format).
    #[arg(long)]
    pub groups: Option<PathBuf>,
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long = "nL")]
    pub n_leaders: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub em: EmArgs,
    /// Start a single run from these labels instead of random restarts.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the estimated labels in labels.csv format.
    #[arg(long = "labels-out")]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// True parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// True labels.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// The fitted groups; enables the known-label RMSE.
    #[arg(long)]
    pub groups: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplicateArgs {
    /// 1: asymmetric model, 2: null-component model.
    #[arg(long)]
    pub table: Option<u8>,
    #[arg(long, value_parser = parse_variant, conflicts_with = "table")]
    pub variant: Option<Variant>,
    /// Grid cell as `nL=..,n=..`; repeatable.
    #[arg(long = "cells", value_parser = parse_cell)]
    pub cells: Vec<(usize, usize)>,
    /// Group counts, comma-separated.
    #[arg(long = "T", value_delimiter = ',')]
    pub t: Vec<usize>,
    /// Replicates per cell.
    #[arg(long = "R")]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub em: EmArgs,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-replicate results as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Stop at the first failing cell.
    #[arg(long = "fail-fast")]
    pub fail_fast: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also compare outcome distributions with this parameter set.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Largest node count for outcome enumeration.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: hubnet_core::Error| e.to_string())
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(lo)?, num(hi)?))
}

pub fn parse_cell(s: &str) -> Result<(usize, usize), String> {
    let mut n_l = None;
    let mut n = None;
    for part in s.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let value: usize = value.trim().parse().map_err(|e| format!("{part:?}: {e}"))?;
        match key.trim() {
            "nL" | "n_L" => n_l = Some(value),
            "n" => n = Some(value),
            other => return Err(format!("unknown cell key {other:?}")),
        }
    }
    match (n_l, n) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(format!("cell {s:?} needs both nL and n")),
    }
}
