use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use kmixup::synthetic::{gen_clusters, save_csv};

use crate::commands::{axis_cluster_spec, resolve_dataset};
use crate::config::{pick, pick_required, FileConfig};
use crate::EXIT_OK;

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator: one_ring, four_bars, swiss_roll, two_clusters, clusters.
    #[arg(long)]
    dataset: Option<String>,
    /// Number of points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Gaussian feature noise (standard deviation).
    #[arg(long)]
    noise: Option<f64>,
    /// Cluster count (clusters generator only).
    #[arg(long)]
    clusters: Option<usize>,
    /// Center separation (clusters generator only).
    #[arg(long)]
    sep: Option<f64>,
    /// Ball radius (clusters generator only).
    #[arg(long)]
    radius: Option<f64>,
    /// Ambient dimension (clusters generator only).
    #[arg(long)]
    dim: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: GenArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let cfg = &file.gen;
    let dataset = pick_required(args.dataset, cfg.dataset.clone(), "--dataset")?;
    let n = pick(args.n, cfg.n, 1000);
    let seed = pick(args.seed, cfg.seed, 0);
    let noise = pick(args.noise, cfg.noise, 0.02);
    let out = pick_required(
        args.out,
        cfg.out.clone().map(PathBuf::from),
        "--out",
    )?;

    let data = if dataset == "clusters" {
        let spec = axis_cluster_spec(
            pick(args.clusters, cfg.clusters, 2),
            pick(args.sep, cfg.sep, 10.0),
            pick(args.radius, cfg.radius, 1.0),
            pick(args.dim, cfg.dim, 2),
        )?;
        gen_clusters(&spec, n, seed)?
    } else {
        resolve_dataset(&dataset, n, noise, seed)?
    };

    save_csv(&data, &out).with_context(|| format!("writing {}", out.display()))?;

    println!("dataset: {dataset}");
    println!("points:  {}", data.len());
    println!("dims:    {} features, {} classes", data.d, data.c);
    println!("classes: {:?}", data.class_counts());
    for (i, (lo, hi)) in data.feature_ranges().iter().enumerate() {
        println!("f{i} range: [{lo:.4}, {hi:.4}]");
    }
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}
