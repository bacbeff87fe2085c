use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use kmixup::analysis::{cross_cluster_stats, endpoint_localization, manifold_w2_scaling};
use kmixup::synthetic::ClusterSpec;

use crate::config::{pick, pick_required, FileConfig};
use crate::{EXIT_OK, EXIT_STAT_FAIL};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of lemma1, thm2, thm3, prop1.
    #[arg(long)]
    theorem: Option<String>,
    /// Batch size (lemma1, thm3).
    #[arg(long)]
    k: Option<usize>,
    /// Batch sizes (thm2, prop1), comma separated.
    #[arg(long)]
    ks: Option<String>,
    /// Monte Carlo trials per batch size.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Center separation of the test clusters.
    #[arg(long)]
    sep: Option<f64>,
    /// Radius of the test clusters.
    #[arg(long)]
    radius: Option<f64>,
    /// Report JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(serde::Serialize)]
struct Report {
    theorem: String,
    params: serde_json::Value,
    observed: serde_json::Value,
    band: serde_json::Value,
    pass: bool,
}

fn two_cluster(sep: f64, radius: f64) -> anyhow::Result<ClusterSpec> {
    Ok(ClusterSpec::uniform(
        vec![vec![0.0, 0.0], vec![sep, 0.0]],
        radius,
    )?)
}

/// Four equidistant balls (regular tetrahedron in R³): with every pairwise
/// center distance equal, a direct cross match is always cheaper than
/// relaying through a third cluster, which the exact count law needs.
fn four_cluster(sep: f64, radius: f64) -> anyhow::Result<ClusterSpec> {
    let s = sep / (2.0 * 2.0_f64.sqrt());
    Ok(ClusterSpec {
        centers: vec![
            vec![s, s, s],
            vec![s, -s, -s],
            vec![-s, s, -s],
            vec![-s, -s, s],
        ],
        radii: vec![radius; 4],
        weights: vec![0.25; 4],
        labels: vec![0, 1, 2, 3],
    })
}

pub fn run(args: VerifyArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let cfg = &file.verify;
    let theorem = pick_required(args.theorem, cfg.theorem.clone(), "--theorem")?;
    let seed = pick(args.seed, cfg.seed, 0);
    let out = args.out.or_else(|| cfg.out.clone().map(PathBuf::from));

    let ks_flag: Option<Vec<usize>> = match &args.ks {
        Some(text) => Some(crate::commands::parse_list(text)?),
        None => cfg.ks.clone(),
    };

    let report = match theorem.as_str() {
        "lemma1" => {
            let k = pick(args.k, cfg.k, 32);
            let trials = pick(args.trials, cfg.trials, 500);
            let sep = pick(args.sep, cfg.sep, 12.0);
            let radius = pick(args.radius, cfg.radius, 0.8);
            let mut observed = serde_json::Map::new();
            let mut pass = true;
            for (name, spec) in [
                ("two_cluster", two_cluster(sep, radius)?),
                ("four_cluster", four_cluster(sep, radius)?),
            ] {
                let stats = cross_cluster_stats(&spec, k, trials, seed)?;
                let exact = stats
                    .per_trial_counts
                    .iter()
                    .zip(&stats.per_trial_lemma_counts)
                    .filter(|(a, b)| a == b)
                    .count();
                pass &= exact == trials;
                observed.insert(
                    name.to_string(),
                    serde_json::json!({ "exact_trials": exact, "trials": trials }),
                );
            }
            Report {
                theorem,
                params: serde_json::json!({
                    "k": k, "trials": trials, "sep": sep, "radius": radius, "seed": seed
                }),
                observed: observed.into(),
                band: serde_json::json!("all trials must match ½Σ|r−s| exactly"),
                pass,
            }
        }
        "thm2" => {
            let ks = ks_flag.unwrap_or_else(|| vec![64, 128, 256]);
            let trials = pick(args.trials, cfg.trials, 500);
            let sep = pick(args.sep, cfg.sep, 12.0);
            let radius = pick(args.radius, cfg.radius, 1.0);
            let spec = two_cluster(sep, radius)?;
            let mut scaled = Vec::new();
            let mut pass = true;
            for &k in &ks {
                let stats = cross_cluster_stats(&spec, k, trials, seed)?;
                let value = stats.cross_cluster_fraction * (k as f64).sqrt();
                pass &= (0.45..=0.68).contains(&value);
                scaled.push(serde_json::json!({ "k": k, "fraction_sqrt_k": value }));
            }
            Report {
                theorem,
                params: serde_json::json!({
                    "ks": ks, "trials": trials, "sep": sep, "radius": radius, "seed": seed
                }),
                observed: serde_json::json!(scaled),
                band: serde_json::json!({
                    "fraction_sqrt_k": [0.45, 0.68],
                    "oracle": "1/sqrt(pi) ~ 0.5642"
                }),
                pass,
            }
        }
        "thm3" => {
            let k = pick(args.k, cfg.k, 256);
            let k_small = 8.min(k);
            let trials = pick(args.trials, cfg.trials, 200);
            let sep = pick(args.sep, cfg.sep, 12.0);
            let radius = pick(args.radius, cfg.radius, 1.0);
            let spec = two_cluster(sep, radius)?;
            let small = endpoint_localization(&spec, k_small, trials, seed)?;
            let large = endpoint_localization(&spec, k, trials, seed)?;
            let pass = large.violation_fraction <= 0.05
                && large.violation_fraction <= small.violation_fraction;
            Report {
                theorem,
                params: serde_json::json!({
                    "k": k, "k_small": k_small, "trials": trials,
                    "sep": sep, "radius": radius, "seed": seed,
                    "set_distance": large.set_distance, "epsilon": large.epsilon
                }),
                observed: serde_json::json!({
                    "violation_fraction_large_k": large.violation_fraction,
                    "violation_fraction_small_k": small.violation_fraction,
                    "violation_fraction_of_cross_large_k": large.violation_fraction_of_cross,
                    "violation_fraction_of_cross_small_k": small.violation_fraction_of_cross
                }),
                band: serde_json::json!({
                    "violation_fraction_large_k": [0.0, 0.05],
                    "monotone": "violation fraction must not grow with k"
                }),
                pass,
            }
        }
        "prop1" => {
            let ks = ks_flag.unwrap_or_else(|| vec![8, 16, 32, 64, 128, 256, 512]);
            let trials = pick(args.trials, cfg.trials, 100);
            let circle = manifold_w2_scaling(1, 2, &ks, trials, seed)?;
            let flat = manifold_w2_scaling(2, 2, &ks, trials, seed)?;
            let pass = (-2.5..=-1.5).contains(&circle.fitted_slope)
                && (-1.6..=-0.6).contains(&flat.fitted_slope);
            Report {
                theorem,
                params: serde_json::json!({ "ks": ks, "trials": trials, "seed": seed }),
                observed: serde_json::json!({
                    "circle_slope": circle.fitted_slope,
                    "circle_fit_residual": circle.fit_residual,
                    "circle_mean_w2sq": circle.mean_w2sq,
                    "flat_slope": flat.fitted_slope,
                    "flat_fit_residual": flat.fit_residual,
                    "flat_mean_w2sq": flat.mean_w2sq
                }),
                band: serde_json::json!({
                    "circle_slope": [-2.5, -1.5],
                    "flat_slope": [-1.6, -0.6]
                }),
                pass,
            }
        }
        other => anyhow::bail!("unknown theorem {other:?}: expected lemma1, thm2, thm3, prop1"),
    };

    let text = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &out {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{text}");
    Ok(if report.pass { EXIT_OK } else { EXIT_STAT_FAIL })
}
