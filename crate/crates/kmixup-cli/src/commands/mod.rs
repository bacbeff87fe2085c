pub mod attack;
pub mod couple;
pub mod gen;
pub mod sweep;
pub mod verify;

use anyhow::Context;
use kmixup::synthetic::{
    gen_clusters, gen_four_bars, gen_one_ring, gen_swiss_roll, load_csv, ClusterSpec,
    Dataset, OneRingParams,
};

/// Equally-weighted well-separated balls on coordinate axes, one class per
/// ball.
pub fn axis_cluster_spec(
    clusters: usize,
    sep: f64,
    radius: f64,
    dim: usize,
) -> anyhow::Result<ClusterSpec> {
    anyhow::ensure!(clusters >= 1, "need at least one cluster");
    anyhow::ensure!(dim >= 1, "need at least one dimension");
    anyhow::ensure!(clusters <= dim + 1, "at most dim+1 axis-aligned clusters");
    let mut centers = vec![vec![0.0; dim]];
    for c in 1..clusters {
        let mut center = vec![0.0; dim];
        center[c - 1] = sep;
        centers.push(center);
    }
    Ok(ClusterSpec::uniform(centers, radius)?)
}

/// A dataset from either a CSV path or a named generator.
pub fn resolve_dataset(
    source: &str,
    n: usize,
    noise: f64,
    seed: u64,
) -> anyhow::Result<Dataset> {
    let data = match source {
        "one_ring" => gen_one_ring(n, &OneRingParams::default(), noise, seed)?,
        "four_bars" => gen_four_bars(n, noise, seed)?,
        "swiss_roll" => gen_swiss_roll(n, noise, seed)?,
        "two_clusters" => {
            let spec = axis_cluster_spec(2, 6.0, 1.0, 2)?;
            gen_clusters(&spec, n, seed)?
        }
        path if path.ends_with(".csv") => {
            load_csv(path).with_context(|| format!("loading {path}"))?
        }
        other => anyhow::bail!(
            "unknown dataset {other:?}: expected one_ring, four_bars, swiss_roll, \
             two_clusters, or a .csv path"
        ),
    };
    Ok(data)
}

/// Comma-separated list parser for numeric flags like `--ks 1,2,4`.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad list entry {part:?}: {e}"))
        })
        .collect()
}
