//! Optional JSON config file with one section per subcommand.
//!
//! Precedence is flag > file > built-in default; unknown keys anywhere in
//! the file are rejected before any work starts.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub gen: GenSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub attack: AttackSection,
    #[serde(default)]
    pub couple: CoupleSection,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSection {
    pub dataset: Option<String>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub noise: Option<f64>,
    pub clusters: Option<usize>,
    pub sep: Option<f64>,
    pub radius: Option<f64>,
    pub dim: Option<usize>,
    pub out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub data: Option<String>,
    pub ks: Option<Vec<usize>>,
    pub alphas: Option<Vec<f64>>,
    pub seeds: Option<u64>,
    pub n: Option<usize>,
    pub noise: Option<f64>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub test_fraction: Option<f64>,
    pub base_seed: Option<u64>,
    pub out: Option<String>,
    pub save_models: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub theorem: Option<String>,
    pub k: Option<usize>,
    pub ks: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub sep: Option<f64>,
    pub radius: Option<f64>,
    pub out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSection {
    pub model: Option<String>,
    pub data: Option<String>,
    pub epsilons: Option<Vec<f64>>,
    pub out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleSection {
    pub data: Option<String>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub n: Option<usize>,
    pub noise: Option<f64>,
    pub out: Option<String>,
}

/// flag > file > default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// flag > file, no default (required).
pub fn pick_required<T: Clone>(
    flag: Option<T>,
    file: Option<T>,
    what: &str,
) -> anyhow::Result<T> {
    flag.or(file)
        .ok_or_else(|| anyhow::anyhow!("missing required parameter: {what}"))
}
