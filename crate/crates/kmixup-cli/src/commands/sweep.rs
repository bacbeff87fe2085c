use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use kmixup::analysis::vicinal_deviation;
use kmixup::mixup::MixupConfig;
use kmixup::nn::{evaluate, train, TrainConfig};
use kmixup::rng;
use kmixup::synthetic::stratified_split;
use rayon::prelude::*;

use crate::commands::{parse_list, resolve_dataset};
use crate::config::{pick, pick_required, FileConfig};
use crate::EXIT_OK;

/// Vicinal steps used for the deviation column of each cell.
const DEVIATION_STEPS: usize = 256;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// CSV path or generator name.
    #[arg(long)]
    data: Option<String>,
    /// Comma-separated batch sizes, e.g. `1,2,16`.
    #[arg(long)]
    ks: Option<String>,
    /// Comma-separated mixing concentrations, e.g. `0.25,1,64`.
    #[arg(long)]
    alphas: Option<String>,
    /// Number of seeds per (k, alpha) cell.
    #[arg(long)]
    seeds: Option<u64>,
    /// Points to generate when --data names a generator.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Held-out fraction of the stratified split.
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Base of the per-cell seed sequence.
    #[arg(long)]
    base_seed: Option<u64>,
    /// Results CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-cell model checkpoints (optional).
    #[arg(long)]
    save_models: Option<PathBuf>,
}

struct CellResult {
    k: usize,
    alpha: f64,
    seed: u64,
    test_acc: f64,
    train_acc: f64,
    deviation: f64,
    wall_time: f64,
}

pub fn run(args: SweepArgs, file: &FileConfig) -> anyhow::Result<i32> {
    let cfg = &file.sweep;
    let data_source = pick_required(args.data, cfg.data.clone(), "--data")?;
    let ks: Vec<usize> = match args.ks {
        Some(ref text) => parse_list(text)?,
        None => cfg.ks.clone().unwrap_or_else(|| vec![1, 16]),
    };
    let alphas: Vec<f64> = match args.alphas {
        Some(ref text) => parse_list(text)?,
        None => cfg.alphas.clone().unwrap_or_else(|| vec![1.0]),
    };
    let seeds = pick(args.seeds, cfg.seeds, 5);
    let n = pick(args.n, cfg.n, 1000);
    let noise = pick(args.noise, cfg.noise, 0.02);
    let epochs = pick(args.epochs, cfg.epochs, 200);
    let learning_rate = pick(args.learning_rate, cfg.learning_rate, 0.02);
    let test_fraction = pick(args.test_fraction, cfg.test_fraction, 0.2);
    let base_seed = pick(args.base_seed, cfg.base_seed, 0);
    let out = pick_required(args.out, cfg.out.clone().map(PathBuf::from), "--out")?;
    let save_models = args
        .save_models
        .or_else(|| cfg.save_models.clone().map(PathBuf::from));

    anyhow::ensure!(!ks.is_empty() && !alphas.is_empty() && seeds > 0, "empty sweep grid");
    anyhow::ensure!(epochs > 0, "epochs must be positive");

    let data = resolve_dataset(&data_source, n, noise, base_seed)?;
    if let Some(dir) = &save_models {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut cells = Vec::new();
    for &k in &ks {
        for &alpha in &alphas {
            for s in 0..seeds {
                cells.push((k, alpha, base_seed + s));
            }
        }
    }

    // Worker pool over grid cells; each cell gets its own derived streams.
    let results: Vec<anyhow::Result<CellResult>> = cells
        .par_iter()
        .map(|&(k, alpha, seed)| {
            let started = Instant::now();
            let (train_set, test_set) = stratified_split(&data, test_fraction, seed)?;
            let train_cfg = TrainConfig {
                learning_rate,
                epochs,
                mixup: MixupConfig { k, alpha, seed },
                seed,
                ..TrainConfig::default()
            };
            let trained = train(&train_set, &test_set, &train_cfg);
            let wall_time = started.elapsed().as_secs_f64();
            match trained {
                Ok((model, _metrics)) => {
                    if let Some(dir) = &save_models {
                        let path = dir.join(format!("model_k{k}_a{alpha}_s{seed}.json"));
                        model.save(&path)?;
                    }
                    let deviation_seed = rng::derive_seed(seed, 0xDE7);
                    Ok(CellResult {
                        k,
                        alpha,
                        seed,
                        test_acc: evaluate(&model, &test_set)?,
                        train_acc: evaluate(&model, &train_set)?,
                        deviation: vicinal_deviation(
                            &train_set,
                            &train_cfg.mixup,
                            DEVIATION_STEPS,
                            deviation_seed,
                        )?,
                        wall_time,
                    })
                }
                Err(kmixup::Error::Diverged { epoch, step, loss }) => {
                    eprintln!(
                        "cell (k={k}, alpha={alpha}, seed={seed}) diverged at epoch {epoch} step {step} (loss {loss}); recording NaN"
                    );
                    Ok(CellResult {
                        k,
                        alpha,
                        seed,
                        test_acc: f64::NAN,
                        train_acc: f64::NAN,
                        deviation: f64::NAN,
                        wall_time,
                    })
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect();

    let mut rows: Vec<CellResult> = results.into_iter().collect::<anyhow::Result<_>>()?;
    rows.sort_by(|a, b| {
        a.k.cmp(&b.k)
            .then(a.alpha.partial_cmp(&b.alpha).unwrap())
            .then(a.seed.cmp(&b.seed))
    });

    let mut csv = String::from("k,alpha,seed,test_acc,train_acc,vicinal_deviation,wall_time\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k, r.alpha, r.seed, r.test_acc, r.train_acc, r.deviation, r.wall_time
        ));
    }
    std::fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;

    // Mean test accuracy matrix, recomputable from the CSV rows.
    println!("mean test accuracy over {seeds} seed(s):");
    print!("{:>8}", "k\\alpha");
    for alpha in &alphas {
        print!("{alpha:>10.3}");
    }
    println!();
    for &k in &ks {
        print!("{k:>8}");
        for &alpha in &alphas {
            let mut cells: Vec<f64> = rows
                .iter()
                .filter(|r| r.k == k && r.alpha == alpha)
                .map(|r| r.test_acc)
                .collect();
            cells.retain(|v| v.is_finite());
            let mean = if cells.is_empty() {
                f64::NAN
            } else {
                cells.iter().sum::<f64>() / cells.len() as f64
            };
            print!("{mean:>10.4}");
        }
        println!();
    }
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}
