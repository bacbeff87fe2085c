//! Scratch: diagnose k=1 instability.
use kmixup::mixup::MixupConfig;
use kmixup::nn::{evaluate, train, TrainConfig};
use kmixup::synthetic::{gen_one_ring, stratified_split, OneRingParams};

fn main() {
    let ring = gen_one_ring(1000, &OneRingParams::default(), 0.05, 1).unwrap();
    let (tr, te) = stratified_split(&ring, 0.2, 0).unwrap();
    let variants: Vec<(&str, TrainConfig)> = vec![
        ("lr=0.1 mom=0.9 (base)", TrainConfig::default()),
        ("lr=0.01 mom=0.9", TrainConfig { learning_rate: 0.01, ..TrainConfig::default() }),
        ("lr=0.1 mom=0.0", TrainConfig { momentum: 0.0, ..TrainConfig::default() }),
        ("lr=0.02 mom=0.9", TrainConfig { learning_rate: 0.02, ..TrainConfig::default() }),
        ("lr=0.1 mom=0.5", TrainConfig { momentum: 0.5, ..TrainConfig::default() }),
    ];
    for (name, base) in variants {
        let cfg = TrainConfig {
            epochs: 120,
            milestones: vec![60, 90],
            mixup: MixupConfig::new(1, 1.0, 0).unwrap(),
            seed: 0,
            ..base
        };
        let (m, hist) = train(&tr, &te, &cfg).unwrap();
        let acc = evaluate(&m, &te).unwrap();
        let l0: Vec<f64> = hist.iter().take(3).map(|h| h.train_loss).collect();
        let l1: Vec<f64> = hist.iter().rev().take(2).map(|h| h.train_loss).collect();
        println!("{name}: acc={acc:.3} first_losses={l0:?} last={l1:?}");
    }
}
