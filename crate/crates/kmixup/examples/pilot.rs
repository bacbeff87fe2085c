//! Scratch pilot for the toy training experiments (not part of the suite).

use std::time::Instant;

use kmixup::mixup::MixupConfig;
use kmixup::nn::{adversarial_accuracy, evaluate, train, TrainConfig};
use kmixup::synthetic::{
    gen_four_bars, gen_one_ring, gen_swiss_roll, stratified_split, Dataset, OneRingParams,
};

fn run(data: &Dataset, k: usize, alpha: f64, seed: u64, epochs: usize) -> (f64, f64) {
    let (train_set, test_set) = stratified_split(data, 0.2, seed).unwrap();
    let cfg = TrainConfig {
        epochs,
        mixup: MixupConfig::new(k, alpha, seed).unwrap(),
        seed,
        ..TrainConfig::default()
    };
    let t0 = Instant::now();
    let (model, _) = train(&train_set, &test_set, &cfg).unwrap();
    let acc = evaluate(&model, &test_set).unwrap();
    (acc, t0.elapsed().as_secs_f64())
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);
    let seeds: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);

    let sets: Vec<(&str, Dataset, f64)> = vec![
        (
            "one_ring/a64",
            gen_one_ring(1000, &OneRingParams::default(), 0.05, 1).unwrap(),
            64.0,
        ),
        ("four_bars/a16", gen_four_bars(1000, 0.02, 1).unwrap(), 16.0),
        ("swiss_roll/a16", gen_swiss_roll(1000, 0.02, 1).unwrap(), 16.0),
    ];

    if which == "all" || which == "toy" {
        for (name, data, alpha) in &sets {
            for k in [1_usize, 16] {
                let mut accs = Vec::new();
                let mut secs = 0.0;
                for seed in 0..seeds {
                    let (acc, s) = run(data, k, *alpha, seed, epochs);
                    accs.push(acc);
                    secs += s;
                }
                let mean = accs.iter().sum::<f64>() / accs.len() as f64;
                println!(
                    "{name} k={k:2} alpha={alpha:5.1} mean_acc={mean:.4} accs={accs:?} total_s={secs:.1}"
                );
            }
        }
    }

    if which == "all" || which == "fgsm" {
        let data = gen_one_ring(1000, &OneRingParams::default(), 0.05, 1).unwrap();
        let epss = [0.0, 0.025, 0.05, 0.1, 0.2];
        for k in [1_usize, 2] {
            let mut by_eps = vec![0.0; epss.len()];
            for seed in 0..seeds {
                let (train_set, test_set) = stratified_split(&data, 0.2, seed).unwrap();
                let cfg = TrainConfig {
                    epochs,
                    mixup: MixupConfig::new(k, 1.0, seed).unwrap(),
                    seed,
                    ..TrainConfig::default()
                };
                let (model, _) = train(&train_set, &test_set, &cfg).unwrap();
                for (i, &e) in epss.iter().enumerate() {
                    let acc = adversarial_accuracy(&model, &test_set, e).unwrap();
                    by_eps[i] += acc / seeds as f64;
                    print!("{acc:.3} ");
                }
                println!("  (k={k} seed={seed})");
            }
            println!("k={k} mean adversarial accuracies over eps {epss:?}: {by_eps:?}");
        }
    }
}
