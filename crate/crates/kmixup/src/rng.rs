//! Seeded random streams and the few sampling primitives the crate needs.
//!
//! Everything random in this crate runs on [`ChaCha8Rng`] seeded from a
//! 64-bit integer, so results are reproducible run to run. Workers that need
//! independent randomness (sweep cells, Monte Carlo trials) must not share a
//! stream; derive one stream per worker with [`split_stream`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A fresh deterministic stream for `seed`.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A decorrelated 64-bit seed for worker `index` under a common base seed.
///
/// Mixes `(seed, index)` through two rounds of splitmix64 so that nearby
/// indices land on unrelated seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for _ in 0..2 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z = x ^ (x >> 31);
    }
    z
}

/// An independent stream for worker `index` under a common base seed.
pub fn split_stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index))
}

/// `m` distinct indices drawn uniformly from `0..n`, in draw order.
///
/// Partial Fisher-Yates over the full index range.
pub fn sample_distinct<R: Rng>(n: usize, m: usize, rng: &mut R) -> Vec<usize> {
    assert!(m <= n, "cannot draw {m} distinct indices from 0..{n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = i + rng.gen_range(0..n - i);
        pool.swap(i, j);
    }
    pool.truncate(m);
    pool
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T, R: Rng>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// One standard normal draw (Box-Muller).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let mut u1: f64 = rng.gen();
    while u1 <= f64::MIN_POSITIVE {
        u1 = rng.gen();
    }
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_distinct_is_distinct_and_in_range() {
        let mut rng = stream(7);
        for _ in 0..100 {
            let idx = sample_distinct(20, 10, &mut rng);
            assert_eq!(idx.len(), 10);
            let mut seen = [false; 20];
            for &i in &idx {
                assert!(i < 20);
                assert!(!seen[i], "duplicate index {i}");
                seen[i] = true;
            }
        }
    }

    #[test]
    fn sample_distinct_full_range_is_permutation() {
        let mut rng = stream(1);
        let mut idx = sample_distinct(8, 8, &mut rng);
        idx.sort_unstable();
        assert_eq!(idx, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn split_streams_differ() {
        let a: Vec<f64> = {
            let mut r = split_stream(42, 0);
            (0..4).map(|_| r.gen()).collect()
        };
        let b: Vec<f64> = {
            let mut r = split_stream(42, 1);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_ne!(a, b);
    }

    #[test]
    fn normal_moments() {
        let mut rng = stream(99);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }
}
