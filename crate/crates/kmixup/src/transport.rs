//! Exact optimal transport between two equal-size point sets under squared
//! Euclidean cost.
//!
//! Between uniform discrete measures of equal support size the transport
//! problem is a linear assignment problem, so the optimal coupling is a
//! permutation. [`solve_assignment`] finds it exactly with a shortest
//! augmenting path / dual potential method (Jonker-Volgenant style) in
//! `O(k³)` worst case. The solver is a pure function of the cost matrix:
//! rows are processed in order and equal reduced costs resolve to the lowest
//! column index, so ties between equally optimal permutations break the same
//! way on every run.

use crate::mixup::KBatch;
use crate::{Error, Result};

/// Squared-distance matrix between two batches; always square.
///
/// Entry `(i, j)` is the squared Euclidean distance between point `i` of the
/// first batch and point `j` of the second. Entries depend only on features,
/// never labels. Construction validates shape and finiteness, so a value of
/// this type is always a valid solver input.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Wraps a row-major `k × k` grid, rejecting non-square, non-finite, or
    /// negative data.
    pub fn from_entries(k: usize, entries: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("cost matrix must be at least 1×1".into()));
        }
        if entries.len() != k * k {
            return Err(Error::Shape(format!(
                "expected {k}×{k} = {} entries, got {}",
                k * k,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("cost entry {bad}")));
        }
        if entries.iter().any(|&v| v < 0.0) {
            return Err(Error::Parameter("cost entries must be non-negative".into()));
        }
        Ok(Self { k, entries })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }
}

/// Pairwise squared Euclidean costs between two equal-size batches.
pub fn cost_matrix(batch_a: &KBatch, batch_b: &KBatch) -> Result<CostMatrix> {
    let k = batch_a.k();
    if batch_b.k() != k {
        return Err(Error::Shape(format!(
            "batch sizes differ: {k} vs {}",
            batch_b.k()
        )));
    }
    if batch_a.dim() != batch_b.dim() {
        return Err(Error::Shape(format!(
            "feature dimensions differ: {} vs {}",
            batch_a.dim(),
            batch_b.dim()
        )));
    }
    let mut entries = Vec::with_capacity(k * k);
    for a in batch_a.points() {
        for b in batch_b.points() {
            let d2: f64 = a
                .features
                .iter()
                .zip(&b.features)
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            entries.push(d2);
        }
    }
    CostMatrix::from_entries(k, entries)
}

/// A minimizing permutation and its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    sigma: Vec<usize>,
    total_cost: f64,
}

impl Assignment {
    /// `sigma()[i]` is the column matched to row `i`; a bijection on `0..k`.
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// Sum of the selected cost entries, accumulated in row order.
    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }
}

/// Exact minimum-cost assignment.
///
/// Returns the permutation minimizing `Σᵢ cost(i, σ(i))`. Deterministic for
/// a fixed matrix; among equal-cost optima the augmenting order fixes the
/// result (rows in order, lowest column index at equal reduced cost).
pub fn solve_assignment(cost: &CostMatrix) -> Result<Assignment> {
    let sigma = hungarian(cost);
    let total_cost = (0..cost.k()).map(|i| cost.get(i, sigma[i])).sum();
    Ok(Assignment { sigma, total_cost })
}

/// Squared 2-Wasserstein distance between two batches read as uniform
/// discrete measures: the optimal assignment cost divided by `k`.
///
/// Symmetric in its arguments; zero iff the batches coincide as multisets.
pub fn w2_squared(batch_a: &KBatch, batch_b: &KBatch) -> Result<f64> {
    let cost = cost_matrix(batch_a, batch_b)?;
    let assignment = solve_assignment(&cost)?;
    Ok(assignment.total_cost() / batch_a.k() as f64)
}

/// Dual-potential shortest augmenting path solver.
///
/// Indices are offset by one so slot 0 can act as the virtual unmatched
/// column; `p[j]` holds the row currently matched to column `j`.
fn hungarian(cost: &CostMatrix) -> Vec<usize> {
    let n = cost.k();
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut p = vec![0_usize; n + 1];
    let mut way = vec![0_usize; n + 1];
    let mut minv = vec![0.0_f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0_usize;
        minv[1..].fill(f64::INFINITY);
        used.fill(false);

        loop {
            used[j0] = true;
            let i0 = p[j0];
            let row = cost.row(i0 - 1);
            let u_i0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0_usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u_i0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }

        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut sigma = vec![0_usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            sigma[p[j] - 1] = j - 1;
        }
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixup::LabeledPoint;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn batch(features: &[&[f64]]) -> KBatch {
        let c = 2;
        KBatch::new(
            features
                .iter()
                .map(|f| LabeledPoint::one_hot(f.to_vec(), 0, c))
                .collect(),
        )
        .unwrap()
    }

    /// Exhaustive assignment oracle: lexicographically first permutation
    /// achieving the minimum row-order cost sum.
    fn brute_force(cost: &CostMatrix) -> (Vec<usize>, f64) {
        let k = cost.k();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best_perm = perm.clone();
        let mut best: f64 = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
        while next_permutation(&mut perm) {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
            if total < best {
                best = total;
                best_perm = perm.clone();
            }
        }
        (best_perm, best)
    }

    /// Lexicographic successor; false once the sequence is descending.
    fn next_permutation(perm: &mut [usize]) -> bool {
        if perm.len() < 2 {
            return false;
        }
        let mut i = perm.len() - 1;
        while i > 0 && perm[i - 1] >= perm[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = perm.len() - 1;
        while perm[j] <= perm[i - 1] {
            j -= 1;
        }
        perm.swap(i - 1, j);
        perm[i..].reverse();
        true
    }

    fn random_cost(k: usize, rng: &mut impl Rng) -> CostMatrix {
        let entries = (0..k * k).map(|_| rng.gen::<f64>() * 10.0).collect();
        CostMatrix::from_entries(k, entries).unwrap()
    }

    // --- cost_matrix ---------------------------------------------------------

    #[test]
    fn cost_of_identical_single_points_is_zero() {
        let a = batch(&[&[1.0, 2.0]]);
        let b = batch(&[&[1.0, 2.0]]);
        let m = cost_matrix(&a, &b).unwrap();
        assert_eq!(m.k(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn cost_of_one_dimensional_pair() {
        let a = batch(&[&[0.0]]);
        let b = batch(&[&[3.0]]);
        assert_eq!(cost_matrix(&a, &b).unwrap().get(0, 0), 9.0);
    }

    #[test]
    fn cost_of_two_by_two_grid() {
        let a = batch(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = batch(&[&[0.0, 1.0], &[1.0, 1.0]]);
        let m = cost_matrix(&a, &b).unwrap();
        assert_eq!(
            [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)],
            [1.0, 2.0, 2.0, 1.0]
        );
    }

    #[test]
    fn cost_rejects_shape_mismatches() {
        let a = batch(&[&[0.0], &[1.0]]);
        let b = batch(&[&[0.0]]);
        assert!(matches!(cost_matrix(&a, &b), Err(Error::Shape(_))));
        let c = batch(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(cost_matrix(&a, &c), Err(Error::Shape(_))));
    }

    #[test]
    fn cost_entries_ignore_labels() {
        let a = KBatch::new(vec![LabeledPoint::one_hot(vec![1.0], 0, 2)]).unwrap();
        let b = KBatch::new(vec![LabeledPoint::one_hot(vec![1.0], 1, 2)]).unwrap();
        assert_eq!(cost_matrix(&a, &b).unwrap().get(0, 0), 0.0);
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(matches!(
            CostMatrix::from_entries(2, vec![0.0, f64::NAN, 1.0, 2.0]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            CostMatrix::from_entries(2, vec![0.0, 1.0, 2.0]),
            Err(Error::Shape(_))
        ));
    }

    // --- solve_assignment ------------------------------------------------------

    #[test]
    fn diagonal_zero_matrix_picks_identity() {
        let m = CostMatrix::from_entries(2, vec![0.0, 5.0, 5.0, 0.0]).unwrap();
        let a = solve_assignment(&m).unwrap();
        assert_eq!(a.sigma(), &[0, 1]);
        assert_eq!(a.total_cost(), 0.0);
    }

    #[test]
    fn anti_diagonal_zero_matrix_picks_swap() {
        let m = CostMatrix::from_entries(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let a = solve_assignment(&m).unwrap();
        assert_eq!(a.sigma(), &[1, 0]);
        assert_eq!(a.total_cost(), 0.0);
    }

    #[test]
    fn one_by_one_matrix_is_identity() {
        let m = CostMatrix::from_entries(1, vec![3.5]).unwrap();
        let a = solve_assignment(&m).unwrap();
        assert_eq!(a.sigma(), &[0]);
        assert_eq!(a.total_cost(), 3.5);
    }

    #[test]
    fn random_matrices_match_exhaustive_search() {
        let mut rng = stream(2024);
        for &k in &[5, 6] {
            for _ in 0..100 {
                let m = random_cost(k, &mut rng);
                let got = solve_assignment(&m).unwrap();
                let (want_perm, want_cost) = brute_force(&m);
                assert_eq!(got.sigma(), &want_perm[..]);
                assert_eq!(got.total_cost(), want_cost);
            }
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let mut rng = stream(5);
        let m = random_cost(7, &mut rng);
        let a = solve_assignment(&m).unwrap();
        let b = solve_assignment(&m).unwrap();
        assert_eq!(a, b);
    }

    // --- w2_squared -------------------------------------------------------------

    #[test]
    fn w2_of_identical_batches_is_zero() {
        let a = batch(&[&[0.0, 1.0], &[2.0, 3.0], &[4.0, 5.0]]);
        assert_eq!(w2_squared(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn w2_shifted_line() {
        // {0, 1} vs {1, 2}: match 0→1 and 1→2, cost (1 + 1) / 2 = 1.
        let a = batch(&[&[0.0], &[1.0]]);
        let b = batch(&[&[1.0], &[2.0]]);
        assert_eq!(w2_squared(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn w2_matches_permutation_oracle() {
        let mut rng = stream(31);
        for _ in 0..20 {
            let pts_a: Vec<Vec<f64>> =
                (0..4).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let pts_b: Vec<Vec<f64>> =
                (0..4).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let a = batch(&pts_a.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let b = batch(&pts_b.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let (_, oracle) = brute_force(&cost_matrix(&a, &b).unwrap());
            let got = w2_squared(&a, &b).unwrap();
            assert_eq!(got, oracle / 4.0);
        }
    }

    // --- invariants ---------------------------------------------------------------

    fn arb_points(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-50.0..50.0_f64, 2), k)
    }

    /// Points on the 1/8 lattice: translate-then-subtract stays exact.
    fn arb_dyadic_points(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(
            prop::collection::vec((-400_i32..400).prop_map(|v| v as f64 / 8.0), 2),
            k,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn solver_equals_brute_force_up_to_k7(
            k in 2_usize..=7,
            seed in 0_u64..10_000,
        ) {
            let mut rng = stream(seed);
            let m = random_cost(k, &mut rng);
            let got = solve_assignment(&m).unwrap();
            let (_, want) = brute_force(&m);
            prop_assert_eq!(got.total_cost(), want);
        }

        #[test]
        fn w2_is_symmetric(pa in arb_points(4), pb in arb_points(4)) {
            let a = batch(&pa.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let b = batch(&pb.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let ab = w2_squared(&a, &b).unwrap();
            let ba = w2_squared(&b, &a).unwrap();
            let tol = 1e-9 * ab.abs().max(1.0);
            prop_assert!((ab - ba).abs() <= tol, "{} vs {}", ab, ba);
        }

        #[test]
        fn w2_self_distance_is_zero(pa in arb_points(5)) {
            let a = batch(&pa.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            prop_assert_eq!(w2_squared(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn translation_leaves_matching_unchanged(
            pa in arb_dyadic_points(4),
            pb in arb_dyadic_points(4),
            shift in prop::collection::vec((-160_i32..160).prop_map(|v| v as f64 / 8.0), 2),
        ) {
            let a = batch(&pa.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let b = batch(&pb.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let sa: Vec<Vec<f64>> = pa
                .iter()
                .map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect())
                .collect();
            let sb: Vec<Vec<f64>> = pb
                .iter()
                .map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect())
                .collect();
            let a2 = batch(&sa.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let b2 = batch(&sb.iter().map(|p| p.as_slice()).collect::<Vec<_>>());

            // On a dyadic lattice the shifted costs are bit-identical, so
            // ties (duplicate points, symmetric layouts) hit the same
            // deterministic tie-break and must yield the same permutation.
            let plain = solve_assignment(&cost_matrix(&a, &b).unwrap()).unwrap();
            let moved = solve_assignment(&cost_matrix(&a2, &b2).unwrap()).unwrap();
            prop_assert_eq!(plain.sigma(), moved.sigma());
        }

        #[test]
        fn feature_scaling_scales_w2_quadratically(
            pa in arb_points(3),
            pb in arb_points(3),
            c in 0.1..10.0_f64,
        ) {
            let a = batch(&pa.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let b = batch(&pb.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let sa: Vec<Vec<f64>> =
                pa.iter().map(|p| p.iter().map(|x| c * x).collect()).collect();
            let sb: Vec<Vec<f64>> =
                pb.iter().map(|p| p.iter().map(|x| c * x).collect()).collect();
            let a2 = batch(&sa.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
            let b2 = batch(&sb.iter().map(|p| p.as_slice()).collect::<Vec<_>>());

            let base = w2_squared(&a, &b).unwrap();
            let scaled = w2_squared(&a2, &b2).unwrap();
            let want = c * c * base;
            let tol = 1e-9 * want.abs().max(1e-12);
            prop_assert!((scaled - want).abs() <= tol.max(1e-9 * scaled.abs()),
                "{} vs {}", scaled, want);
        }
    }
}
