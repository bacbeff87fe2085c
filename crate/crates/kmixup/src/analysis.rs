//! Monte Carlo verification of the structural behavior of optimal-transport
//! batch matching, plus the vicinal deviation metric.
//!
//! The checks here mirror the method's structural claims at desk scale:
//!
//! - **Exact cross-cluster count.** With covering balls separated by at
//!   least twice the largest radius, a matched batch pair has exactly
//!   `½ Σᵢ |rᵢ − sᵢ|` cross-cluster matches, where `rᵢ, sᵢ` count each
//!   batch's points in ball `i`. [`cross_cluster_stats`] records observed and
//!   predicted counts per trial.
//! - **Vanishing cross-cluster rate.** The expected cross-cluster fraction
//!   scales like `Σᵢ √(pᵢ(1−pᵢ)) / √(2k)`, so `fraction·√k` is flat in `k`.
//! - **Endpoint localization.** Cross-cluster matches concentrate on the
//!   cluster faces: an endpoint violates when it sits farther than
//!   `D(1+ε)` from the opposite cluster, `ε = max(R_A, R_B)²/D²`.
//!   [`endpoint_localization`] reports violations normalized per coupling
//!   (all `k·trials` matches) and, separately, per cross-match.
//! - **Wasserstein scaling.** Mean squared transport cost between two fresh
//!   `k`-batches of a `d`-manifold decays like `k^(−2/d)`; [`w2_scaling`]
//!   fits the log-log slope.

use crate::mixup::{make_vicinal_step, MixupConfig};
use crate::rng::{split_stream, stream};
use crate::synthetic::{gen_clusters_with, ClusterGeometry, ClusterSpec, Dataset};
use crate::transport::{solve_assignment, CostMatrix};
use crate::{Error, Result};

/// Cross-cluster matching counts over many matched batch pairs.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MatchStats {
    pub k: usize,
    pub trials: usize,
    /// Total cross-cluster matches divided by `k·trials`.
    pub cross_cluster_fraction: f64,
    /// Observed cross-cluster matches per trial.
    pub per_trial_counts: Vec<usize>,
    /// Predicted exact counts `½ Σᵢ |rᵢ − sᵢ|` per trial.
    pub per_trial_lemma_counts: Vec<usize>,
    /// Euclidean lengths of every cross-cluster match.
    pub match_lengths: Vec<f64>,
}

impl MatchStats {
    /// Flat per-trial table: `trial,cross_count,lemma_count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,cross_count,lemma_count\n");
        for (t, (obs, lem)) in self
            .per_trial_counts
            .iter()
            .zip(&self.per_trial_lemma_counts)
            .enumerate()
        {
            out.push_str(&format!("{t},{obs},{lem}\n"));
        }
        out
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cost matrix between two raw feature sets of equal size.
fn feature_cost(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<CostMatrix> {
    let k = a.len();
    let mut entries = Vec::with_capacity(k * k);
    for pa in a {
        for pb in b {
            entries.push(squared_distance(pa, pb));
        }
    }
    CostMatrix::from_entries(k, entries)
}

fn batch_features(data: &Dataset) -> Vec<Vec<f64>> {
    data.points.iter().map(|p| p.features.clone()).collect()
}

/// Exact count `½ Σᵢ |rᵢ − sᵢ|` from two batches' ball occupancies.
fn lemma_count(m: usize, ids_a: &[usize], ids_b: &[usize]) -> usize {
    let mut r = vec![0_isize; m];
    let mut s = vec![0_isize; m];
    for &i in ids_a {
        r[i] += 1;
    }
    for &i in ids_b {
        s[i] += 1;
    }
    let total: isize = r.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum();
    (total / 2) as usize
}

/// Draws `trials` pairs of `k`-batches from `spec`, matches each pair, and
/// counts cross-cluster matches.
///
/// Requires the ball separation under which the exact count law holds;
/// violating specs get a precondition error because the guarantee being
/// checked does not apply to them.
pub fn cross_cluster_stats(
    spec: &ClusterSpec,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<MatchStats> {
    spec.validate()?;
    spec.check_separation()?;
    if k == 0 || trials == 0 {
        return Err(Error::Parameter("k and trials must be positive".into()));
    }

    let m = spec.num_clusters();
    let mut per_trial_counts = Vec::with_capacity(trials);
    let mut per_trial_lemma_counts = Vec::with_capacity(trials);
    let mut match_lengths = Vec::new();
    let mut total_cross = 0_usize;

    for trial in 0..trials {
        let mut rng = split_stream(seed, trial as u64);
        let a = gen_clusters_with(spec, k, &mut rng)?;
        let b = gen_clusters_with(spec, k, &mut rng)?;
        let (fa, fb) = (batch_features(&a), batch_features(&b));
        let ids_a = a.cluster_ids.as_ref().expect("generator records ids");
        let ids_b = b.cluster_ids.as_ref().expect("generator records ids");

        let assignment = solve_assignment(&feature_cost(&fa, &fb)?)?;
        let mut cross = 0;
        for (i, &j) in assignment.sigma().iter().enumerate() {
            if ids_a[i] != ids_b[j] {
                cross += 1;
                match_lengths.push(squared_distance(&fa[i], &fb[j]).sqrt());
            }
        }
        total_cross += cross;
        per_trial_counts.push(cross);
        per_trial_lemma_counts.push(lemma_count(m, ids_a, ids_b));
    }

    Ok(MatchStats {
        k,
        trials,
        cross_cluster_fraction: total_cross as f64 / (k * trials) as f64,
        per_trial_counts,
        per_trial_lemma_counts,
        match_lengths,
    })
}

/// Where cross-cluster matches land relative to the cluster faces.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LocalizationReport {
    pub k: usize,
    pub trials: usize,
    /// Set distance between the two balls.
    pub set_distance: f64,
    /// `max(R_A, R_B)² / D²`.
    pub epsilon: f64,
    /// Cross-cluster matches seen over all trials.
    pub cross_matches: usize,
    /// Cross-cluster matches with an endpoint farther than `D(1+ε)` from
    /// the opposite cluster.
    pub violations: usize,
    /// Violations per coupling: `violations / (k·trials)`.
    pub violation_fraction: f64,
    /// Violations among cross-cluster matches only.
    pub violation_fraction_of_cross: f64,
}

impl LocalizationReport {
    pub fn to_csv(&self) -> String {
        format!(
            "k,trials,set_distance,epsilon,cross_matches,violations,violation_fraction,violation_fraction_of_cross\n\
             {},{},{},{},{},{},{},{}\n",
            self.k,
            self.trials,
            self.set_distance,
            self.epsilon,
            self.cross_matches,
            self.violations,
            self.violation_fraction,
            self.violation_fraction_of_cross,
        )
    }
}

/// Tests every cross-cluster match of a two-cluster spec for endpoint
/// membership in the facing regions: the A-side endpoint must lie within
/// `D(1+ε)` of cluster B and symmetrically.
pub fn endpoint_localization(
    spec: &ClusterSpec,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<LocalizationReport> {
    let geometry = ClusterGeometry::from_spec(spec)?;
    if k == 0 || trials == 0 {
        return Err(Error::Parameter("k and trials must be positive".into()));
    }
    let threshold = geometry.d * (1.0 + geometry.epsilon);

    // Distance from a point to the other cluster's ball as a set.
    let to_ball = |p: &[f64], cluster: usize| -> f64 {
        let center = &spec.centers[cluster];
        let r = spec.radii[cluster];
        (squared_distance(p, center).sqrt() - r).max(0.0)
    };

    let mut cross_matches = 0_usize;
    let mut violations = 0_usize;
    for trial in 0..trials {
        let mut rng = split_stream(seed, trial as u64);
        let a = gen_clusters_with(spec, k, &mut rng)?;
        let b = gen_clusters_with(spec, k, &mut rng)?;
        let (fa, fb) = (batch_features(&a), batch_features(&b));
        let ids_a = a.cluster_ids.as_ref().expect("generator records ids");
        let ids_b = b.cluster_ids.as_ref().expect("generator records ids");

        let assignment = solve_assignment(&feature_cost(&fa, &fb)?)?;
        for (i, &j) in assignment.sigma().iter().enumerate() {
            if ids_a[i] == ids_b[j] {
                continue;
            }
            cross_matches += 1;
            let d_a = to_ball(&fa[i], ids_b[j]);
            let d_b = to_ball(&fb[j], ids_a[i]);
            if d_a > threshold || d_b > threshold {
                violations += 1;
            }
        }
    }

    Ok(LocalizationReport {
        k,
        trials,
        set_distance: geometry.d,
        epsilon: geometry.epsilon,
        cross_matches,
        violations,
        violation_fraction: violations as f64 / (k * trials) as f64,
        violation_fraction_of_cross: if cross_matches == 0 {
            0.0
        } else {
            violations as f64 / cross_matches as f64
        },
    })
}

/// Mean squared transport cost per batch size, with a fitted log-log slope.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScalingReport {
    pub ks: Vec<usize>,
    pub mean_w2sq: Vec<f64>,
    pub fitted_slope: f64,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: f64,
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mean_w2sq\n");
        for (k, m) in self.ks.iter().zip(&self.mean_w2sq) {
            out.push_str(&format!("{k},{m}\n"));
        }
        out
    }
}

/// Mean squared 2-Wasserstein distance between two fresh `k`-batches from
/// `sampler`, for each `k` in `ks`, and the least-squares slope of
/// `log(mean)` against `log(k)`.
///
/// `sampler(k, seed)` must return `k` feature vectors. Zero or non-finite
/// means (e.g. a sampler that returns the same set twice) are rejected as
/// degenerate since their logarithm carries no slope information.
pub fn w2_scaling<F>(
    mut sampler: F,
    ks: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ScalingReport>
where
    F: FnMut(usize, u64) -> Result<Vec<Vec<f64>>>,
{
    if ks.len() < 2 {
        return Err(Error::Parameter("need at least two batch sizes to fit a slope".into()));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) || ks[0] == 0 {
        return Err(Error::Parameter("batch sizes must be positive and increasing".into()));
    }
    if trials == 0 {
        return Err(Error::Parameter("trials must be positive".into()));
    }

    let mut mean_w2sq = Vec::with_capacity(ks.len());
    for (ki, &k) in ks.iter().enumerate() {
        let mut acc = 0.0;
        for trial in 0..trials {
            let pair_index = (ki * trials + trial) as u64;
            let batch_a = sampler(k, seed.wrapping_add(2 * pair_index))?;
            let batch_b = sampler(k, seed.wrapping_add(2 * pair_index + 1))?;
            if batch_a.len() != k || batch_b.len() != k {
                return Err(Error::Shape(format!(
                    "sampler returned {} and {} points, expected {k}",
                    batch_a.len(),
                    batch_b.len()
                )));
            }
            let assignment = solve_assignment(&feature_cost(&batch_a, &batch_b)?)?;
            acc += assignment.total_cost() / k as f64;
        }
        mean_w2sq.push(acc / trials as f64);
    }

    if mean_w2sq.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::Degenerate(format!(
            "mean transport costs {mean_w2sq:?} admit no log-log fit"
        )));
    }

    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = mean_w2sq.iter().map(|&m| m.ln()).collect();
    let (fitted_slope, _, fit_residual) = least_squares_line(&xs, &ys);

    Ok(ScalingReport { ks: ks.to_vec(), mean_w2sq, fitted_slope, fit_residual })
}

/// Convenience wrapper: scaling on the built-in manifolds.
pub fn manifold_w2_scaling(
    d_intrinsic: usize,
    ambient_dim: usize,
    ks: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ScalingReport> {
    w2_scaling(
        |k, s| {
            let sample = crate::synthetic::gen_manifold(d_intrinsic, ambient_dim, k, s)?;
            Ok(sample.dataset.points.into_iter().map(|p| p.features).collect())
        },
        ks,
        trials,
        seed,
    )
}

/// Ordinary least squares of `ys` on `xs`: `(slope, intercept, rms residual)`.
fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Mean, over `steps` vicinal batches, of each generated point's closest
/// squared distance to its two parents:
/// `min(‖v − parent_γ‖², ‖v − parent_ξ‖²)`.
///
/// Zero exactly when every drawn `λ` lands on {0, 1}; shrinks with `k` on
/// clustered data as the matching gets shorter.
pub fn vicinal_deviation(
    dataset: &Dataset,
    cfg: &MixupConfig,
    steps: usize,
    seed: u64,
) -> Result<f64> {
    if steps == 0 {
        return Err(Error::Parameter("steps must be positive".into()));
    }
    let mut rng = stream(seed);
    let mut total = 0.0;
    let mut count = 0_usize;
    for _ in 0..steps {
        for v in make_vicinal_step(dataset, cfg, &mut rng)? {
            let g = &dataset.points[v.parent_gamma_index];
            let x = &dataset.points[v.parent_xi_index];
            let to_g = squared_distance(&v.features, &g.features);
            let to_x = squared_distance(&v.features, &x.features);
            total += to_g.min(to_x);
            count += 1;
        }
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::synthetic::gen_clusters;

    fn two_cluster_spec(center_gap: f64, radius: f64) -> ClusterSpec {
        ClusterSpec::uniform(vec![vec![0.0, 0.0], vec![center_gap, 0.0]], radius).unwrap()
    }

    #[test]
    fn single_cluster_has_no_cross_matches() {
        let spec = ClusterSpec::uniform(vec![vec![0.0, 0.0]], 1.0).unwrap();
        let stats = cross_cluster_stats(&spec, 16, 50, 0).unwrap();
        assert_eq!(stats.cross_cluster_fraction, 0.0);
        assert!(stats.per_trial_counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn equal_count_batches_have_no_cross_matches() {
        // Condition the draw on r = s by sampling 8 points from each ball
        // explicitly for both sides, then match.
        let spec = two_cluster_spec(12.0, 1.0);
        let mut rng = stream(3);
        for _ in 0..20 {
            let mut features = [Vec::new(), Vec::new()];
            let mut ids = [Vec::new(), Vec::new()];
            for side in 0..2 {
                for _ in 0..8 {
                    for cluster in 0..2 {
                        let ball = ClusterSpec::uniform(
                            vec![spec.centers[cluster].clone()],
                            spec.radii[cluster],
                        )
                        .unwrap();
                        let one = gen_clusters_with(&ball, 1, &mut rng).unwrap();
                        features[side].push(one.points[0].features.clone());
                        ids[side].push(cluster);
                    }
                }
            }
            let assignment =
                solve_assignment(&feature_cost(&features[0], &features[1]).unwrap()).unwrap();
            let cross = assignment
                .sigma()
                .iter()
                .enumerate()
                .filter(|&(i, &j)| ids[0][i] != ids[1][j])
                .count();
            assert_eq!(cross, 0);
        }
    }

    #[test]
    fn observed_counts_equal_lemma_counts_exactly() {
        let spec = two_cluster_spec(12.0, 1.0);
        let stats = cross_cluster_stats(&spec, 32, 100, 5).unwrap();
        assert_eq!(stats.per_trial_counts, stats.per_trial_lemma_counts);
    }

    #[test]
    fn cross_fraction_rate_is_near_inverse_root_pi() {
        // Two equal clusters: fraction·√k ≈ 1/√π ≈ 0.564.
        let spec = two_cluster_spec(12.0, 1.0);
        for &k in &[64, 128] {
            let stats = cross_cluster_stats(&spec, k, 200, 9).unwrap();
            let scaled = stats.cross_cluster_fraction * (k as f64).sqrt();
            assert!(
                (0.45..=0.68).contains(&scaled),
                "k={k}: fraction·sqrt(k) = {scaled}"
            );
        }
    }

    #[test]
    fn unseparated_spec_is_a_precondition_error() {
        let spec = two_cluster_spec(3.0, 1.0);
        assert!(matches!(
            cross_cluster_stats(&spec, 8, 10, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn point_clusters_never_violate_localization() {
        // Radius-0 clusters: every cross match connects the two support
        // points at exactly the set distance, so membership holds with ε = 0.
        let spec = two_cluster_spec(10.0, 0.0);
        let report = endpoint_localization(&spec, 8, 50, 2).unwrap();
        assert_eq!(report.epsilon, 0.0);
        assert!(report.cross_matches > 0);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn localization_rejects_non_two_cluster_specs() {
        let spec = ClusterSpec::uniform(
            vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 10.0]],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            endpoint_localization(&spec, 8, 10, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn circle_scaling_slope_is_near_minus_two() {
        let report = manifold_w2_scaling(1, 2, &[8, 16, 32, 64, 128], 40, 11).unwrap();
        assert!(
            (-2.5..=-1.5).contains(&report.fitted_slope),
            "slope {}",
            report.fitted_slope
        );
    }

    #[test]
    fn duplicate_batches_are_degenerate() {
        let result = w2_scaling(
            |k, _seed| Ok((0..k).map(|i| vec![i as f64, 0.0]).collect()),
            &[4, 8, 16],
            5,
            0,
        );
        assert!(matches!(result, Err(Error::Degenerate(_))));
    }

    #[test]
    fn scaling_rejects_bad_k_lists() {
        let sampler = |k: usize, _s: u64| Ok(vec![vec![0.0]; k]);
        assert!(w2_scaling(sampler, &[8], 5, 0).is_err());
        let sampler = |k: usize, _s: u64| Ok(vec![vec![0.0]; k]);
        assert!(w2_scaling(sampler, &[8, 8], 5, 0).is_err());
    }

    #[test]
    fn deviation_vanishes_as_alpha_concentrates_on_endpoints() {
        let spec = two_cluster_spec(10.0, 1.0);
        let data = gen_clusters(&spec, 128, 1).unwrap();
        let near_zero =
            vicinal_deviation(&data, &MixupConfig::new(4, 0.01, 0).unwrap(), 200, 7).unwrap();
        let at_one =
            vicinal_deviation(&data, &MixupConfig::new(4, 1.0, 0).unwrap(), 200, 7).unwrap();
        assert!(near_zero >= 0.0);
        assert!(
            near_zero < 0.05 * at_one,
            "alpha→0 deviation {near_zero} not far below alpha=1 deviation {at_one}"
        );
    }

    #[test]
    fn reports_serialize_to_json_and_csv() {
        let spec = two_cluster_spec(12.0, 1.0);
        let stats = cross_cluster_stats(&spec, 8, 5, 0).unwrap();
        let json = serde_json::to_string(&stats).unwrap();
        assert!(json.contains("\"cross_cluster_fraction\""));
        assert!(stats.to_csv().starts_with("trial,cross_count,lemma_count"));

        let report = manifold_w2_scaling(1, 2, &[8, 16], 5, 0).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"fitted_slope\""));
        assert!(report.to_csv().starts_with("k,mean_w2sq"));
    }
}
