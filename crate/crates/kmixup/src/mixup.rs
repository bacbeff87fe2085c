//! Vicinal data generation: `Beta(α, α)` weights, displacement interpolation
//! of optimally matched batches, and the matched-point distribution of a
//! single anchor.
//!
//! One training step draws `2k` distinct dataset points, splits them into two
//! `k`-batches, matches the batches with [`crate::transport::solve_assignment`],
//! draws a single `λ`, and blends every matched pair — features and soft
//! labels alike — as `λ·γ + (1−λ)·ξ`. One `λ` is shared by the whole matched
//! pair of batches, not drawn per point.

use rand::Rng;

use crate::rng::{sample_distinct, standard_normal};
use crate::synthetic::Dataset;
use crate::transport::{cost_matrix, solve_assignment, Assignment};
use crate::{Error, Result};

/// Tolerance used by label-simplex and collinearity invariants.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A feature vector paired with a soft label (a probability vector).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub features: Vec<f64>,
    pub label: Vec<f64>,
}

impl LabeledPoint {
    /// Builds a point, checking that the label is a probability vector
    /// (entries ≥ 0, summing to 1 within [`SIMPLEX_TOL`]).
    pub fn new(features: Vec<f64>, label: Vec<f64>) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::Parameter("label vector must be non-empty".into()));
        }
        if label.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::Parameter(format!(
                "label entries must be finite and non-negative, got {label:?}"
            )));
        }
        let sum: f64 = label.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Parameter(format!(
                "label entries must sum to 1 (got {sum})"
            )));
        }
        if features.iter().any(|&v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector".into()));
        }
        Ok(Self { features, label })
    }

    /// One-hot point: class `class` out of `num_classes`.
    pub fn one_hot(features: Vec<f64>, class: usize, num_classes: usize) -> Self {
        let mut label = vec![0.0; num_classes];
        label[class] = 1.0;
        Self { features, label }
    }
}

/// Exactly `k` labeled points, read as the uniform discrete measure over its
/// atoms. When drawn from a dataset the batch remembers the source indices so
/// vicinal points can report their parents.
#[derive(Debug, Clone)]
pub struct KBatch {
    points: Vec<LabeledPoint>,
    indices: Vec<usize>,
}

impl KBatch {
    /// Batch from standalone points; source indices default to `0..k`.
    pub fn new(points: Vec<LabeledPoint>) -> Result<Self> {
        let indices = (0..points.len()).collect();
        Self::with_indices(points, indices)
    }

    /// Batch whose points came from dataset positions `indices`.
    pub fn with_indices(points: Vec<LabeledPoint>, indices: Vec<usize>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("batch must contain at least one point".into()));
        }
        if indices.len() != points.len() {
            return Err(Error::Shape(format!(
                "{} points but {} source indices",
                points.len(),
                indices.len()
            )));
        }
        let d = points[0].features.len();
        let c = points[0].label.len();
        if points.iter().any(|p| p.features.len() != d || p.label.len() != c) {
            return Err(Error::Shape(
                "all points in a batch must share feature and label dimensions".into(),
            ));
        }
        Ok(Self { points, indices })
    }

    /// Batch of the dataset points at `indices` (cloned), keeping provenance.
    pub fn from_dataset(dataset: &Dataset, indices: &[usize]) -> Result<Self> {
        let points = indices
            .iter()
            .map(|&i| {
                dataset
                    .points
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Parameter(format!("index {i} out of bounds")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_indices(points, indices.to_vec())
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].features.len()
    }

    pub fn num_classes(&self) -> usize {
        self.points[0].label.len()
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    /// Dataset positions the points were drawn from.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Parameters of vicinal generation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MixupConfig {
    /// Batch size of each side of the matching; `k = 1` is standard mixup.
    pub k: usize,
    /// Concentration of the `Beta(α, α)` mixing weight; must be positive.
    pub alpha: f64,
    /// Seed for the vicinal stream.
    pub seed: u64,
}

impl MixupConfig {
    pub fn new(k: usize, alpha: f64, seed: u64) -> Result<Self> {
        let cfg = Self { k, alpha, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Parameter(format!(
                "alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl Default for MixupConfig {
    fn default() -> Self {
        Self { k: 1, alpha: 1.0, seed: 0 }
    }
}

/// An interpolated training point with its provenance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VicinalPoint {
    pub features: Vec<f64>,
    pub label: Vec<f64>,
    /// Mixing weight on the γ parent.
    pub lambda: f64,
    /// Dataset index of the γ-side parent.
    pub parent_gamma_index: usize,
    /// Dataset index of the matched ξ-side parent.
    pub parent_xi_index: usize,
}

/// Monte Carlo estimate of the distribution of points an anchor is matched
/// to across batch samplings, together with its mean.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LocalDistribution {
    pub anchor_index: usize,
    /// Feature vectors of the matched partners, one per sampled batch pair.
    pub matched_points: Vec<Vec<f64>>,
    /// Arithmetic mean of `matched_points`.
    pub mean: Vec<f64>,
}

/// One draw of `λ ~ Beta(alpha, alpha)`.
///
/// Sampled as a ratio of two `Gamma(alpha, 1)` draws (Marsaglia-Tsang with
/// the `shape < 1` boost), so the result is exact for every positive `alpha`
/// rather than relying on small-`alpha` approximations.
pub fn sample_lambda<R: Rng>(alpha: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Parameter(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    loop {
        let g1 = gamma_draw(alpha, rng);
        let g2 = gamma_draw(alpha, rng);
        let sum = g1 + g2;
        // Both draws can underflow to zero for very small alpha; redraw.
        if sum > 0.0 {
            return Ok(g1 / sum);
        }
    }
}

/// One `Gamma(shape, 1)` draw via Marsaglia-Tsang squeeze.
fn gamma_draw<R: Rng>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        // Boost: Gamma(a) = Gamma(a + 1) * U^(1/a).
        let u: f64 = rng.gen();
        return gamma_draw(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = rng.gen();
        if u < 1.0 - 0.0331 * x * x * x * x {
            return d * v;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Displacement interpolation of two matched batches at a single weight.
///
/// Point `i` of the result is `λ·γᵢ + (1−λ)·ξ_{σ(i)}` in both features and
/// labels. At `λ = 1` the output equals `batch_gamma`; at `λ = 0` it equals
/// `batch_xi` permuted by `σ`.
pub fn displacement_interpolate(
    batch_gamma: &KBatch,
    batch_xi: &KBatch,
    assignment: &Assignment,
    lambda: f64,
) -> Result<Vec<VicinalPoint>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let k = batch_gamma.k();
    if batch_xi.k() != k {
        return Err(Error::Shape(format!(
            "batch sizes differ: {k} vs {}",
            batch_xi.k()
        )));
    }
    if batch_gamma.dim() != batch_xi.dim() || batch_gamma.num_classes() != batch_xi.num_classes() {
        return Err(Error::Shape(
            "batches must share feature and label dimensions".into(),
        ));
    }
    if assignment.sigma().len() != k {
        return Err(Error::Shape(format!(
            "assignment over {} points, batches have {k}",
            assignment.sigma().len()
        )));
    }

    let mut out = Vec::with_capacity(k);
    for (i, g) in batch_gamma.points().iter().enumerate() {
        let j = assignment.sigma()[i];
        let x = &batch_xi.points()[j];
        let features = g
            .features
            .iter()
            .zip(&x.features)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let label = g
            .label
            .iter()
            .zip(&x.label)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        out.push(VicinalPoint {
            features,
            label,
            lambda,
            parent_gamma_index: batch_gamma.indices()[i],
            parent_xi_index: batch_xi.indices()[j],
        });
    }
    Ok(out)
}

/// One vicinal training step: draw `2k` distinct points, split into two
/// `k`-batches, match them optimally, draw one `λ`, interpolate.
///
/// The two batches are disjoint within a step; successive steps resample
/// independently.
pub fn make_vicinal_step<R: Rng>(
    dataset: &Dataset,
    cfg: &MixupConfig,
    rng: &mut R,
) -> Result<Vec<VicinalPoint>> {
    cfg.validate()?;
    let n = dataset.len();
    if n < 2 * cfg.k {
        return Err(Error::DatasetTooSmall { needed: 2 * cfg.k, have: n });
    }
    let drawn = sample_distinct(n, 2 * cfg.k, rng);
    let gamma = KBatch::from_dataset(dataset, &drawn[..cfg.k])?;
    let xi = KBatch::from_dataset(dataset, &drawn[cfg.k..])?;
    let assignment = solve_assignment(&cost_matrix(&gamma, &xi)?)?;
    let lambda = sample_lambda(cfg.alpha, rng)?;
    displacement_interpolate(&gamma, &xi, &assignment, lambda)
}

/// Monte Carlo estimate of the matched-point distribution of `anchor`.
///
/// Each sample draws a γ-batch containing the anchor plus `k − 1` other
/// points, an independent disjoint ξ-batch of size `k`, matches them, and
/// records the feature vector the anchor was matched to.
pub fn estimate_local_distribution<R: Rng>(
    dataset: &Dataset,
    anchor: usize,
    cfg: &MixupConfig,
    num_samples: usize,
    rng: &mut R,
) -> Result<LocalDistribution> {
    cfg.validate()?;
    if num_samples < 1 {
        return Err(Error::Parameter("num_samples must be at least 1".into()));
    }
    let n = dataset.len();
    if anchor >= n {
        return Err(Error::Parameter(format!(
            "anchor index {anchor} out of bounds for dataset of {n}"
        )));
    }
    if n < 2 * cfg.k {
        return Err(Error::DatasetTooSmall { needed: 2 * cfg.k, have: n });
    }

    let d = dataset.d;
    let others: Vec<usize> = (0..n).filter(|&i| i != anchor).collect();
    let mut matched = Vec::with_capacity(num_samples);
    for _ in 0..num_samples {
        // Draw 2k - 1 distinct non-anchor points: k - 1 fill out γ, k form ξ.
        let pick = sample_distinct(others.len(), 2 * cfg.k - 1, rng);
        let mut gamma_idx = Vec::with_capacity(cfg.k);
        gamma_idx.push(anchor);
        gamma_idx.extend(pick[..cfg.k - 1].iter().map(|&p| others[p]));
        let xi_idx: Vec<usize> = pick[cfg.k - 1..].iter().map(|&p| others[p]).collect();

        let gamma = KBatch::from_dataset(dataset, &gamma_idx)?;
        let xi = KBatch::from_dataset(dataset, &xi_idx)?;
        let assignment = solve_assignment(&cost_matrix(&gamma, &xi)?)?;
        let partner = &xi.points()[assignment.sigma()[0]];
        matched.push(partner.features.clone());
    }

    let mut mean = vec![0.0; d];
    for m in &matched {
        for (acc, v) in mean.iter_mut().zip(m) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= matched.len() as f64;
    }
    Ok(LocalDistribution { anchor_index: anchor, matched_points: matched, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::synthetic::Dataset;

    fn point(xs: &[f64], class: usize, c: usize) -> LabeledPoint {
        LabeledPoint::one_hot(xs.to_vec(), class, c)
    }

    fn toy_dataset(n: usize) -> Dataset {
        // Two grid clusters on a line, alternating classes.
        let points = (0..n)
            .map(|i| {
                let cls = i % 2;
                point(&[i as f64, (i % 3) as f64], cls, 2)
            })
            .collect();
        Dataset::new(points, None).unwrap()
    }

    // --- sample_lambda -----------------------------------------------------

    #[test]
    fn lambda_rejects_bad_alpha() {
        let mut rng = stream(0);
        assert!(sample_lambda(0.0, &mut rng).is_err());
        assert!(sample_lambda(-1.0, &mut rng).is_err());
        assert!(sample_lambda(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn lambda_alpha_one_is_uniform() {
        // Beta(1, 1) = Uniform(0, 1): check mean and a KS statistic against
        // the uniform CDF at the 1% critical value 1.628/sqrt(n).
        let mut rng = stream(11);
        let n = 100_000;
        let mut draws: Vec<f64> = (0..n)
            .map(|_| sample_lambda(1.0, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");

        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, x) in draws.iter().enumerate() {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((x - lo).abs()).max((x - hi).abs());
        }
        let critical = 1.628 / (n as f64).sqrt();
        assert!(ks < critical, "KS statistic {ks} over critical value {critical}");
    }

    #[test]
    fn lambda_is_symmetric_about_half_for_any_alpha() {
        let mut rng = stream(12);
        for &alpha in &[0.25, 0.5, 2.0, 16.0] {
            let n = 100_000;
            let mean: f64 = (0..n)
                .map(|_| sample_lambda(alpha, &mut rng).unwrap())
                .sum::<f64>()
                / n as f64;
            assert!((mean - 0.5).abs() < 0.01, "alpha {alpha}: mean {mean}");
        }
    }

    #[test]
    fn lambda_variance_matches_beta_formula() {
        // Var Beta(a, b) = ab / ((a+b)^2 (a+b+1)); at a = b = 4 this is 1/36.
        let alpha = 4.0_f64;
        let expected = alpha * alpha / ((2.0 * alpha).powi(2) * (2.0 * alpha + 1.0));
        let mut rng = stream(13);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_lambda(alpha, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(
            (var - expected).abs() < 0.003,
            "var {var}, expected {expected}"
        );
    }

    #[test]
    fn lambda_stays_in_unit_interval_for_tiny_alpha() {
        let mut rng = stream(14);
        for _ in 0..20_000 {
            let l = sample_lambda(0.05, &mut rng).unwrap();
            assert!((0.0..=1.0).contains(&l), "lambda {l}");
        }
    }

    // --- displacement_interpolate -------------------------------------------

    #[test]
    fn interpolation_endpoints() {
        let g = KBatch::new(vec![point(&[0.0, 0.0], 0, 2), point(&[1.0, 0.0], 1, 2)]).unwrap();
        let x = KBatch::new(vec![point(&[5.0, 1.0], 1, 2), point(&[6.0, 1.0], 0, 2)]).unwrap();
        let a = solve_assignment(&cost_matrix(&g, &x).unwrap()).unwrap();

        let at_one = displacement_interpolate(&g, &x, &a, 1.0).unwrap();
        for (v, p) in at_one.iter().zip(g.points()) {
            assert_eq!(v.features, p.features);
            assert_eq!(v.label, p.label);
        }

        let at_zero = displacement_interpolate(&g, &x, &a, 0.0).unwrap();
        for (i, v) in at_zero.iter().enumerate() {
            let p = &x.points()[a.sigma()[i]];
            assert_eq!(v.features, p.features);
            assert_eq!(v.label, p.label);
        }
    }

    #[test]
    fn interpolation_quarter_weight() {
        // 1-D batches {0} and {2}, identity matching, λ = 0.25.
        let g = KBatch::new(vec![point(&[0.0], 0, 2)]).unwrap();
        let x = KBatch::new(vec![point(&[2.0], 1, 2)]).unwrap();
        let a = solve_assignment(&cost_matrix(&g, &x).unwrap()).unwrap();
        let v = &displacement_interpolate(&g, &x, &a, 0.25).unwrap()[0];
        assert!((v.features[0] - 1.5).abs() < 1e-12);
        assert!((v.label[0] - 0.25).abs() < 1e-12);
        assert!((v.label[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn interpolation_rejects_bad_lambda() {
        let g = KBatch::new(vec![point(&[0.0], 0, 2)]).unwrap();
        let x = KBatch::new(vec![point(&[2.0], 1, 2)]).unwrap();
        let a = solve_assignment(&cost_matrix(&g, &x).unwrap()).unwrap();
        assert!(displacement_interpolate(&g, &x, &a, -0.1).is_err());
        assert!(displacement_interpolate(&g, &x, &a, 1.1).is_err());
    }

    // --- make_vicinal_step ---------------------------------------------------

    #[test]
    fn vicinal_step_rejects_small_dataset() {
        let data = toy_dataset(7);
        let cfg = MixupConfig::new(4, 1.0, 0).unwrap();
        match make_vicinal_step(&data, &cfg, &mut stream(0)) {
            Err(Error::DatasetTooSmall { needed: 8, have: 7 }) => {}
            other => panic!("expected DatasetTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn vicinal_points_lie_on_parent_segment() {
        let data = toy_dataset(40);
        let cfg = MixupConfig::new(4, 0.7, 3).unwrap();
        let mut rng = stream(cfg.seed);
        for _ in 0..50 {
            for v in make_vicinal_step(&data, &cfg, &mut rng).unwrap() {
                let g = &data.points[v.parent_gamma_index];
                let x = &data.points[v.parent_xi_index];
                for ((&f, &a), &b) in v.features.iter().zip(&g.features).zip(&x.features) {
                    let expect = v.lambda * a + (1.0 - v.lambda) * b;
                    assert!((f - expect).abs() < SIMPLEX_TOL);
                }
                let label_sum: f64 = v.label.iter().sum();
                assert!((label_sum - 1.0).abs() < SIMPLEX_TOL);
                assert!(v.label.iter().all(|&l| l >= 0.0));
            }
        }
    }

    #[test]
    fn vicinal_stream_is_deterministic() {
        let data = toy_dataset(30);
        let cfg = MixupConfig::new(3, 2.0, 17).unwrap();
        let run = || {
            let mut rng = stream(cfg.seed);
            (0..20)
                .flat_map(|_| make_vicinal_step(&data, &cfg, &mut rng).unwrap())
                .map(|v| (v.features, v.lambda, v.parent_gamma_index, v.parent_xi_index))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn half_dataset_batches_partition_the_dataset() {
        // k = N/2: every point is used exactly once per step.
        let data = toy_dataset(16);
        let cfg = MixupConfig::new(8, 1.0, 5).unwrap();
        let mut rng = stream(cfg.seed);
        let step = make_vicinal_step(&data, &cfg, &mut rng).unwrap();
        let mut used: Vec<usize> = step
            .iter()
            .flat_map(|v| [v.parent_gamma_index, v.parent_xi_index])
            .collect();
        used.sort_unstable();
        assert_eq!(used, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn k1_matches_standard_mixup_moments() {
        // k = 1 must be distributionally identical to standard mixup: compare
        // first and second moments of generated features against a direct
        // pair-sampling implementation over 1e5 steps.
        let data = toy_dataset(24);
        let cfg = MixupConfig::new(1, 0.6, 77).unwrap();
        let steps = 100_000;

        let mut rng = stream(cfg.seed);
        let (mut m1, mut m2) = (vec![0.0; 2], vec![0.0; 2]);
        for _ in 0..steps {
            let v = &make_vicinal_step(&data, &cfg, &mut rng).unwrap()[0];
            for (d, &f) in v.features.iter().enumerate() {
                m1[d] += f;
                m2[d] += f * f;
            }
        }

        // Independent standard-mixup oracle: two distinct uniform indices and
        // one Beta(α, α) weight per step.
        let mut rng = stream(991);
        let (mut o1, mut o2) = (vec![0.0; 2], vec![0.0; 2]);
        for _ in 0..steps {
            let i = rng.gen_range(0..data.len());
            let mut j = rng.gen_range(0..data.len() - 1);
            if j >= i {
                j += 1;
            }
            let l = sample_lambda(cfg.alpha, &mut rng).unwrap();
            for d in 0..2 {
                let f = l * data.points[i].features[d] + (1.0 - l) * data.points[j].features[d];
                o1[d] += f;
                o2[d] += f * f;
            }
        }

        for d in 0..2 {
            let (a, b) = (m1[d] / steps as f64, o1[d] / steps as f64);
            assert!((a - b).abs() < 0.15, "first moment dim {d}: {a} vs {b}");
            let (a2, b2) = (m2[d] / steps as f64, o2[d] / steps as f64);
            assert!((a2 - b2).abs() / b2.max(1.0) < 0.02, "second moment dim {d}: {a2} vs {b2}");
        }
    }

    // --- estimate_local_distribution -----------------------------------------

    #[test]
    fn local_distribution_two_point_dataset() {
        let data = Dataset::new(
            vec![point(&[0.0, 0.0], 0, 2), point(&[4.0, 0.0], 1, 2)],
            None,
        )
        .unwrap();
        let cfg = MixupConfig::new(1, 1.0, 0).unwrap();
        let est =
            estimate_local_distribution(&data, 0, &cfg, 64, &mut stream(2)).unwrap();
        assert_eq!(est.matched_points.len(), 64);
        // The only possible partner is point b.
        for m in &est.matched_points {
            assert_eq!(m, &vec![4.0, 0.0]);
        }
        assert!(est.mean[0] >= 0.0 && est.mean[0] <= 4.0);
    }

    #[test]
    fn local_distribution_mean_is_average_of_matches() {
        let data = toy_dataset(20);
        let cfg = MixupConfig::new(2, 1.0, 0).unwrap();
        let est =
            estimate_local_distribution(&data, 3, &cfg, 128, &mut stream(5)).unwrap();
        for d in 0..2 {
            let avg: f64 = est.matched_points.iter().map(|m| m[d]).sum::<f64>()
                / est.matched_points.len() as f64;
            assert!((avg - est.mean[d]).abs() < SIMPLEX_TOL);
        }
    }

    #[test]
    fn vicinal_step_cross_cluster_count_matches_occupancy_rule() {
        // Recount clusters per drawn batch: cross-parent pairs must number
        // exactly half the summed occupancy imbalance.
        use crate::synthetic::{gen_clusters, ClusterSpec};
        let spec =
            ClusterSpec::uniform(vec![vec![0.0, 0.0], vec![12.0, 0.0]], 1.0).unwrap();
        let data = gen_clusters(&spec, 256, 4).unwrap();
        let ids = data.cluster_ids.clone().unwrap();
        let cfg = MixupConfig::new(32, 1.0, 6).unwrap();
        let mut rng = stream(cfg.seed);
        for _ in 0..200 {
            let step = make_vicinal_step(&data, &cfg, &mut rng).unwrap();
            let cross = step
                .iter()
                .filter(|v| ids[v.parent_gamma_index] != ids[v.parent_xi_index])
                .count();
            let mut r = [0_isize; 2];
            let mut s = [0_isize; 2];
            for v in &step {
                r[ids[v.parent_gamma_index]] += 1;
                s[ids[v.parent_xi_index]] += 1;
            }
            let expected =
                (r.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum::<isize>() / 2) as usize;
            assert_eq!(cross, expected);
        }
    }

    #[test]
    fn anchor_in_far_cluster_matches_mostly_within_it() {
        // Two balls ten radii apart: with k = 32 the anchor's matched points
        // concentrate in its own cluster.
        use crate::synthetic::{gen_clusters, ClusterSpec};
        let spec =
            ClusterSpec::uniform(vec![vec![0.0, 0.0], vec![10.0, 0.0]], 1.0).unwrap();
        let data = gen_clusters(&spec, 256, 8).unwrap();
        let anchor = data
            .cluster_ids
            .as_ref()
            .unwrap()
            .iter()
            .position(|&c| c == 0)
            .unwrap();
        let cfg = MixupConfig::new(32, 1.0, 0).unwrap();
        let est =
            estimate_local_distribution(&data, anchor, &cfg, 256, &mut stream(5)).unwrap();
        let same_cluster = est
            .matched_points
            .iter()
            .filter(|m| m[0] < 5.0)
            .count();
        let fraction = same_cluster as f64 / est.matched_points.len() as f64;
        assert!(fraction >= 0.9, "same-cluster match fraction {fraction}");
    }

    #[test]
    fn k1_local_distribution_mean_approaches_other_points_mean() {
        let data = toy_dataset(12);
        let cfg = MixupConfig::new(1, 1.0, 0).unwrap();
        let est =
            estimate_local_distribution(&data, 0, &cfg, 4000, &mut stream(9)).unwrap();
        // With k = 1 the partner is a uniform draw over the other points.
        let mut want = vec![0.0; 2];
        for p in data.points.iter().skip(1) {
            for d in 0..2 {
                want[d] += p.features[d];
            }
        }
        for d in 0..2 {
            want[d] /= (data.len() - 1) as f64;
            assert!(
                (est.mean[d] - want[d]).abs() < 0.25,
                "dim {d}: {} vs {}",
                est.mean[d],
                want[d]
            );
        }
    }
}
