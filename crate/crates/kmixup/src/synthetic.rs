//! Seeded generators for toy datasets, ball-cluster mixtures, low-dimensional
//! manifolds, and plain CSV input/output.
//!
//! Every generator is a pure function of its parameters and a 64-bit seed.
//! Labels come out one-hot. The 2-D toy shapes (ring, bars, spirals) are
//! frozen to the default parameters below so experiments are repeatable;
//! change them only through the explicit parameter structs.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::mixup::LabeledPoint;
use crate::rng::{shuffle, standard_normal, stream};
use crate::{Error, Result};

/// A labeled point set with uniform feature and label dimensions.
///
/// `cluster_ids` is present only for generators with a ground-truth cluster
/// structure and records which ball each point was drawn from (not its
/// class).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Vec<LabeledPoint>,
    /// Feature dimension.
    pub d: usize,
    /// Number of classes.
    pub c: usize,
    pub cluster_ids: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(points: Vec<LabeledPoint>, cluster_ids: Option<Vec<usize>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("dataset must contain at least one point".into()));
        }
        let d = points[0].features.len();
        let c = points[0].label.len();
        if points.iter().any(|p| p.features.len() != d || p.label.len() != c) {
            return Err(Error::Shape(
                "all dataset points must share feature and label dimensions".into(),
            ));
        }
        if let Some(ids) = &cluster_ids {
            if ids.len() != points.len() {
                return Err(Error::Shape(format!(
                    "{} cluster ids for {} points",
                    ids.len(),
                    points.len()
                )));
            }
        }
        Ok(Self { points, d, c, cluster_ids })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Class of a point (argmax of its label; first index on ties).
    pub fn class_of(&self, i: usize) -> usize {
        argmax(&self.points[i].label)
    }

    /// Count of points per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.c];
        for i in 0..self.len() {
            counts[self.class_of(i)] += 1;
        }
        counts
    }

    /// Per-dimension (min, max) feature ranges.
    pub fn feature_ranges(&self) -> Vec<(f64, f64)> {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); self.d];
        for p in &self.points {
            for (r, &v) in ranges.iter_mut().zip(&p.features) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        ranges
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Cluster mixtures
// ---------------------------------------------------------------------------

/// A mixture of uniform balls: centers, radii, mixture weights, and the class
/// assigned to each ball.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ClusterSpec {
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    pub labels: Vec<usize>,
}

impl ClusterSpec {
    /// Equal-weight spec with one class per cluster.
    pub fn uniform(centers: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        let m = centers.len();
        let spec = Self {
            centers,
            radii: vec![radius; m],
            weights: vec![1.0 / m as f64; m],
            labels: (0..m).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.centers.len();
        if m == 0 {
            return Err(Error::Parameter("cluster spec needs at least one cluster".into()));
        }
        if self.radii.len() != m || self.weights.len() != m || self.labels.len() != m {
            return Err(Error::Shape(format!(
                "cluster spec field lengths disagree: {m} centers, {} radii, {} weights, {} labels",
                self.radii.len(),
                self.weights.len(),
                self.labels.len()
            )));
        }
        let d = self.centers[0].len();
        if d == 0 || self.centers.iter().any(|c| c.len() != d) {
            return Err(Error::Shape("cluster centers must share a positive dimension".into()));
        }
        if self.radii.iter().any(|&r| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::Parameter("cluster radii must be finite and non-negative".into()));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Parameter("cluster weights must be finite and non-negative".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "cluster weights must sum to 1, got {total}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn num_clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0) + 1
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().cloned().fold(0.0, f64::max)
    }

    /// Smallest gap between any two covering balls
    /// (`‖cᵢ − cⱼ‖ − rᵢ − rⱼ`); infinite for a single cluster.
    pub fn separation_margin(&self) -> f64 {
        let mut margin = f64::INFINITY;
        for i in 0..self.num_clusters() {
            for j in i + 1..self.num_clusters() {
                let dist = euclidean(&self.centers[i], &self.centers[j]);
                margin = margin.min(dist - self.radii[i] - self.radii[j]);
            }
        }
        margin
    }

    /// Checks the separation needed for the exact cross-cluster match count:
    /// every pair of covering balls at distance at least twice the largest
    /// radius.
    pub fn check_separation(&self) -> Result<()> {
        let needed = 2.0 * self.max_radius();
        let margin = self.separation_margin();
        if margin < needed {
            return Err(Error::Precondition(format!(
                "cluster balls separated by {margin:.6}, need at least {needed:.6}"
            )));
        }
        Ok(())
    }
}

/// Two-cluster geometry for the endpoint-localization check.
///
/// `d` is the Euclidean distance between the two balls as sets
/// (center distance minus both radii), and
/// `epsilon = max(r_a, r_b)² / d²` exactly.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ClusterGeometry {
    pub d: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub epsilon: f64,
}

impl ClusterGeometry {
    pub fn new(d: f64, r_a: f64, r_b: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Parameter(format!(
                "inter-cluster distance must be positive, got {d}"
            )));
        }
        let r = r_a.max(r_b);
        Ok(Self { d, r_a, r_b, epsilon: r * r / (d * d) })
    }

    /// Geometry of a spec with exactly two clusters.
    pub fn from_spec(spec: &ClusterSpec) -> Result<Self> {
        spec.validate()?;
        if spec.num_clusters() != 2 {
            return Err(Error::Parameter(format!(
                "endpoint localization needs exactly 2 clusters, got {}",
                spec.num_clusters()
            )));
        }
        let center_dist = euclidean(&spec.centers[0], &spec.centers[1]);
        Self::new(center_dist - spec.radii[0] - spec.radii[1], spec.radii[0], spec.radii[1])
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A point uniform in the unit ball of dimension `d`.
fn unit_ball<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let u: f64 = rng.gen();
            let scale = u.powf(1.0 / d as f64) / norm;
            return g.iter().map(|v| v * scale).collect();
        }
    }
}

/// Sample `n` points from a ball mixture: pick a ball by weight, then a point
/// uniform in it. Records the ball index of every point.
pub fn gen_clusters(spec: &ClusterSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let mut rng = stream(seed);
    gen_clusters_with(spec, n, &mut rng)
}

pub(crate) fn gen_clusters_with<R: Rng>(spec: &ClusterSpec, n: usize, rng: &mut R) -> Result<Dataset> {
    let d = spec.dim();
    let c = spec.num_classes();
    let mut points = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        let mut u: f64 = rng.gen();
        let mut cluster = spec.num_clusters() - 1;
        for (j, &w) in spec.weights.iter().enumerate() {
            if u < w {
                cluster = j;
                break;
            }
            u -= w;
        }
        let offset = unit_ball(d, rng);
        let features: Vec<f64> = spec.centers[cluster]
            .iter()
            .zip(&offset)
            .map(|(c, o)| c + o * spec.radii[cluster])
            .collect();
        points.push(LabeledPoint::one_hot(features, spec.labels[cluster], c));
        ids.push(cluster);
    }
    Dataset::new(points, Some(ids))
}

// ---------------------------------------------------------------------------
// Toy 2-D shapes
// ---------------------------------------------------------------------------

/// Geometry of the ring dataset: a class-0 disk inside a class-1 annulus.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct OneRingParams {
    pub disk_radius: f64,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
}

impl Default for OneRingParams {
    fn default() -> Self {
        Self { disk_radius: 1.0, annulus_inner: 2.0, annulus_outer: 2.6 }
    }
}

/// Disk-in-ring binary dataset; classes balanced to within one point.
pub fn gen_one_ring(n: usize, params: &OneRingParams, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::Parameter("n must be at least 2".into()));
    }
    if !(params.disk_radius > 0.0)
        || !(params.annulus_inner > params.disk_radius)
        || !(params.annulus_outer > params.annulus_inner)
    {
        return Err(Error::Parameter(format!("inconsistent ring geometry {params:?}")));
    }
    check_noise(noise)?;
    let mut rng = stream(seed);
    let n_disk = n / 2;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let (r, class) = if i < n_disk {
            // Uniform over the disk area.
            let u: f64 = rng.gen();
            (params.disk_radius * u.sqrt(), 0)
        } else {
            // Uniform over the annulus area.
            let (r0, r1) = (params.annulus_inner, params.annulus_outer);
            let u: f64 = rng.gen();
            ((r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt(), 1)
        };
        let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        let features = vec![
            r * theta.cos() + noise * standard_normal(&mut rng),
            r * theta.sin() + noise * standard_normal(&mut rng),
        ];
        points.push(LabeledPoint::one_hot(features, class, 2));
    }
    Dataset::new(points, None)
}

/// Bar layout: four vertical strips with alternating classes, centers one
/// unit apart. Equal spacing puts the midpoint of two same-class bars exactly
/// on the opposite-class bar between them.
pub const FOUR_BARS_CENTERS: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
pub const FOUR_BARS_HALF_WIDTH: f64 = 0.2;
pub const FOUR_BARS_HEIGHT: f64 = 3.0;

/// Four parallel strips with alternating labels, `n` split evenly.
pub fn gen_four_bars(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::Parameter("n must be at least 4".into()));
    }
    check_noise(noise)?;
    let mut rng = stream(seed);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let bar = i % 4;
        let x = FOUR_BARS_CENTERS[bar]
            + (rng.gen::<f64>() * 2.0 - 1.0) * FOUR_BARS_HALF_WIDTH;
        let y = rng.gen::<f64>() * FOUR_BARS_HEIGHT;
        let features = vec![
            x + noise * standard_normal(&mut rng),
            y + noise * standard_normal(&mut rng),
        ];
        points.push(LabeledPoint::one_hot(features, bar % 2, 2));
    }
    Dataset::new(points, None)
}

/// Spiral layout: two arms of `r = θ · SWISS_ROLL_SCALE`, offset by a half
/// turn, so the arms interleave and the other class sits midway between
/// consecutive wraps of the same arm.
pub const SWISS_ROLL_THETA_MIN: f64 = 0.5 * std::f64::consts::PI;
pub const SWISS_ROLL_THETA_MAX: f64 = 3.0 * std::f64::consts::PI;
pub const SWISS_ROLL_SCALE: f64 = 1.0 / (3.0 * std::f64::consts::PI);

/// Two interleaved spiral arms with opposite labels.
pub fn gen_swiss_roll(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::Parameter("n must be at least 2".into()));
    }
    check_noise(noise)?;
    let mut rng = stream(seed);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let arm = i % 2;
        let theta = SWISS_ROLL_THETA_MIN
            + rng.gen::<f64>() * (SWISS_ROLL_THETA_MAX - SWISS_ROLL_THETA_MIN);
        let r = SWISS_ROLL_SCALE * theta;
        let angle = theta + arm as f64 * std::f64::consts::PI;
        let features = vec![
            r * angle.cos() + noise * standard_normal(&mut rng),
            r * angle.sin() + noise * standard_normal(&mut rng),
        ];
        points.push(LabeledPoint::one_hot(features, arm, 2));
    }
    Dataset::new(points, None)
}

fn check_noise(noise: f64) -> Result<()> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::Parameter(format!("noise must be finite and >= 0, got {noise}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Manifolds
// ---------------------------------------------------------------------------

/// Manifold samples plus the intrinsic coordinates of every point.
#[derive(Debug, Clone)]
pub struct ManifoldSample {
    pub dataset: Dataset,
    /// Intrinsic coordinates: `[θ]` on the circle, `[x, y]` on the square.
    pub intrinsic: Vec<Vec<f64>>,
}

/// Samples a smooth embedded manifold with zero off-manifold noise:
/// `d_intrinsic = 1` is the unit circle in the first two ambient
/// coordinates, `d_intrinsic = 2` the flat unit square.
///
/// Points are drawn by stratified jittered sampling — the manifold is split
/// into `n` equal-measure cells with one uniform point in each — so every
/// point is marginally uniform but the empirical measure has the low
/// discrepancy that makes batch-to-batch transport cost shrink at the
/// `k^(−2/d)` rate.
pub fn gen_manifold(
    d_intrinsic: usize,
    ambient_dim: usize,
    n: usize,
    seed: u64,
) -> Result<ManifoldSample> {
    if d_intrinsic != 1 && d_intrinsic != 2 {
        return Err(Error::Parameter(format!(
            "d_intrinsic must be 1 or 2, got {d_intrinsic}"
        )));
    }
    if ambient_dim < 2 {
        return Err(Error::Parameter(format!(
            "ambient dimension must be at least 2, got {ambient_dim}"
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }

    let mut rng = stream(seed);
    let mut points = Vec::with_capacity(n);
    let mut intrinsic = Vec::with_capacity(n);

    if d_intrinsic == 1 {
        for i in 0..n {
            let theta = std::f64::consts::TAU * (i as f64 + rng.gen::<f64>()) / n as f64;
            let mut features = vec![0.0; ambient_dim];
            features[0] = theta.cos();
            features[1] = theta.sin();
            points.push(LabeledPoint::one_hot(features, 0, 1));
            intrinsic.push(vec![theta]);
        }
    } else {
        // Largest factorization rows × cols = n with rows ≤ cols.
        let mut rows = (n as f64).sqrt() as usize;
        while rows > 1 && n % rows != 0 {
            rows -= 1;
        }
        let cols = n / rows;
        for i in 0..n {
            let (row, col) = (i / cols, i % cols);
            let x = (col as f64 + rng.gen::<f64>()) / cols as f64;
            let y = (row as f64 + rng.gen::<f64>()) / rows as f64;
            let mut features = vec![0.0; ambient_dim];
            features[0] = x;
            features[1] = y;
            points.push(LabeledPoint::one_hot(features, 0, 1));
            intrinsic.push(vec![x, y]);
        }
    }

    Ok(ManifoldSample { dataset: Dataset::new(points, None)?, intrinsic })
}

// ---------------------------------------------------------------------------
// CSV and splits
// ---------------------------------------------------------------------------

/// Loads a dataset from a headered CSV file: `d` feature columns then one
/// label column (then optionally `cluster_id`). Label strings map to class
/// indices in order of first appearance. No quoting; fields split on commas.
pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::CsvMissingFile(path.display().to_string())
        } else {
            Error::Io(e)
        }
    })?;

    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::CsvEmpty)?;
    let columns: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
    let has_cluster = columns.last().map(|c| c.trim() == "cluster_id").unwrap_or(false);
    let label_col = columns.len() - 1 - usize::from(has_cluster);
    if label_col == 0 {
        return Err(Error::Parameter(
            "csv header must name at least one feature column and a label column".into(),
        ));
    }
    let d = label_col;

    let mut label_index: HashMap<String, usize> = HashMap::new();
    let mut label_order: Vec<String> = Vec::new();
    let mut rows: Vec<(Vec<f64>, usize)> = Vec::new();
    let mut cluster_ids: Vec<usize> = Vec::new();

    for (i, raw) in lines {
        let line_no = i + 1; // 1-based line number in the file
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::CsvRaggedRow {
                line: line_no,
                expected: columns.len(),
                found: fields.len(),
            });
        }
        let mut features = Vec::with_capacity(d);
        for cell in &fields[..d] {
            let value: f64 = cell.trim().parse().map_err(|_| Error::CsvNonNumeric {
                line: line_no,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvNonNumeric { line: line_no, value: cell.to_string() });
            }
            features.push(value);
        }
        let label = fields[d].trim().to_string();
        let next = label_index.len();
        let class = *label_index.entry(label.clone()).or_insert_with(|| {
            label_order.push(label);
            next
        });
        if has_cluster {
            let id: usize = fields[d + 1].trim().parse().map_err(|_| Error::CsvNonNumeric {
                line: line_no,
                value: fields[d + 1].to_string(),
            })?;
            cluster_ids.push(id);
        }
        rows.push((features, class));
    }

    if rows.is_empty() {
        return Err(Error::CsvEmpty);
    }
    let c = label_index.len();
    let points = rows
        .into_iter()
        .map(|(features, class)| LabeledPoint::one_hot(features, class, c))
        .collect();
    Dataset::new(points, if has_cluster { Some(cluster_ids) } else { None })
}

/// Writes the same dialect [`load_csv`] reads; appends a `cluster_id` column
/// when the dataset has one. Labels are written as class indices.
pub fn save_csv<P: AsRef<Path>>(dataset: &Dataset, path: P) -> Result<()> {
    let mut out = String::new();
    for i in 0..dataset.d {
        let _ = write!(out, "f{i},");
    }
    out.push_str("label");
    if dataset.cluster_ids.is_some() {
        out.push_str(",cluster_id");
    }
    out.push('\n');

    for (i, p) in dataset.points.iter().enumerate() {
        for v in &p.features {
            let _ = write!(out, "{v},");
        }
        let _ = write!(out, "{}", argmax(&p.label));
        if let Some(ids) = &dataset.cluster_ids {
            let _ = write!(out, ",{}", ids[i]);
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Seeded stratified split: `test_fraction` of each class goes to the test
/// set (rounded per class).
pub fn stratified_split(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::Parameter(format!(
            "test_fraction must lie in [0, 1), got {test_fraction}"
        )));
    }
    let mut rng = stream(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.c];
    for i in 0..dataset.len() {
        by_class[dataset.class_of(i)].push(i);
    }

    let mut test_idx = Vec::new();
    let mut train_idx = Vec::new();
    for class_members in &mut by_class {
        shuffle(class_members, &mut rng);
        let n_test = (class_members.len() as f64 * test_fraction).round() as usize;
        test_idx.extend_from_slice(&class_members[..n_test]);
        train_idx.extend_from_slice(&class_members[n_test..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::Parameter(
            "split produced an empty train or test set; adjust test_fraction".into(),
        ));
    }

    let subset = |idx: &[usize]| -> Result<Dataset> {
        let points = idx.iter().map(|&i| dataset.points[i].clone()).collect();
        let ids = dataset
            .cluster_ids
            .as_ref()
            .map(|ids| idx.iter().map(|&i| ids[i]).collect());
        Dataset::new(points, ids)
    };
    Ok((subset(&train_idx)?, subset(&test_idx)?))
}
