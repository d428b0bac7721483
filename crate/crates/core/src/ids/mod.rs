//! Isolation-forest intrusion detection.
//!
//! The canonical construction: each tree is grown on an independent uniform
//! subsample by picking a random dimension and a uniform split between the
//! routed points' min and max, down to `ceil(log2(subsample))` levels. A
//! point's anomaly score is `2^(−E(h)/c(ψ))` where `E(h)` is its mean path
//! length across trees (with the `c(leaf size)` adjustment at truncated
//! leaves) and `c(ψ)` the expected path length of an unsuccessful BST search
//! over the subsample size. Scores near 1 isolate quickly — anomalies;
//! scores well below 0.5 are buried in the bulk — benign.

pub mod eval;
pub mod ingest;
pub mod synth;

pub use eval::{evaluate, EvalReport};

use crate::error::IdsError;
use crate::rng;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Traffic verdict. `Malicious` is the positive class in evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign,
    Malicious,
}

/// One flow observation: a fixed-length numeric feature vector, optionally
/// labelled for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowFeatures {
    pub values: Vec<f64>,
    pub label: Option<Label>,
}

impl FlowFeatures {
    pub fn unlabeled(values: Vec<f64>) -> Self {
        Self { values, label: None }
    }

    pub fn labeled(values: Vec<f64>, label: Label) -> Self {
        Self { values, label: Some(label) }
    }
}

/// Forest hyperparameters (training-time knobs only; the trained forest
/// remembers what it was built with).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestSettings {
    pub trees: usize,
    pub subsample: usize,
    pub threshold: f64,
}

impl Default for ForestSettings {
    fn default() -> Self {
        Self { trees: 100, subsample: 256, threshold: 0.5 }
    }
}

/// Expected path length of an unsuccessful search in a BST of n points: the
/// normalizer c(n). 0 for n ≤ 1, 1 for n = 2, else
/// `2·(ln(n−1) + γ) − 2(n−1)/n` with γ the Euler–Mascheroni constant.
pub fn avg_path_normalizer(n: usize) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_9;
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let nf = n as f64;
            2.0 * ((nf - 1.0).ln() + EULER_GAMMA) - 2.0 * (nf - 1.0) / nf
        }
    }
}

/// Score from an already-averaged path length: `2^(−mean/c)` with `c` the
/// subsample normalizer. Exactly 0.5 when the mean equals the normalizer;
/// 0.5 by convention when the normalizer is degenerate (subsample < 2, where
/// no isolation depth is meaningful).
pub fn score_from_mean_path(mean_path: f64, normalizer: f64) -> f64 {
    if normalizer == 0.0 {
        return 0.5;
    }
    2f64.powf(-(mean_path / normalizer))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
enum Node {
    Split { dim: usize, value: f64, left: Box<Node>, right: Box<Node> },
    Leaf { size: usize },
}

/// A single isolation tree: binary splits down to `height_limit`, leaves
/// recording how many training points pooled there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    root: Node,
    pub height_limit: usize,
}

impl IsolationTree {
    /// Path length of `x` through this tree, including the leaf-size
    /// adjustment.
    pub fn path_length(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        let mut depth = 0.0;
        loop {
            match node {
                Node::Leaf { size } => return depth + avg_path_normalizer(*size),
                Node::Split { dim, value, left, right } => {
                    node = if x[*dim] < *value { left } else { right };
                    depth += 1.0;
                }
            }
        }
    }

    /// Deepest leaf depth (for invariant checks).
    pub fn max_depth(&self) -> usize {
        fn walk(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }
}

fn build_node(
    points: &[Vec<f64>],
    index: &mut [usize],
    depth: usize,
    height_limit: usize,
    rng: &mut ChaCha12Rng,
) -> Node {
    if index.len() <= 1 || depth >= height_limit {
        return Node::Leaf { size: index.len() };
    }
    let dims = points[index[0]].len();
    // Dimensions that still vary among the routed points are the only ones a
    // split can separate; constant data collapses to a leaf.
    let mut splittable = Vec::with_capacity(dims);
    for d in 0..dims {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in index.iter() {
            let v = points[i][d];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo < hi {
            splittable.push((d, lo, hi));
        }
    }
    if splittable.is_empty() {
        return Node::Leaf { size: index.len() };
    }
    let (dim, lo, hi) = splittable[rng.random_range(0..splittable.len())];
    let value = rng.random_range(lo..hi);
    // Partition in place: points below the split go left.
    let mut mid = 0;
    for i in 0..index.len() {
        if points[index[i]][dim] < value {
            index.swap(i, mid);
            mid += 1;
        }
    }
    let (left_idx, right_idx) = index.split_at_mut(mid);
    let left = build_node(points, left_idx, depth + 1, height_limit, rng);
    let right = build_node(points, right_idx, depth + 1, height_limit, rng);
    Node::Split { dim, value, left: Box::new(left), right: Box::new(right) }
}

/// A trained isolation forest. Immutable after fit; safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationForest {
    trees: Vec<IsolationTree>,
    pub subsample: usize,
    pub dimensionality: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Cached c(subsample): the score normalizer.
    normalizer: f64,
}

/// Train a forest on `data`. Each tree gets an independent uniform subsample
/// and its own RNG stream derived from `(seed, tree index)`, so the result is
/// identical regardless of construction order or thread count. `subsample`
/// is clamped to the data size.
pub fn fit(data: &[FlowFeatures], settings: &ForestSettings, seed: u64) -> Result<IsolationForest, IdsError> {
    if data.is_empty() {
        return Err(IdsError::EmptyTrainingSet);
    }
    let dim = data[0].values.len();
    for row in data {
        if row.values.len() != dim {
            return Err(IdsError::RaggedRows { first: dim, other: row.values.len() });
        }
    }
    if dim == 0 {
        return Err(IdsError::BadSettings("feature vectors must be non-empty".into()));
    }
    if settings.trees == 0 {
        return Err(IdsError::BadSettings("need at least one tree".into()));
    }
    if settings.subsample < 2 {
        return Err(IdsError::BadSettings("subsample must be at least 2".into()));
    }
    if !(settings.threshold > 0.0 && settings.threshold < 1.0) {
        return Err(IdsError::BadSettings(format!(
            "threshold must lie strictly in (0, 1), got {}",
            settings.threshold
        )));
    }

    let subsample = settings.subsample.min(data.len());
    let height_limit = (subsample as f64).log2().ceil() as usize;
    let points: Vec<Vec<f64>> = data.iter().map(|f| f.values.clone()).collect();

    let trees: Vec<IsolationTree> = (0..settings.trees)
        .into_par_iter()
        .map(|tree_index| {
            let mut rng = rng::substream(seed, "iforest-tree", tree_index as u64);
            let mut index: Vec<usize> =
                sample_indices(&mut rng, points.len(), subsample).into_vec();
            let root = build_node(&points, &mut index, 0, height_limit, &mut rng);
            IsolationTree { root, height_limit }
        })
        .collect();

    Ok(IsolationForest {
        trees,
        subsample,
        dimensionality: dim,
        threshold: settings.threshold,
        seed,
        normalizer: avg_path_normalizer(subsample),
    })
}

impl IsolationForest {
    pub fn trees(&self) -> &[IsolationTree] {
        &self.trees
    }

    /// Mean path length of `x` across all trees.
    pub fn mean_path_length(&self, x: &[f64]) -> Result<f64, IdsError> {
        if x.len() != self.dimensionality {
            return Err(IdsError::DimensionMismatch { expected: self.dimensionality, got: x.len() });
        }
        let total: f64 = self.trees.iter().map(|t| t.path_length(x)).sum();
        Ok(total / self.trees.len() as f64)
    }

    /// Anomaly score in (0, 1): `2^(−E(h)/c(ψ))`.
    pub fn anomaly_score(&self, x: &[f64]) -> Result<f64, IdsError> {
        let mean = self.mean_path_length(x)?;
        Ok(score_from_mean_path(mean, self.normalizer))
    }

    /// Threshold the anomaly score; an exact tie blocks (malicious).
    pub fn classify(&self, x: &[f64]) -> Result<Label, IdsError> {
        let score = self.anomaly_score(x)?;
        Ok(if score >= self.threshold { Label::Malicious } else { Label::Benign })
    }

    pub fn save(&self, path: &Path) -> Result<(), IdsError> {
        let artifact = ForestArtifact { format_version: FOREST_FORMAT_VERSION, forest: self.clone() };
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        serde_json::to_writer(&mut w, &artifact)?;
        use std::io::Write as _;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IdsError> {
        let file = std::fs::File::open(path)?;
        let artifact: ForestArtifact = serde_json::from_reader(std::io::BufReader::new(file))?;
        if artifact.format_version != FOREST_FORMAT_VERSION {
            return Err(IdsError::BadFormatVersion(artifact.format_version));
        }
        Ok(artifact.forest)
    }
}

const FOREST_FORMAT_VERSION: u32 = 1;

/// On-disk representation: a version tag wrapping the forest, JSON-encoded.
#[derive(Serialize, Deserialize)]
struct ForestArtifact {
    format_version: u32,
    forest: IsolationForest,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_data(n: usize) -> Vec<FlowFeatures> {
        (0..n).map(|_| FlowFeatures::unlabeled(vec![1.5, -2.0])).collect()
    }

    #[test]
    fn normalizer_base_cases_and_growth() {
        assert_eq!(avg_path_normalizer(0), 0.0);
        assert_eq!(avg_path_normalizer(1), 0.0);
        assert_eq!(avg_path_normalizer(2), 1.0);
        let expected_256 = 2.0 * (255f64.ln() + 0.5772156649) - 2.0 * 255.0 / 256.0;
        assert!((avg_path_normalizer(256) - expected_256).abs() < 1e-12);
        for n in 2..2000 {
            assert!(avg_path_normalizer(n + 1) > avg_path_normalizer(n), "c must grow at n={n}");
        }
    }

    #[test]
    fn constant_data_yields_leaf_only_trees_scoring_half() {
        let data = constant_data(1000);
        let forest =
            fit(&data, &ForestSettings { trees: 10, subsample: 256, threshold: 0.5 }, 3).unwrap();
        for tree in forest.trees() {
            assert_eq!(tree.max_depth(), 0);
            assert_eq!(tree.path_length(&[1.5, -2.0]), avg_path_normalizer(256));
        }
        // Every path length equals c(subsample) exactly, so the score is
        // exactly 2^−1.
        assert_eq!(forest.anomaly_score(&[1.5, -2.0]).unwrap(), 0.5);
        assert_eq!(forest.classify(&[1.5, -2.0]).unwrap(), Label::Malicious);
    }

    #[test]
    fn fit_is_deterministic() {
        let data = synth::fixture_dataset(42);
        let s = ForestSettings { trees: 20, subsample: 64, threshold: 0.5 };
        let a = fit(&data, &s, 7).unwrap();
        let b = fit(&data, &s, 7).unwrap();
        assert_eq!(a, b);
        for row in data.iter().take(50) {
            assert_eq!(a.anomaly_score(&row.values).unwrap(), b.anomaly_score(&row.values).unwrap());
        }
        let c = fit(&data, &s, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn five_point_line_isolates_the_far_point() {
        let data: Vec<FlowFeatures> = [0.0, 0.1, 0.2, 0.3, 100.0]
            .iter()
            .map(|&v| FlowFeatures::unlabeled(vec![v]))
            .collect();
        let forest =
            fit(&data, &ForestSettings { trees: 50, subsample: 256, threshold: 0.5 }, 7).unwrap();
        let scores: Vec<f64> =
            data.iter().map(|f| forest.anomaly_score(&f.values).unwrap()).collect();
        let far = scores[4];
        for (i, &s) in scores.iter().enumerate().take(4) {
            assert!(far > s, "point 100 must outscore point {i} ({far} vs {s})");
        }
    }

    #[test]
    fn fixture_outliers_all_outscore_inliers() {
        let data = synth::fixture_dataset(42);
        let forest =
            fit(&data, &ForestSettings { trees: 100, subsample: 64, threshold: 0.5 }, 42).unwrap();
        let mut max_inlier = f64::NEG_INFINITY;
        let mut min_outlier = f64::INFINITY;
        for row in &data {
            let score = forest.anomaly_score(&row.values).unwrap();
            match row.label.unwrap() {
                Label::Benign => max_inlier = max_inlier.max(score),
                Label::Malicious => min_outlier = min_outlier.min(score),
            }
        }
        assert!(
            min_outlier > max_inlier,
            "outliers must separate: min outlier {min_outlier} vs max inlier {max_inlier}"
        );
    }

    #[test]
    fn scores_stay_in_open_unit_interval() {
        let mut r = crate::rng::stream(11, "score-range");
        let data: Vec<FlowFeatures> = (0..500)
            .map(|_| FlowFeatures::unlabeled((0..3).map(|_| r.random_range(-5.0..5.0)).collect()))
            .collect();
        let forest =
            fit(&data, &ForestSettings { trees: 25, subsample: 64, threshold: 0.5 }, 5).unwrap();
        for row in &data {
            let s = forest.anomaly_score(&row.values).unwrap();
            assert!(s > 0.0 && s < 1.0, "score {s} out of (0,1)");
        }
    }

    #[test]
    fn tree_depth_respects_height_limit() {
        let data = synth::fixture_dataset(1);
        let forest =
            fit(&data, &ForestSettings { trees: 30, subsample: 64, threshold: 0.5 }, 2).unwrap();
        for tree in forest.trees() {
            assert_eq!(tree.height_limit, 6);
            assert!(tree.max_depth() <= 6);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let forest = fit(&constant_data(10), &ForestSettings::default(), 1).unwrap();
        assert!(matches!(
            forest.anomaly_score(&[1.0]),
            Err(IdsError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(matches!(fit(&[], &ForestSettings::default(), 1), Err(IdsError::EmptyTrainingSet)));
        let ragged = vec![
            FlowFeatures::unlabeled(vec![1.0, 2.0]),
            FlowFeatures::unlabeled(vec![1.0]),
        ];
        assert!(matches!(
            fit(&ragged, &ForestSettings::default(), 1),
            Err(IdsError::RaggedRows { first: 2, other: 1 })
        ));
        let bad = ForestSettings { threshold: 1.0, ..ForestSettings::default() };
        assert!(matches!(fit(&constant_data(10), &bad, 1), Err(IdsError::BadSettings(_))));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forest.json");
        let data = synth::fixture_dataset(3);
        let forest =
            fit(&data, &ForestSettings { trees: 10, subsample: 64, threshold: 0.5 }, 5).unwrap();
        forest.save(&path).unwrap();
        let loaded = IsolationForest::load(&path).unwrap();
        assert_eq!(forest, loaded);
    }

    #[test]
    fn subsample_clamps_to_data_size() {
        let data = constant_data(10);
        let forest = fit(&data, &ForestSettings::default(), 1).unwrap();
        assert_eq!(forest.subsample, 10);
    }
}
