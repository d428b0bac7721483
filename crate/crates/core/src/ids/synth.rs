//! Synthetic traffic feature generators: a Gaussian bulk for benign flows
//! and far uniform outliers for injected attacks, plus the labelled fixture
//! dataset bundled with the repo.

use super::{FlowFeatures, Label};
use crate::rng;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

/// One benign point: N(0, sigma²) per coordinate.
pub fn inlier_point(rng: &mut ChaCha12Rng, dim: usize, sigma: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
    (0..dim).map(|_| normal.sample(rng)).collect()
}

/// One outlier point: per coordinate, magnitude uniform in [lo, hi] with a
/// random sign — far outside any reasonable benign bulk.
pub fn outlier_point(rng: &mut ChaCha12Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let magnitude = rng.random_range(lo..=hi);
            if rng.random_bool(0.5) {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect()
}

pub fn gaussian_inliers(rng: &mut ChaCha12Rng, n: usize, dim: usize, sigma: f64) -> Vec<FlowFeatures> {
    (0..n).map(|_| FlowFeatures::labeled(inlier_point(rng, dim, sigma), Label::Benign)).collect()
}

pub fn far_outliers(rng: &mut ChaCha12Rng, n: usize, dim: usize, lo: f64, hi: f64) -> Vec<FlowFeatures> {
    (0..n).map(|_| FlowFeatures::labeled(outlier_point(rng, dim, lo, hi), Label::Malicious)).collect()
}

/// The bundled evaluation fixture: 990 tight 2-D Gaussian inliers followed
/// by 10 far outliers (coordinate magnitudes in [20, 100]), labelled, fully
/// determined by `seed`.
pub fn fixture_dataset(seed: u64) -> Vec<FlowFeatures> {
    let mut r = rng::stream(seed, "ids-fixture");
    let mut rows = gaussian_inliers(&mut r, 990, 2, 1.0);
    rows.extend(far_outliers(&mut r, 10, 2, 20.0, 100.0));
    rows
}

/// Render labelled flows as CSV text with header `f0,...,f{d-1},label`.
/// Floats use Rust's shortest round-trip formatting, so the text regenerates
/// byte-identically from the same inputs.
pub fn to_labeled_csv(rows: &[FlowFeatures]) -> String {
    let dim = rows.first().map(|r| r.values.len()).unwrap_or(0);
    let mut out = String::new();
    for d in 0..dim {
        out.push_str(&format!("f{d},"));
    }
    out.push_str("label\n");
    for row in rows {
        for v in &row.values {
            out.push_str(&format!("{v},"));
        }
        out.push_str(match row.label {
            Some(Label::Malicious) => "Malicious",
            _ => "Benign",
        });
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::ingest::{ingest_flows_from_reader, CsvSchema};

    #[test]
    fn fixture_is_deterministic_and_shaped_right() {
        let a = fixture_dataset(42);
        let b = fixture_dataset(42);
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        assert_eq!(a.iter().filter(|r| r.label == Some(Label::Malicious)).count(), 10);
        for row in &a[..990] {
            assert_eq!(row.label, Some(Label::Benign));
            assert!(row.values.iter().all(|v| v.abs() < 10.0), "inlier far from origin: {row:?}");
        }
        for row in &a[990..] {
            assert_eq!(row.label, Some(Label::Malicious));
            assert!(row.values.iter().all(|v| v.abs() >= 20.0 && v.abs() <= 100.0));
        }
    }

    #[test]
    fn csv_render_round_trips_through_ingestion() {
        let rows = fixture_dataset(7);
        let text = to_labeled_csv(&rows);
        let schema = CsvSchema {
            feature_columns: vec!["f0".into(), "f1".into()],
            label_column: Some("label".into()),
        };
        let report = ingest_flows_from_reader(text.as_bytes(), &schema).unwrap();
        assert_eq!(report.dropped, 0);
        assert_eq!(report.rows, rows);
    }

    #[test]
    fn outlier_signs_vary() {
        let mut r = crate::rng::stream(1, "sign-check");
        let pts: Vec<Vec<f64>> = (0..50).map(|_| outlier_point(&mut r, 2, 20.0, 100.0)).collect();
        assert!(pts.iter().flatten().any(|&v| v > 0.0));
        assert!(pts.iter().flatten().any(|&v| v < 0.0));
    }
}
