//! Detector evaluation: confusion counts and the derived percentage metrics,
//! with malicious as the positive class.

use super::Label;
use crate::error::IdsError;
use serde::{Deserialize, Serialize};

/// Accuracy / precision / recall / F1 as percentages plus the raw confusion
/// counts they derive from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl EvalReport {
    /// Derive all metrics from confusion counts. Undefined ratios (empty
    /// denominator) report 0, and F1 is 0 when precision + recall is 0.
    pub fn from_confusion(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        let total = (tp + fp + tn + fn_) as f64;
        let pct = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 * 100.0 };
        let accuracy = if total == 0.0 { 0.0 } else { (tp + tn) as f64 / total * 100.0 };
        let precision = pct(tp, tp + fp);
        let recall = pct(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            accuracy,
            precision,
            recall,
            f1,
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
        }
    }

    pub fn total_samples(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// Score predictions against ground truth. Inputs must be non-empty and of
/// equal length.
pub fn evaluate(preds: &[Label], labels: &[Label]) -> Result<EvalReport, IdsError> {
    if preds.len() != labels.len() {
        return Err(IdsError::LengthMismatch { preds: preds.len(), labels: labels.len() });
    }
    if preds.is_empty() {
        return Err(IdsError::NoLabels);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (p, l) in preds.iter().zip(labels) {
        match (p, l) {
            (Label::Malicious, Label::Malicious) => tp += 1,
            (Label::Malicious, Label::Benign) => fp += 1,
            (Label::Benign, Label::Benign) => tn += 1,
            (Label::Benign, Label::Malicious) => fn_ += 1,
        }
    }
    Ok(EvalReport::from_confusion(tp, fp, tn, fn_))
}
