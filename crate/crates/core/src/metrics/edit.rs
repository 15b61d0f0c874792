use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecogPair {
    pub prediction: String,
    pub ground_truth: String,
}

impl RecogPair {
    pub fn new(prediction: impl Into<String>, ground_truth: impl Into<String>) -> Self {
        Self {
            prediction: prediction.into(),
            ground_truth: ground_truth.into(),
        }
    }
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - lev(pred, gt) / max(|pred|, |gt|)`; two empty strings score 1.
pub fn one_minus_ned(pred: &str, gt: &str) -> f64 {
    let longest = pred.chars().count().max(gt.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(pred, gt) as f64 / longest as f64
}

/// Fraction of exact matches, optionally after Unicode lowercasing.
pub fn recognition_accuracy(pairs: &[RecogPair], case_sensitive: bool) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::InvalidArgument("no recognition pairs".into()));
    }
    let hits = pairs
        .iter()
        .filter(|p| {
            if case_sensitive {
                p.prediction == p.ground_truth
            } else {
                p.prediction.to_lowercase() == p.ground_truth.to_lowercase()
            }
        })
        .count();
    Ok(hits as f64 / pairs.len() as f64)
}
