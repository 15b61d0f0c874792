use serde::{Deserialize, Serialize};

use super::polygon_iou;
use crate::geometry::Quad;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetMatchResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub hmean: f64,
}

impl DetMatchResult {
    /// Derives the ratios from raw counts; empty denominators give 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let hmean = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            hmean,
        }
    }

    /// Sums counts of several results and recomputes the ratios.
    pub fn accumulate<'a>(items: impl IntoIterator<Item = &'a DetMatchResult>) -> Self {
        let (tp, fp, fn_) = items
            .into_iter()
            .fold((0, 0, 0), |acc, r| (acc.0 + r.tp, acc.1 + r.fp, acc.2 + r.fn_));
        Self::from_counts(tp, fp, fn_)
    }
}

/// Greedy one-to-one matching: all (pred, gt) pairs with IoU at or above the
/// threshold are visited by descending IoU, ties by (pred index, gt index),
/// and a pair is matched when neither side is taken yet.
pub fn detection_prf(preds: &[Quad], gts: &[Quad], iou_threshold: f64) -> DetMatchResult {
    let mut pairs = Vec::new();
    for (i, p) in preds.iter().enumerate() {
        for (j, g) in gts.iter().enumerate() {
            let iou = polygon_iou(p, g);
            if iou >= iou_threshold {
                pairs.push((iou, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("IoU is finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut tp = 0;
    for (_, i, j) in pairs {
        if !pred_used[i] && !gt_used[j] {
            pred_used[i] = true;
            gt_used[j] = true;
            tp += 1;
        }
    }
    DetMatchResult::from_counts(tp, preds.len() - tp, gts.len() - tp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x: f64, y: f64) -> Quad {
        Quad::from_coords([x, y, x + 10., y, x + 10., y + 10., x, y + 10.]).unwrap()
    }

    #[test]
    fn perfect_detection() {
        let g = vec![sq(0., 0.), sq(50., 50.)];
        let r = detection_prf(&g, &g, DEFAULT_IOU_THRESHOLD);
        assert_eq!((r.tp, r.fp, r.fn_), (2, 0, 0));
        assert_eq!((r.precision, r.recall, r.hmean), (1.0, 1.0, 1.0));
    }

    #[test]
    fn half_recall() {
        let r = detection_prf(&[sq(0., 0.)], &[sq(0., 0.), sq(50., 50.)], 0.5);
        assert_eq!((r.precision, r.recall), (1.0, 0.5));
        assert!((r.hmean - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_inputs() {
        let r = detection_prf(&[], &[sq(0., 0.)], 0.5);
        assert_eq!((r.tp, r.fp, r.fn_, r.precision, r.recall, r.hmean), (0, 0, 1, 0.0, 0.0, 0.0));
        let r = detection_prf(&[sq(0., 0.)], &[], 0.5);
        assert_eq!((r.fp, r.precision), (1, 0.0));
    }

    #[test]
    fn one_pred_cannot_match_twice() {
        let r = detection_prf(&[sq(0., 0.)], &[sq(0., 0.), sq(1., 0.)], 0.5);
        assert_eq!((r.tp, r.fp, r.fn_), (1, 0, 1));
    }
}
