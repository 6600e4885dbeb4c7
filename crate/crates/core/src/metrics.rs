//! Pixelwise confusion counts and the four segmentation scores.

use alloc::string::String;

use crate::error::{param, Result};
use crate::raster::{ensure_same_dims, BinaryMask};

/// Lesion is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Counts with prediction and ground truth exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tp,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tn,
        }
    }
}

pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    ensure_same_dims(pred.dims(), gt.dims())?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Per-image scores. Fractions except `accuracy`, which is a percentage.
/// A score whose denominator is zero is `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsRecord {
    pub image_id: String,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub dsc: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts, image_id: impl Into<String>) -> Result<MetricsRecord> {
    let total = c.total();
    if total == 0 {
        return Err(param("confusion counts are empty"));
    }
    Ok(MetricsRecord {
        image_id: image_id.into(),
        sensitivity: ratio(c.tp, c.tp + c.fn_),
        specificity: ratio(c.tn, c.tn + c.fp),
        accuracy: ratio(c.tp + c.tn, total).map(|a| 100.0 * a),
        dsc: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
    })
}

fn mean_defined<'a>(values: impl Iterator<Item = &'a Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-metric mean over the records on which that metric is defined.
pub fn macro_average<'a>(
    records: impl IntoIterator<Item = &'a MetricsRecord> + Clone,
    image_id: impl Into<String>,
) -> MetricsRecord {
    let col = |f: fn(&MetricsRecord) -> &Option<f64>| mean_defined(records.clone().into_iter().map(f));
    MetricsRecord {
        image_id: image_id.into(),
        sensitivity: col(|r| &r.sensitivity),
        specificity: col(|r| &r.specificity),
        accuracy: col(|r| &r.accuracy),
        dsc: col(|r| &r.dsc),
    }
}
