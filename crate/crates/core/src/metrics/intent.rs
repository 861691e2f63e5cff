use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};

use super::{f1_of, percent, MetricError};
use crate::ingest::JoinedDataset;
use crate::records::{IntentPrediction, IntentRecord};
use crate::report::MetricReport;
use crate::task::TaskKind;

/// Binary confusion counts with label 1 (photo sharing) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, gold: bool, predicted: bool) {
        match (gold, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> f64 {
        percent(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        percent(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1_of(self.precision(), self.recall())
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        ConfusionCounts { tp: self.tp + rhs.tp, fp: self.fp + rhs.fp, fn_: self.fn_ + rhs.fn_, tn: self.tn + rhs.tn }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl ConfusionCounts {
    pub fn from_pairs(data: &JoinedDataset<IntentRecord, IntentPrediction>, threshold: f64) -> Self {
        let mut counts = ConfusionCounts::default();
        for (gold, pred) in &data.pairs {
            counts.record(gold.label, pred.label_at(threshold));
        }
        counts
    }
}

/// Precision, recall and F1 of the positive class. Score-style predictions are
/// positive when strictly above `threshold`.
pub fn score_intent(
    data: &JoinedDataset<IntentRecord, IntentPrediction>,
    dataset: &str,
    threshold: f64,
) -> Result<MetricReport, MetricError> {
    if data.is_empty() {
        return Err(MetricError::Empty);
    }
    let counts = ConfusionCounts::from_pairs(data, threshold);
    let metrics = BTreeMap::from([
        ("precision".to_string(), counts.precision()),
        ("recall".to_string(), counts.recall()),
        ("f1".to_string(), counts.f1()),
    ]);
    Ok(MetricReport::new(TaskKind::IntentPrediction, dataset, counts.total(), metrics)
        .expect("percentages stay within [0, 100]"))
}
