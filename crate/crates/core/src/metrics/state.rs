use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, AddAssign};

use super::text::normalize;
use super::{f1_of, percent, MetricError};
use crate::ingest::JoinedDataset;
use crate::records::StateRecord;
use crate::report::MetricReport;
use crate::task::TaskKind;

type SlotSet = BTreeSet<(String, String)>;

fn normalized_slots(record: &StateRecord) -> SlotSet {
    record.slots.iter().map(|(name, value)| (normalize(name), normalize(value))).collect()
}

fn normalized_intent(record: &StateRecord) -> BTreeSet<String> {
    record.intent.iter().map(|i| normalize(i)).collect()
}

/// Set-overlap counts summed over turns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SetOverlap {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl SetOverlap {
    fn of<T: Ord>(gold: &BTreeSet<T>, pred: &BTreeSet<T>) -> Self {
        let tp = gold.intersection(pred).count() as u64;
        SetOverlap { tp, fp: pred.len() as u64 - tp, fn_: gold.len() as u64 - tp }
    }

    pub fn f1(&self) -> f64 {
        f1_of(percent(self.tp, self.tp + self.fp), percent(self.tp, self.tp + self.fn_))
    }
}

impl Add for SetOverlap {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        SetOverlap { tp: self.tp + rhs.tp, fp: self.fp + rhs.fp, fn_: self.fn_ + rhs.fn_ }
    }
}

/// Everything the state-tracking scores are computed from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotCounts {
    pub turns: u64,
    pub exact_turns: u64,
    pub intent: SetOverlap,
    pub slots: SetOverlap,
}

impl SlotCounts {
    pub fn record(&mut self, gold: &StateRecord, pred: &StateRecord) {
        let gold_slots = normalized_slots(gold);
        let pred_slots = normalized_slots(pred);
        self.turns += 1;
        if gold_slots == pred_slots {
            self.exact_turns += 1;
        }
        self.slots = self.slots + SetOverlap::of(&gold_slots, &pred_slots);
        self.intent = self.intent + SetOverlap::of(&normalized_intent(gold), &normalized_intent(pred));
    }

    pub fn tally(data: &JoinedDataset<StateRecord, StateRecord>) -> Self {
        let mut counts = SlotCounts::default();
        for (gold, pred) in &data.pairs {
            counts.record(gold, pred);
        }
        counts
    }

    /// Joint state accuracy: share of turns whose full slot set matches.
    pub fn accuracy(&self) -> f64 {
        percent(self.exact_turns, self.turns)
    }
}

impl Add for SlotCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        SlotCounts {
            turns: self.turns + rhs.turns,
            exact_turns: self.exact_turns + rhs.exact_turns,
            intent: self.intent + rhs.intent,
            slots: self.slots + rhs.slots,
        }
    }
}

impl AddAssign for SlotCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

fn tally_nonempty(data: &JoinedDataset<StateRecord, StateRecord>) -> Result<SlotCounts, MetricError> {
    if data.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(SlotCounts::tally(data))
}

fn report(dataset: &str, counts: &SlotCounts, metrics: &[(&str, f64)]) -> MetricReport {
    let metrics: BTreeMap<String, f64> = metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    MetricReport::new(TaskKind::StateTracking, dataset, counts.turns, metrics)
        .expect("percentages stay within [0, 100]")
}

/// Per-turn joint state accuracy (`accuracy`).
pub fn score_state_accuracy(
    data: &JoinedDataset<StateRecord, StateRecord>,
    dataset: &str,
) -> Result<MetricReport, MetricError> {
    let counts = tally_nonempty(data)?;
    Ok(report(dataset, &counts, &[("accuracy", counts.accuracy())]))
}

/// Cumulative micro-F1 over intents (`intent_f1`) and slot pairs (`slot_f1`).
pub fn score_state_f1(
    data: &JoinedDataset<StateRecord, StateRecord>,
    dataset: &str,
) -> Result<MetricReport, MetricError> {
    let counts = tally_nonempty(data)?;
    Ok(report(dataset, &counts, &[("intent_f1", counts.intent.f1()), ("slot_f1", counts.slots.f1())]))
}

/// All three state-tracking metrics in one report.
pub fn score_state(data: &JoinedDataset<StateRecord, StateRecord>, dataset: &str) -> Result<MetricReport, MetricError> {
    let counts = tally_nonempty(data)?;
    Ok(report(
        dataset,
        &counts,
        &[("accuracy", counts.accuracy()), ("intent_f1", counts.intent.f1()), ("slot_f1", counts.slots.f1())],
    ))
}
