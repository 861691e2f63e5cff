//! Metric families. Every scorer is a pure function of a joined dataset and
//! returns scores on a 0-100 scale.
//!
//! Each family accumulates integer counts that can be merged across shards,
//! so scores never depend on how the pairs were partitioned or ordered.

mod bleu;
mod intent;
mod retrieval;
mod state;
pub mod text;

pub use bleu::{score_bleu, NGramProfile, MAX_NGRAM_ORDER};
pub use intent::{score_intent, ConfusionCounts};
pub use retrieval::{score_retrieval, RecallCounts};
pub use state::{score_state, score_state_accuracy, score_state_f1, SlotCounts};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("cannot score an empty dataset")]
    Empty,
    #[error("recall cut-off must be at least 1")]
    ZeroK,
    #[error("k exceeds candidate set size ({k} > {candidates})")]
    KExceedsCandidateSet { k: usize, candidates: usize },
}

/// `100 * num / den`, with 0/0 defined as 0.
pub(crate) fn percent(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Harmonic mean of two percentages, 0 when both are 0.
pub(crate) fn f1_of(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}
