use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The five task families of the benchmark.
///
/// Variant order is the order used by the pairwise comparison matrix and by
/// every weight vector in this crate: response generation, intent prediction,
/// text-to-image retrieval, image-to-text retrieval, state tracking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "response_generation")]
    ResponseGeneration,
    #[serde(rename = "intent_prediction")]
    IntentPrediction,
    #[serde(rename = "retrieval_t2i")]
    RetrievalT2I,
    #[serde(rename = "retrieval_i2t")]
    RetrievalI2T,
    #[serde(rename = "state_tracking")]
    StateTracking,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::ResponseGeneration,
        TaskKind::IntentPrediction,
        TaskKind::RetrievalT2I,
        TaskKind::RetrievalI2T,
        TaskKind::StateTracking,
    ];

    /// Stable serialized name.
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::ResponseGeneration => "response_generation",
            TaskKind::IntentPrediction => "intent_prediction",
            TaskKind::RetrievalT2I => "retrieval_t2i",
            TaskKind::RetrievalI2T => "retrieval_i2t",
            TaskKind::StateTracking => "state_tracking",
        }
    }

    /// Column header used by the leaderboard tables.
    pub fn short_label(self) -> &'static str {
        match self {
            TaskKind::ResponseGeneration => "RG",
            TaskKind::IntentPrediction => "IP",
            TaskKind::RetrievalT2I => "T2I",
            TaskKind::RetrievalI2T => "I2T",
            TaskKind::StateTracking => "ST",
        }
    }

    /// Position of the task in [`TaskKind::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_retrieval(self) -> bool {
        matches!(self, TaskKind::RetrievalT2I | TaskKind::RetrievalI2T)
    }

    /// Whether a scorer for this family can emit `metric`.
    ///
    /// Retrieval families produce `r@k` for any `k >= 1`.
    pub fn produces_metric(self, metric: &str) -> bool {
        match self {
            TaskKind::IntentPrediction => matches!(metric, "f1" | "precision" | "recall"),
            TaskKind::RetrievalT2I | TaskKind::RetrievalI2T => parse_recall_metric(metric).is_some(),
            TaskKind::StateTracking => matches!(metric, "accuracy" | "intent_f1" | "slot_f1"),
            TaskKind::ResponseGeneration => metric == "bleu",
        }
    }

    /// Default cut-offs for retrieval scoring, matching the reported columns.
    pub fn default_ks(self) -> &'static [usize] {
        match self {
            TaskKind::RetrievalT2I => &[1, 5, 10],
            TaskKind::RetrievalI2T => &[1, 5],
            _ => &[],
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task `{0}` (expected one of response_generation, intent_prediction, retrieval_t2i, retrieval_i2t, state_tracking)")]
pub struct UnknownTask(pub String);

impl FromStr for TaskKind {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| UnknownTask(s.to_string()))
    }
}

/// Metric name for recall at `k`.
pub fn recall_metric_name(k: usize) -> String {
    format!("r@{k}")
}

/// Parses `r@k`, returning `k` when it is a positive integer.
pub fn parse_recall_metric(metric: &str) -> Option<usize> {
    let k: usize = metric.strip_prefix("r@")?.parse().ok()?;
    (k >= 1 && !metric[2..].starts_with('+')).then_some(k)
}

/// Candidate-set size the benchmark uses for a retrieval dataset.
pub fn catalogued_candidate_set_size(task: TaskKind, dataset: &str) -> Option<usize> {
    match (task, dataset) {
        (TaskKind::RetrievalT2I, "photochat" | "mmdialog") => Some(1000),
        (TaskKind::RetrievalI2T, "imagechat" | "visdial") => Some(100),
        _ => None,
    }
}
