//! Gold file + prediction file → metric report, for any task family.

use std::path::Path;

use crate::ingest::{self, IngestError, JoinError, JoinPolicy, Records, Role};
use crate::metrics::{self, MetricError};
use crate::records::DEFAULT_INTENT_THRESHOLD;
use crate::report::MetricReport;
use crate::task::TaskKind;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Join(#[from] JoinError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("gold and prediction records belong to different task families")]
    MismatchedRecords,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Recall cut-offs; `None` uses the task's defaults.
    pub ks: Option<Vec<usize>>,
    pub threshold: f64,
    pub policy: JoinPolicy,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { ks: None, threshold: DEFAULT_INTENT_THRESHOLD, policy: JoinPolicy::Strict }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricReport,
    /// Gold records scored against a worst-case prediction.
    pub missing_predictions: usize,
}

/// Joins already parsed records and scores them.
pub fn evaluate_records(
    task: TaskKind,
    dataset: &str,
    gold: Records,
    pred: Records,
    options: &EvalOptions,
) -> Result<Evaluation, EvalError> {
    let policy = options.policy;
    let (report, missing) = match (gold, pred) {
        (Records::IntentGold(g), Records::IntentPred(p)) => {
            let joined = ingest::join(g, p, policy)?;
            (metrics::score_intent(&joined, dataset, options.threshold)?, joined.unmatched_gold.len())
        }
        (Records::RetrievalGold(g), Records::RetrievalPred(p)) => {
            let joined = ingest::join(g, p, policy)?;
            let ks = options.ks.as_deref().unwrap_or(task.default_ks());
            (metrics::score_retrieval(&joined, task, dataset, ks)?, joined.unmatched_gold.len())
        }
        (Records::StateGold(g), Records::StatePred(p)) => {
            let joined = ingest::join(g, p, policy)?;
            (metrics::score_state(&joined, dataset)?, joined.unmatched_gold.len())
        }
        (Records::GenerationGold(g), Records::GenerationPred(p)) => {
            let joined = ingest::join(g, p, policy)?;
            (metrics::score_bleu(&joined, dataset)?, joined.unmatched_gold.len())
        }
        _ => return Err(EvalError::MismatchedRecords),
    };
    Ok(Evaluation { report, missing_predictions: missing })
}

/// Reads both files, joins them and scores the result.
pub fn evaluate_files(
    task: TaskKind,
    dataset: &str,
    gold_path: &Path,
    pred_path: &Path,
    options: &EvalOptions,
) -> Result<Evaluation, EvalError> {
    let gold = ingest::read_records(gold_path, task, Role::Gold)?;
    let pred = ingest::read_records(pred_path, task, Role::Prediction)?;
    evaluate_records(task, dataset, gold, pred, options)
}
