//! Composite score: per-task averages weighted into a single number.
//!
//! A task score is the plain mean over the task's datasets of the plain mean
//! over each dataset's manifest-listed metrics. Dataset sizes never weight
//! either mean.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ahp::{self, AhpError, ConsistencyReport, PairwiseMatrix, WeightMethod, WeightVector};
use crate::json;
use crate::manifest::ScoreManifest;
use crate::report::MetricReport;
use crate::task::TaskKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("missing report for {task}/{dataset}")]
    MissingDataset { task: TaskKind, dataset: String },
    #[error("report {task}/{dataset} lacks metric `{metric}`")]
    MissingMetric { task: TaskKind, dataset: String, metric: String },
    #[error("more than one report for {task}/{dataset}")]
    DuplicateReport { task: TaskKind, dataset: String },
    #[error("report for {task}/{dataset} is not listed in the manifest")]
    UnexpectedDataset { task: TaskKind, dataset: String },
    #[error("manifest has no entry for {0}")]
    TaskNotInManifest(TaskKind),
    #[error("no score for task {0}")]
    MissingTask(TaskKind),
    #[error("more than one score for task {0}")]
    DuplicateTask(TaskKind),
    #[error("expected 5 task weights, got {0}")]
    WeightCount(usize),
    #[error("comparison matrix failed the consistency check (CR = {:.4} >= 0.1)", .0.cr)]
    Inconsistent(ConsistencyReport),
    #[error("matrix labels must be the five task names, found `{0}`")]
    MatrixLabel(String),
    #[error(transparent)]
    Ahp(#[from] AhpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskScore {
    pub task: TaskKind,
    pub per_dataset: BTreeMap<String, f64>,
    pub value: f64,
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

/// Two-level mean of one task's reports, as laid out by `manifest`.
pub fn task_score(reports: &[MetricReport], task: TaskKind, manifest: &ScoreManifest) -> Result<TaskScore, ScoreError> {
    let entry = manifest.task(task).ok_or(ScoreError::TaskNotInManifest(task))?;

    let mut by_dataset: BTreeMap<&str, &MetricReport> = BTreeMap::new();
    for report in reports.iter().filter(|r| r.task == task) {
        if !entry.datasets.contains_key(&report.dataset) {
            return Err(ScoreError::UnexpectedDataset { task, dataset: report.dataset.clone() });
        }
        if by_dataset.insert(&report.dataset, report).is_some() {
            return Err(ScoreError::DuplicateReport { task, dataset: report.dataset.clone() });
        }
    }

    let mut per_dataset = BTreeMap::new();
    for (dataset, listed) in &entry.datasets {
        let report = by_dataset
            .get(dataset.as_str())
            .ok_or_else(|| ScoreError::MissingDataset { task, dataset: dataset.clone() })?;
        let scores = listed
            .metrics
            .iter()
            .map(|metric| {
                report.metric(metric).ok_or_else(|| ScoreError::MissingMetric {
                    task,
                    dataset: dataset.clone(),
                    metric: metric.clone(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        per_dataset.insert(dataset.clone(), mean(scores.into_iter()));
    }
    let value = mean(per_dataset.values().copied());
    Ok(TaskScore { task, per_dataset, value })
}

/// The composite score with the task scores it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ResultDocument", try_from = "ResultDocument")]
pub struct VdScoreResult {
    /// One score per task, in [`TaskKind::ALL`] order.
    pub task_scores: Vec<TaskScore>,
    /// Task weights, in [`TaskKind::ALL`] order.
    pub weights: WeightVector,
    pub value: f64,
}

impl VdScoreResult {
    pub fn task(&self, task: TaskKind) -> &TaskScore {
        &self.task_scores[task.index()]
    }

    /// The emitted result document, floats at four decimals.
    pub fn to_json(&self) -> String {
        json::to_string_fixed(self).expect("results serialize")
    }
}

/// Weighted sum of exactly one score per task. `weights` follow [`TaskKind::ALL`] order.
pub fn vdscore(task_scores: &[TaskScore], weights: &WeightVector) -> Result<VdScoreResult, ScoreError> {
    if weights.len() != TaskKind::ALL.len() {
        return Err(ScoreError::WeightCount(weights.len()));
    }
    let mut slots: [Option<&TaskScore>; 5] = [None; 5];
    for score in task_scores {
        let slot = &mut slots[score.task.index()];
        if slot.is_some() {
            return Err(ScoreError::DuplicateTask(score.task));
        }
        *slot = Some(score);
    }
    let mut ordered = Vec::with_capacity(5);
    for task in TaskKind::ALL {
        ordered.push(slots[task.index()].ok_or(ScoreError::MissingTask(task))?.clone());
    }
    let value = ordered.iter().zip(weights.as_slice()).map(|(s, w)| w * s.value).sum();
    Ok(VdScoreResult { task_scores: ordered, weights: weights.clone(), value })
}

/// Task scores for every task, then the weighted sum under `weights`.
pub fn aggregate(
    reports: &[MetricReport],
    manifest: &ScoreManifest,
    weights: &WeightVector,
) -> Result<VdScoreResult, ScoreError> {
    for report in reports {
        if manifest.task(report.task).is_none() {
            return Err(ScoreError::TaskNotInManifest(report.task));
        }
    }
    let scores =
        TaskKind::ALL.into_iter().map(|task| task_score(reports, task, manifest)).collect::<Result<Vec<_>, _>>()?;
    vdscore(&scores, weights)
}

/// Aggregates with the weights stored in the manifest.
pub fn aggregate_with_manifest_weights(
    reports: &[MetricReport],
    manifest: &ScoreManifest,
) -> Result<VdScoreResult, ScoreError> {
    let weights = WeightVector::new(manifest.weights().to_vec())?;
    aggregate(reports, manifest, &weights)
}

/// Derives task weights from a comparison matrix whose labels are the five
/// task names (any order).
///
/// The consistency check runs first; an inconsistent matrix is refused unless
/// `force` is set.
pub fn derive_task_weights(
    matrix: &PairwiseMatrix,
    method: WeightMethod,
    force: bool,
) -> Result<(WeightVector, ConsistencyReport), ScoreError> {
    let derived = ahp::derive_weights(matrix, method)?;
    let report = ahp::consistency(matrix, &derived)?;
    if !report.consistent && !force {
        return Err(ScoreError::Inconsistent(report));
    }
    if matrix.size() != TaskKind::ALL.len() {
        return Err(ScoreError::WeightCount(matrix.size()));
    }
    let mut ordered = [f64::NAN; 5];
    for (label, &w) in matrix.labels().iter().zip(derived.as_slice()) {
        let task: TaskKind = label.parse().map_err(|_| ScoreError::MatrixLabel(label.clone()))?;
        if !ordered[task.index()].is_nan() {
            return Err(ScoreError::MatrixLabel(label.clone()));
        }
        ordered[task.index()] = w;
    }
    Ok((WeightVector::new(ordered.to_vec())?, report))
}

#[derive(Serialize, Deserialize)]
struct TaskDocument {
    value: f64,
    datasets: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct ResultDocument {
    vdscore: f64,
    weights: BTreeMap<TaskKind, f64>,
    tasks: BTreeMap<TaskKind, TaskDocument>,
}

impl From<VdScoreResult> for ResultDocument {
    fn from(result: VdScoreResult) -> Self {
        ResultDocument {
            vdscore: result.value,
            weights: TaskKind::ALL.into_iter().zip(result.weights.as_slice().iter().copied()).collect(),
            tasks: result
                .task_scores
                .into_iter()
                .map(|s| (s.task, TaskDocument { value: s.value, datasets: s.per_dataset }))
                .collect(),
        }
    }
}

impl TryFrom<ResultDocument> for VdScoreResult {
    type Error = String;

    fn try_from(doc: ResultDocument) -> Result<Self, Self::Error> {
        let mut weights = Vec::with_capacity(5);
        let mut task_scores = Vec::with_capacity(5);
        for task in TaskKind::ALL {
            weights.push(*doc.weights.get(&task).ok_or_else(|| format!("missing weight for {task}"))?);
            let t = doc.tasks.get(&task).ok_or_else(|| format!("missing task {task}"))?;
            task_scores.push(TaskScore { task, per_dataset: t.datasets.clone(), value: t.value });
        }
        let weights = WeightVector::new(weights).map_err(|e| e.to_string())?;
        Ok(VdScoreResult { task_scores, weights, value: doc.vdscore })
    }
}
