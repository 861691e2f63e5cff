//! Scoring manifest: which datasets and metrics feed each task score, and the
//! weight of each task in the composite score.
//!
//! On disk the manifest is TOML (or JSON when the file ends in `.json`):
//!
//! ```toml
//! [response_generation]
//! weight = 0.41
//!
//! [response_generation.datasets."simmc2.0"]
//! metrics = ["bleu"]
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::task::TaskKind;

/// Published task weights, in [`TaskKind::ALL`] order.
pub const PUBLISHED_WEIGHTS: [f64; 5] = [0.41, 0.25, 0.14, 0.14, 0.06];

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub metrics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub weight: f64,
    pub datasets: BTreeMap<String, DatasetEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreManifest {
    pub tasks: BTreeMap<TaskKind, TaskEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MissingTask(TaskKind),
    WeightOutOfRange { task: TaskKind, weight: f64 },
    WeightSum(f64),
    NoDatasets(TaskKind),
    EmptyMetrics { task: TaskKind, dataset: String },
    UnknownMetric { task: TaskKind, dataset: String, metric: String },
    DuplicateMetric { task: TaskKind, dataset: String, metric: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingTask(task) => write!(f, "task {task} is missing"),
            Violation::WeightOutOfRange { task, weight } => {
                write!(f, "weight of {task} is {weight}, outside (0, 1)")
            }
            Violation::WeightSum(sum) => write!(f, "weights sum to {}", trim_decimal(*sum)),
            Violation::NoDatasets(task) => write!(f, "task {task} lists no datasets"),
            Violation::EmptyMetrics { task, dataset } => write!(f, "{task}/{dataset} lists no metrics"),
            Violation::UnknownMetric { task, dataset, metric } => {
                write!(f, "unknown metric `{metric}` for {task}/{dataset}")
            }
            Violation::DuplicateMetric { task, dataset, metric } => {
                write!(f, "metric `{metric}` listed twice for {task}/{dataset}")
            }
        }
    }
}

fn trim_decimal(x: f64) -> String {
    let text = format!("{x:.6}");
    text.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid manifest: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn entry(weight: f64, datasets: &[(&str, &[&str])]) -> TaskEntry {
    TaskEntry {
        weight,
        datasets: datasets
            .iter()
            .map(|(name, metrics)| {
                let metrics = metrics.iter().map(|m| m.to_string()).collect();
                (name.to_string(), DatasetEntry { metrics })
            })
            .collect(),
    }
}

/// The benchmark's layout with the published weights.
pub fn default_manifest() -> ScoreManifest {
    let w = PUBLISHED_WEIGHTS;
    let tasks = BTreeMap::from([
        (TaskKind::ResponseGeneration, entry(w[0], &[("simmc2.0", &["bleu"]), ("mmconv", &["bleu"])])),
        (
            TaskKind::IntentPrediction,
            entry(w[1], &[("photochat", &["f1", "precision", "recall"]), ("mmdialog", &["f1", "precision", "recall"])]),
        ),
        (
            TaskKind::RetrievalT2I,
            entry(w[2], &[("photochat", &["r@1", "r@5", "r@10"]), ("mmdialog", &["r@1", "r@5", "r@10"])]),
        ),
        (TaskKind::RetrievalI2T, entry(w[3], &[("imagechat", &["r@1", "r@5"]), ("visdial", &["r@1", "r@5"])])),
        (TaskKind::StateTracking, entry(w[4], &[("simmc2.0", &["intent_f1", "slot_f1"]), ("mmconv", &["accuracy"])])),
    ]);
    ScoreManifest { tasks }
}

impl ScoreManifest {
    /// All contract violations, empty when the manifest is usable.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for task in TaskKind::ALL {
            if !self.tasks.contains_key(&task) {
                out.push(Violation::MissingTask(task));
            }
        }
        for (&task, entry) in &self.tasks {
            if !(entry.weight > 0.0 && entry.weight < 1.0) {
                out.push(Violation::WeightOutOfRange { task, weight: entry.weight });
            }
            if entry.datasets.is_empty() {
                out.push(Violation::NoDatasets(task));
            }
            for (dataset, ds) in &entry.datasets {
                if ds.metrics.is_empty() {
                    out.push(Violation::EmptyMetrics { task, dataset: dataset.clone() });
                }
                let mut seen = HashSet::new();
                for metric in &ds.metrics {
                    if !task.produces_metric(metric) {
                        out.push(Violation::UnknownMetric { task, dataset: dataset.clone(), metric: metric.clone() });
                    } else if !seen.insert(metric.as_str()) {
                        out.push(Violation::DuplicateMetric { task, dataset: dataset.clone(), metric: metric.clone() });
                    }
                }
            }
        }
        let sum: f64 = self.tasks.values().map(|e| e.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            out.push(Violation::WeightSum(sum));
        }
        out
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn task(&self, task: TaskKind) -> Option<&TaskEntry> {
        self.tasks.get(&task)
    }

    /// Task weights in [`TaskKind::ALL`] order; missing tasks weigh 0.
    pub fn weights(&self) -> [f64; 5] {
        TaskKind::ALL.map(|t| self.tasks.get(&t).map_or(0.0, |e| e.weight))
    }

    /// Copy of the manifest with the task weights replaced.
    pub fn with_weights(&self, weights: [f64; 5]) -> Self {
        let mut out = self.clone();
        for task in TaskKind::ALL {
            if let Some(entry) = out.tasks.get_mut(&task) {
                entry.weight = weights[task.index()];
            }
        }
        out
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("manifest serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Loads and validates a manifest file.
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let display = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Io { path: display.clone(), source })?;
        let manifest = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            Self::from_toml(&text).map_err(|e| e.to_string())
        }
        .map_err(|message| ManifestError::Parse { path: display, message })?;
        manifest.validate().map_err(ManifestError::Invalid)?;
        Ok(manifest)
    }
}
