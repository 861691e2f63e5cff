use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::json;
use crate::task::TaskKind;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("metric `{name}` = {value} is outside [0, 100]")]
    OutOfRange { name: String, value: f64 },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed metric report: {source}")]
    Parse { path: String, source: serde_json::Error },
}

/// Named scores on a 0-100 scale for one task/dataset cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawReport")]
pub struct MetricReport {
    pub task: TaskKind,
    pub dataset: String,
    pub record_count: u64,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct RawReport {
    task: TaskKind,
    dataset: String,
    record_count: u64,
    metrics: BTreeMap<String, f64>,
}

impl TryFrom<RawReport> for MetricReport {
    type Error = ReportError;

    fn try_from(raw: RawReport) -> Result<Self, Self::Error> {
        MetricReport::new(raw.task, raw.dataset, raw.record_count, raw.metrics)
    }
}

impl MetricReport {
    pub fn new(
        task: TaskKind,
        dataset: impl Into<String>,
        record_count: u64,
        metrics: BTreeMap<String, f64>,
    ) -> Result<Self, ReportError> {
        if let Some((name, &value)) = metrics.iter().find(|(_, v)| !(0.0..=100.0).contains(*v)) {
            return Err(ReportError::OutOfRange { name: name.clone(), value });
        }
        Ok(MetricReport { task, dataset: dataset.into(), record_count, metrics })
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    /// The emitted document, scores at four decimals.
    pub fn to_json(&self) -> String {
        json::to_string_fixed(self).expect("metric reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn read(path: &Path) -> Result<Self, ReportError> {
        let display = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| ReportError::Io { path: display.clone(), source })?;
        Self::from_json(&text).map_err(|source| ReportError::Parse { path: display, source })
    }

    /// Reads every `*.json` report in `dir`, in file-name order.
    pub fn read_dir(dir: &Path) -> Result<Vec<Self>, ReportError> {
        let io_err = |source| ReportError::Io { path: dir.display().to_string(), source };
        let mut paths = Vec::new();
        for entry in fs::read_dir(dir).map_err(io_err)? {
            let path = entry.map_err(io_err)?.path();
            if path.is_file() && path.extension().is_some_and(|ext| ext == "json") {
                paths.push(path);
            }
        }
        paths.sort();
        paths.iter().map(|p| Self::read(p)).collect()
    }
}
