//! Append-only leaderboard stored as one JSON entry per line.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::ahp::WeightVector;
use crate::manifest::ScoreManifest;
use crate::report::MetricReport;
use crate::task::TaskKind;
use crate::vdscore::{self, ScoreError, VdScoreResult};

/// Stored scores must match a fresh recomputation within this tolerance.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum LeaderboardError {
    #[error("model name must be non-empty and free of tabs and line breaks: {0:?}")]
    BadModelName(String),
    #[error("entry was scored under manifest {entry}, but the supplied manifest hashes to {supplied}")]
    DigestMismatch { entry: String, supplied: String },
    #[error("stored {what} is {stored}, recomputation gives {recomputed}")]
    Mismatch { what: String, stored: f64, recomputed: f64 },
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: corrupt entry: {message}")]
    Corrupt { path: String, line: usize, message: String },
    #[error("unknown sort key `{0}` (expected vdscore, a task name, or task/dataset/metric)")]
    BadSortKey(String),
}

/// One evaluated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub model_name: String,
    #[serde(with = "seconds_timestamp")]
    pub timestamp: DateTime<Utc>,
    pub reports: Vec<MetricReport>,
    pub vdscore: VdScoreResult,
    pub manifest_digest: String,
}

mod seconds_timestamp {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&ts.format(FORMAT))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let text = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&text).map(|t| t.with_timezone(&Utc)).map_err(serde::de::Error::custom)
    }
}

impl LeaderboardEntry {
    /// Scores `reports` under `manifest` and `weights`. The timestamp is
    /// truncated to whole seconds.
    pub fn build(
        model_name: impl Into<String>,
        timestamp: DateTime<Utc>,
        reports: Vec<MetricReport>,
        manifest: &ScoreManifest,
        weights: &WeightVector,
    ) -> Result<Self, LeaderboardError> {
        let model_name = model_name.into();
        check_model_name(&model_name)?;
        let vdscore = vdscore::aggregate(&reports, manifest, weights)?;
        Ok(LeaderboardEntry {
            model_name,
            timestamp: timestamp.trunc_subsecs(0),
            reports,
            vdscore,
            manifest_digest: manifest.digest(),
        })
    }

    /// Recomputes the composite score from the stored reports and weights.
    pub fn verify(&self, manifest: &ScoreManifest) -> Result<(), LeaderboardError> {
        let supplied = manifest.digest();
        if supplied != self.manifest_digest {
            return Err(LeaderboardError::DigestMismatch { entry: self.manifest_digest.clone(), supplied });
        }
        let fresh = vdscore::aggregate(&self.reports, manifest, &self.vdscore.weights)?;
        for (stored, recomputed) in self.vdscore.task_scores.iter().zip(&fresh.task_scores) {
            if (stored.value - recomputed.value).abs() > RECOMPUTE_TOLERANCE {
                return Err(LeaderboardError::Mismatch {
                    what: format!("{} score", stored.task),
                    stored: stored.value,
                    recomputed: recomputed.value,
                });
            }
        }
        if (self.vdscore.value - fresh.value).abs() > RECOMPUTE_TOLERANCE {
            return Err(LeaderboardError::Mismatch {
                what: "vdscore".into(),
                stored: self.vdscore.value,
                recomputed: fresh.value,
            });
        }
        Ok(())
    }
}

fn check_model_name(name: &str) -> Result<(), LeaderboardError> {
    if name.trim().is_empty() || name.contains(['\t', '\n', '\r']) {
        return Err(LeaderboardError::BadModelName(name.to_string()));
    }
    Ok(())
}

/// Verifies `entry` against `manifest` and appends it as one line.
///
/// The store is opened in append mode and held under an exclusive lock while
/// the line is written.
pub fn append(store: &Path, entry: &LeaderboardEntry, manifest: &ScoreManifest) -> Result<(), LeaderboardError> {
    check_model_name(&entry.model_name)?;
    entry.verify(manifest)?;
    let mut line = serde_json::to_string(entry).expect("entries serialize");
    line.push('\n');

    let io_err = |source| LeaderboardError::Io { path: store.display().to_string(), source };
    let mut file = OpenOptions::new().create(true).append(true).open(store).map_err(io_err)?;
    file.lock().map_err(io_err)?;
    let written = file.write_all(line.as_bytes()).and_then(|_| file.flush());
    file.unlock().map_err(io_err)?;
    written.map_err(io_err)
}

/// Reads every entry in store order. A missing store reads as empty.
pub fn read_store(store: &Path) -> Result<Vec<LeaderboardEntry>, LeaderboardError> {
    let path = store.display().to_string();
    let text = match fs::read_to_string(store) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(LeaderboardError::Io { path, source }),
    };
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| LeaderboardError::Corrupt {
                path: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Markdown,
    Tsv,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" => Ok(TableFormat::Markdown),
            "tsv" => Ok(TableFormat::Tsv),
            other => Err(format!("unknown format `{other}` (expected markdown or tsv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SortKey {
    #[default]
    VdScore,
    Task(TaskKind),
    Metric {
        task: TaskKind,
        dataset: String,
        metric: String,
    },
}

impl FromStr for SortKey {
    type Err = LeaderboardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LeaderboardError::BadSortKey(s.to_string());
        if s == "vdscore" {
            return Ok(SortKey::VdScore);
        }
        let parts: Vec<&str> = s.split('/').collect();
        match parts.as_slice() {
            [task] => task.parse().map(SortKey::Task).map_err(|_| bad()),
            [task, dataset, metric] => Ok(SortKey::Metric {
                task: task.parse().map_err(|_| bad())?,
                dataset: dataset.to_string(),
                metric: metric.to_string(),
            }),
            _ => Err(bad()),
        }
    }
}

impl SortKey {
    fn value(&self, entry: &LeaderboardEntry) -> Option<f64> {
        match self {
            SortKey::VdScore => Some(entry.vdscore.value),
            SortKey::Task(task) => Some(entry.vdscore.task(*task).value),
            SortKey::Metric { task, dataset, metric } => {
                entry.reports.iter().find(|r| r.task == *task && &r.dataset == dataset).and_then(|r| r.metric(metric))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenderOptions {
    pub format: TableFormat,
    pub sort: SortKey,
    /// Keep every run instead of the latest per model.
    pub all: bool,
}

/// Entries to display, in rank order.
pub fn ranked<'a>(entries: &'a [LeaderboardEntry], options: &RenderOptions) -> Vec<&'a LeaderboardEntry> {
    let mut selected: Vec<(usize, &LeaderboardEntry)> = if options.all {
        entries.iter().enumerate().collect()
    } else {
        let mut latest: HashMap<&str, (usize, &LeaderboardEntry)> = HashMap::new();
        for (pos, entry) in entries.iter().enumerate() {
            match latest.get(entry.model_name.as_str()) {
                Some((_, kept)) if kept.timestamp > entry.timestamp => {}
                _ => {
                    latest.insert(&entry.model_name, (pos, entry));
                }
            }
        }
        latest.into_values().collect()
    };
    selected.sort_by(|(pa, a), (pb, b)| {
        let (va, vb) = (options.sort.value(a), options.sort.value(b));
        // descending by value, missing values last, then earlier runs first
        let by_value = match (va, vb) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        by_value.then(a.timestamp.cmp(&b.timestamp)).then(pa.cmp(pb))
    });
    selected.into_iter().map(|(_, e)| e).collect()
}

/// Renders ranked rows: rank, model, composite score, five task scores.
pub fn render(entries: &[LeaderboardEntry], options: &RenderOptions) -> String {
    let rows = ranked(entries, options);
    let mut out = String::new();
    match options.format {
        TableFormat::Markdown => {
            out.push_str("| Rank | Model | VDscore |");
            for task in TaskKind::ALL {
                write!(out, " {} |", task.short_label()).unwrap();
            }
            out.push_str("\n|---:|:---|---:|");
            out.push_str(&"---:|".repeat(TaskKind::ALL.len()));
            out.push('\n');
            for (rank, entry) in rows.iter().enumerate() {
                write!(out, "| {} | {} | {:.1} |", rank + 1, entry.model_name.replace('|', "\\|"), entry.vdscore.value)
                    .unwrap();
                for score in &entry.vdscore.task_scores {
                    write!(out, " {:.1} |", score.value).unwrap();
                }
                out.push('\n');
            }
        }
        TableFormat::Tsv => {
            out.push_str("rank\tmodel\tvdscore");
            for task in TaskKind::ALL {
                write!(out, "\t{task}").unwrap();
            }
            out.push('\n');
            for (rank, entry) in rows.iter().enumerate() {
                write!(out, "{}\t{}\t{:.4}", rank + 1, entry.model_name, entry.vdscore.value).unwrap();
                for score in &entry.vdscore.task_scores {
                    write!(out, "\t{:.4}", score.value).unwrap();
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn render_store(store: &Path, options: &RenderOptions) -> Result<String, LeaderboardError> {
    Ok(render(&read_store(store)?, options))
}
