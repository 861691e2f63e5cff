//! Evaluation harness for the VDialogUE benchmark.
//!
//! The crate scores prediction files for the five task families, derives task
//! weights with the Analytic Hierarchy Process, folds per-dataset metric
//! reports into the composite VDscore and keeps an append-only leaderboard.
//!
//! The usual flow is
//! [`ingest::read_records`] → [`ingest::join`] → a scorer in [`metrics`] →
//! [`vdscore::aggregate`] → [`leaderboard::append`].

pub mod ahp;
pub mod evaluate;
pub mod ingest;
pub mod json;
pub mod leaderboard;
pub mod manifest;
pub mod metrics;
pub mod records;
pub mod report;
pub mod task;
pub mod vdscore;

pub use ahp::{ConsistencyReport, PairwiseMatrix, WeightMethod, WeightVector};
pub use ingest::{JoinPolicy, JoinedDataset, Records, Role};
pub use leaderboard::LeaderboardEntry;
pub use manifest::ScoreManifest;
pub use records::{
    GenerationRecord, IntentPrediction, IntentRecord, RecordKey, RetrievalGoldRecord, RetrievalPrediction, StateRecord,
};
pub use report::MetricReport;
pub use task::TaskKind;
pub use vdscore::{TaskScore, VdScoreResult};
