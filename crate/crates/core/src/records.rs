//! Gold and prediction records for each task family.
//!
//! Records carry identifiers only; dialogue text and images never reach the
//! harness. The on-disk field names live in [`crate::ingest`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Join key of a record: a dialogue turn, or a retrieval query.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordKey {
    Turn { dialogue_id: String, turn_index: u64 },
    Query(String),
}

impl RecordKey {
    pub fn turn(dialogue_id: impl Into<String>, turn_index: u64) -> Self {
        RecordKey::Turn { dialogue_id: dialogue_id.into(), turn_index }
    }
}

impl fmt::Display for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordKey::Turn { dialogue_id, turn_index } => write!(f, "({dialogue_id}, {turn_index})"),
            RecordKey::Query(id) => f.write_str(id),
        }
    }
}

pub trait Keyed {
    fn key(&self) -> RecordKey;
}

/// A prediction that can be joined against gold records of type `G`.
pub trait Prediction<G>: Keyed + Sized {
    /// The canonical worst prediction for `gold`, used when a prediction is missing.
    fn worst_for(gold: &G) -> Self;

    /// Cross-record validation performed at join time.
    fn check_against(&self, _gold: &G) -> Result<(), String> {
        Ok(())
    }
}

/// Gold label for one turn of intent prediction: 1 when a photo is shared in
/// the next turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentRecord {
    pub dialogue_id: String,
    pub turn_index: u64,
    pub label: bool,
}

/// Threshold applied to probability-style intent predictions.
pub const DEFAULT_INTENT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntentDecision {
    Label(bool),
    /// Probability of photo sharing, in `[0, 1]`.
    Score(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntentPrediction {
    pub dialogue_id: String,
    pub turn_index: u64,
    pub decision: IntentDecision,
}

impl IntentPrediction {
    /// Binary decision; scores are positive only when strictly above `threshold`.
    pub fn label_at(&self, threshold: f64) -> bool {
        match self.decision {
            IntentDecision::Label(label) => label,
            IntentDecision::Score(score) => score > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalGoldRecord {
    pub query_id: String,
    pub target_id: String,
    pub candidate_ids: Vec<String>,
}

impl RetrievalGoldRecord {
    /// Checks that the target is a candidate and candidates are unique.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(dup) = first_duplicate(&self.candidate_ids) {
            return Err(format!("duplicate candidate `{dup}` in candidate_ids"));
        }
        if !self.candidate_ids.contains(&self.target_id) {
            return Err(format!("target_id `{}` is not among candidate_ids", self.target_id));
        }
        Ok(())
    }

    /// Candidate-set size.
    pub fn candidate_set_size(&self) -> usize {
        self.candidate_ids.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalPrediction {
    pub query_id: String,
    pub ranking: Vec<String>,
}

impl RetrievalPrediction {
    pub fn validate(&self) -> Result<(), String> {
        match first_duplicate(&self.ranking) {
            Some(dup) => Err(format!("duplicate entry `{dup}` in ranking")),
            None => Ok(()),
        }
    }

    /// 1-based rank of `id`, if ranked.
    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.ranking.iter().position(|c| c == id).map(|p| p + 1)
    }
}

/// Dialogue state at one turn. Used for both gold and predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRecord {
    pub dialogue_id: String,
    pub turn_index: u64,
    #[serde(default)]
    pub intent: Option<String>,
    pub slots: BTreeMap<String, String>,
}

/// One response turn. `text` is the reference in gold files and the
/// hypothesis in prediction files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRecord {
    pub dialogue_id: String,
    pub turn_index: u64,
    pub text: String,
}

fn first_duplicate(items: &[String]) -> Option<&str> {
    let mut seen = HashSet::with_capacity(items.len());
    items.iter().find(|item| !seen.insert(item.as_str())).map(String::as_str)
}

impl Keyed for IntentRecord {
    fn key(&self) -> RecordKey {
        RecordKey::turn(&self.dialogue_id, self.turn_index)
    }
}

impl Keyed for IntentPrediction {
    fn key(&self) -> RecordKey {
        RecordKey::turn(&self.dialogue_id, self.turn_index)
    }
}

impl Keyed for RetrievalGoldRecord {
    fn key(&self) -> RecordKey {
        RecordKey::Query(self.query_id.clone())
    }
}

impl Keyed for RetrievalPrediction {
    fn key(&self) -> RecordKey {
        RecordKey::Query(self.query_id.clone())
    }
}

impl Keyed for StateRecord {
    fn key(&self) -> RecordKey {
        RecordKey::turn(&self.dialogue_id, self.turn_index)
    }
}

impl Keyed for GenerationRecord {
    fn key(&self) -> RecordKey {
        RecordKey::turn(&self.dialogue_id, self.turn_index)
    }
}

impl Prediction<IntentRecord> for IntentPrediction {
    fn worst_for(gold: &IntentRecord) -> Self {
        IntentPrediction {
            dialogue_id: gold.dialogue_id.clone(),
            turn_index: gold.turn_index,
            decision: IntentDecision::Label(false),
        }
    }
}

impl Prediction<RetrievalGoldRecord> for RetrievalPrediction {
    fn worst_for(gold: &RetrievalGoldRecord) -> Self {
        RetrievalPrediction { query_id: gold.query_id.clone(), ranking: Vec::new() }
    }

    fn check_against(&self, gold: &RetrievalGoldRecord) -> Result<(), String> {
        let candidates: HashSet<&str> = gold.candidate_ids.iter().map(String::as_str).collect();
        match self.ranking.iter().find(|id| !candidates.contains(id.as_str())) {
            Some(stray) => Err(format!("ranked id `{stray}` is not a candidate of query `{}`", gold.query_id)),
            None => Ok(()),
        }
    }
}

impl Prediction<StateRecord> for StateRecord {
    fn worst_for(gold: &StateRecord) -> Self {
        StateRecord {
            dialogue_id: gold.dialogue_id.clone(),
            turn_index: gold.turn_index,
            intent: None,
            slots: BTreeMap::new(),
        }
    }
}

impl Prediction<GenerationRecord> for GenerationRecord {
    fn worst_for(gold: &GenerationRecord) -> Self {
        GenerationRecord { dialogue_id: gold.dialogue_id.clone(), turn_index: gold.turn_index, text: String::new() }
    }
}
