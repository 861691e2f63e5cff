//! Reading, validating and joining line-delimited gold and prediction files.
//!
//! Every file holds one JSON object per line. Blank lines are skipped but
//! still counted, so diagnostics always point at the physical line.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::records::{
    GenerationRecord, IntentDecision, IntentPrediction, IntentRecord, Keyed, Prediction, RecordKey,
    RetrievalGoldRecord, RetrievalPrediction, StateRecord,
};
use crate::task::TaskKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Gold,
    Prediction,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{source_name}: {source}")]
    Io { source_name: String, source: std::io::Error },
    #[error("{source_name}:{line}: {message}")]
    Line { source_name: String, line: usize, message: String },
    #[error("{source_name}:{line}: duplicate key {key} (first seen on line {first_line})")]
    DuplicateKey { source_name: String, line: usize, first_line: usize, key: RecordKey },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JoinError {
    #[error("no prediction for gold key(s): {}", list_keys(.0))]
    MissingPredictions(Vec<RecordKey>),
    #[error("prediction key(s) absent from gold: {}", list_keys(.0))]
    UnknownPredictions(Vec<RecordKey>),
    #[error("duplicate key {0} in join input")]
    DuplicateKey(RecordKey),
    #[error("{key}: {message}")]
    InvalidPair { key: RecordKey, message: String },
}

fn list_keys(keys: &[RecordKey]) -> String {
    const SHOWN: usize = 10;
    let mut text = keys.iter().take(SHOWN).map(ToString::to_string).collect::<Vec<_>>().join(", ");
    if keys.len() > SHOWN {
        text.push_str(&format!(" and {} more", keys.len() - SHOWN));
    }
    text
}

/// Parsed contents of one file.
#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    IntentGold(Vec<IntentRecord>),
    IntentPred(Vec<IntentPrediction>),
    RetrievalGold(Vec<RetrievalGoldRecord>),
    RetrievalPred(Vec<RetrievalPrediction>),
    StateGold(Vec<StateRecord>),
    StatePred(Vec<StateRecord>),
    GenerationGold(Vec<GenerationRecord>),
    GenerationPred(Vec<GenerationRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::IntentGold(v) => v.len(),
            Records::IntentPred(v) => v.len(),
            Records::RetrievalGold(v) => v.len(),
            Records::RetrievalPred(v) => v.len(),
            Records::StateGold(v) | Records::StatePred(v) => v.len(),
            Records::GenerationGold(v) | Records::GenerationPred(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Serializes back to the line-delimited format accepted by [`parse_records`].
    pub fn to_jsonl(&self) -> String {
        let lines: Vec<serde_json::Value> = match self {
            Records::IntentGold(v) => v
                .iter()
                .map(|r| json!({"dialogue_id": r.dialogue_id, "turn_index": r.turn_index, "label": u8::from(r.label)}))
                .collect(),
            Records::IntentPred(v) => v
                .iter()
                .map(|r| match r.decision {
                    IntentDecision::Label(l) => {
                        json!({"dialogue_id": r.dialogue_id, "turn_index": r.turn_index, "label": u8::from(l)})
                    }
                    IntentDecision::Score(s) => {
                        json!({"dialogue_id": r.dialogue_id, "turn_index": r.turn_index, "score": s})
                    }
                })
                .collect(),
            Records::RetrievalGold(v) => v.iter().map(to_value).collect(),
            Records::RetrievalPred(v) => v.iter().map(to_value).collect(),
            Records::StateGold(v) | Records::StatePred(v) => v.iter().map(to_value).collect(),
            Records::GenerationGold(v) => v
                .iter()
                .map(|r| json!({"dialogue_id": r.dialogue_id, "turn_index": r.turn_index, "reference": r.text}))
                .collect(),
            Records::GenerationPred(v) => v
                .iter()
                .map(|r| json!({"dialogue_id": r.dialogue_id, "turn_index": r.turn_index, "hypothesis": r.text}))
                .collect(),
        };
        lines.iter().map(|v| format!("{v}\n")).collect()
    }
}

fn to_value<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("records serialize")
}

#[derive(Deserialize)]
struct IntentGoldLine {
    dialogue_id: String,
    turn_index: u64,
    label: i64,
}

#[derive(Deserialize)]
struct IntentPredLine {
    dialogue_id: String,
    turn_index: u64,
    label: Option<i64>,
    score: Option<f64>,
}

#[derive(Deserialize)]
struct GenerationGoldLine {
    dialogue_id: String,
    turn_index: u64,
    reference: String,
}

#[derive(Deserialize)]
struct GenerationPredLine {
    dialogue_id: String,
    turn_index: u64,
    hypothesis: String,
}

fn binary_label(label: i64) -> Result<bool, String> {
    match label {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(format!("field `label` must be 0 or 1, got {other}")),
    }
}

fn from_line<T: for<'de> Deserialize<'de>>(line: &str) -> Result<T, String> {
    serde_json::from_str(line).map_err(|e| {
        // serde_json positions refer to the single line; the caller adds the line number
        let text = e.to_string();
        match text.rfind(" at line ") {
            Some(cut) => text[..cut].to_string(),
            None => text,
        }
    })
}

fn parse_intent_gold(line: &str) -> Result<IntentRecord, String> {
    let raw: IntentGoldLine = from_line(line)?;
    Ok(IntentRecord { dialogue_id: raw.dialogue_id, turn_index: raw.turn_index, label: binary_label(raw.label)? })
}

fn parse_intent_pred(line: &str) -> Result<IntentPrediction, String> {
    let raw: IntentPredLine = from_line(line)?;
    let decision = match (raw.label, raw.score) {
        (Some(label), None) => IntentDecision::Label(binary_label(label)?),
        (None, Some(score)) if (0.0..=1.0).contains(&score) => IntentDecision::Score(score),
        (None, Some(score)) => return Err(format!("field `score` must lie in [0, 1], got {score}")),
        (Some(_), Some(_)) => return Err("fields `label` and `score` are mutually exclusive".into()),
        (None, None) => return Err("missing field `label` (or `score`)".into()),
    };
    Ok(IntentPrediction { dialogue_id: raw.dialogue_id, turn_index: raw.turn_index, decision })
}

fn parse_retrieval_gold(line: &str) -> Result<RetrievalGoldRecord, String> {
    let record: RetrievalGoldRecord = from_line(line)?;
    record.validate()?;
    Ok(record)
}

fn parse_retrieval_pred(line: &str) -> Result<RetrievalPrediction, String> {
    let record: RetrievalPrediction = from_line(line)?;
    record.validate()?;
    Ok(record)
}

fn parse_state(line: &str) -> Result<StateRecord, String> {
    from_line(line)
}

fn parse_generation_gold(line: &str) -> Result<GenerationRecord, String> {
    let raw: GenerationGoldLine = from_line(line)?;
    Ok(GenerationRecord { dialogue_id: raw.dialogue_id, turn_index: raw.turn_index, text: raw.reference })
}

fn parse_generation_pred(line: &str) -> Result<GenerationRecord, String> {
    let raw: GenerationPredLine = from_line(line)?;
    Ok(GenerationRecord { dialogue_id: raw.dialogue_id, turn_index: raw.turn_index, text: raw.hypothesis })
}

fn parse_lines<T: Keyed>(
    reader: impl Read,
    source_name: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Vec<T>, IngestError> {
    let mut out = Vec::new();
    let mut first_seen: HashMap<RecordKey, usize> = HashMap::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| match source.kind() {
            std::io::ErrorKind::InvalidData => IngestError::Line {
                source_name: source_name.to_string(),
                line: line_no,
                message: "line is not valid UTF-8".into(),
            },
            _ => IngestError::Io { source_name: source_name.to_string(), source },
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse(&line).map_err(|message| IngestError::Line {
            source_name: source_name.to_string(),
            line: line_no,
            message,
        })?;
        let key = record.key();
        if let Some(&first_line) = first_seen.get(&key) {
            return Err(IngestError::DuplicateKey {
                source_name: source_name.to_string(),
                line: line_no,
                first_line,
                key,
            });
        }
        first_seen.insert(key, line_no);
        out.push(record);
    }
    Ok(out)
}

/// Parses records for `task` and `role` from any reader. `source_name`
/// prefixes diagnostics.
pub fn parse_records(reader: impl Read, source_name: &str, task: TaskKind, role: Role) -> Result<Records, IngestError> {
    Ok(match (task, role) {
        (TaskKind::IntentPrediction, Role::Gold) => {
            Records::IntentGold(parse_lines(reader, source_name, parse_intent_gold)?)
        }
        (TaskKind::IntentPrediction, Role::Prediction) => {
            Records::IntentPred(parse_lines(reader, source_name, parse_intent_pred)?)
        }
        (TaskKind::RetrievalT2I | TaskKind::RetrievalI2T, Role::Gold) => {
            let records = parse_lines(reader, source_name, parse_retrieval_gold)?;
            check_uniform_candidate_sets(&records, source_name)?;
            Records::RetrievalGold(records)
        }
        (TaskKind::RetrievalT2I | TaskKind::RetrievalI2T, Role::Prediction) => {
            Records::RetrievalPred(parse_lines(reader, source_name, parse_retrieval_pred)?)
        }
        (TaskKind::StateTracking, Role::Gold) => Records::StateGold(parse_lines(reader, source_name, parse_state)?),
        (TaskKind::StateTracking, Role::Prediction) => {
            Records::StatePred(parse_lines(reader, source_name, parse_state)?)
        }
        (TaskKind::ResponseGeneration, Role::Gold) => {
            Records::GenerationGold(parse_lines(reader, source_name, parse_generation_gold)?)
        }
        (TaskKind::ResponseGeneration, Role::Prediction) => {
            Records::GenerationPred(parse_lines(reader, source_name, parse_generation_pred)?)
        }
    })
}

/// Reads a line-delimited record file, in file order.
pub fn read_records(path: &Path, task: TaskKind, role: Role) -> Result<Records, IngestError> {
    let source_name = path.display().to_string();
    let file = File::open(path).map_err(|source| IngestError::Io { source_name: source_name.clone(), source })?;
    parse_records(file, &source_name, task, role)
}

fn check_uniform_candidate_sets(records: &[RetrievalGoldRecord], source_name: &str) -> Result<(), IngestError> {
    let Some(first) = records.first() else { return Ok(()) };
    let size = first.candidate_set_size();
    // line numbers are not kept per record; report the record position instead
    match records.iter().position(|r| r.candidate_set_size() != size) {
        Some(pos) => Err(IngestError::Line {
            source_name: source_name.to_string(),
            line: pos + 1,
            message: format!(
                "candidate set of query `{}` has {} entries, but the file's first query has {size}",
                records[pos].query_id,
                records[pos].candidate_set_size()
            ),
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JoinPolicy {
    /// Every gold record needs a prediction.
    #[default]
    Strict,
    /// Gold records without a prediction are scored against the worst possible prediction.
    MissingAsWrong,
}

/// Gold records aligned with their predictions, sorted by key.
///
/// Prediction keys with no gold counterpart never reach a dataset; [`join`]
/// rejects them.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedDataset<G, P> {
    pub pairs: Vec<(G, P)>,
    /// Gold keys that were paired with a canonical worst prediction.
    pub unmatched_gold: Vec<RecordKey>,
}

impl<G, P> JoinedDataset<G, P> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Builds a dataset from already aligned pairs (no validation).
    pub fn from_pairs(pairs: Vec<(G, P)>) -> Self {
        JoinedDataset { pairs, unmatched_gold: Vec::new() }
    }
}

pub fn join<G, P>(gold: Vec<G>, pred: Vec<P>, policy: JoinPolicy) -> Result<JoinedDataset<G, P>, JoinError>
where
    G: Keyed,
    P: Prediction<G>,
{
    let mut predictions: BTreeMap<RecordKey, P> = BTreeMap::new();
    for p in pred {
        let key = p.key();
        if predictions.contains_key(&key) {
            return Err(JoinError::DuplicateKey(key));
        }
        predictions.insert(key, p);
    }

    let mut keyed_gold: BTreeMap<RecordKey, G> = BTreeMap::new();
    for g in gold {
        let key = g.key();
        if keyed_gold.contains_key(&key) {
            return Err(JoinError::DuplicateKey(key));
        }
        keyed_gold.insert(key, g);
    }

    let unknown: Vec<RecordKey> = predictions.keys().filter(|k| !keyed_gold.contains_key(*k)).cloned().collect();
    if !unknown.is_empty() {
        return Err(JoinError::UnknownPredictions(unknown));
    }

    let missing: Vec<RecordKey> = keyed_gold.keys().filter(|k| !predictions.contains_key(*k)).cloned().collect();
    if policy == JoinPolicy::Strict && !missing.is_empty() {
        return Err(JoinError::MissingPredictions(missing));
    }

    let mut pairs = Vec::with_capacity(keyed_gold.len());
    for (key, g) in keyed_gold {
        let p = match predictions.remove(&key) {
            Some(p) => {
                p.check_against(&g).map_err(|message| JoinError::InvalidPair { key: key.clone(), message })?;
                p
            }
            None => P::worst_for(&g),
        };
        pairs.push((g, p));
    }
    Ok(JoinedDataset { pairs, unmatched_gold: missing })
}
