//! Deterministic inputs for the scoring benchmarks.

use vdialogue_core::records::GenerationRecord;
use vdialogue_core::{JoinedDataset, RetrievalGoldRecord, RetrievalPrediction};

const WORDS: [&str; 12] = ["the", "red", "jacket", "is", "on", "sale", "would", "you", "like", "photo", "?", "!"];

fn sentence(seed: usize, len: usize) -> String {
    (0..len).map(|j| WORDS[(seed * 7 + j * j * 3 + j) % WORDS.len()]).collect::<Vec<_>>().join(" ")
}

/// `n` reference/hypothesis pairs that share most of their n-grams.
pub fn generation_corpus(n: usize) -> JoinedDataset<GenerationRecord, GenerationRecord> {
    JoinedDataset::from_pairs(
        (0..n)
            .map(|i| {
                let rec = |text| GenerationRecord { dialogue_id: format!("d{i}"), turn_index: 0, text };
                (rec(sentence(i, 12 + i % 5)), rec(sentence(i + i % 3, 11 + i % 7)))
            })
            .collect(),
    )
}

/// `n` queries over `z` candidates, each ranking the target at `i % 20`.
pub fn retrieval_corpus(n: usize, z: usize) -> JoinedDataset<RetrievalGoldRecord, RetrievalPrediction> {
    JoinedDataset::from_pairs(
        (0..n)
            .map(|i| {
                let candidates: Vec<String> = (0..z).map(|c| format!("q{i}c{c}")).collect();
                let target = candidates[(i * 31) % z].clone();
                let mut ranking: Vec<String> = candidates.iter().filter(|c| **c != target).take(50).cloned().collect();
                ranking.insert((i % 20).min(ranking.len()), target.clone());
                let gold =
                    RetrievalGoldRecord { query_id: format!("q{i}"), target_id: target, candidate_ids: candidates };
                (gold, RetrievalPrediction { query_id: format!("q{i}"), ranking })
            })
            .collect(),
    )
}
