//! Corpus BLEU against a frozen 10-pair fixture whose n-gram counts were
//! tabulated independently of this crate.

use std::path::PathBuf;

use serde::Deserialize;
use vdialogue_core::ingest::{join, read_records, JoinPolicy, Records, Role};
use vdialogue_core::metrics::{score_bleu, NGramProfile};
use vdialogue_core::TaskKind;

#[derive(Deserialize)]
struct Golden {
    clipped_matches: [u64; 4],
    hypothesis_counts: [u64; 4],
    hypothesis_length: u64,
    reference_length: u64,
    brevity_penalty: f64,
    bleu: f64,
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn ten_pair_corpus_matches_golden_tabulation() {
    let golden: Golden =
        serde_json::from_str(&std::fs::read_to_string(fixture("bleu10_golden.json")).unwrap()).unwrap();
    let Records::GenerationGold(gold) =
        read_records(&fixture("bleu10_gold.jsonl"), TaskKind::ResponseGeneration, Role::Gold).unwrap()
    else {
        panic!("gold variant")
    };
    let Records::GenerationPred(pred) =
        read_records(&fixture("bleu10_pred.jsonl"), TaskKind::ResponseGeneration, Role::Prediction).unwrap()
    else {
        panic!("prediction variant")
    };
    let joined = join(gold, pred, JoinPolicy::Strict).unwrap();
    assert_eq!(joined.len(), 10);

    let profile = NGramProfile::of_corpus(&joined);
    assert_eq!(profile.clipped_matches, golden.clipped_matches);
    assert_eq!(profile.hypothesis_counts, golden.hypothesis_counts);
    assert_eq!(profile.hypothesis_length, golden.hypothesis_length);
    assert_eq!(profile.reference_length, golden.reference_length);
    assert!((profile.brevity_penalty() - golden.brevity_penalty).abs() < 1e-12);
    assert!(golden.brevity_penalty < 1.0, "fixture should exercise the brevity penalty");

    let bleu = score_bleu(&joined, "fixture").unwrap().metric("bleu").unwrap();
    assert!((bleu - golden.bleu).abs() < 1e-6, "bleu {bleu} vs golden {}", golden.bleu);
}
