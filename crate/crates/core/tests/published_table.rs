//! The published per-metric results aggregate to the published composite scores.

use std::collections::BTreeMap;

use vdialogue_core::manifest::default_manifest;
use vdialogue_core::vdscore::aggregate_with_manifest_weights;
use vdialogue_core::{MetricReport, TaskKind};

type Column = [(TaskKind, &'static str, &'static [(&'static str, f64)]); 10];

const VISIT: Column = [
    (TaskKind::IntentPrediction, "photochat", &[("f1", 60.6), ("precision", 61.5), ("recall", 66.8)]),
    (TaskKind::IntentPrediction, "mmdialog", &[("f1", 76.3), ("precision", 75.1), ("recall", 80.9)]),
    (TaskKind::RetrievalT2I, "photochat", &[("r@1", 13.8), ("r@5", 32.7), ("r@10", 42.3)]),
    (TaskKind::RetrievalT2I, "mmdialog", &[("r@1", 20.8), ("r@5", 46.0), ("r@10", 58.0)]),
    (TaskKind::RetrievalI2T, "imagechat", &[("r@1", 51.5), ("r@5", 73.2)]),
    (TaskKind::RetrievalI2T, "visdial", &[("r@1", 51.4), ("r@5", 82.6)]),
    (TaskKind::StateTracking, "simmc2.0", &[("intent_f1", 96.7), ("slot_f1", 86.6)]),
    (TaskKind::StateTracking, "mmconv", &[("accuracy", 32.7)]),
    (TaskKind::ResponseGeneration, "simmc2.0", &[("bleu", 33.4)]),
    (TaskKind::ResponseGeneration, "mmconv", &[("bleu", 21.2)]),
];

const PREVIOUS_SOTA: Column = [
    (TaskKind::IntentPrediction, "photochat", &[("f1", 58.9), ("precision", 58.2), ("recall", 64.6)]),
    (TaskKind::IntentPrediction, "mmdialog", &[("f1", 75.5), ("precision", 72.3), ("recall", 76.4)]),
    (TaskKind::RetrievalT2I, "photochat", &[("r@1", 10.4), ("r@5", 27.0), ("r@10", 37.1)]),
    (TaskKind::RetrievalT2I, "mmdialog", &[("r@1", 29.6), ("r@5", 45.1), ("r@10", 53.6)]),
    (TaskKind::RetrievalI2T, "imagechat", &[("r@1", 50.3), ("r@5", 75.4)]),
    (TaskKind::RetrievalI2T, "visdial", &[("r@1", 55.7), ("r@5", 84.8)]),
    (TaskKind::StateTracking, "simmc2.0", &[("intent_f1", 96.3), ("slot_f1", 88.3)]),
    (TaskKind::StateTracking, "mmconv", &[("accuracy", 18.0)]),
    (TaskKind::ResponseGeneration, "simmc2.0", &[("bleu", 33.1)]),
    (TaskKind::ResponseGeneration, "mmconv", &[("bleu", 20.3)]),
];

fn reports(column: &Column) -> Vec<MetricReport> {
    column
        .iter()
        .map(|(task, dataset, metrics)| {
            let metrics: BTreeMap<String, f64> = metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect();
            MetricReport::new(*task, *dataset, 0, metrics).unwrap()
        })
        .collect()
}

#[test]
fn visit_column() {
    let r = aggregate_with_manifest_weights(&reports(&VISIT), &default_manifest()).unwrap();
    // hand arithmetic: task scores (27.3, 70.2, 35.6, 64.675, 62.175)
    let expected = [27.3, 70.2, 35.6, 64.675, 62.175];
    for (score, want) in r.task_scores.iter().zip(expected) {
        assert!((score.value - want).abs() < 1e-9, "{:?} vs {want}", score);
    }
    assert!((r.value - 46.512).abs() < 1e-9);
    assert_eq!(format!("{:.1}", r.value), "46.5");
}

#[test]
fn previous_sota_column() {
    let r = aggregate_with_manifest_weights(&reports(&PREVIOUS_SOTA), &default_manifest()).unwrap();
    let expected = [26.7, 67.65, 33.8, 66.55, 55.15];
    for (score, want) in r.task_scores.iter().zip(expected) {
        assert!((score.value - want).abs() < 1e-9, "{:?} vs {want}", score);
    }
    assert!((r.value - 45.2175).abs() < 1e-9);
    assert_eq!(format!("{:.1}", r.value), "45.2");
}
