use std::collections::BTreeMap;

use super::{percent, MetricError};
use crate::ingest::JoinedDataset;
use crate::records::{RetrievalGoldRecord, RetrievalPrediction};
use crate::report::MetricReport;
use crate::task::{recall_metric_name, TaskKind};

/// Per-cut-off hit counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecallCounts {
    pub queries: u64,
    pub hits: BTreeMap<usize, u64>,
}

impl RecallCounts {
    /// Counts, for each `k`, the queries whose target sits in the first `k`
    /// ranked entries. A target missing from the ranking is never a hit.
    pub fn tally(data: &JoinedDataset<RetrievalGoldRecord, RetrievalPrediction>, ks: &[usize]) -> Self {
        let mut counts = RecallCounts { queries: 0, hits: ks.iter().map(|&k| (k, 0)).collect() };
        for (gold, pred) in &data.pairs {
            counts.queries += 1;
            if let Some(rank) = pred.rank_of(&gold.target_id) {
                for (&k, hits) in counts.hits.iter_mut() {
                    if rank <= k {
                        *hits += 1;
                    }
                }
            }
        }
        counts
    }

    pub fn merge(&mut self, other: &RecallCounts) {
        self.queries += other.queries;
        for (&k, &h) in &other.hits {
            *self.hits.entry(k).or_insert(0) += h;
        }
    }

    pub fn recall_at(&self, k: usize) -> Option<f64> {
        self.hits.get(&k).map(|&h| percent(h, self.queries))
    }
}

/// Recall at each cut-off in `ks`, reported as `r@k`.
pub fn score_retrieval(
    data: &JoinedDataset<RetrievalGoldRecord, RetrievalPrediction>,
    task: TaskKind,
    dataset: &str,
    ks: &[usize],
) -> Result<MetricReport, MetricError> {
    if data.is_empty() {
        return Err(MetricError::Empty);
    }
    let candidates = data.pairs.iter().map(|(g, _)| g.candidate_set_size()).max().unwrap_or(0);
    for &k in ks {
        if k == 0 {
            return Err(MetricError::ZeroK);
        }
        if k > candidates {
            return Err(MetricError::KExceedsCandidateSet { k, candidates });
        }
    }
    let counts = RecallCounts::tally(data, ks);
    let metrics = counts.hits.keys().map(|&k| (recall_metric_name(k), counts.recall_at(k).unwrap())).collect();
    Ok(MetricReport::new(task, dataset, counts.queries, metrics).expect("percentages stay within [0, 100]"))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Queries with `z` candidates `c0..c{z-1}`, target `c0`, ranked so that the
    /// target lands at the given 1-based rank.
    fn data_with_ranks(ranks: &[usize], z: usize) -> JoinedDataset<RetrievalGoldRecord, RetrievalPrediction> {
        let candidates: Vec<String> = (0..z).map(|i| format!("c{i}")).collect();
        JoinedDataset::from_pairs(
            ranks
                .iter()
                .enumerate()
                .map(|(q, &rank)| {
                    let mut ranking: Vec<String> = candidates[1..].to_vec();
                    ranking.insert(rank - 1, "c0".into());
                    (
                        RetrievalGoldRecord {
                            query_id: format!("q{q}"),
                            target_id: "c0".into(),
                            candidate_ids: candidates.clone(),
                        },
                        RetrievalPrediction { query_id: format!("q{q}"), ranking },
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn worked_rank_example() {
        let r =
            score_retrieval(&data_with_ranks(&[1, 3, 7, 12], 20), TaskKind::RetrievalT2I, "x", &[1, 5, 10]).unwrap();
        assert_eq!(r.metric("r@1"), Some(25.0));
        assert_eq!(r.metric("r@5"), Some(50.0));
        assert_eq!(r.metric("r@10"), Some(75.0));
    }

    #[test]
    fn target_first_everywhere() {
        let r = score_retrieval(&data_with_ranks(&[1, 1, 1], 10), TaskKind::RetrievalI2T, "x", &[1, 5]).unwrap();
        assert_eq!(r.metric("r@1"), Some(100.0));
        assert_eq!(r.metric("r@5"), Some(100.0));
    }

    #[test]
    fn k_equal_to_candidate_set_is_perfect() {
        let r = score_retrieval(&data_with_ranks(&[10, 4, 7], 10), TaskKind::RetrievalI2T, "x", &[10]).unwrap();
        assert_eq!(r.metric("r@10"), Some(100.0));
    }

    #[test]
    fn short_rankings_scored_as_is() {
        let mut d = data_with_ranks(&[3], 10);
        d.pairs[0].1.ranking.truncate(2);
        let r = score_retrieval(&d, TaskKind::RetrievalI2T, "x", &[5]).unwrap();
        assert_eq!(r.metric("r@5"), Some(0.0));
    }

    #[test]
    fn cut_off_errors() {
        let d = data_with_ranks(&[1], 10);
        assert_eq!(
            score_retrieval(&d, TaskKind::RetrievalI2T, "x", &[11]),
            Err(MetricError::KExceedsCandidateSet { k: 11, candidates: 10 })
        );
        assert_eq!(score_retrieval(&d, TaskKind::RetrievalI2T, "x", &[0]), Err(MetricError::ZeroK));
        let empty = JoinedDataset::from_pairs(Vec::new());
        assert_eq!(score_retrieval(&empty, TaskKind::RetrievalI2T, "x", &[1]), Err(MetricError::Empty));
    }
}
