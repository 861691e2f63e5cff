//! Analytic Hierarchy Process over a single level of compared items.
//!
//! A [`PairwiseMatrix`] states how much more important item `i` is than item
//! `j`. Priority weights come from either the column-normalize / row-sum
//! procedure ([`WeightMethod::ColumnMean`], the default) or the principal
//! eigenvector found by power iteration. [`consistency`] then estimates the
//! largest eigenvalue from the weights and compares the consistency index
//! against the random index of a matrix of the same size.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::task::TaskKind;

/// Relative tolerance of the reciprocal property.
pub const RECIPROCAL_TOLERANCE: f64 = 1e-9;
/// Weight vectors must sum to one within this tolerance.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;
/// Judgments pass when the consistency ratio is strictly below this.
pub const CONSISTENCY_THRESHOLD: f64 = 0.1;
/// Power iteration stops once successive iterates differ by less than this in max norm.
pub const POWER_ITERATION_TOLERANCE: f64 = 1e-12;
pub const POWER_ITERATION_LIMIT: usize = 100_000;

/// Random index by matrix size, for n = 1..=11.
pub const RANDOM_INDEX: [f64; 11] = [0.00, 0.00, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49, 1.51];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AhpError {
    #[error("matrix has no rows")]
    Empty,
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("{labels} labels for a {n}x{n} matrix")]
    LabelCount { labels: usize, n: usize },
    #[error("entry [{row}][{col}] = {value} must be strictly positive")]
    NonPositive { row: usize, col: usize, value: f64 },
    #[error("diagonal entry [{index}][{index}] = {value}, expected 1")]
    Diagonal { index: usize, value: f64 },
    #[error("entries [{row}][{col}] = {value} and [{col}][{row}] = {mirror} are not reciprocal")]
    NotReciprocal { row: usize, col: usize, value: f64, mirror: f64 },
    #[error("cannot parse matrix entry `{0}`")]
    BadEntry(String),
    #[error("weight vector has {weights} entries for a {n}x{n} matrix")]
    DimensionMismatch { weights: usize, n: usize },
    #[error("weight {index} is zero")]
    ZeroWeight { index: usize },
    #[error("weights must be non-negative and sum to 1 (sum is {0})")]
    BadWeights(f64),
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("no random index for n = {0} (table covers 1..=11)")]
    NoRandomIndex(usize),
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

/// A positive reciprocal comparison matrix with item labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    labels: Vec<String>,
    entries: Vec<Vec<f64>>,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

impl PairwiseMatrix {
    pub fn new(labels: Vec<String>, entries: Vec<Vec<f64>>) -> Result<Self, AhpError> {
        let n = entries.len();
        if n == 0 {
            return Err(AhpError::Empty);
        }
        if labels.len() != n {
            return Err(AhpError::LabelCount { labels: labels.len(), n });
        }
        for (row, values) in entries.iter().enumerate() {
            if values.len() != n {
                return Err(AhpError::NotSquare { row, len: values.len(), n });
            }
            for (col, &value) in values.iter().enumerate() {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(AhpError::NonPositive { row, col, value });
                }
            }
        }
        for (i, row) in entries.iter().enumerate() {
            if relative_gap(row[i], 1.0) > RECIPROCAL_TOLERANCE {
                return Err(AhpError::Diagonal { index: i, value: row[i] });
            }
            for (j, mirror_row) in entries.iter().enumerate().skip(i + 1) {
                let (value, mirror) = (row[j], mirror_row[i]);
                if relative_gap(mirror, 1.0 / value) > RECIPROCAL_TOLERANCE {
                    return Err(AhpError::NotReciprocal { row: i, col: j, value, mirror });
                }
            }
        }
        Ok(PairwiseMatrix { labels, entries })
    }

    /// Builds the fully consistent matrix `entries[i][j] = w[i] / w[j]`.
    pub fn from_priorities(labels: Vec<String>, priorities: &[f64]) -> Result<Self, AhpError> {
        let entries = priorities.iter().map(|wi| priorities.iter().map(|wj| wi / wj).collect()).collect();
        Self::new(labels, entries)
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    /// `M * v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Reorders items so that new item `k` is old item `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        PairwiseMatrix {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            entries: order.iter().map(|&i| order.iter().map(|&j| self.entries[i][j]).collect()).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, AhpError> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| AhpError::BadEntry(e.to_string()))?;
        let entries = file
            .entries
            .into_iter()
            .map(|row| row.into_iter().map(MatrixEntry::value).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(file.labels, entries)
    }

    pub fn to_json(&self) -> String {
        let file = serde_json::json!({ "labels": self.labels, "entries": self.entries });
        serde_json::to_string_pretty(&file).expect("matrix serializes") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self, AhpError> {
        let display = path.display().to_string();
        let text =
            fs::read_to_string(path).map_err(|e| AhpError::File { path: display.clone(), message: e.to_string() })?;
        Self::from_json(&text).map_err(|e| match e {
            AhpError::File { .. } => e,
            other => AhpError::File { path: display, message: other.to_string() },
        })
    }
}

#[derive(Deserialize)]
struct MatrixFile {
    labels: Vec<String>,
    entries: Vec<Vec<MatrixEntry>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixEntry {
    Number(f64),
    Text(String),
}

impl MatrixEntry {
    fn value(self) -> Result<f64, AhpError> {
        match self {
            MatrixEntry::Number(x) => Ok(x),
            MatrixEntry::Text(text) => parse_entry(&text),
        }
    }
}

/// Parses `"3"`, `"0.25"` or a fraction such as `"1/3"`.
pub fn parse_entry(text: &str) -> Result<f64, AhpError> {
    let bad = || AhpError::BadEntry(text.to_string());
    let text = text.trim();
    match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            Ok(num / den)
        }
        None => text.parse().map_err(|_| bad()),
    }
}

/// The task comparison matrix used by the benchmark, in [`TaskKind::ALL`] order.
///
/// The state-tracking row compares to intent prediction as 1/4, the
/// reciprocal of the 4 in the intent row.
pub fn canonical_matrix() -> PairwiseMatrix {
    let entries = vec![
        vec![1.0, 2.0, 3.0, 3.0, 5.0],
        vec![1.0 / 2.0, 1.0, 2.0, 2.0, 4.0],
        vec![1.0 / 3.0, 1.0 / 2.0, 1.0, 1.0, 3.0],
        vec![1.0 / 3.0, 1.0 / 2.0, 1.0, 1.0, 3.0],
        vec![1.0 / 5.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 3.0, 1.0],
    ];
    let labels = TaskKind::ALL.iter().map(|t| t.as_str().to_string()).collect();
    PairwiseMatrix::new(labels, entries).expect("canonical matrix is reciprocal")
}

/// Non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, AhpError> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(AhpError::BadWeights(sum));
        }
        Ok(WeightVector(weights))
    }

    /// Scales a non-negative vector with positive sum to unit sum.
    pub fn normalized(raw: &[f64]) -> Self {
        let sum: f64 = raw.iter().sum();
        WeightVector(raw.iter().map(|x| x / sum).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMethod {
    /// Normalize columns, sum rows, normalize the row sums.
    #[default]
    ColumnMean,
    /// Principal eigenvector by power iteration.
    Eigenvector,
}

impl fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMethod::ColumnMean => "column_mean",
            WeightMethod::Eigenvector => "eigenvector",
        })
    }
}

impl FromStr for WeightMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "column_mean" => Ok(WeightMethod::ColumnMean),
            "eigenvector" => Ok(WeightMethod::Eigenvector),
            other => Err(format!("unknown weight method `{other}` (expected column_mean or eigenvector)")),
        }
    }
}

pub fn derive_weights(m: &PairwiseMatrix, method: WeightMethod) -> Result<WeightVector, AhpError> {
    match method {
        WeightMethod::ColumnMean => Ok(column_mean_weights(m)),
        WeightMethod::Eigenvector => principal_eigenvector(m),
    }
}

fn column_mean_weights(m: &PairwiseMatrix) -> WeightVector {
    let n = m.size();
    let col_sums: Vec<f64> = (0..n).map(|j| (0..n).map(|i| m.get(i, j)).sum()).collect();
    let row_sums: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m.get(i, j) / col_sums[j]).sum()).collect();
    WeightVector::normalized(&row_sums)
}

fn principal_eigenvector(m: &PairwiseMatrix) -> Result<WeightVector, AhpError> {
    let n = m.size();
    let mut current = vec![1.0 / n as f64; n];
    for _ in 0..POWER_ITERATION_LIMIT {
        let next = WeightVector::normalized(&m.apply(&current)).0;
        let gap = next.iter().zip(&current).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        current = next;
        if gap < POWER_ITERATION_TOLERANCE {
            return Ok(WeightVector(current));
        }
    }
    Err(AhpError::NoConvergence(POWER_ITERATION_LIMIT))
}

/// Estimates the largest eigenvalue as the mean of `(M w)_i / w_i`.
pub fn lambda_max(m: &PairwiseMatrix, w: &WeightVector) -> Result<f64, AhpError> {
    let n = m.size();
    if w.len() != n {
        return Err(AhpError::DimensionMismatch { weights: w.len(), n });
    }
    if let Some(index) = w.as_slice().iter().position(|&x| x == 0.0) {
        return Err(AhpError::ZeroWeight { index });
    }
    let mw = m.apply(w.as_slice());
    Ok(mw.iter().zip(w.as_slice()).map(|(a, b)| a / b).sum::<f64>() / n as f64)
}

/// Random index for an `n x n` matrix.
pub fn random_index(n: usize) -> Result<f64, AhpError> {
    n.checked_sub(1).and_then(|i| RANDOM_INDEX.get(i)).copied().ok_or(AhpError::NoRandomIndex(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub lambda_max: f64,
    pub n: usize,
    pub ci: f64,
    pub ri: f64,
    pub cr: f64,
    pub consistent: bool,
}

pub fn consistency(m: &PairwiseMatrix, w: &WeightVector) -> Result<ConsistencyReport, AhpError> {
    let n = m.size();
    let ri = random_index(n)?;
    let lambda = lambda_max(m, w)?;
    let ci = if n >= 2 { (lambda - n as f64) / (n as f64 - 1.0) } else { 0.0 };
    let cr = if ri > 0.0 { ci / ri } else { 0.0 };
    Ok(ConsistencyReport { lambda_max: lambda, n, ci, ri, cr, consistent: cr < CONSISTENCY_THRESHOLD })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledWeight {
    pub label: String,
    pub weight: f64,
}

/// Weights and consistency of one matrix, in matrix order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhpSummary {
    pub method: WeightMethod,
    pub weights: Vec<LabeledWeight>,
    #[serde(flatten)]
    pub consistency: ConsistencyReport,
}

impl AhpSummary {
    pub fn to_json(&self) -> String {
        crate::json::to_string_fixed(self).expect("summary serializes")
    }
}

pub fn analyze(m: &PairwiseMatrix, method: WeightMethod) -> Result<AhpSummary, AhpError> {
    let w = derive_weights(m, method)?;
    let consistency = consistency(m, &w)?;
    let weights = m
        .labels()
        .iter()
        .zip(w.as_slice())
        .map(|(label, &weight)| LabeledWeight { label: label.clone(), weight })
        .collect();
    Ok(AhpSummary { method, weights, consistency })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("item{i}")).collect()
    }

    #[test]
    fn summary_keeps_matrix_order() {
        let summary = analyze(&canonical_matrix(), WeightMethod::ColumnMean).unwrap();
        let labels: Vec<_> = summary.weights.iter().map(|w| w.label.as_str()).collect();
        assert_eq!(labels, TaskKind::ALL.map(|t| t.as_str()));
        let json = summary.to_json();
        assert!(json.contains("\"method\": \"column_mean\""), "{json}");
        assert!(json.contains("\"cr\": 0.0127"), "{json}");
        assert!(json.contains("\"consistent\": true"), "{json}");
    }

    fn cyclic() -> PairwiseMatrix {
        PairwiseMatrix::new(
            labels(3),
            vec![vec![1.0, 9.0, 1.0 / 9.0], vec![1.0 / 9.0, 1.0, 9.0], vec![9.0, 1.0 / 9.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn canonical_entries() {
        let m = canonical_matrix();
        assert_eq!(m.get(0, 4), 5.0);
        assert_eq!(m.get(4, 0), 1.0 / 5.0);
        assert_eq!(m.get(4, 1), 1.0 / 4.0);
        assert!((0..5).all(|i| m.get(i, i) == 1.0));
        assert_eq!(m.labels()[1], "intent_prediction");
    }

    #[test]
    fn canonical_weights_near_published() {
        let w = derive_weights(&canonical_matrix(), WeightMethod::ColumnMean).unwrap();
        let published = [0.41, 0.25, 0.14, 0.14, 0.06];
        // exact column-mean values computed with rational arithmetic
        let exact = [
            0.404_761_052_948_708_3,
            0.248_403_253_747_081_4,
            0.143_743_880_394_667_5,
            0.143_743_880_394_667_5,
            0.059_347_932_514_875_4,
        ];
        for i in 0..5 {
            assert!((w.as_slice()[i] - published[i]).abs() <= 0.01);
            assert!((w.as_slice()[i] - exact[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_consistency() {
        let m = canonical_matrix();
        let w = derive_weights(&m, WeightMethod::ColumnMean).unwrap();
        let r = consistency(&m, &w).unwrap();
        assert!((r.lambda_max - 5.057).abs() <= 0.02);
        assert!((r.lambda_max - 5.056_817_868_899_621).abs() < 1e-9);
        assert!((r.ci - 0.014).abs() <= 0.005);
        assert_eq!(r.ri, 1.12);
        assert!((r.cr - 0.013).abs() <= 0.005);
        assert!(r.consistent);
    }

    #[test]
    fn eigenvector_method_on_canonical_matrix() {
        let w = derive_weights(&canonical_matrix(), WeightMethod::Eigenvector).unwrap();
        // principal eigenvector from a dense eigensolver
        let reference = [0.406_529_09, 0.248_968_1, 0.142_823, 0.142_823, 0.058_856_8];
        for (got, want) in w.as_slice().iter().zip(reference) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn all_ones_matrix() {
        let m = PairwiseMatrix::new(labels(4), vec![vec![1.0; 4]; 4]).unwrap();
        for method in [WeightMethod::ColumnMean, WeightMethod::Eigenvector] {
            let w = derive_weights(&m, method).unwrap();
            assert!(w.as_slice().iter().all(|x| (x - 0.25).abs() < 1e-15));
            assert!((lambda_max(&m, &w).unwrap() - 4.0).abs() < 1e-12);
            let r = consistency(&m, &w).unwrap();
            assert!(r.ci.abs() < 1e-12 && r.cr.abs() < 1e-12 && r.consistent);
        }
    }

    #[test]
    fn two_by_two() {
        let m = PairwiseMatrix::new(labels(2), vec![vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]]).unwrap();
        for method in [WeightMethod::ColumnMean, WeightMethod::Eigenvector] {
            let w = derive_weights(&m, method).unwrap();
            assert!((w.as_slice()[0] - 0.75).abs() < 1e-12);
            assert!((w.as_slice()[1] - 0.25).abs() < 1e-12);
        }
        let w = WeightVector::new(vec![0.75, 0.25]).unwrap();
        assert!((lambda_max(&m, &w).unwrap() - 2.0).abs() < 1e-15);
        let r = consistency(&m, &w).unwrap();
        assert_eq!((r.ri, r.cr), (0.0, 0.0));
        assert!(r.consistent);
    }

    #[test]
    fn cyclic_matrix_is_inconsistent() {
        let m = cyclic();
        let w = derive_weights(&m, WeightMethod::ColumnMean).unwrap();
        assert!(w.as_slice().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
        let r = consistency(&m, &w).unwrap();
        // every column sums to 1 + 9 + 1/9 = 91/9, which is also lambda
        assert!((r.lambda_max - 91.0 / 9.0).abs() < 1e-12);
        assert!((r.ci - 3.56).abs() < 0.005);
        assert!((r.cr - 6.13).abs() < 0.005);
        assert!(!r.consistent);
    }

    #[test]
    fn single_item() {
        let m = PairwiseMatrix::new(labels(1), vec![vec![1.0]]).unwrap();
        let w = derive_weights(&m, WeightMethod::ColumnMean).unwrap();
        let r = consistency(&m, &w).unwrap();
        assert_eq!((r.ci, r.cr, r.consistent), (0.0, 0.0, true));
    }

    #[test]
    fn matrix_validation() {
        let err = PairwiseMatrix::new(labels(2), vec![vec![1.0, 2.0], vec![0.4, 1.0]]).unwrap_err();
        assert!(matches!(err, AhpError::NotReciprocal { row: 0, col: 1, .. }));
        assert!(err.to_string().contains("[0][1]"));
        assert!(matches!(
            PairwiseMatrix::new(labels(2), vec![vec![1.0, -2.0], vec![-0.5, 1.0]]),
            Err(AhpError::NonPositive { .. })
        ));
        assert!(matches!(
            PairwiseMatrix::new(labels(2), vec![vec![2.0, 1.0], vec![1.0, 1.0]]),
            Err(AhpError::Diagonal { index: 0, .. })
        ));
        assert!(matches!(
            PairwiseMatrix::new(labels(2), vec![vec![1.0], vec![1.0, 1.0]]),
            Err(AhpError::NotSquare { .. })
        ));
        assert!(matches!(PairwiseMatrix::new(labels(3), vec![vec![1.0]]), Err(AhpError::LabelCount { .. })));
    }

    #[test]
    fn oversized_matrix_has_no_random_index() {
        let m = PairwiseMatrix::new(labels(12), vec![vec![1.0; 12]; 12]).unwrap();
        let w = derive_weights(&m, WeightMethod::ColumnMean).unwrap();
        assert_eq!(consistency(&m, &w), Err(AhpError::NoRandomIndex(12)));
    }

    #[test]
    fn zero_weight_rejected() {
        let m = PairwiseMatrix::new(labels(2), vec![vec![1.0; 2]; 2]).unwrap();
        let w = WeightVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(lambda_max(&m, &w), Err(AhpError::ZeroWeight { index: 1 }));
    }

    #[test]
    fn fraction_entries() {
        let text = r#"{"labels": ["a", "b"], "entries": [[1, "3"], ["1/3", 1.0]]}"#;
        let m = PairwiseMatrix::from_json(text).unwrap();
        assert_eq!(m.get(1, 0), 1.0 / 3.0);
        assert_eq!(parse_entry(" 2 / 5 ").unwrap(), 0.4);
        assert!(parse_entry("1/0").is_err());
        assert!(parse_entry("x").is_err());
        let back = PairwiseMatrix::from_json(&canonical_matrix().to_json()).unwrap();
        assert_eq!(back, canonical_matrix());
    }
}
