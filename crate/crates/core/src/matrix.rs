//! Labeled real matrices and the symmetric similarity matrix used across the
//! pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense real matrix with row and column labels.
///
/// This is the common currency for CSV import/export and for correlating
/// matrices that are not necessarily symmetric (e.g. rank matrices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl LabeledMatrix {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != row_labels.len() {
            return Err(Error::ShapeMismatch {
                detail: format!("{} rows of values for {} row labels", values.len(), row_labels.len()),
            });
        }
        for (label, row) in row_labels.iter().zip(&values) {
            if row.len() != col_labels.len() {
                return Err(Error::ShapeMismatch {
                    detail: format!(
                        "row '{}' has {} values for {} column labels",
                        label,
                        row.len(),
                        col_labels.len()
                    ),
                });
            }
        }
        Ok(LabeledMatrix { row_labels, col_labels, values })
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn is_square(&self) -> bool {
        self.row_labels == self.col_labels
    }
}

/// A symmetric similarity matrix with unit diagonal and entries in [0, 1].
///
/// Symmetry is exact (the value of each unordered pair is stored to both
/// cells), the diagonal is exactly 1.0, and construction validates all
/// invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        {
            let mut seen = std::collections::HashSet::new();
            for label in &labels {
                if !seen.insert(label) {
                    return Err(Error::DuplicateId { kind: "similarity label", id: label.clone() });
                }
            }
        }
        if values.len() != n {
            return Err(Error::InvalidSimilarity {
                detail: format!("{} rows for {} labels", values.len(), n),
            });
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSimilarity {
                    detail: format!("row {} has {} entries for {} labels", i, row.len(), n),
                });
            }
        }
        for i in 0..n {
            if values[i][i] != 1.0 {
                return Err(Error::InvalidSimilarity {
                    detail: format!("diagonal entry {} is {}, expected 1.0", i, values[i][i]),
                });
            }
            for j in 0..n {
                let v = values[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidSimilarity {
                        detail: format!("entry ({i}, {j}) = {v} outside [0, 1]"),
                    });
                }
                if values[i][j] != values[j][i] {
                    return Err(Error::InvalidSimilarity {
                        detail: format!("asymmetry at ({i}, {j}): {} vs {}", values[i][j], values[j][i]),
                    });
                }
            }
        }
        Ok(SimilarityMatrix { labels, values })
    }

    /// Build a symmetric matrix by evaluating `f` once per unordered pair
    /// (i < j). The diagonal is fixed at 1.0.
    pub fn from_pairwise<F>(labels: Vec<String>, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let n = labels.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            values[i][i] = 1.0;
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i][j] = v;
                values[j][i] = v;
            }
        }
        SimilarityMatrix::new(labels, values)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn to_labeled(&self) -> LabeledMatrix {
        LabeledMatrix {
            row_labels: self.labels.clone(),
            col_labels: self.labels.clone(),
            values: self.values.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetry() {
        let err = SimilarityMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.5], vec![0.4, 1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSimilarity { .. }));
    }

    #[test]
    fn rejects_bad_diagonal() {
        let err = SimilarityMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.9, 0.5], vec![0.5, 1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSimilarity { .. }));
    }

    #[test]
    fn rejects_out_of_range() {
        let err = SimilarityMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 1.5], vec![1.5, 1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSimilarity { .. }));
    }

    #[test]
    fn pairwise_builder_is_exactly_symmetric() {
        let m = SimilarityMatrix::from_pairwise(
            (0..5).map(|i| format!("e{i}")).collect(),
            |i, j| 1.0 / (1.0 + (i + j) as f64),
        )
        .unwrap();
        for i in 0..5 {
            assert_eq!(m.get(i, i), 1.0);
            for j in 0..5 {
                assert_eq!(m.get(i, j).to_bits(), m.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn labeled_matrix_shape_checked() {
        let err = LabeledMatrix::new(
            vec!["a".into()],
            vec!["x".into(), "y".into()],
            vec![vec![1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }
}
