//! Bid matrices: the raw five-code table collected from referees, its
//! three-code reduction, filtering rules, and wildcard-aware Hamming
//! similarity over rows (submissions) and columns (referees).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;

/// Raw bid codes: 0 = no bid, 1 = expert and wants to review, 2 = expert,
/// 3 = not an expert, 4 = conflict of interest.
pub const RAW_CODES: std::ops::RangeInclusive<u8> = 0..=4;

/// Reduced bid codes after [`transform_bids`].
pub const WILDCARD: u8 = 0;
pub const EXPERT: u8 = 1;
pub const NOT_EXPERT: u8 = 2;

fn check_unique(kind: &'static str, ids: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId { kind, id: id.clone() });
        }
    }
    Ok(())
}

/// Submission-by-referee table of raw bid codes in `0..=4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawBidMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    cells: Vec<Vec<u8>>,
}

impl RawBidMatrix {
    /// Validates uniqueness of ids, the row/column shape, and that every
    /// cell is a legal raw code.
    pub fn new(rows: Vec<String>, cols: Vec<String>, cells: Vec<Vec<i64>>) -> Result<Self> {
        check_unique("submission", &rows)?;
        check_unique("referee", &cols)?;
        if cells.len() != rows.len() {
            return Err(Error::ShapeMismatch {
                detail: format!("{} cell rows for {} submissions", cells.len(), rows.len()),
            });
        }
        let mut out = Vec::with_capacity(cells.len());
        for (row_id, row) in rows.iter().zip(&cells) {
            if row.len() != cols.len() {
                return Err(Error::ShapeMismatch {
                    detail: format!("row '{}' has {} cells for {} referees", row_id, row.len(), cols.len()),
                });
            }
            let mut checked = Vec::with_capacity(row.len());
            for (col_id, &code) in cols.iter().zip(row) {
                if !(0..=4).contains(&code) {
                    return Err(Error::InvalidBidCode {
                        row: row_id.clone(),
                        col: col_id.clone(),
                        code,
                    });
                }
                checked.push(code as u8);
            }
            out.push(checked);
        }
        Ok(RawBidMatrix { rows, cols, cells: out })
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn cells(&self) -> &[Vec<u8>] {
        &self.cells
    }
}

/// Submission-by-referee table of reduced codes: 0 wildcard, 1 expert,
/// 2 not expert.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BidMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    cells: Vec<Vec<u8>>,
}

impl BidMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<String>, cells: Vec<Vec<u8>>) -> Result<Self> {
        check_unique("submission", &rows)?;
        check_unique("referee", &cols)?;
        if cells.len() != rows.len() {
            return Err(Error::ShapeMismatch {
                detail: format!("{} cell rows for {} submissions", cells.len(), rows.len()),
            });
        }
        for (row_id, row) in rows.iter().zip(&cells) {
            if row.len() != cols.len() {
                return Err(Error::ShapeMismatch {
                    detail: format!("row '{}' has {} cells for {} referees", row_id, row.len(), cols.len()),
                });
            }
            for (col_id, &code) in cols.iter().zip(row) {
                if code > 2 {
                    return Err(Error::InvalidBidCode {
                        row: row_id.clone(),
                        col: col_id.clone(),
                        code: code as i64,
                    });
                }
            }
        }
        Ok(BidMatrix { rows, cols, cells })
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn cells(&self) -> &[Vec<u8>] {
        &self.cells
    }

    pub fn row_vector(&self, i: usize) -> &[u8] {
        &self.cells[i]
    }

    pub fn col_vector(&self, j: usize) -> Vec<u8> {
        self.cells.iter().map(|row| row[j]).collect()
    }

    /// Transposed copy: referees become rows, submissions become columns.
    pub fn transposed(&self) -> BidMatrix {
        let cells = (0..self.cols.len()).map(|j| self.col_vector(j)).collect();
        BidMatrix {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            cells,
        }
    }
}

/// Reduce raw codes to wildcard/expert/not-expert: 0 and 4 become wildcards,
/// 1 and 2 both mean expert, 3 means not expert. Shape and labels are kept.
pub fn transform_bids(raw: &RawBidMatrix) -> BidMatrix {
    let cells = raw
        .cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|&code| match code {
                    0 | 4 => WILDCARD,
                    1 | 2 => EXPERT,
                    3 => NOT_EXPERT,
                    _ => unreachable!("RawBidMatrix validates codes"),
                })
                .collect()
        })
        .collect();
    BidMatrix {
        rows: raw.rows.clone(),
        cols: raw.cols.clone(),
        cells,
    }
}

/// What [`filter_bids`] removed, by class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub zero_rows_removed: Vec<String>,
    pub zero_cols_removed: Vec<String>,
    pub excluded_cols_removed: Vec<String>,
    pub rows_removed_after_exclusion: Vec<String>,
}

impl FilterReport {
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (
            self.zero_rows_removed.len(),
            self.zero_cols_removed.len(),
            self.excluded_cols_removed.len(),
            self.rows_removed_after_exclusion.len(),
        )
    }
}

/// Drop all-wildcard rows, then all-wildcard columns, then the explicitly
/// excluded columns, then re-drop any rows left with wildcards only. The
/// order is fixed so that runs are reproducible.
pub fn filter_bids(
    bids: &BidMatrix,
    excluded_referees: &std::collections::BTreeSet<String>,
) -> Result<(BidMatrix, FilterReport)> {
    let mut report = FilterReport::default();

    let row_is_zero = |row: &[u8]| row.iter().all(|&c| c == WILDCARD);

    let mut rows: Vec<usize> = Vec::new();
    for (i, id) in bids.rows.iter().enumerate() {
        if row_is_zero(&bids.cells[i]) {
            report.zero_rows_removed.push(id.clone());
        } else {
            rows.push(i);
        }
    }

    let mut cols: Vec<usize> = Vec::new();
    for (j, id) in bids.cols.iter().enumerate() {
        if rows.iter().all(|&i| bids.cells[i][j] == WILDCARD) {
            report.zero_cols_removed.push(id.clone());
        } else if excluded_referees.contains(id) {
            report.excluded_cols_removed.push(id.clone());
        } else {
            cols.push(j);
        }
    }

    let mut kept_rows: Vec<usize> = Vec::new();
    for &i in &rows {
        if cols.iter().all(|&j| bids.cells[i][j] == WILDCARD) {
            report.rows_removed_after_exclusion.push(bids.rows[i].clone());
        } else {
            kept_rows.push(i);
        }
    }

    if kept_rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptyMatrix {
            detail: format!(
                "{} rows and {} columns survive filtering",
                kept_rows.len(),
                cols.len()
            ),
        });
    }

    let out = BidMatrix {
        rows: kept_rows.iter().map(|&i| bids.rows[i].clone()).collect(),
        cols: cols.iter().map(|&j| bids.cols[j].clone()).collect(),
        cells: kept_rows
            .iter()
            .map(|&i| cols.iter().map(|&j| bids.cells[i][j]).collect())
            .collect(),
    };
    Ok((out, report))
}

/// Referees whose every non-wildcard bid is "expert" (and who placed at
/// least one non-wildcard bid): the no-variation columns.
pub fn fatigue_referees(bids: &BidMatrix) -> Vec<String> {
    let mut out = Vec::new();
    for (j, id) in bids.cols.iter().enumerate() {
        let mut any = false;
        let mut all_expert = true;
        for row in &bids.cells {
            match row[j] {
                WILDCARD => {}
                EXPERT => any = true,
                _ => {
                    all_expert = false;
                    break;
                }
            }
        }
        if any && all_expert {
            out.push(id.clone());
        }
    }
    out
}

/// Wildcard-aware Hamming similarity of two equal-length bid vectors.
///
/// Positions where either vector holds a wildcard are skipped and do not
/// count toward the compared length. Returns `None` when every position is
/// skipped (the value is undefined), otherwise `1 - h/l` where `h` is the
/// number of differing positions among the `l` compared ones.
pub fn hamming_similarity(u: &[u8], v: &[u8]) -> Result<Option<f64>> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch { left: u.len(), right: v.len() });
    }
    if u.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut compared = 0u64;
    let mut differing = 0u64;
    for (&a, &b) in u.iter().zip(v) {
        if a == WILDCARD || b == WILDCARD {
            continue;
        }
        compared += 1;
        if a != b {
            differing += 1;
        }
    }
    if compared == 0 {
        return Ok(None);
    }
    Ok(Some(1.0 - differing as f64 / compared as f64))
}

/// Pairs whose similarity was undefined (all positions wildcarded) and was
/// substituted with 0.0 in the output matrix.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedPairReport {
    pub pairs: Vec<(String, String)>,
}

impl UndefinedPairReport {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn pairwise_similarity(ids: &[String], vectors: &[Vec<u8>]) -> Result<(SimilarityMatrix, UndefinedPairReport)> {
    let mut report = UndefinedPairReport::default();
    let n = ids.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        values[i][i] = 1.0;
        for j in (i + 1)..n {
            let v = match hamming_similarity(&vectors[i], &vectors[j])? {
                Some(v) => v,
                None => {
                    report.pairs.push((ids[i].clone(), ids[j].clone()));
                    0.0
                }
            };
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    let matrix = SimilarityMatrix::new(ids.to_vec(), values)?;
    Ok((matrix, report))
}

/// Pairwise similarity of submissions (matrix rows). Undefined pairs are
/// reported and substituted with 0.0; the diagonal is fixed at 1.0.
pub fn submission_similarity(bids: &BidMatrix) -> Result<(SimilarityMatrix, UndefinedPairReport)> {
    pairwise_similarity(&bids.rows, &bids.cells)
}

/// Pairwise similarity of referees (matrix columns), i.e. the row similarity
/// of the transposed matrix.
pub fn referee_similarity(bids: &BidMatrix) -> Result<(SimilarityMatrix, UndefinedPairReport)> {
    let vectors: Vec<Vec<u8>> = (0..bids.cols.len()).map(|j| bids.col_vector(j)).collect();
    pairwise_similarity(&bids.cols, &vectors)
}
