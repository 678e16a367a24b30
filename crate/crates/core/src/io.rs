//! Readers and writers for the toolkit's file formats: bid matrices and
//! labeled real matrices as CSV, corpora and publication records as JSON
//! lines, and pretty-printed JSON for structured outputs.
//!
//! All writers are deterministic: floats use the shortest round-trip
//! decimal form and iteration orders are fixed by the data structures.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bid::{BidMatrix, RawBidMatrix};
use crate::error::{Error, Result};
use crate::graph::PublicationRecord;
use crate::matrix::LabeledMatrix;
use crate::text::Document;

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// One corpus line: submission id, title, abstract, authors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub authors: Vec<String>,
}

impl CorpusRecord {
    pub fn to_document(&self) -> Result<Document> {
        Document::new(self.id.clone(), self.abstract_text.clone())
    }
}

/// Read a bid matrix: first row holds referee ids, first column submission
/// ids, cells integer codes.
pub fn read_bids_csv(path: &Path) -> Result<RawBidMatrix> {
    let file = File::open(path).map_err(|e| Error::io(display(path), e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let mut rows: Vec<String> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    let mut cells: Vec<Vec<i64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(display(path), e.to_string()))?;
        if line == 0 {
            cols = record.iter().skip(1).map(|s| s.trim().to_string()).collect();
            if cols.is_empty() {
                return Err(Error::parse(display(path), "header row has no referee ids"));
            }
            continue;
        }
        let mut fields = record.iter();
        let id = fields
            .next()
            .ok_or_else(|| Error::parse(display(path), format!("row {} is empty", line + 1)))?
            .trim()
            .to_string();
        let mut row = Vec::with_capacity(cols.len());
        for field in fields {
            let value: i64 = field.trim().parse().map_err(|_| {
                Error::parse(
                    display(path),
                    format!("row '{}': cell '{}' is not an integer", id, field),
                )
            })?;
            row.push(value);
        }
        if row.len() != cols.len() {
            return Err(Error::parse(
                display(path),
                format!("row '{}' has {} cells for {} referees", id, row.len(), cols.len()),
            ));
        }
        rows.push(id);
        cells.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(display(path), "no data rows"));
    }
    RawBidMatrix::new(rows, cols, cells)
}

fn write_cells_csv<W: Write, C: std::fmt::Display>(
    writer: W,
    rows: &[String],
    cols: &[String],
    cells: impl Iterator<Item = Vec<C>>,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend(cols.iter().cloned());
    w.write_record(&header)?;
    for (id, row) in rows.iter().zip(cells) {
        let mut record = vec![id.clone()];
        record.extend(row.iter().map(|v| format!("{v}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_raw_bids_csv(path: &Path, bids: &RawBidMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(display(path), e))?;
    write_cells_csv(
        BufWriter::new(file),
        bids.rows(),
        bids.cols(),
        bids.cells().iter().cloned(),
    )
    .map_err(|e| Error::parse(display(path), e.to_string()))
}

pub fn write_bids_csv(path: &Path, bids: &BidMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(display(path), e))?;
    write_cells_csv(
        BufWriter::new(file),
        bids.rows(),
        bids.cols(),
        bids.cells().iter().cloned(),
    )
    .map_err(|e| Error::parse(display(path), e.to_string()))
}

/// Read a labeled real matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<LabeledMatrix> {
    let file = File::open(path).map_err(|e| Error::io(display(path), e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(BufReader::new(file));
    let mut row_labels = Vec::new();
    let mut col_labels: Vec<String> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(display(path), e.to_string()))?;
        if line == 0 {
            col_labels = record.iter().skip(1).map(|s| s.to_string()).collect();
            continue;
        }
        let mut fields = record.iter();
        let id = fields
            .next()
            .ok_or_else(|| Error::parse(display(path), format!("row {} is empty", line + 1)))?
            .to_string();
        let mut row = Vec::with_capacity(col_labels.len());
        for field in fields {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(display(path), format!("row '{}': '{}' is not a number", id, field))
            })?;
            row.push(v);
        }
        row_labels.push(id);
        values.push(row);
    }
    LabeledMatrix::new(row_labels, col_labels, values)
}

pub fn write_matrix_csv(path: &Path, matrix: &LabeledMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(display(path), e))?;
    write_cells_csv(
        BufWriter::new(file),
        &matrix.row_labels,
        &matrix.col_labels,
        matrix.values.iter().cloned(),
    )
    .map_err(|e| Error::parse(display(path), e.to_string()))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(display(path), e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(display(path), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(&line)
            .map_err(|e| Error::parse(display(path), format!("line {}: {}", i + 1, e)))?;
        out.push(value);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(display(path), e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item)
            .map_err(|e| Error::parse(display(path), e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(display(path), e))?;
    }
    w.flush().map_err(|e| Error::io(display(path), e))
}

pub fn read_corpus_jsonl(path: &Path) -> Result<Vec<CorpusRecord>> {
    read_jsonl(path)
}

pub fn write_corpus_jsonl(path: &Path, records: &[CorpusRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_publications_jsonl(path: &Path) -> Result<Vec<PublicationRecord>> {
    read_jsonl(path)
}

pub fn write_publications_jsonl(path: &Path, records: &[PublicationRecord]) -> Result<()> {
    write_jsonl(path, records)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(display(path), e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::parse(display(path), e.to_string()))?;
    writeln!(w).map_err(|e| Error::io(display(path), e))?;
    w.flush().map_err(|e| Error::io(display(path), e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(display(path), e))
}

/// Edge list CSV: author_a, author_b, weight (sorted pairs).
pub fn write_edge_list_csv(path: &Path, graph: &crate::graph::CoauthorGraph) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(display(path), e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["author_a", "author_b", "weight"])
        .map_err(|e| Error::parse(display(path), e.to_string()))?;
    for (a, b, weight) in graph.edges() {
        w.write_record([a, b, &format!("{weight}")])
            .map_err(|e| Error::parse(display(path), e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(display(path), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bid::transform_bids;

    #[test]
    fn bids_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bids.csv");
        let raw = RawBidMatrix::new(
            vec!["13".into(), "14".into()],
            vec!["r1".into(), "r2".into(), "r3".into()],
            vec![vec![1, 2, 4], vec![0, 3, 2]],
        )
        .unwrap();
        write_raw_bids_csv(&path, &raw).unwrap();
        let back = read_bids_csv(&path).unwrap();
        assert_eq!(back, raw);
    }

    #[test]
    fn bids_csv_rejects_junk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bids.csv");
        std::fs::write(&path, "id,r1\ns1,banana\n").unwrap();
        assert!(matches!(read_bids_csv(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_file_error_names_path() {
        let err = read_bids_csv(Path::new("/nonexistent/bids.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/bids.csv"));
    }

    #[test]
    fn matrix_csv_round_trip_preserves_floats() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = LabeledMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 1.0 / 3.0], vec![1.0 / 3.0, 1.0]],
        )
        .unwrap();
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn transformed_bids_write_as_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        let raw = RawBidMatrix::new(
            vec!["s1".into()],
            vec!["r1".into(), "r2".into()],
            vec![vec![4, 1]],
        )
        .unwrap();
        write_bids_csv(&path, &transform_bids(&raw)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "id,r1,r2\ns1,0,1\n");
    }

    #[test]
    fn corpus_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let records = vec![CorpusRecord {
            id: "s1".into(),
            title: "A title".into(),
            abstract_text: "Some abstract text".into(),
            authors: vec!["a1".into()],
        }];
        write_corpus_jsonl(&path, &records).unwrap();
        let back = read_corpus_jsonl(&path).unwrap();
        assert_eq!(back, records);
        let raw = std::fs::read_to_string(&path).unwrap();
        assert!(raw.contains("\"abstract\""));
    }

    #[test]
    fn publications_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pubs.jsonl");
        let records = vec![PublicationRecord {
            id: "p1".into(),
            authors: vec!["x".into(), "y".into()],
        }];
        write_publications_jsonl(&path, &records).unwrap();
        assert_eq!(read_publications_jsonl(&path).unwrap(), records);
    }
}
