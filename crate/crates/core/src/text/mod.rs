//! Abstract text processing: tokenization, stopword removal, suffix
//! stripping, term dictionaries, group and per-document term weighting,
//! top-k normalization, entropy, and cosine similarity.

pub mod porter;
pub mod stopwords;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterSet;
use crate::error::{Error, Result};
use crate::matrix::{LabeledMatrix, SimilarityMatrix};

pub use stopwords::StopwordSet;

/// One submission abstract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::EmptyDocument { id });
        }
        Ok(Document { id, text })
    }
}

/// A document reduced to its stem sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemmedDocument {
    pub id: String,
    pub stems: Vec<String>,
}

/// Lowercase, split on non-alphanumeric characters, drop one-character
/// tokens and stopwords, then stem.
pub fn preprocess(text: &str, stopwords: &StopwordSet) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|token| token.chars().nth(1).is_some())
        .filter(|token| !stopwords.contains(token))
        .map(porter::stem)
        .collect()
}

/// Preprocess a whole corpus, keeping document ids.
pub fn preprocess_corpus(docs: &[Document], stopwords: &StopwordSet) -> Vec<StemmedDocument> {
    docs.iter()
        .map(|d| StemmedDocument {
            id: d.id.clone(),
            stems: preprocess(&d.text, stopwords),
        })
        .collect()
}

/// The sorted set of unique stems over a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDictionary {
    terms: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TermDictionary {
    pub fn from_documents(docs: &[StemmedDocument]) -> Self {
        let mut terms: Vec<String> = docs
            .iter()
            .flat_map(|d| d.stems.iter().cloned())
            .collect();
        terms.sort();
        terms.dedup();
        Self::from_sorted(terms)
    }

    fn from_sorted(terms: Vec<String>) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        TermDictionary { terms, index }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

/// Term counts for one group (a cluster or a document), aligned to a
/// dictionary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub owner: String,
    pub counts: Vec<u64>,
}

impl FrequencyVector {
    /// Total number of counted term occurrences, n(i).
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// TFIDF weights for one group, aligned to a dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub owner: String,
    pub weights: Vec<f64>,
}

fn count_into(counts: &mut [u64], stems: &[String], dict: &TermDictionary) {
    for stem in stems {
        if let Some(idx) = dict.index_of(stem) {
            counts[idx] += 1;
        }
    }
}

/// Sum term counts per cluster. Every cluster member must have a document
/// and every document must sit in exactly one cluster.
pub fn cluster_frequencies(
    docs: &[StemmedDocument],
    clusters: &ClusterSet,
    dict: &TermDictionary,
) -> Result<Vec<FrequencyVector>> {
    let by_id: HashMap<&str, &StemmedDocument> =
        docs.iter().map(|d| (d.id.as_str(), d)).collect();
    for doc in docs {
        if clusters.cluster_of(&doc.id).is_none() {
            return Err(Error::DocumentNotClustered { id: doc.id.clone() });
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    for (k, members) in clusters.clusters.iter().enumerate() {
        let mut counts = vec![0u64; dict.len()];
        for member in members {
            let doc = by_id
                .get(member.as_str())
                .ok_or_else(|| Error::MissingDocument { id: member.clone() })?;
            count_into(&mut counts, &doc.stems, dict);
        }
        out.push(FrequencyVector { owner: format!("C{}", k + 1), counts });
    }
    Ok(out)
}

/// Per-document term counts in corpus order.
pub fn document_frequencies(docs: &[StemmedDocument], dict: &TermDictionary) -> Vec<FrequencyVector> {
    docs.iter()
        .map(|doc| {
            let mut counts = vec![0u64; dict.len()];
            count_into(&mut counts, &doc.stems, dict);
            FrequencyVector { owner: doc.id.clone(), counts }
        })
        .collect()
}

/// Group-level TFIDF: `freq(i,j)/n(i) * log10(N / n_c(j))` where `N` is the
/// number of groups and `n_c(j)` counts the groups in which term `j`
/// occurs. Terms present in every group weigh zero.
pub fn tfidf(freqs: &[FrequencyVector]) -> Result<Vec<WeightVector>> {
    let n_groups = freqs.len() as f64;
    let dim = freqs.first().map(|f| f.counts.len()).unwrap_or(0);
    let mut group_count = vec![0u64; dim];
    for f in freqs {
        for (j, &c) in f.counts.iter().enumerate() {
            if c > 0 {
                group_count[j] += 1;
            }
        }
    }
    let mut out = Vec::with_capacity(freqs.len());
    for f in freqs {
        let n = f.total();
        if n == 0 {
            return Err(Error::EmptyGroup { id: f.owner.clone() });
        }
        let n = n as f64;
        let weights = f
            .counts
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if c == 0 {
                    0.0
                } else {
                    (c as f64 / n) * (n_groups / group_count[j] as f64).log10()
                }
            })
            .collect();
        out.push(WeightVector { owner: f.owner.clone(), weights });
    }
    Ok(out)
}

/// Document-level TFIDF matrix: every document is its own group, so the
/// inverse factor uses document frequency.
pub fn document_tfidf(docs: &[StemmedDocument], dict: &TermDictionary) -> Result<LabeledMatrix> {
    let freqs = document_frequencies(docs, dict);
    let weights = tfidf(&freqs)?;
    LabeledMatrix::new(
        weights.iter().map(|w| w.owner.clone()).collect(),
        dict.terms().to_vec(),
        weights.into_iter().map(|w| w.weights).collect(),
    )
}

/// The top weighted terms of a group, normalized into a probability
/// distribution (descending weight, ties by term).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopTerms {
    pub owner: String,
    pub entries: Vec<(String, f64)>,
}

impl TopTerms {
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, p)| *p).collect()
    }

    pub fn terms(&self) -> Vec<&str> {
        self.entries.iter().map(|(t, _)| t.as_str()).collect()
    }
}

/// Keep the `k` largest strictly positive weights (all of them when fewer
/// than `k` are positive) and normalize them to sum to one.
pub fn top_k_normalize(w: &WeightVector, dict: &TermDictionary, k: usize) -> Result<TopTerms> {
    let mut positive: Vec<(&str, f64)> = w
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(j, &v)| (dict.terms()[j].as_str(), v))
        .collect();
    if positive.is_empty() {
        return Err(Error::AllZeroWeights { id: w.owner.clone() });
    }
    positive.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
    positive.truncate(k);
    let sum: f64 = positive.iter().map(|(_, v)| v).sum();
    Ok(TopTerms {
        owner: w.owner.clone(),
        entries: positive
            .into_iter()
            .map(|(t, v)| (t.to_string(), v / sum))
            .collect(),
    })
}

/// Shannon entropy (base 2) of a probability vector; `0 log 0` counts as 0.
pub fn entropy(p: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &v in p {
        if v < 0.0 {
            return Err(Error::NotNormalized { detail: format!("negative entry {v}") });
        }
        sum += v;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { detail: format!("entries sum to {sum}") });
    }
    Ok(p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum())
}

/// Rows whose vector had zero norm; their off-diagonal similarities were
/// set to 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroNormReport {
    pub rows: Vec<String>,
}

impl ZeroNormReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Cosine similarity between the rows of a non-negative weight matrix.
pub fn cosine_similarity_matrix(t: &LabeledMatrix) -> Result<(SimilarityMatrix, ZeroNormReport)> {
    for (label, row) in t.row_labels.iter().zip(&t.values) {
        if row.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidConfig {
                detail: format!("negative weight in row '{label}'"),
            });
        }
    }
    let norms: Vec<f64> = t
        .values
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let report = ZeroNormReport {
        rows: t
            .row_labels
            .iter()
            .zip(&norms)
            .filter(|(_, &n)| n == 0.0)
            .map(|(label, _)| label.clone())
            .collect(),
    };
    let values = &t.values;
    let matrix = SimilarityMatrix::from_pairwise(t.row_labels.clone(), |i, j| {
        if norms[i] == 0.0 || norms[j] == 0.0 {
            return 0.0;
        }
        let dot: f64 = values[i].iter().zip(&values[j]).map(|(a, b)| a * b).sum();
        (dot / (norms[i] * norms[j])).min(1.0)
    })?;
    Ok((matrix, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stemmed(pairs: &[(&str, &str)]) -> Vec<StemmedDocument> {
        let sw = StopwordSet::english();
        pairs
            .iter()
            .map(|(id, text)| StemmedDocument {
                id: id.to_string(),
                stems: preprocess(text, sw),
            })
            .collect()
    }

    #[test]
    fn preprocess_stems_and_drops_stopwords() {
        let sw = StopwordSet::english();
        assert_eq!(preprocess("computer computation", sw), vec!["comput", "comput"]);
        assert_eq!(preprocess("the and it", sw), Vec::<String>::new());
        assert_eq!(preprocess("caresses ponies", sw), vec!["caress", "poni"]);
    }

    #[test]
    fn preprocess_splits_on_non_alphanumeric() {
        let sw = StopwordSet::english();
        assert_eq!(preprocess("item-level", sw), vec!["item", "level"]);
        assert_eq!(preprocess("A graph; a node!", sw), vec!["graph", "node"]);
    }

    #[test]
    fn one_character_tokens_are_dropped() {
        let sw = StopwordSet::english();
        assert_eq!(preprocess("x graph q", sw), vec!["graph"]);
    }

    #[test]
    fn dictionary_is_sorted_and_unique() {
        let docs = stemmed(&[("d1", "graph node graph"), ("d2", "node weight")]);
        let dict = TermDictionary::from_documents(&docs);
        assert_eq!(dict.terms(), ["graph", "node", "weight"]);
        assert_eq!(dict.index_of("node"), Some(1));
        assert_eq!(dict.index_of("missing"), None);
    }

    #[test]
    fn cluster_frequencies_single_cluster() {
        let docs = stemmed(&[("d1", "graph graph node")]);
        let dict = TermDictionary::from_documents(&docs);
        let clusters = ClusterSet { threshold: 0.0, clusters: vec![vec!["d1".into()]] };
        let freqs = cluster_frequencies(&docs, &clusters, &dict).unwrap();
        assert_eq!(freqs[0].counts, vec![2, 1]);
        assert_eq!(freqs[0].total(), 3);
    }

    #[test]
    fn cluster_frequencies_reject_unclustered_doc() {
        let docs = stemmed(&[("d1", "graph"), ("d2", "node")]);
        let dict = TermDictionary::from_documents(&docs);
        let clusters = ClusterSet { threshold: 0.0, clusters: vec![vec!["d1".into()]] };
        assert!(matches!(
            cluster_frequencies(&docs, &clusters, &dict),
            Err(Error::DocumentNotClustered { .. })
        ));
    }

    #[test]
    fn cluster_frequencies_reject_missing_document() {
        let docs = stemmed(&[("d1", "graph")]);
        let dict = TermDictionary::from_documents(&docs);
        let clusters = ClusterSet {
            threshold: 0.0,
            clusters: vec![vec!["d1".into(), "ghost".into()]],
        };
        assert!(matches!(
            cluster_frequencies(&docs, &clusters, &dict),
            Err(Error::MissingDocument { .. })
        ));
    }

    #[test]
    fn tfidf_zeroes_terms_present_everywhere() {
        // Three groups over four terms; the first and third terms occur in
        // every group and must weigh zero everywhere.
        let freqs = vec![
            FrequencyVector { owner: "C3".into(), counts: vec![3, 7, 3, 1] },
            FrequencyVector { owner: "C4".into(), counts: vec![4, 3, 2, 0] },
            FrequencyVector { owner: "C5".into(), counts: vec![1, 0, 1, 0] },
        ];
        let w = tfidf(&freqs).unwrap();
        for row in &w {
            assert_eq!(row.weights[0], 0.0);
            assert_eq!(row.weights[2], 0.0);
        }
        assert!(w[0].weights[1] > 0.0);
        assert!(w[0].weights[3] > 0.0);
        assert!(w[1].weights[1] > 0.0);
        assert_eq!(w[1].weights[3], 0.0);
        assert_eq!(w[2].weights[1], 0.0);
        assert_eq!(w[2].weights[3], 0.0);
        // freq 1 of 14 counted terms, appearing in one of three groups.
        let expected_bush = (1.0 / 14.0) * 3.0f64.log10();
        assert!((w[0].weights[3] - expected_bush).abs() < 1e-12);
        assert!((expected_bush - 0.03).abs() < 0.005);
    }

    #[test]
    fn tfidf_two_group_fixture() {
        let freqs = vec![
            FrequencyVector { owner: "A".into(), counts: vec![2, 2] },
            FrequencyVector { owner: "B".into(), counts: vec![0, 5] },
        ];
        let w = tfidf(&freqs).unwrap();
        let expected = (2.0 / 4.0) * 2.0f64.log10();
        assert!((w[0].weights[0] - expected).abs() < 1e-12);
        assert_eq!(w[0].weights[1], 0.0);
        assert_eq!(w[1].weights[0], 0.0);
    }

    #[test]
    fn tfidf_rejects_empty_group() {
        let freqs = vec![
            FrequencyVector { owner: "A".into(), counts: vec![1] },
            FrequencyVector { owner: "B".into(), counts: vec![0] },
        ];
        assert!(matches!(tfidf(&freqs), Err(Error::EmptyGroup { .. })));
    }

    #[test]
    fn document_tfidf_toy_corpus() {
        let docs = stemmed(&[
            ("d1", "graph node graph"),
            ("d2", "graph weight"),
            ("d3", "graph node weight weight"),
        ]);
        let dict = TermDictionary::from_documents(&docs);
        let t = document_tfidf(&docs, &dict).unwrap();
        // graph occurs in all three documents: zero column.
        let g = dict.index_of("graph").unwrap();
        for row in &t.values {
            assert_eq!(row[g], 0.0);
        }
        // node: docs 1 and 3, freq 1 each.
        let node = dict.index_of("node").unwrap();
        let expected_d1 = (1.0 / 3.0) * (3.0f64 / 2.0).log10();
        let expected_d3 = (1.0 / 4.0) * (3.0f64 / 2.0).log10();
        assert!((t.values[0][node] - expected_d1).abs() < 1e-12);
        assert!((t.values[2][node] - expected_d3).abs() < 1e-12);
        assert_eq!(t.values[1][node], 0.0);
        // weight: docs 2 and 3, freqs 1 and 2.
        let wgt = dict.index_of("weight").unwrap();
        let expected_d2 = (1.0 / 2.0) * (3.0f64 / 2.0).log10();
        let expected_d3w = (2.0 / 4.0) * (3.0f64 / 2.0).log10();
        assert!((t.values[1][wgt] - expected_d2).abs() < 1e-12);
        assert!((t.values[2][wgt] - expected_d3w).abs() < 1e-12);
    }

    fn dict_of(terms: &[&str]) -> TermDictionary {
        TermDictionary::from_sorted(terms.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn top_k_uniform_weights() {
        let dict = dict_of(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        let w = WeightVector { owner: "C1".into(), weights: vec![0.05; 10] };
        let top = top_k_normalize(&w, &dict, 10).unwrap();
        assert_eq!(top.entries.len(), 10);
        for (_, p) in &top.entries {
            assert!((p - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn top_k_two_of_two() {
        let dict = dict_of(&["a", "b"]);
        let w = WeightVector { owner: "C1".into(), weights: vec![0.3, 0.1] };
        let top = top_k_normalize(&w, &dict, 2).unwrap();
        assert_eq!(top.entries[0].0, "a");
        assert!((top.entries[0].1 - 0.75).abs() < 1e-12);
        assert_eq!(top.entries[1].0, "b");
        assert!((top.entries[1].1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn top_k_one_gives_unit_mass() {
        let dict = dict_of(&["a", "b"]);
        let w = WeightVector { owner: "C1".into(), weights: vec![0.3, 0.1] };
        let top = top_k_normalize(&w, &dict, 1).unwrap();
        assert_eq!(top.entries, vec![("a".to_string(), 1.0)]);
    }

    #[test]
    fn top_k_takes_all_positive_when_short() {
        let dict = dict_of(&["a", "b", "c"]);
        let w = WeightVector { owner: "C1".into(), weights: vec![0.3, 0.0, 0.1] };
        let top = top_k_normalize(&w, &dict, 10).unwrap();
        assert_eq!(top.entries.len(), 2);
    }

    #[test]
    fn top_k_rejects_all_zero() {
        let dict = dict_of(&["a"]);
        let w = WeightVector { owner: "C1".into(), weights: vec![0.0] };
        assert!(matches!(
            top_k_normalize(&w, &dict, 10),
            Err(Error::AllZeroWeights { .. })
        ));
    }

    #[test]
    fn top_k_breaks_ties_by_term() {
        let dict = dict_of(&["zeta", "alpha", "mid"]);
        let w = WeightVector { owner: "C1".into(), weights: vec![0.2, 0.2, 0.2] };
        let top = top_k_normalize(&w, &dict, 2).unwrap();
        assert_eq!(top.terms(), vec!["alpha", "mid"]);
    }

    #[test]
    fn entropy_uniform_and_degenerate() {
        let uniform = vec![0.1; 10];
        assert!((entropy(&uniform).unwrap() - 10.0f64.log2()).abs() < 1e-12);
        let mut degenerate = vec![0.0; 10];
        degenerate[0] = 1.0;
        assert_eq!(entropy(&degenerate).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        assert!(matches!(entropy(&[0.5, 0.4]), Err(Error::NotNormalized { .. })));
        assert!(matches!(entropy(&[1.5, -0.5]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn cosine_identical_disjoint_and_hand_computed() {
        let t = LabeledMatrix::new(
            vec!["d1".into(), "d2".into(), "d3".into(), "d4".into()],
            vec!["t1".into(), "t2".into(), "t3".into()],
            vec![
                vec![1.0, 2.0, 0.0],
                vec![2.0, 4.0, 0.0],
                vec![0.0, 0.0, 3.0],
                vec![2.0, 1.0, 0.0],
            ],
        )
        .unwrap();
        let (s, report) = cosine_similarity_matrix(&t).unwrap();
        assert!(report.is_empty());
        assert!((s.get(0, 1) - 1.0).abs() < 1e-12); // parallel rows
        assert_eq!(s.get(0, 2), 0.0); // disjoint support
        assert!((s.get(0, 3) - 0.8).abs() < 1e-12); // (1,2,0) vs (2,1,0)
    }

    #[test]
    fn cosine_flags_zero_norm_rows() {
        let t = LabeledMatrix::new(
            vec!["d1".into(), "d2".into()],
            vec!["t1".into()],
            vec![vec![0.0], vec![2.0]],
        )
        .unwrap();
        let (s, report) = cosine_similarity_matrix(&t).unwrap();
        assert_eq!(report.rows, vec!["d1".to_string()]);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(0, 1), 0.0);
    }
}
