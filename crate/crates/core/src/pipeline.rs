//! End-to-end orchestration: from raw bids, abstracts, and publications to
//! both correlation tracks, the cluster term tables, and a deterministic
//! output directory.
//!
//! Track 1 relates submissions by bid behavior and by abstract term
//! weights; track 2 relates referees by bid behavior and by their
//! co-authorship rank. Everything is computed twice, once as-is and once
//! with the no-variation ("fatigue") referees removed, and both variants
//! land in the report.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bid::{
    fatigue_referees, filter_bids, referee_similarity, submission_similarity, transform_bids,
    BidMatrix, FilterReport, RawBidMatrix, UndefinedPairReport,
};
use crate::cluster::{build_dendrogram, cut_dendrogram, ClusterSet, Dendrogram, Linkage};
use crate::error::{Error, Result};
use crate::graph::{build_graph, CoauthorGraph, PublicationRecord};
use crate::io::{self, CorpusRecord};
use crate::matrix::LabeledMatrix;
use crate::matrix::SimilarityMatrix;
use crate::rank::{referee_rank_matrix, RankConfig, RelativeRankMatrix};
use crate::stats::{
    correlate_matrices, correlate_term_vectors, CorrelationResult, CorrelationTable, FlattenMode,
};
use crate::text::{
    cluster_frequencies, cosine_similarity_matrix, document_tfidf, entropy, preprocess,
    tfidf, top_k_normalize, FrequencyVector, StemmedDocument, StopwordSet, TermDictionary,
    TopTerms, WeightVector, ZeroNormReport,
};

/// Analysis parameters, all echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub linkage: Linkage,
    /// Dendrogram cut height; `None` picks the widest-gap height.
    pub threshold: Option<f64>,
    pub top_k: usize,
    pub rank: RankConfig,
    pub flatten_mode: FlattenMode,
    /// When set, the artifact files come from the fatigue-excluded variant.
    pub exclude_fatigue: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            linkage: Linkage::Average,
            threshold: None,
            top_k: 10,
            rank: RankConfig::default(),
            flatten_mode: FlattenMode::Full,
            exclude_fatigue: false,
        }
    }
}

/// Everything the pipeline consumes.
#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub raw_bids: RawBidMatrix,
    pub corpus: Vec<CorpusRecord>,
    pub publications: Vec<PublicationRecord>,
    pub stopwords: StopwordSet,
}

fn stage<T>(name: &'static str, result: Result<T>) -> Result<T> {
    result.map_err(|e| Error::Pipeline { stage: name, source: Box::new(e) })
}

/// All artifacts of one pipeline variant.
#[derive(Debug, Clone)]
pub struct Variant {
    pub filtered: BidMatrix,
    pub filter_report: FilterReport,
    pub s_b: SimilarityMatrix,
    pub s_b_warnings: UndefinedPairReport,
    pub documents: Vec<StemmedDocument>,
    pub dictionary: TermDictionary,
    pub t_matrix: LabeledMatrix,
    pub s_t: SimilarityMatrix,
    pub s_t_warnings: ZeroNormReport,
    pub track1: CorrelationResult,
    pub dendrogram: Dendrogram,
    pub threshold_used: f64,
    pub clusters: ClusterSet,
    pub cluster_frequencies: Vec<FrequencyVector>,
    pub cluster_weights: Vec<WeightVector>,
    pub top_terms: Vec<TopTerms>,
    pub entropies: Vec<f64>,
    pub cluster_corr: CorrelationTable,
    pub r_b: SimilarityMatrix,
    pub r_b_warnings: UndefinedPairReport,
    pub r_g: RelativeRankMatrix,
    pub track2: CorrelationResult,
}

/// Referees in the bid matrix that never appear in the publication corpus;
/// they cannot be ranked and are excluded from the analysis.
pub fn referees_outside_corpus(bids_cols: &[String], graph: &CoauthorGraph) -> BTreeSet<String> {
    bids_cols
        .iter()
        .filter(|id| !graph.contains(id))
        .cloned()
        .collect()
}

/// Run one variant over an already-transformed matrix with a fixed
/// exclusion set.
pub fn compute_variant(
    bids: &BidMatrix,
    corpus: &[CorpusRecord],
    graph: &CoauthorGraph,
    excluded: &BTreeSet<String>,
    stopwords: &StopwordSet,
    params: &PipelineParams,
) -> Result<Variant> {
    let (filtered, filter_report) = stage("filter-bids", filter_bids(bids, excluded))?;

    let (s_b, s_b_warnings) = stage("submission-similarity", submission_similarity(&filtered))?;

    // Corpus restricted to the surviving submissions, in matrix row order.
    let by_id: std::collections::HashMap<&str, &CorpusRecord> =
        corpus.iter().map(|r| (r.id.as_str(), r)).collect();
    let documents = stage(
        "corpus",
        filtered
            .rows()
            .iter()
            .map(|id| {
                by_id
                    .get(id.as_str())
                    .ok_or_else(|| Error::MissingDocument { id: id.clone() })
                    .map(|r| StemmedDocument {
                        id: r.id.clone(),
                        stems: preprocess(&r.abstract_text, stopwords),
                    })
            })
            .collect::<Result<Vec<_>>>(),
    )?;
    let dictionary = TermDictionary::from_documents(&documents);

    let t_matrix = stage("document-tfidf", document_tfidf(&documents, &dictionary))?;
    let (s_t, s_t_warnings) = stage("cosine-similarity", cosine_similarity_matrix(&t_matrix))?;
    let track1 = stage(
        "track1-correlation",
        correlate_matrices(&s_b.to_labeled(), &s_t.to_labeled(), params.flatten_mode),
    )?;

    let dendrogram = stage("cluster", build_dendrogram(&s_b, params.linkage))?;
    let threshold_used = params.threshold.unwrap_or_else(|| dendrogram.gap_threshold());
    let clusters = cut_dendrogram(&dendrogram, threshold_used);

    let cluster_freqs = stage(
        "cluster-terms",
        cluster_frequencies(&documents, &clusters, &dictionary),
    )?;
    let cluster_weights = stage("cluster-terms", tfidf(&cluster_freqs))?;
    let top_terms = stage(
        "cluster-terms",
        cluster_weights
            .iter()
            .map(|w| top_k_normalize(w, &dictionary, params.top_k))
            .collect::<Result<Vec<_>>>(),
    )?;
    let entropies = stage(
        "cluster-entropy",
        top_terms
            .iter()
            .map(|t| entropy(&t.probabilities()))
            .collect::<Result<Vec<_>>>(),
    )?;
    let cluster_corr = stage("cluster-correlation", correlate_term_vectors(&cluster_weights))?;

    let (r_b, r_b_warnings) = stage("referee-similarity", referee_similarity(&filtered))?;
    let r_g = stage(
        "referee-rank",
        referee_rank_matrix(graph, filtered.cols(), &params.rank),
    )?;
    let track2 = stage(
        "track2-correlation",
        correlate_matrices(&r_b.to_labeled(), &r_g.to_labeled(), params.flatten_mode),
    )?;

    Ok(Variant {
        filtered,
        filter_report,
        s_b,
        s_b_warnings,
        documents,
        dictionary,
        t_matrix,
        s_t,
        s_t_warnings,
        track1,
        dendrogram,
        threshold_used,
        clusters,
        cluster_frequencies: cluster_freqs,
        cluster_weights,
        top_terms,
        entropies,
        cluster_corr,
        r_b,
        r_b_warnings,
        r_g,
        track2,
    })
}

/// Both pipeline variants plus what was detected and excluded.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub excluded_referees: BTreeSet<String>,
    pub fatigue_referees: Vec<String>,
    pub base: Variant,
    pub fatigue_excluded: Variant,
}

impl PipelineOutput {
    pub fn primary(&self, params: &PipelineParams) -> &Variant {
        if params.exclude_fatigue {
            &self.fatigue_excluded
        } else {
            &self.base
        }
    }
}

/// Run the full experiment: both tracks, base and fatigue-excluded.
pub fn run(inputs: &PipelineInputs, params: &PipelineParams) -> Result<PipelineOutput> {
    let graph = stage("coauthor-graph", build_graph(&inputs.publications))?;
    let bids = transform_bids(&inputs.raw_bids);
    let excluded = referees_outside_corpus(bids.cols(), &graph);

    let base = compute_variant(
        &bids,
        &inputs.corpus,
        &graph,
        &excluded,
        &inputs.stopwords,
        params,
    )?;

    let fatigue = fatigue_referees(&base.filtered);
    let mut excluded_plus: BTreeSet<String> = excluded.clone();
    excluded_plus.extend(fatigue.iter().cloned());
    let fatigue_excluded = compute_variant(
        &bids,
        &inputs.corpus,
        &graph,
        &excluded_plus,
        &inputs.stopwords,
        params,
    )?;

    Ok(PipelineOutput {
        excluded_referees: excluded,
        fatigue_referees: fatigue,
        base,
        fatigue_excluded,
    })
}

/// Correlation numbers and structural counts of one variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantSummary {
    pub n_submissions: usize,
    pub n_referees: usize,
    pub filter_counts: FilterCounts,
    pub dictionary_size: usize,
    pub threshold_used: f64,
    pub cluster_sizes: Vec<usize>,
    pub entropy: Vec<ClusterEntropy>,
    pub track1: CorrelationResult,
    pub track2: CorrelationResult,
    pub rank: RankSummary,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterCounts {
    pub zero_rows: usize,
    pub zero_cols: usize,
    pub excluded_cols: usize,
    pub rows_after_exclusion: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterEntropy {
    pub cluster: String,
    pub entropy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankSummary {
    pub alpha: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
}

impl VariantSummary {
    pub fn from_variant(v: &Variant) -> Self {
        let (zero_rows, zero_cols, excluded_cols, rows_after_exclusion) = v.filter_report.counts();
        let mut warnings = Vec::new();
        if !v.s_b_warnings.is_empty() {
            warnings.push(format!(
                "{} submission pairs had no comparable bids; similarity set to 0",
                v.s_b_warnings.pairs.len()
            ));
        }
        if !v.r_b_warnings.is_empty() {
            warnings.push(format!(
                "{} referee pairs had no comparable bids; similarity set to 0",
                v.r_b_warnings.pairs.len()
            ));
        }
        if !v.s_t_warnings.is_empty() {
            warnings.push(format!(
                "{} documents had empty term vectors: {}",
                v.s_t_warnings.rows.len(),
                v.s_t_warnings.rows.join(", ")
            ));
        }
        if !v.cluster_corr.undefined_pairs.is_empty() {
            warnings.push(format!(
                "{} cluster pairs had undefined term correlations",
                v.cluster_corr.undefined_pairs.len()
            ));
        }
        if !v.r_g.all_converged() {
            warnings.push("some rank rows did not converge".into());
        }
        VariantSummary {
            n_submissions: v.filtered.rows().len(),
            n_referees: v.filtered.cols().len(),
            filter_counts: FilterCounts { zero_rows, zero_cols, excluded_cols, rows_after_exclusion },
            dictionary_size: v.dictionary.len(),
            threshold_used: v.threshold_used,
            cluster_sizes: v.clusters.clusters.iter().map(|c| c.len()).collect(),
            entropy: v
                .cluster_weights
                .iter()
                .zip(&v.entropies)
                .map(|(w, &e)| ClusterEntropy { cluster: w.owner.clone(), entropy: e })
                .collect(),
            track1: v.track1.clone(),
            track2: v.track2.clone(),
            rank: RankSummary {
                alpha: v.r_g.config.restart_probability,
                tolerance: v.r_g.config.tolerance,
                max_iterations: v.r_g.config.max_iterations,
                iterations: v.r_g.iterations.clone(),
                converged: v.r_g.converged.clone(),
            },
            warnings,
        }
    }
}

/// The full run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub parameters: PipelineParams,
    pub inputs: serde_json::Value,
    pub excluded_referees: Vec<String>,
    pub fatigue_referees: Vec<String>,
    pub base: VariantSummary,
    pub fatigue_excluded: VariantSummary,
}

impl Report {
    pub fn new(output: &PipelineOutput, params: &PipelineParams, inputs: serde_json::Value) -> Self {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: params.clone(),
            inputs,
            excluded_referees: output.excluded_referees.iter().cloned().collect(),
            fatigue_referees: output.fatigue_referees.clone(),
            base: VariantSummary::from_variant(&output.base),
            fatigue_excluded: VariantSummary::from_variant(&output.fatigue_excluded),
        }
    }
}

/// Table-shaped CSV of the top terms per cluster: one row per rank.
pub fn terms_table_csv(top_terms: &[TopTerms], top_k: usize) -> String {
    let mut out = String::from("rank");
    for t in top_terms {
        out.push(',');
        out.push_str(&t.owner);
    }
    out.push('\n');
    for rank in 0..top_k {
        out.push_str(&format!("{}", rank + 1));
        for t in top_terms {
            out.push(',');
            if let Some((term, _)) = t.entries.get(rank) {
                out.push_str(term);
            }
        }
        out.push('\n');
    }
    out
}

pub fn entropy_table_csv(summaries: &[(String, f64)]) -> String {
    let mut out = String::from("cluster,entropy\n");
    for (cluster, h) in summaries {
        out.push_str(&format!("{cluster},{h}\n"));
    }
    out
}

pub fn cluster_corr_csv(table: &CorrelationTable) -> String {
    let mut out = String::from("id");
    for label in &table.labels {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (label, row) in table.labels.iter().zip(&table.values) {
        out.push_str(label);
        for &v in row {
            out.push(',');
            if v.is_nan() {
                out.push_str("NA");
            } else {
                out.push_str(&format!("{v}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Cluster-index to member-list JSON.
pub fn clusters_json(clusters: &ClusterSet) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (k, members) in clusters.clusters.iter().enumerate() {
        map.insert(
            k.to_string(),
            serde_json::Value::Array(
                members
                    .iter()
                    .map(|m| serde_json::Value::String(m.clone()))
                    .collect(),
            ),
        );
    }
    serde_json::json!({
        "threshold": clusters.threshold,
        "clusters": serde_json::Value::Object(map),
    })
}

/// Write the fixed-name artifact files for the primary variant plus the
/// report covering both variants.
pub fn write_outputs(
    dir: &Path,
    output: &PipelineOutput,
    params: &PipelineParams,
    report: &Report,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let v = output.primary(params);

    io::write_matrix_csv(&dir.join("s_b.csv"), &v.s_b.to_labeled())?;
    io::write_matrix_csv(&dir.join("s_t.csv"), &v.s_t.to_labeled())?;
    io::write_matrix_csv(&dir.join("r_b.csv"), &v.r_b.to_labeled())?;
    io::write_matrix_csv(&dir.join("r_g.csv"), &v.r_g.to_labeled())?;
    io::write_text(&dir.join("dendrogram.newick"), &format!("{}\n", v.dendrogram.to_newick()))?;
    io::write_json(&dir.join("dendrogram.json"), &v.dendrogram)?;
    io::write_json(&dir.join("clusters.json"), &clusters_json(&v.clusters))?;
    io::write_text(&dir.join("terms.csv"), &terms_table_csv(&v.top_terms, params.top_k))?;
    let entropy_rows: Vec<(String, f64)> = v
        .cluster_weights
        .iter()
        .zip(&v.entropies)
        .map(|(w, &e)| (w.owner.clone(), e))
        .collect();
    io::write_text(&dir.join("entropy.csv"), &entropy_table_csv(&entropy_rows))?;
    io::write_text(&dir.join("cluster_corr.csv"), &cluster_corr_csv(&v.cluster_corr))?;
    io::write_json(&dir.join("report.json"), report)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    fn small_inputs() -> PipelineInputs {
        let data = generate(&SynthConfig {
            n_submissions: 40,
            n_referees: 20,
            n_topics: 4,
            n_fatigue_referees: 3,
            ..Default::default()
        })
        .unwrap();
        PipelineInputs {
            raw_bids: data.raw_bids,
            corpus: data.corpus,
            publications: data.publications,
            stopwords: StopwordSet::english().clone(),
        }
    }

    #[test]
    fn pipeline_runs_end_to_end_on_synthetic_data() {
        let inputs = small_inputs();
        let params = PipelineParams::default();
        let output = run(&inputs, &params).unwrap();
        assert_eq!(output.fatigue_referees.len(), 3);
        assert!(output.base.track1.r.is_finite());
        assert!(output.base.track2.r.is_finite());
        // Fatigue variant analyzed fewer referees.
        assert_eq!(
            output.fatigue_excluded.filtered.cols().len(),
            output.base.filtered.cols().len() - 3
        );
        let report = Report::new(&output, &params, serde_json::json!({"synthetic": true}));
        assert_eq!(report.base.n_referees, output.base.filtered.cols().len());
    }

    #[test]
    fn outputs_have_fixed_filenames() {
        let inputs = small_inputs();
        let params = PipelineParams::default();
        let output = run(&inputs, &params).unwrap();
        let report = Report::new(&output, &params, serde_json::Value::Null);
        let dir = tempfile::tempdir().unwrap();
        write_outputs(dir.path(), &output, &params, &report).unwrap();
        for name in [
            "s_b.csv",
            "s_t.csv",
            "r_b.csv",
            "r_g.csv",
            "dendrogram.newick",
            "dendrogram.json",
            "clusters.json",
            "terms.csv",
            "entropy.csv",
            "cluster_corr.csv",
            "report.json",
        ] {
            assert!(dir.path().join(name).exists(), "missing {name}");
        }
        let report_text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        assert!(report_text.contains("fatigue_excluded"));
    }

    #[test]
    fn missing_abstract_aborts_with_stage_name() {
        let mut inputs = small_inputs();
        inputs.corpus.remove(0);
        let err = run(&inputs, &PipelineParams::default()).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("corpus"), "{text}");
    }
}
