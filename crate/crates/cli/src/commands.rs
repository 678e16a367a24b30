//! Implementations behind the CLI subcommands. Each command loads its
//! inputs, calls into the library, writes deterministic artifacts plus a
//! metadata file, and reports warnings through the metadata.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bidlab_core::bid::{
    fatigue_referees, filter_bids, referee_similarity, submission_similarity, transform_bids,
    BidMatrix, FilterReport,
};
use bidlab_core::cluster::{build_dendrogram, cut_dendrogram, ClusterSet, Dendrogram, Linkage};
use bidlab_core::graph::{build_graph, graph_stats, to_dot, CoauthorGraph};
use bidlab_core::io;
use bidlab_core::matrix::{LabeledMatrix, SimilarityMatrix};
use bidlab_core::pipeline::{
    self, clusters_json, entropy_table_csv, referees_outside_corpus, terms_table_csv,
    PipelineInputs, PipelineParams, RankSummary, Report,
};
use bidlab_core::rank::referee_rank_matrix;
use bidlab_core::stats::correlate_matrices;
use bidlab_core::synth::{generate as synth_generate, SynthConfig};
use bidlab_core::text::{
    cluster_frequencies, cosine_similarity_matrix, document_tfidf, entropy as shannon_entropy,
    preprocess, tfidf, top_k_normalize, StemmedDocument, StopwordSet, TermDictionary,
};
use bidlab_core::{Error, FlattenMode, RankConfig, Result};
use serde_json::json;

use crate::meta::{ensure_dir, opt_path_str, path_str, RunMeta};
use crate::{BidInput, ClusterParams, CmdResult, OutDir, RankParams, TextInput};

fn load_stopwords(path: &Option<PathBuf>) -> Result<StopwordSet> {
    match path {
        Some(p) => StopwordSet::from_file(p),
        None => Ok(StopwordSet::english().clone()),
    }
}

struct LoadedBids {
    filtered: BidMatrix,
    report: FilterReport,
    graph: Option<CoauthorGraph>,
    excluded: BTreeSet<String>,
    fatigue: Vec<String>,
}

/// Read, reduce, and filter the bid matrix the same way the full pipeline
/// does: referees outside the publication corpus are excluded, and with
/// `exclude_fatigue` the no-variation referees detected on the first pass
/// are excluded in a second pass.
fn load_filtered(input: &BidInput) -> Result<LoadedBids> {
    let raw = io::read_bids_csv(&input.bids)?;
    let bids = transform_bids(&raw);
    let graph = match &input.publications {
        Some(path) => Some(build_graph(&io::read_publications_jsonl(path)?)),
        None => None,
    }
    .transpose()?;
    let excluded = match &graph {
        Some(g) => referees_outside_corpus(bids.cols(), g),
        None => BTreeSet::new(),
    };
    let (mut filtered, mut report) = filter_bids(&bids, &excluded)?;
    let mut fatigue = Vec::new();
    if input.exclude_fatigue {
        fatigue = fatigue_referees(&filtered);
        let mut with_fatigue = excluded.clone();
        with_fatigue.extend(fatigue.iter().cloned());
        let (refiltered, new_report) = filter_bids(&bids, &with_fatigue)?;
        filtered = refiltered;
        report = new_report;
    }
    Ok(LoadedBids { filtered, report, graph, excluded, fatigue })
}

fn bid_parameters(input: &BidInput) -> serde_json::Value {
    json!({
        "bids": path_str(&input.bids),
        "publications": opt_path_str(&input.publications),
        "exclude_fatigue": input.exclude_fatigue,
    })
}

fn record_filtering(meta: &mut RunMeta, loaded: &LoadedBids) {
    let (zero_rows, zero_cols, excluded_cols, rows_after) = loaded.report.counts();
    meta.insert(
        "filter",
        json!({
            "zero_rows": zero_rows,
            "zero_cols": zero_cols,
            "excluded_cols": excluded_cols,
            "rows_after_exclusion": rows_after,
        }),
    );
    if !loaded.excluded.is_empty() {
        meta.insert(
            "excluded_referees",
            json!(loaded.excluded.iter().cloned().collect::<Vec<_>>()),
        );
    }
    if !loaded.fatigue.is_empty() {
        meta.insert("fatigue_referees", json!(loaded.fatigue));
    }
}

pub fn transform(input: &BidInput, out: &OutDir) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let raw = io::read_bids_csv(&input.bids)?;
    let reduced = transform_bids(&raw);
    io::write_bids_csv(&dir.join("transformed.csv"), &reduced)?;
    let mut meta = RunMeta::new("transform", bid_parameters(input));
    meta.insert("rows", json!(reduced.rows().len()));
    meta.insert("cols", json!(reduced.cols().len()));
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

fn similarity_command(
    name: &'static str,
    input: &BidInput,
    out: &OutDir,
    file: &str,
    compute: impl Fn(&BidMatrix) -> Result<(SimilarityMatrix, bidlab_core::bid::UndefinedPairReport)>,
) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let loaded = load_filtered(input)?;
    let (matrix, warnings) = compute(&loaded.filtered)?;
    io::write_matrix_csv(&dir.join(file), &matrix.to_labeled())?;
    let mut meta = RunMeta::new(name, bid_parameters(input));
    record_filtering(&mut meta, &loaded);
    for (a, b) in &warnings.pairs {
        meta.warn(format!("no comparable bids between '{a}' and '{b}'; similarity set to 0"));
    }
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

pub fn sim_subs(input: &BidInput, out: &OutDir) -> CmdResult {
    similarity_command("sim-subs", input, out, "s_b.csv", submission_similarity)
}

pub fn sim_refs(input: &BidInput, out: &OutDir) -> CmdResult {
    similarity_command("sim-refs", input, out, "r_b.csv", referee_similarity)
}

fn resolve_cut(
    similarity: &SimilarityMatrix,
    params: &ClusterParams,
) -> Result<(Dendrogram, f64, ClusterSet)> {
    let linkage: Linkage = params.linkage.parse()?;
    let dendrogram = build_dendrogram(similarity, linkage)?;
    let threshold = params.threshold.unwrap_or_else(|| dendrogram.gap_threshold());
    let clusters = cut_dendrogram(&dendrogram, threshold);
    Ok((dendrogram, threshold, clusters))
}

pub fn cluster(input: &BidInput, params: &ClusterParams, entities: &str, out: &OutDir) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let loaded = load_filtered(input)?;
    let (similarity, _) = match entities {
        "submissions" => submission_similarity(&loaded.filtered)?,
        "referees" => referee_similarity(&loaded.filtered)?,
        other => {
            return Err(Error::InvalidConfig {
                detail: format!("unknown entities '{other}' (expected submissions|referees)"),
            })
        }
    };
    let (dendrogram, threshold, clusters) = resolve_cut(&similarity, params)?;
    io::write_text(&dir.join("dendrogram.newick"), &format!("{}\n", dendrogram.to_newick()))?;
    io::write_json(&dir.join("dendrogram.json"), &dendrogram)?;
    io::write_json(&dir.join("clusters.json"), &clusters_json(&clusters))?;
    let mut meta = RunMeta::new(
        "cluster",
        json!({
            "bids": path_str(&input.bids),
            "publications": opt_path_str(&input.publications),
            "exclude_fatigue": input.exclude_fatigue,
            "entities": entities,
            "linkage": params.linkage,
            "threshold": params.threshold,
        }),
    );
    record_filtering(&mut meta, &loaded);
    meta.insert("threshold_used", json!(threshold));
    meta.insert("n_clusters", json!(clusters.len()));
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

struct TermStage {
    loaded: LoadedBids,
    dictionary: TermDictionary,
    clusters: ClusterSet,
    threshold: f64,
    weights: Vec<bidlab_core::text::WeightVector>,
    frequencies: Vec<bidlab_core::text::FrequencyVector>,
}

/// Shared front half of `terms` and `entropy`: filter, preprocess, cluster
/// by bid similarity, count and weigh terms per cluster.
fn term_stage(input: &BidInput, text: &TextInput, params: &ClusterParams) -> Result<TermStage> {
    let loaded = load_filtered(input)?;
    let stopwords = load_stopwords(&text.stopwords)?;
    let documents = load_documents(&loaded.filtered, &text.corpus, &stopwords)?;
    let dictionary = TermDictionary::from_documents(&documents);
    let (similarity, _) = submission_similarity(&loaded.filtered)?;
    let (_, threshold, clusters) = resolve_cut(&similarity, params)?;
    let frequencies = cluster_frequencies(&documents, &clusters, &dictionary)?;
    let weights = tfidf(&frequencies)?;
    Ok(TermStage { loaded, dictionary, clusters, threshold, weights, frequencies })
}

fn load_documents(
    filtered: &BidMatrix,
    corpus: &Path,
    stopwords: &StopwordSet,
) -> Result<Vec<StemmedDocument>> {
    let records = io::read_corpus_jsonl(corpus)?;
    let by_id: std::collections::HashMap<&str, &io::CorpusRecord> =
        records.iter().map(|r| (r.id.as_str(), r)).collect();
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
        .collect()
}

fn text_parameters(input: &BidInput, text: &TextInput) -> serde_json::Value {
    json!({
        "bids": path_str(&input.bids),
        "publications": opt_path_str(&input.publications),
        "exclude_fatigue": input.exclude_fatigue,
        "corpus": path_str(&text.corpus),
        "stopwords": opt_path_str(&text.stopwords),
    })
}

fn counts_matrix(stage: &TermStage) -> LabeledMatrix {
    LabeledMatrix {
        row_labels: stage.frequencies.iter().map(|f| f.owner.clone()).collect(),
        col_labels: stage.dictionary.terms().to_vec(),
        values: stage
            .frequencies
            .iter()
            .map(|f| f.counts.iter().map(|&c| c as f64).collect())
            .collect(),
    }
}

pub fn terms(
    input: &BidInput,
    text: &TextInput,
    params: &ClusterParams,
    top_k: usize,
    out: &OutDir,
) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let stage = term_stage(input, text, params)?;
    let top: Vec<_> = stage
        .weights
        .iter()
        .map(|w| top_k_normalize(w, &stage.dictionary, top_k))
        .collect::<Result<_>>()?;
    io::write_matrix_csv(&dir.join("term_freq.csv"), &counts_matrix(&stage))?;
    io::write_matrix_csv(
        &dir.join("term_weights.csv"),
        &LabeledMatrix {
            row_labels: stage.weights.iter().map(|w| w.owner.clone()).collect(),
            col_labels: stage.dictionary.terms().to_vec(),
            values: stage.weights.iter().map(|w| w.weights.clone()).collect(),
        },
    )?;
    io::write_text(&dir.join("terms.csv"), &terms_table_csv(&top, top_k))?;
    let mut meta = RunMeta::new("terms", text_parameters(input, text));
    record_filtering(&mut meta, &stage.loaded);
    meta.insert("linkage", json!(params.linkage));
    meta.insert("threshold_used", json!(stage.threshold));
    meta.insert("top_k", json!(top_k));
    meta.insert("n_clusters", json!(stage.clusters.len()));
    meta.insert("dictionary_size", json!(stage.dictionary.len()));
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

pub fn entropy(
    input: &BidInput,
    text: &TextInput,
    params: &ClusterParams,
    top_k: usize,
    out: &OutDir,
) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let stage = term_stage(input, text, params)?;
    let mut rows = Vec::new();
    for weight in &stage.weights {
        let top = top_k_normalize(weight, &stage.dictionary, top_k)?;
        rows.push((weight.owner.clone(), shannon_entropy(&top.probabilities())?));
    }
    io::write_text(&dir.join("entropy.csv"), &entropy_table_csv(&rows))?;
    let mut meta = RunMeta::new("entropy", text_parameters(input, text));
    record_filtering(&mut meta, &stage.loaded);
    meta.insert("threshold_used", json!(stage.threshold));
    meta.insert("top_k", json!(top_k));
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

pub fn doc_tfidf(input: &BidInput, text: &TextInput, out: &OutDir) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let loaded = load_filtered(input)?;
    let stopwords = load_stopwords(&text.stopwords)?;
    let documents = load_documents(&loaded.filtered, &text.corpus, &stopwords)?;
    let dictionary = TermDictionary::from_documents(&documents);
    let matrix = document_tfidf(&documents, &dictionary)?;
    io::write_matrix_csv(&dir.join("doc_tfidf.csv"), &matrix)?;
    let mut meta = RunMeta::new("doc-tfidf", text_parameters(input, text));
    record_filtering(&mut meta, &loaded);
    meta.insert("shape", json!([matrix.n_rows(), matrix.n_cols()]));
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

pub fn cosine(input: &BidInput, text: &TextInput, out: &OutDir) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let loaded = load_filtered(input)?;
    let stopwords = load_stopwords(&text.stopwords)?;
    let documents = load_documents(&loaded.filtered, &text.corpus, &stopwords)?;
    let dictionary = TermDictionary::from_documents(&documents);
    let matrix = document_tfidf(&documents, &dictionary)?;
    let (similarity, zero_norm) = cosine_similarity_matrix(&matrix)?;
    io::write_matrix_csv(&dir.join("s_t.csv"), &similarity.to_labeled())?;
    let mut meta = RunMeta::new("cosine", text_parameters(input, text));
    record_filtering(&mut meta, &loaded);
    for row in &zero_norm.rows {
        meta.warn(format!("document '{row}' has an empty term vector"));
    }
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

pub fn graph(publications: &Path, dot: bool, out: &OutDir) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let records = io::read_publications_jsonl(publications)?;
    let graph = build_graph(&records)?;
    io::write_edge_list_csv(&dir.join("graph.csv"), &graph)?;
    io::write_json(&dir.join("graph_stats.json"), &graph_stats(&graph))?;
    if dot {
        io::write_text(&dir.join("graph.dot"), &to_dot(&graph))?;
    }
    let mut meta = RunMeta::new(
        "graph",
        json!({ "publications": path_str(publications), "dot": dot }),
    );
    meta.insert("nodes", json!(graph.node_count()));
    meta.insert("edges", json!(graph.edge_count()));
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

impl RankParams {
    fn to_config(&self) -> RankConfig {
        RankConfig {
            restart_probability: self.alpha,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

pub fn rank(input: &BidInput, params: &RankParams, out: &OutDir) -> CmdResult {
    if input.publications.is_none() {
        return Err(Error::InvalidConfig {
            detail: "rank requires --publications to build the co-authorship graph".into(),
        });
    }
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let loaded = load_filtered(input)?;
    let graph = loaded.graph.as_ref().expect("publications checked above");
    let matrix = referee_rank_matrix(graph, loaded.filtered.cols(), &params.to_config())?;
    io::write_matrix_csv(&dir.join("r_g.csv"), &matrix.to_labeled())?;
    let summary = RankSummary {
        alpha: matrix.config.restart_probability,
        tolerance: matrix.config.tolerance,
        max_iterations: matrix.config.max_iterations,
        iterations: matrix.iterations.clone(),
        converged: matrix.converged.clone(),
    };
    io::write_json(&dir.join("rank_meta.json"), &summary)?;
    let mut meta = RunMeta::new(
        "rank",
        json!({
            "bids": path_str(&input.bids),
            "publications": opt_path_str(&input.publications),
            "exclude_fatigue": input.exclude_fatigue,
            "alpha": params.alpha,
            "tolerance": params.tolerance,
            "max_iterations": params.max_iterations,
        }),
    );
    record_filtering(&mut meta, &loaded);
    if !matrix.all_converged() {
        meta.warn("some rank rows did not converge within max_iterations");
    }
    meta.write(&dir)?;
    if matrix.all_converged() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: rank iteration did not converge for every referee");
        Ok(ExitCode::from(3))
    }
}

pub fn corr(matrix_a: &Path, matrix_b: &Path, mode: &str, out: &OutDir) -> CmdResult {
    let dir = out.resolve();
    ensure_dir(&dir)?;
    let a = io::read_matrix_csv(matrix_a)?;
    let b = io::read_matrix_csv(matrix_b)?;
    let flatten: FlattenMode = mode.parse()?;
    let result = correlate_matrices(&a, &b, flatten)?;
    io::write_json(&dir.join("corr.json"), &result)?;
    let mut meta = RunMeta::new(
        "corr",
        json!({
            "matrix_a": path_str(matrix_a),
            "matrix_b": path_str(matrix_b),
            "mode": mode,
        }),
    );
    meta.insert("r", json!(result.r));
    meta.insert("df", json!(result.df));
    meta.write(&dir)?;
    println!("r = {}, df = {}, p = {}", result.r, result.df, result.p_value);
    Ok(ExitCode::SUCCESS)
}

fn load_synth_config(path: Option<&Path>, seed: Option<u64>) -> Result<SynthConfig> {
    let mut config = match path {
        None => SynthConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            if p.extension().is_some_and(|e| e == "toml") {
                toml::from_str(&text).map_err(|e| Error::Parse {
                    path: p.display().to_string(),
                    detail: e.to_string(),
                })?
            } else {
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    path: p.display().to_string(),
                    detail: e.to_string(),
                })?
            }
        }
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn write_synth_inputs(dir: &Path, config: &SynthConfig, data: &bidlab_core::synth::SynthData) -> Result<()> {
    ensure_dir(dir)?;
    io::write_raw_bids_csv(&dir.join("bids.csv"), &data.raw_bids)?;
    io::write_corpus_jsonl(&dir.join("corpus.jsonl"), &data.corpus)?;
    io::write_publications_jsonl(&dir.join("publications.jsonl"), &data.publications)?;
    io::write_json(&dir.join("ground_truth.json"), &data.ground_truth)?;
    io::write_json(&dir.join("synth_config.json"), config)?;
    Ok(())
}

pub fn generate(config: Option<&Path>, seed: Option<u64>, out: &OutDir) -> CmdResult {
    let dir = out.resolve();
    let config = load_synth_config(config, seed)?;
    let data = synth_generate(&config)?;
    write_synth_inputs(&dir, &config, &data)?;
    let mut meta = RunMeta::new("generate", serde_json::to_value(&config).expect("serializable"));
    meta.insert("n_publications", json!(data.publications.len()));
    meta.write(&dir)?;
    Ok(ExitCode::SUCCESS)
}

pub struct ReproduceArgs {
    pub bids: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub publications: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub synthetic: bool,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cluster: ClusterParams,
    pub top_k: usize,
    pub rank: RankParams,
    pub mode: String,
    pub exclude_fatigue: bool,
    pub out: OutDir,
}

pub fn reproduce(args: ReproduceArgs) -> CmdResult {
    let dir = args.out.resolve();
    ensure_dir(&dir)?;
    let stopwords = load_stopwords(&args.stopwords)?;

    let (inputs, inputs_json) = if args.synthetic {
        let config = load_synth_config(args.config.as_deref(), args.seed)?;
        let data = synth_generate(&config)?;
        write_synth_inputs(&dir.join("inputs"), &config, &data)?;
        let inputs_json = json!({ "synthetic": config });
        (
            PipelineInputs {
                raw_bids: data.raw_bids,
                corpus: data.corpus,
                publications: data.publications,
                stopwords,
            },
            inputs_json,
        )
    } else {
        let need = |name: &str, value: &Option<PathBuf>| -> Result<PathBuf> {
            value.clone().ok_or_else(|| Error::InvalidConfig {
                detail: format!("--{name} is required unless --synthetic is set"),
            })
        };
        let bids_path = need("bids", &args.bids)?;
        let corpus_path = need("corpus", &args.corpus)?;
        let publications_path = need("publications", &args.publications)?;
        let inputs_json = json!({
            "bids": path_str(&bids_path),
            "corpus": path_str(&corpus_path),
            "publications": path_str(&publications_path),
            "stopwords": opt_path_str(&args.stopwords),
        });
        (
            PipelineInputs {
                raw_bids: io::read_bids_csv(&bids_path)?,
                corpus: io::read_corpus_jsonl(&corpus_path)?,
                publications: io::read_publications_jsonl(&publications_path)?,
                stopwords,
            },
            inputs_json,
        )
    };

    let params = PipelineParams {
        linkage: args.cluster.linkage.parse()?,
        threshold: args.cluster.threshold,
        top_k: args.top_k,
        rank: args.rank.to_config(),
        flatten_mode: args.mode.parse()?,
        exclude_fatigue: args.exclude_fatigue,
    };

    let output = pipeline::run(&inputs, &params)?;
    let report = Report::new(&output, &params, inputs_json);
    pipeline::write_outputs(&dir, &output, &params, &report)?;

    println!(
        "track 1 (bids vs abstracts): r = {} (without fatigue referees: {})",
        report.base.track1.r, report.fatigue_excluded.track1.r
    );
    println!(
        "track 2 (bids vs co-authorship rank): r = {} (without fatigue referees: {})",
        report.base.track2.r, report.fatigue_excluded.track2.r
    );
    println!("report written to {}", dir.join("report.json").display());

    let converged = output.base.r_g.all_converged() && output.fatigue_excluded.r_g.all_converged();
    if converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: rank iteration did not converge for every referee");
        Ok(ExitCode::from(3))
    }
}
