//! `bidlab`: referee bid analysis from the command line.

mod commands;
mod meta;

use std::path::PathBuf;
use std::process::ExitCode;

use bidlab_core::{Error, ErrorClass};
use clap::{Args, Parser, Subcommand};

/// Default output root when a command does not say where to write.
pub const OUT_ROOT_ENV: &str = "BIDLAB_OUT_ROOT";

#[derive(Parser)]
#[command(name = "bidlab", version, about = "Referee bid analysis toolkit")]
struct Cli {
    /// Cap the worker thread count (0 = one thread per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Emit errors as JSON on stderr.
    #[arg(long, global = true)]
    error_json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutDir {
    /// Output directory (default: $BIDLAB_OUT_ROOT or the current directory).
    #[arg(short, long)]
    out_dir: Option<PathBuf>,
}

impl OutDir {
    fn resolve(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| {
            std::env::var_os(OUT_ROOT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."))
        })
    }
}

#[derive(Args, Clone)]
struct BidInput {
    /// Bid matrix CSV: header row of referee ids, first column of
    /// submission ids, integer cells 0..=4.
    #[arg(long)]
    bids: PathBuf,

    /// Publication corpus (JSON lines); referees absent from it are
    /// excluded from the filtered matrix.
    #[arg(long)]
    publications: Option<PathBuf>,

    /// Also exclude referees whose every bid claims expertise.
    #[arg(long)]
    exclude_fatigue: bool,
}

#[derive(Args, Clone)]
struct TextInput {
    /// Submission corpus (JSON lines with id/title/abstract/authors).
    #[arg(long)]
    corpus: PathBuf,

    /// Stopword list, one word per line (default: bundled English list).
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ClusterParams {
    /// Cluster distance update rule.
    #[arg(long, default_value = "average")]
    linkage: String,

    /// Dendrogram cut height (default: midpoint of the widest height gap).
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args, Clone)]
struct RankParams {
    /// Restart probability of the rank walk.
    #[arg(long, default_value_t = 0.15)]
    alpha: f64,

    /// L1 convergence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,

    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce raw bid codes to wildcard/expert/not-expert.
    Transform {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        out: OutDir,
    },
    /// Submission similarity matrix from bid vectors.
    SimSubs {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        out: OutDir,
    },
    /// Referee similarity matrix from transposed bid vectors.
    SimRefs {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        out: OutDir,
    },
    /// Hierarchical clustering of submissions or referees by bid similarity.
    Cluster {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        params: ClusterParams,
        /// What to cluster.
        #[arg(long, default_value = "submissions")]
        entities: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Cluster term tables: frequencies, weights, and top terms.
    Terms {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        text: TextInput,
        #[command(flatten)]
        params: ClusterParams,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Entropy of the normalized top term weights per cluster.
    Entropy {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        text: TextInput,
        #[command(flatten)]
        params: ClusterParams,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Per-document term weight matrix over the filtered submissions.
    DocTfidf {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        text: TextInput,
        #[command(flatten)]
        out: OutDir,
    },
    /// Cosine similarity between document term weight vectors.
    Cosine {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        text: TextInput,
        #[command(flatten)]
        out: OutDir,
    },
    /// Build the weighted co-authorship graph from publication records.
    Graph {
        #[arg(long)]
        publications: PathBuf,
        /// Also write a DOT rendering.
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Referee-to-referee rank matrix over the co-authorship graph.
    Rank {
        #[command(flatten)]
        bids: BidInput,
        #[command(flatten)]
        rank: RankParams,
        #[command(flatten)]
        out: OutDir,
    },
    /// Pearson correlation between two labeled matrices.
    Corr {
        #[arg(long)]
        matrix_a: PathBuf,
        #[arg(long)]
        matrix_b: PathBuf,
        /// Which cells enter the sample: full, off-diagonal, upper-triangle.
        #[arg(long, default_value = "full")]
        mode: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Generate a synthetic conference with planted topics.
    Generate {
        /// Generator configuration (JSON or TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run the full two-track experiment and write all artifacts.
    Reproduce {
        #[arg(long, conflicts_with = "synthetic")]
        bids: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        publications: Option<PathBuf>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        /// Analyze generated data instead of input files.
        #[arg(long)]
        synthetic: bool,
        /// Generator configuration for --synthetic (JSON or TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the generator seed for --synthetic.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        params: ClusterParams,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[command(flatten)]
        rank: RankParams,
        /// Correlation flatten mode.
        #[arg(long, default_value = "full")]
        mode: String,
        /// Write the primary artifacts from the fatigue-excluded variant.
        #[arg(long)]
        exclude_fatigue: bool,
        #[command(flatten)]
        out: OutDir,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }

    let result = match cli.command {
        Command::Transform { bids, out } => commands::transform(&bids, &out),
        Command::SimSubs { bids, out } => commands::sim_subs(&bids, &out),
        Command::SimRefs { bids, out } => commands::sim_refs(&bids, &out),
        Command::Cluster { bids, params, entities, out } => {
            commands::cluster(&bids, &params, &entities, &out)
        }
        Command::Terms { bids, text, params, top_k, out } => {
            commands::terms(&bids, &text, &params, top_k, &out)
        }
        Command::Entropy { bids, text, params, top_k, out } => {
            commands::entropy(&bids, &text, &params, top_k, &out)
        }
        Command::DocTfidf { bids, text, out } => commands::doc_tfidf(&bids, &text, &out),
        Command::Cosine { bids, text, out } => commands::cosine(&bids, &text, &out),
        Command::Graph { publications, dot, out } => commands::graph(&publications, dot, &out),
        Command::Rank { bids, rank, out } => commands::rank(&bids, &rank, &out),
        Command::Corr { matrix_a, matrix_b, mode, out } => {
            commands::corr(&matrix_a, &matrix_b, &mode, &out)
        }
        Command::Generate { config, seed, out } => commands::generate(config.as_deref(), seed, &out),
        Command::Reproduce {
            bids,
            corpus,
            publications,
            stopwords,
            synthetic,
            config,
            seed,
            params,
            top_k,
            rank,
            mode,
            exclude_fatigue,
            out,
        } => commands::reproduce(commands::ReproduceArgs {
            bids,
            corpus,
            publications,
            stopwords,
            synthetic,
            config,
            seed,
            cluster: params,
            top_k,
            rank,
            mode,
            exclude_fatigue,
            out,
        }),
    };

    match result {
        Ok(code) => code,
        Err(err) => {
            if cli.error_json {
                let kind = match err.class() {
                    ErrorClass::Input => "input",
                    ErrorClass::Numerical => "numerical",
                };
                eprintln!(
                    "{}",
                    serde_json::json!({ "error": err.to_string(), "kind": kind })
                );
            } else {
                eprintln!("error: {err}");
            }
            match err.class() {
                ErrorClass::Input => ExitCode::from(2),
                ErrorClass::Numerical => ExitCode::from(3),
            }
        }
    }
}

pub(crate) type CmdResult = std::result::Result<ExitCode, Error>;
