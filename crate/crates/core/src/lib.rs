//! Referee bid analysis toolkit.
//!
//! Starting from a conference's submission-by-referee bid table, this crate
//! relates submissions and referees along two tracks:
//!
//! * **Bids vs. abstracts** — wildcard-aware Hamming similarity over bid
//!   vectors ([`bid`]), hierarchical clustering of the result ([`cluster`]),
//!   term weighting and entropy over the clustered abstracts ([`text`]), and
//!   the correlation between bid similarity and abstract cosine similarity
//!   ([`stats`]).
//! * **Bids vs. co-authorship** — referee similarity from transposed bids,
//!   a weighted co-authorship network ([`graph`]), source-personalized
//!   random-walk rank over it ([`rank`]), and the correlation between the
//!   two referee matrices.
//!
//! [`synth`] generates seeded conferences with planted topic structure so
//! the whole analysis can run end to end without confidential data, and
//! [`pipeline`] wires everything into a reproducible run.

pub mod bid;
pub mod cluster;
pub mod error;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod pipeline;
pub mod rank;
pub mod stats;
pub mod synth;
pub mod text;

pub use bid::{BidMatrix, RawBidMatrix};
pub use cluster::{ClusterSet, Dendrogram, Linkage};
pub use error::{Error, ErrorClass, Result};
pub use graph::{CoauthorGraph, PublicationRecord};
pub use matrix::{LabeledMatrix, SimilarityMatrix};
pub use rank::{RankConfig, RelativeRankMatrix};
pub use stats::{CorrelationResult, FlattenMode};
pub use synth::{GroundTruth, SynthConfig};
pub use text::{Document, StopwordSet, TermDictionary};
