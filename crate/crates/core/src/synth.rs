//! Synthetic conference generator: planted-topic bid matrices, abstracts,
//! and publication corpora, with the ground truth needed to score
//! downstream analyses.
//!
//! Generation is fully deterministic for a given configuration: all
//! randomness comes from a ChaCha8 stream seeded with `seed`, consumed in a
//! fixed order (vocabularies, fatigue set, bids row by row, abstracts,
//! publications).

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bid::RawBidMatrix;
use crate::error::{Error, Result};
use crate::graph::PublicationRecord;
use crate::io::CorpusRecord;
use crate::text::{porter, StopwordSet};

/// Generator parameters.
///
/// Topic vocabularies are disjoint in stem space and grow with the topic
/// index, while word frequencies inside a topic decay geometrically with a
/// rate tied to the vocabulary size: the narrowest topic repeats its few
/// words most heavily. Fatigue referees bid "expert" on every submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_submissions: usize,
    pub n_referees: usize,
    pub n_topics: usize,
    /// Probability that a referee bids expert on an own-topic submission.
    pub p_expert_match: f64,
    /// Probability that a referee bids expert on an off-topic submission.
    pub p_expert_mismatch: f64,
    /// Probability of a wildcard (no-bid or conflict) cell.
    pub p_wildcard: f64,
    /// Referees who claim expertise on everything.
    pub n_fatigue_referees: usize,
    /// Base vocabulary size of the narrowest topic.
    pub vocab_per_topic: usize,
    /// Words shared by every topic.
    pub shared_vocab: usize,
    /// Tokens per generated abstract.
    pub abstract_length: usize,
    /// Probability that two same-topic referees co-author a paper.
    pub coauthor_intra_prob: f64,
    /// Probability that two cross-topic referees co-author a paper.
    pub coauthor_inter_prob: f64,
    pub max_authors_per_paper: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_submissions: 120,
            n_referees: 60,
            n_topics: 8,
            p_expert_match: 0.9,
            p_expert_mismatch: 0.05,
            p_wildcard: 0.08,
            n_fatigue_referees: 12,
            vocab_per_topic: 40,
            shared_vocab: 40,
            abstract_length: 90,
            coauthor_intra_prob: 0.55,
            coauthor_inter_prob: 0.02,
            max_authors_per_paper: 4,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, p) in [
            ("p_expert_match", self.p_expert_match),
            ("p_expert_mismatch", self.p_expert_mismatch),
            ("p_wildcard", self.p_wildcard),
            ("coauthor_intra_prob", self.coauthor_intra_prob),
            ("coauthor_inter_prob", self.coauthor_inter_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                problems.push(format!("{name} = {p} outside [0, 1]"));
            }
        }
        for (name, v) in [
            ("n_submissions", self.n_submissions),
            ("n_referees", self.n_referees),
            ("n_topics", self.n_topics),
            ("vocab_per_topic", self.vocab_per_topic),
            ("abstract_length", self.abstract_length),
        ] {
            if v == 0 {
                problems.push(format!("{name} must be positive"));
            }
        }
        if self.max_authors_per_paper < 2 {
            problems.push("max_authors_per_paper must be at least 2".into());
        }
        if self.n_fatigue_referees > self.n_referees {
            problems.push(format!(
                "n_fatigue_referees = {} exceeds n_referees = {}",
                self.n_fatigue_referees, self.n_referees
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig { detail: problems.join("; ") })
        }
    }
}

/// What the generator planted, for scoring recovered structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub submission_topics: BTreeMap<String, usize>,
    pub referee_topics: BTreeMap<String, usize>,
    pub fatigue_referees: BTreeSet<String>,
    pub topic_vocab_sizes: Vec<usize>,
}

impl GroundTruth {
    /// Topic with the smallest planted vocabulary.
    pub fn narrowest_topic(&self) -> usize {
        self.topic_vocab_sizes
            .iter()
            .enumerate()
            .min_by_key(|&(_, &size)| size)
            .map(|(t, _)| t)
            .unwrap_or(0)
    }
}

/// A generated conference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthData {
    pub raw_bids: RawBidMatrix,
    pub corpus: Vec<CorpusRecord>,
    pub publications: Vec<PublicationRecord>,
    pub ground_truth: GroundTruth,
}

fn zero_padded(prefix: &str, index: usize, total: usize) -> String {
    let width = total.to_string().len();
    format!("{prefix}{:0width$}", index + 1)
}

/// Synthetic vocabulary words, unique in stem space and disjoint from the
/// stopword list.
fn generate_words(rng: &mut ChaCha8Rng, count: usize, taken_stems: &mut BTreeSet<String>) -> Vec<String> {
    const CONSONANTS: &[u8] = b"bcdfghjklmnprstvz";
    const VOWELS: &[u8] = b"aeiou";
    let stopwords = StopwordSet::english();
    let mut words = Vec::with_capacity(count);
    while words.len() < count {
        let syllables = rng.gen_range(2..=3);
        let mut word = String::new();
        for _ in 0..syllables {
            word.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
            word.push(VOWELS[rng.gen_range(0..VOWELS.len())] as char);
        }
        if rng.gen_bool(0.5) {
            word.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
        }
        if stopwords.contains(&word) {
            continue;
        }
        let stem = porter::stem(&word);
        if taken_stems.insert(stem) {
            words.push(word);
        }
    }
    words
}

/// Geometric-decay index: word `k` drawn with probability proportional to
/// `rate^k`, truncated at `len`.
fn sample_decaying(rng: &mut ChaCha8Rng, len: usize, rate: f64) -> usize {
    let u: f64 = rng.gen();
    let total = 1.0 - rate.powi(len as i32);
    let k = ((1.0 - u * total).ln() / rate.ln()).floor() as usize;
    k.min(len - 1)
}

fn topic_decay_rate(vocab_size: usize) -> f64 {
    (1.0 - 10.0 / vocab_size as f64).clamp(0.5, 0.99)
}

/// Fatigue referees skip far more submissions than attentive ones; the
/// ones they do bid on are all "expert".
const FATIGUE_SKIP_RATE: f64 = 0.35;

/// Generate a full synthetic conference from `config`.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let submission_ids: Vec<String> = (0..config.n_submissions)
        .map(|i| zero_padded("s", i, config.n_submissions))
        .collect();
    let referee_ids: Vec<String> = (0..config.n_referees)
        .map(|j| zero_padded("r", j, config.n_referees))
        .collect();

    // Balanced round-robin topic assignments.
    let submission_topic: Vec<usize> = (0..config.n_submissions).map(|i| i % config.n_topics).collect();
    let referee_topic: Vec<usize> = (0..config.n_referees).map(|j| j % config.n_topics).collect();

    // Vocabularies: the topic vocabulary grows with the topic index so that
    // "narrow" topics exist; stems never collide across topics or with the
    // shared pool.
    let step = (config.vocab_per_topic / 4).max(1);
    let topic_vocab_sizes: Vec<usize> = (0..config.n_topics)
        .map(|t| config.vocab_per_topic + t * step)
        .collect();
    let mut taken_stems = BTreeSet::new();
    let shared_words = generate_words(&mut rng, config.shared_vocab, &mut taken_stems);
    let topic_words: Vec<Vec<String>> = topic_vocab_sizes
        .iter()
        .map(|&size| generate_words(&mut rng, size, &mut taken_stems))
        .collect();

    // Fatigue set.
    let fatigue: BTreeSet<usize> = rand::seq::index::sample(
        &mut rng,
        config.n_referees,
        config.n_fatigue_referees,
    )
    .into_iter()
    .collect();

    // Bids, row by row. Raw codes: wildcards are mostly 0 with a few
    // conflict-of-interest 4s; experts split between codes 1 and 2.
    let mut cells: Vec<Vec<i64>> = Vec::with_capacity(config.n_submissions);
    for (i, &topic) in submission_topic.iter().enumerate() {
        let _ = i;
        let mut row = Vec::with_capacity(config.n_referees);
        for (j, &ref_topic) in referee_topic.iter().enumerate() {
            let code = if fatigue.contains(&j) {
                if rng.gen_bool(FATIGUE_SKIP_RATE) {
                    0
                } else {
                    2
                }
            } else if rng.gen_bool(config.p_wildcard) {
                if rng.gen_bool(0.2) {
                    4
                } else {
                    0
                }
            } else {
                let p_expert = if ref_topic == topic {
                    config.p_expert_match
                } else {
                    config.p_expert_mismatch
                };
                if rng.gen_bool(p_expert) {
                    if rng.gen_bool(0.5) {
                        1
                    } else {
                        2
                    }
                } else {
                    3
                }
            };
            row.push(code);
        }
        cells.push(row);
    }
    let raw_bids = RawBidMatrix::new(submission_ids.clone(), referee_ids.clone(), cells)?;

    // Abstracts: mostly topic words under geometric decay, diluted with a
    // uniform shared pool.
    let mut corpus = Vec::with_capacity(config.n_submissions);
    for (i, &topic) in submission_topic.iter().enumerate() {
        let vocab = &topic_words[topic];
        let rate = topic_decay_rate(vocab.len());
        let mut tokens = Vec::with_capacity(config.abstract_length);
        for _ in 0..config.abstract_length {
            let from_shared = !shared_words.is_empty() && rng.gen_bool(0.3);
            let word = if from_shared {
                &shared_words[rng.gen_range(0..shared_words.len())]
            } else {
                &vocab[sample_decaying(&mut rng, vocab.len(), rate)]
            };
            tokens.push(word.as_str());
        }
        let title: Vec<&str> = (0..4)
            .map(|_| vocab[sample_decaying(&mut rng, vocab.len(), rate)].as_str())
            .collect();
        let n_authors = rng.gen_range(1..=3);
        corpus.push(CorpusRecord {
            id: submission_ids[i].clone(),
            title: title.join(" "),
            abstract_text: tokens.join(" "),
            authors: (0..n_authors)
                .map(|k| format!("author_{}_{}", submission_ids[i], k + 1))
                .collect(),
        });
    }

    // Publications: one single-author record per referee (so every referee
    // exists in the co-authorship corpus), then pairwise collaborations at
    // the configured rates, padded with external co-authors.
    let mut publications = Vec::new();
    let mut seq = 0usize;
    let next_id = |seq: &mut usize| {
        *seq += 1;
        format!("p{:05}", *seq)
    };
    for id in &referee_ids {
        publications.push(PublicationRecord {
            id: next_id(&mut seq),
            authors: vec![id.clone()],
        });
    }
    let external_pool = config.n_referees.max(1);
    for j in 0..config.n_referees {
        for k in (j + 1)..config.n_referees {
            let p = if referee_topic[j] == referee_topic[k] {
                config.coauthor_intra_prob
            } else {
                config.coauthor_inter_prob
            };
            if !rng.gen_bool(p) {
                continue;
            }
            let mut authors = vec![referee_ids[j].clone(), referee_ids[k].clone()];
            let extras = rng.gen_range(0..=(config.max_authors_per_paper - 2));
            let mut extra_set = BTreeSet::new();
            for _ in 0..extras {
                extra_set.insert(format!("x{:03}", rng.gen_range(0..external_pool)));
            }
            authors.extend(extra_set);
            publications.push(PublicationRecord { id: next_id(&mut seq), authors });
        }
    }

    let ground_truth = GroundTruth {
        submission_topics: submission_ids
            .iter()
            .cloned()
            .zip(submission_topic.iter().copied())
            .collect(),
        referee_topics: referee_ids
            .iter()
            .cloned()
            .zip(referee_topic.iter().copied())
            .collect(),
        fatigue_referees: fatigue.iter().map(|&j| referee_ids[j].clone()).collect(),
        topic_vocab_sizes,
    };

    Ok(SynthData { raw_bids, corpus, publications, ground_truth })
}

/// Two generations with the same configuration are byte-identical.
pub fn same_seed_reproducibility(config: &SynthConfig) -> Result<bool> {
    let a = generate(config)?;
    let b = generate(config)?;
    let a_bytes = serde_json::to_vec(&a).map_err(|e| Error::InvalidConfig { detail: e.to_string() })?;
    let b_bytes = serde_json::to_vec(&b).map_err(|e| Error::InvalidConfig { detail: e.to_string() })?;
    Ok(a_bytes == b_bytes)
}

fn comb2(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two partitions of the same element set.
pub fn adjusted_rand_index(a: &[Vec<String>], b: &[Vec<String>]) -> f64 {
    let index_of = |partition: &[Vec<String>]| -> BTreeMap<String, usize> {
        partition
            .iter()
            .enumerate()
            .flat_map(|(k, members)| members.iter().map(move |m| (m.clone(), k)))
            .collect()
    };
    let a_of = index_of(a);
    let b_of = index_of(b);
    let mut contingency: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut a_sizes: BTreeMap<usize, u64> = BTreeMap::new();
    let mut b_sizes: BTreeMap<usize, u64> = BTreeMap::new();
    let mut n = 0u64;
    for (element, &ka) in &a_of {
        let Some(&kb) = b_of.get(element) else { continue };
        *contingency.entry((ka, kb)).or_insert(0) += 1;
        *a_sizes.entry(ka).or_insert(0) += 1;
        *b_sizes.entry(kb).or_insert(0) += 1;
        n += 1;
    }
    if n < 2 {
        return 1.0;
    }
    let sum_ij: f64 = contingency.values().map(|&c| comb2(c)).sum();
    let sum_a: f64 = a_sizes.values().map(|&c| comb2(c)).sum();
    let sum_b: f64 = b_sizes.values().map(|&c| comb2(c)).sum();
    let expected = sum_a * sum_b / comb2(n);
    let max = (sum_a + sum_b) / 2.0;
    if (max - expected).abs() < 1e-15 {
        return 1.0;
    }
    (sum_ij - expected) / (max - expected)
}
