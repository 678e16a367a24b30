//! Weighted co-authorship network built from publication records: an edge
//! between two authors accumulates `1/(A(m)-1)` for every joint paper `m`
//! with `A(m)` authors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// One publication: an id and its author list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub id: String,
    pub authors: Vec<String>,
}

/// Trim and Unicode-NFC-normalize an author id. Identity is the exact
/// normalized string; no name disambiguation is attempted.
pub fn normalize_author(author: &str) -> String {
    author.trim().nfc().collect()
}

/// Undirected weighted co-authorship graph. Nodes are kept in sorted id
/// order and adjacency lists are sorted, so iteration is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoauthorGraph {
    nodes: Vec<String>,
    /// adjacency[i] = sorted (neighbor index, weight) pairs
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl CoauthorGraph {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.node_index(id).is_some()
    }

    pub fn neighbors(&self, index: usize) -> &[(usize, f64)] {
        &self.adjacency[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adjacency[index].len()
    }

    /// Weight of the edge between two node indices, if present.
    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.adjacency[a]
            .binary_search_by(|(n, _)| n.cmp(&b))
            .ok()
            .map(|pos| self.adjacency[a][pos].1)
    }

    /// Edges as (smaller id, larger id, weight), sorted.
    pub fn edges(&self) -> Vec<(&str, &str, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &(j, w) in adj {
                if i < j {
                    out.push((self.nodes[i].as_str(), self.nodes[j].as_str(), w));
                }
            }
        }
        out
    }

    fn from_accumulated(
        node_ids: BTreeSet<String>,
        edge_weights: BTreeMap<(String, String), f64>,
    ) -> Self {
        let nodes: Vec<String> = node_ids.into_iter().collect();
        let index: BTreeMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
        for ((a, b), w) in edge_weights {
            let (ia, ib) = (index[a.as_str()], index[b.as_str()]);
            adjacency[ia].push((ib, w));
            adjacency[ib].push((ia, w));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(n, _)| n);
        }
        CoauthorGraph { nodes, adjacency }
    }
}

/// Accumulate the co-authorship graph over publication records. Single
/// author records contribute an isolated node; a duplicated author within
/// one record is an error.
pub fn build_graph(records: &[PublicationRecord]) -> Result<CoauthorGraph> {
    let mut node_ids: BTreeSet<String> = BTreeSet::new();
    // Per edge, count contributions by their denominator A(m)-1 and sum at
    // the end in a fixed order, so the result does not depend on record
    // order even at the last bit.
    let mut contributions: BTreeMap<(String, String), BTreeMap<u64, u64>> = BTreeMap::new();
    for record in records {
        let authors: Vec<String> = record.authors.iter().map(|a| normalize_author(a)).collect();
        let mut seen = BTreeSet::new();
        for author in &authors {
            if !seen.insert(author.clone()) {
                return Err(Error::DuplicateAuthor {
                    record: record.id.clone(),
                    author: author.clone(),
                });
            }
            node_ids.insert(author.clone());
        }
        let total = authors.len();
        if total >= 2 {
            let denominator = (total - 1) as u64;
            for i in 0..total {
                for j in (i + 1)..total {
                    let key = if authors[i] <= authors[j] {
                        (authors[i].clone(), authors[j].clone())
                    } else {
                        (authors[j].clone(), authors[i].clone())
                    };
                    *contributions.entry(key).or_default().entry(denominator).or_insert(0) += 1;
                }
            }
        }
    }
    let edge_weights = contributions
        .into_iter()
        .map(|(key, by_denominator)| {
            let weight = by_denominator
                .into_iter()
                .map(|(denominator, count)| count as f64 / denominator as f64)
                .sum();
            (key, weight)
        })
        .collect();
    Ok(CoauthorGraph::from_accumulated(node_ids, edge_weights))
}

/// Restrict the graph to `keep`, optionally dropping nodes left without
/// edges. Unknown ids are an error.
pub fn induced_subgraph(
    graph: &CoauthorGraph,
    keep: &BTreeSet<String>,
    drop_isolated: bool,
) -> Result<CoauthorGraph> {
    for id in keep {
        if !graph.contains(id) {
            return Err(Error::UnknownId { kind: "author", id: id.clone() });
        }
    }
    let mut edge_weights: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut connected: BTreeSet<String> = BTreeSet::new();
    for (a, b, w) in graph.edges() {
        if keep.contains(a) && keep.contains(b) {
            edge_weights.insert((a.to_string(), b.to_string()), w);
            connected.insert(a.to_string());
            connected.insert(b.to_string());
        }
    }
    let node_ids = if drop_isolated { connected } else { keep.clone() };
    Ok(CoauthorGraph::from_accumulated(node_ids, edge_weights))
}

/// Basic structural counts and weight/degree summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub component_count: usize,
    pub isolated_count: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
    pub total_weight: f64,
    pub min_weight: f64,
    pub max_weight: f64,
}

pub fn graph_stats(graph: &CoauthorGraph) -> GraphStats {
    let n = graph.node_count();
    let degrees: Vec<usize> = (0..n).map(|i| graph.degree(i)).collect();
    let weights: Vec<f64> = graph.edges().iter().map(|&(_, _, w)| w).collect();

    let mut component_count = 0;
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] {
            continue;
        }
        component_count += 1;
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(i) = stack.pop() {
            for &(j, _) in graph.neighbors(i) {
                if !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
    }

    GraphStats {
        node_count: n,
        edge_count: weights.len(),
        component_count,
        isolated_count: degrees.iter().filter(|&&d| d == 0).count(),
        min_degree: degrees.iter().copied().min().unwrap_or(0),
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        mean_degree: if n == 0 {
            0.0
        } else {
            degrees.iter().sum::<usize>() as f64 / n as f64
        },
        total_weight: weights.iter().sum(),
        min_weight: if weights.is_empty() {
            0.0
        } else {
            weights.iter().copied().fold(f64::INFINITY, f64::min)
        },
        max_weight: weights.iter().copied().fold(0.0, f64::max),
    }
}

/// DOT rendering for external graph viewers.
pub fn to_dot(graph: &CoauthorGraph) -> String {
    let mut out = String::from("graph coauthorship {\n");
    for node in graph.nodes() {
        out.push_str(&format!("  \"{}\";\n", node.replace('"', "\\\"")));
    }
    for (a, b, w) in graph.edges() {
        out.push_str(&format!(
            "  \"{}\" -- \"{}\" [weight={}];\n",
            a.replace('"', "\\\""),
            b.replace('"', "\\\""),
            w
        ));
    }
    out.push_str("}\n");
    out
}
