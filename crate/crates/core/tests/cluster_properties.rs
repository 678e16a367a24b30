//! Reference-implementation and structural checks for the agglomerative
//! clustering: a from-scratch oracle that recomputes cluster distances from
//! the original matrix, a minimum-spanning-tree oracle for single linkage,
//! and cut/permutation properties.

use bidlab_core::cluster::{build_dendrogram, cut_dendrogram, Dendrogram, Linkage};
use bidlab_core::matrix::SimilarityMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> SimilarityMatrix {
    SimilarityMatrix::from_pairwise(
        (0..n).map(|i| format!("e{i:02}")).collect(),
        |_, _| (rng.gen_range(0..=64) as f64) / 64.0,
    )
    .unwrap()
}

/// Agglomeration that recomputes every cluster-pair distance from the
/// original pairwise distances at every step (no incremental updates).
fn oracle_dendrogram(sim: &SimilarityMatrix, linkage: Linkage) -> Dendrogram {
    let n = sim.len();
    let d0 = |i: usize, j: usize| 1.0 - sim.get(i, j);
    // (members, node id, representative = smallest leaf index)
    let mut clusters: Vec<(Vec<usize>, usize)> = (0..n).map(|i| (vec![i], i)).collect();
    let mut merges = Vec::new();
    for step in 0..(n - 1) {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut cross = Vec::new();
                for &x in &clusters[a].0 {
                    for &y in &clusters[b].0 {
                        cross.push(d0(x, y));
                    }
                }
                let d = match linkage {
                    Linkage::Single => cross.iter().copied().fold(f64::INFINITY, f64::min),
                    Linkage::Complete => cross.iter().copied().fold(0.0, f64::max),
                    Linkage::Average => cross.iter().sum::<f64>() / cross.len() as f64,
                    Linkage::Ward => unreachable!("oracle covers graph-distance linkages"),
                };
                let ra = *clusters[a].0.iter().min().unwrap();
                let rb = *clusters[b].0.iter().min().unwrap();
                let key = (d, ra.min(rb), ra.max(rb), a, b);
                best = Some(match best {
                    None => key,
                    Some(cur) if (key.0, key.1, key.2) < (cur.0, cur.1, cur.2) => key,
                    Some(cur) => cur,
                });
            }
        }
        let (d, _, _, a, b) = best.unwrap();
        let (left, right) = {
            let ra = *clusters[a].0.iter().min().unwrap();
            let rb = *clusters[b].0.iter().min().unwrap();
            if ra <= rb {
                (clusters[a].1, clusters[b].1)
            } else {
                (clusters[b].1, clusters[a].1)
            }
        };
        merges.push(bidlab_core::cluster::Merge { left, right, height: d });
        let mut merged_members = clusters[a].0.clone();
        merged_members.extend(clusters[b].0.clone());
        let merged = (merged_members, n + step);
        clusters.remove(b);
        clusters.remove(a);
        clusters.push(merged);
    }
    Dendrogram { leaves: sim.labels().to_vec(), merges }
}

fn assert_same_tree(got: &Dendrogram, expected: &Dendrogram) {
    assert_eq!(got.leaves, expected.leaves);
    assert_eq!(got.merges.len(), expected.merges.len());
    for (g, e) in got.merges.iter().zip(&expected.merges) {
        assert_eq!((g.left, g.right), (e.left, e.right));
        assert!((g.height - e.height).abs() < 1e-9, "{} vs {}", g.height, e.height);
    }
}

#[test]
fn matches_direct_recompute_oracle_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..12 {
        let n = rng.gen_range(3..12);
        let sim = random_similarity(&mut rng, n);
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let got = build_dendrogram(&sim, linkage).unwrap();
            let expected = oracle_dendrogram(&sim, linkage);
            assert_same_tree(&got, &expected);
        }
    }
}

#[test]
fn worked_example_tree_matches_oracle() {
    let third = 1.0 / 3.0;
    let sim = SimilarityMatrix::new(
        vec!["13".into(), "14".into(), "15".into(), "16".into(), "17".into()],
        vec![
            vec![1.0, 0.8, 0.25, 0.25, 0.8],
            vec![0.8, 1.0, 0.0, 0.5, 1.0],
            vec![0.25, 0.0, 1.0, third, 0.0],
            vec![0.25, 0.5, third, 1.0, 0.5],
            vec![0.8, 1.0, 0.0, 0.5, 1.0],
        ],
    )
    .unwrap();
    let got = build_dendrogram(&sim, Linkage::Average).unwrap();
    assert_same_tree(&got, &oracle_dendrogram(&sim, Linkage::Average));
    assert_eq!((got.merges[0].left, got.merges[0].right), (1, 4));
    assert_eq!(got.merges[0].height, 0.0);
}

#[test]
fn two_block_matrix_splits_at_the_top_for_all_linkages() {
    // Eight points, two planted blocks with high internal similarity.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let block = |i: usize| i / 4;
    let sim = SimilarityMatrix::from_pairwise(
        (0..8).map(|i| format!("p{i}")).collect(),
        |i, j| {
            if block(i) == block(j) {
                0.85 + rng.gen_range(0..8) as f64 / 100.0
            } else {
                0.05 + rng.gen_range(0..8) as f64 / 100.0
            }
        },
    )
    .unwrap();
    for linkage in Linkage::ALL {
        let d = build_dendrogram(&sim, linkage).unwrap();
        let root = d.merges.last().unwrap();
        let below_root = d.merges[d.merges.len() - 2].height;
        let cut = cut_dendrogram(&d, (below_root + root.height) / 2.0);
        assert_eq!(cut.len(), 2, "{linkage:?}");
        let expected: Vec<Vec<String>> = vec![
            (0..4).map(|i| format!("p{i}")).collect(),
            (4..8).map(|i| format!("p{i}")).collect(),
        ];
        assert_eq!(cut.clusters, expected, "{linkage:?}");
    }
}

/// Prim's algorithm over the distance graph.
fn mst_edge_weights(sim: &SimilarityMatrix) -> Vec<f64> {
    let n = sim.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    in_tree[0] = true;
    for j in 1..n {
        best[j] = 1.0 - sim.get(0, j);
    }
    let mut weights = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let (next, &w) = best
            .iter()
            .enumerate()
            .filter(|(j, _)| !in_tree[*j])
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        weights.push(w);
        in_tree[next] = true;
        for j in 0..n {
            if !in_tree[j] {
                best[j] = best[j].min(1.0 - sim.get(next, j));
            }
        }
    }
    weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
    weights
}

#[test]
fn single_linkage_heights_equal_mst_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let n = rng.gen_range(3..15);
        let sim = random_similarity(&mut rng, n);
        let d = build_dendrogram(&sim, Linkage::Single).unwrap();
        let mut heights: Vec<f64> = d.merges.iter().map(|m| m.height).collect();
        heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mst = mst_edge_weights(&sim);
        for (h, w) in heights.iter().zip(&mst) {
            assert!((h - w).abs() < 1e-12);
        }
    }
}

#[test]
fn heights_are_non_decreasing_for_all_linkages() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..8 {
        let n = rng.gen_range(3..20);
        let sim = random_similarity(&mut rng, n);
        for linkage in Linkage::ALL {
            let d = build_dendrogram(&sim, linkage).unwrap();
            for pair in d.merges.windows(2) {
                assert!(
                    pair[1].height >= pair[0].height - 1e-12,
                    "{linkage:?}: {} then {}",
                    pair[0].height,
                    pair[1].height
                );
            }
        }
    }
}

#[test]
fn permuting_labels_gives_isomorphic_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 9;
    let sim = random_similarity(&mut rng, n);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let permuted = SimilarityMatrix::new(
        perm.iter().map(|&i| sim.labels()[i].clone()).collect(),
        perm.iter()
            .map(|&i| perm.iter().map(|&j| sim.get(i, j)).collect())
            .collect(),
    )
    .unwrap();
    for linkage in Linkage::ALL {
        let a = build_dendrogram(&sim, linkage).unwrap();
        let b = build_dendrogram(&permuted, linkage).unwrap();
        let mut ha: Vec<f64> = a.merges.iter().map(|m| m.height).collect();
        let mut hb: Vec<f64> = b.merges.iter().map(|m| m.height).collect();
        ha.sort_by(|x, y| x.partial_cmp(y).unwrap());
        hb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in ha.iter().zip(&hb) {
            assert!((x - y).abs() < 1e-9, "{linkage:?}");
        }
        // The flat partitions agree as sets of label sets.
        let t = a.root_height() / 2.0;
        let cut_a: std::collections::BTreeSet<Vec<String>> =
            cut_dendrogram(&a, t).clusters.into_iter().collect();
        let cut_b: std::collections::BTreeSet<Vec<String>> =
            cut_dendrogram(&b, t).clusters.into_iter().collect();
        assert_eq!(cut_a, cut_b, "{linkage:?}");
    }
}

#[test]
fn lower_threshold_refines_higher_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let n = rng.gen_range(4..16);
        let sim = random_similarity(&mut rng, n);
        let d = build_dendrogram(&sim, Linkage::Average).unwrap();
        let root = d.root_height();
        for _ in 0..5 {
            let t1 = rng.gen_range(0.0..root.max(1e-9));
            let t2 = rng.gen_range(t1..=root);
            let fine = cut_dendrogram(&d, t1);
            let coarse = cut_dendrogram(&d, t2);
            for small in &fine.clusters {
                let container = coarse
                    .clusters
                    .iter()
                    .filter(|big| small.iter().all(|m| big.contains(m)))
                    .count();
                assert_eq!(container, 1, "every fine cluster sits in exactly one coarse one");
            }
        }
    }
}
