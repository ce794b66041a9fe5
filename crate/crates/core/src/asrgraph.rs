//! ASR-overlap weights and the edge-weighted cluster graph.
//!
//! Each vertex is a cluster; an edge carries the overlap metric
//! `w = 2ε|J ∩ J'| / (r + r')`. Weights near one say the pair should be
//! orthogonalized onto different patterns, weights near zero say multiplexing
//! on a shared pattern costs little.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::channel::SupportSet;
use crate::textfmt::sig9;
use crate::{Error, Result};

/// How two clusters' support sets relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapClass {
    /// No shared support indices.
    Disjoint,
    /// Shared indices, but both clusters keep exclusive ones.
    Partial,
    /// One support contains the other (non-empty intersection).
    Full,
}

/// Overlap metric `2ε|Ja ∩ Jb| / (r_a + r_b)`, in [0, ε].
///
/// ε is applied last so that `overlap_weight(a, b, ε)` equals
/// `ε · overlap_weight(a, b, 1)` exactly.
pub fn overlap_weight(a: &SupportSet, b: &SupportSet, epsilon: f64) -> Result<f64> {
    let denom = a.cardinality() + b.cardinality();
    if denom == 0 {
        return Err(Error::EmptySupport(
            "overlap weight undefined for two empty supports".to_string(),
        ));
    }
    let inter = a.intersection_count(b) as f64;
    Ok(epsilon * (2.0 * inter / denom as f64))
}

pub fn classify_overlap(a: &SupportSet, b: &SupportSet) -> OverlapClass {
    let inter = a.intersection_count(b);
    if inter == 0 {
        OverlapClass::Disjoint
    } else if inter == a.cardinality() || inter == b.cardinality() {
        OverlapClass::Full
    } else {
        OverlapClass::Partial
    }
}

/// Undirected edge-weighted graph over clusters; immutable once built, so
/// shared concurrent reads are safe.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeightedGraph {
    num_vertices: usize,
    adjacency: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
    num_edges: usize,
}

impl EdgeWeightedGraph {
    /// Build from an explicit edge list. Weights must be positive and finite;
    /// self-loops and duplicate pairs are rejected.
    pub fn new(num_vertices: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); num_vertices];
        let mut seen = HashSet::new();
        for &(a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop on vertex {a}")));
            }
            if a >= num_vertices || b >= num_vertices {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) out of range for {num_vertices} vertices"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidInput(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for adj in &mut adjacency {
            adj.sort_unstable_by_key(|&(n, _)| n);
        }
        let degrees = adjacency
            .iter()
            .map(|adj| adj.iter().map(|&(_, w)| w).sum())
            .collect();
        Ok(Self { num_vertices, adjacency, degrees, num_edges: edges.len() })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Sum of incident edge weights.
    pub fn degree(&self, vertex: usize) -> f64 {
        self.degrees[vertex]
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.adjacency[a]
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| self.adjacency[a][i].1)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.weight(a, b).is_some()
    }

    /// Neighbors of a vertex with their weights, ascending by index.
    pub fn neighbors(&self, vertex: usize) -> &[(usize, f64)] {
        &self.adjacency[vertex]
    }

    /// Edges as `(low, high, weight)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(v, adj)| {
            adj.iter()
                .filter(move |&&(n, _)| n > v)
                .map(move |&(n, w)| (v, n, w))
        })
    }

    /// Edge-list text: header `ewg <G> <P-hint>` and one `g g' weight` line
    /// per edge in canonical order.
    pub fn to_edge_list(&self, pattern_hint: usize) -> String {
        let mut out = format!("ewg {} {}\n", self.num_vertices, pattern_hint);
        for (a, b, w) in self.edges() {
            let _ = writeln!(out, "{a} {b} {}", sig9(w));
        }
        out
    }

    /// Parse the edge-list text format; returns the graph and the preferred
    /// pattern count from the header.
    pub fn from_edge_list(text: &str) -> Result<(Self, usize)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (lineno, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `ewg <G> <P>` header".to_string(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "ewg" {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `ewg <G> <P>` header, found `{header}`"),
            });
        }
        let num_vertices: usize = fields[1].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad vertex count `{}`", fields[1]),
        })?;
        let pattern_hint: usize = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad pattern hint `{}`", fields[2]),
        })?;

        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected `g g' weight`, found `{line}`"),
                });
            }
            let parse_vertex = |t: &str| -> Result<usize> {
                t.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad vertex `{t}`"),
                })
            };
            let a = parse_vertex(fields[0])?;
            let b = parse_vertex(fields[1])?;
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad weight `{}`", fields[2]),
            })?;
            edges.push((a, b, w));
        }
        let graph = Self::new(num_vertices, &edges).map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?;
        Ok((graph, pattern_hint))
    }
}

/// Pairwise overlap graph; an edge is stored only when its weight exceeds
/// `weight_min`. Pairs of two empty supports carry no overlap and no edge.
pub fn build_graph(supports: &[SupportSet], epsilon: f64, weight_min: f64) -> EdgeWeightedGraph {
    let mut edges = Vec::new();
    for a in 0..supports.len() {
        for b in a + 1..supports.len() {
            if supports[a].cardinality() + supports[b].cardinality() == 0 {
                continue;
            }
            let w = overlap_weight(&supports[a], &supports[b], epsilon)
                .expect("non-empty support pair");
            if w > weight_min {
                edges.push((a, b, w));
            }
        }
    }
    EdgeWeightedGraph::new(supports.len(), &edges).expect("pairwise edges are valid")
}

/// Vertices sorted by descending degree; equal degrees fall back to ascending
/// index so the order is fully deterministic.
pub fn degree_order(graph: &EdgeWeightedGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.num_vertices()).collect();
    order.sort_by(|&a, &b| {
        graph
            .degree(b)
            .partial_cmp(&graph.degree(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn set(indices: &[usize]) -> SupportSet {
        SupportSet::new(indices.to_vec(), 8).unwrap()
    }

    fn random_set(rng: &mut ChaCha12Rng, ambient: usize) -> SupportSet {
        let indices = (0..ambient).filter(|_| rng.random::<f64>() < 0.4).collect();
        SupportSet::new(indices, ambient).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(overlap_weight(&set(&[1, 2, 3]), &set(&[4, 5]), 1.0).unwrap(), 0.0);
        assert_eq!(overlap_weight(&set(&[0, 1, 2]), &set(&[0, 1, 2]), 1.0).unwrap(), 1.0);
        assert_eq!(
            overlap_weight(&set(&[1, 2, 3, 4]), &set(&[3, 4, 5, 6]), 1.0).unwrap(),
            0.5
        );
    }

    #[test]
    fn weight_rejects_two_empty_supports() {
        let err = overlap_weight(&SupportSet::empty(8), &SupportSet::empty(8), 1.0).unwrap_err();
        assert!(matches!(err, Error::EmptySupport(_)));
        // one empty side is fine: no overlap
        assert_eq!(overlap_weight(&SupportSet::empty(8), &set(&[1]), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn weight_symmetry_bound_and_epsilon_scaling() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..300 {
            let a = random_set(&mut rng, 16);
            let b = random_set(&mut rng, 16);
            if a.is_empty() && b.is_empty() {
                continue;
            }
            let eps = rng.random_range(0.05..=1.0);
            let w_ab = overlap_weight(&a, &b, eps).unwrap();
            let w_ba = overlap_weight(&b, &a, eps).unwrap();
            assert_eq!(w_ab.to_bits(), w_ba.to_bits());
            assert!((0.0..=eps + 1e-15).contains(&w_ab));
            // exact scale equivariance
            let unit = overlap_weight(&a, &b, 1.0).unwrap();
            assert_eq!(w_ab.to_bits(), (eps * unit).to_bits());
            // zero weight exactly when disjoint
            assert_eq!(w_ab == 0.0, classify_overlap(&a, &b) == OverlapClass::Disjoint);
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_overlap(&set(&[1, 2]), &set(&[3, 4])), OverlapClass::Disjoint);
        assert_eq!(classify_overlap(&set(&[1, 2]), &set(&[1, 2, 3])), OverlapClass::Full);
        assert_eq!(classify_overlap(&set(&[1, 2, 3]), &set(&[3, 4])), OverlapClass::Partial);
        assert_eq!(classify_overlap(&set(&[1, 2]), &set(&[1, 2])), OverlapClass::Full);
    }

    #[test]
    fn build_graph_disjoint_is_edgeless() {
        let supports = vec![set(&[0, 1]), set(&[2, 3]), set(&[4, 5])];
        let g = build_graph(&supports, 1.0, 0.0);
        assert_eq!(g.num_edges(), 0);
        for v in 0..3 {
            assert_eq!(g.degree(v), 0.0);
        }
    }

    #[test]
    fn build_graph_identical_pair() {
        let supports = vec![set(&[1, 2]), set(&[1, 2])];
        let g = build_graph(&supports, 1.0, 0.0);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.weight(0, 1), Some(1.0));
        assert_eq!(g.degree(0), 1.0);
        assert_eq!(g.degree(1), 1.0);
    }

    #[test]
    fn build_graph_four_cycle() {
        let supports = vec![set(&[1, 2]), set(&[2, 3]), set(&[3, 4]), set(&[4, 1])];
        let g = build_graph(&supports, 1.0, 0.0);
        assert_eq!(g.num_edges(), 4);
        for &(a, b) in &[(0, 1), (1, 2), (2, 3), (0, 3)] {
            assert_eq!(g.weight(a, b), Some(0.5), "edge ({a},{b})");
        }
        assert_eq!(g.weight(0, 2), None);
        assert_eq!(g.weight(1, 3), None);
    }

    #[test]
    fn build_graph_empty_supports_get_no_edges() {
        let supports = vec![SupportSet::empty(8), SupportSet::empty(8), set(&[1])];
        let g = build_graph(&supports, 1.0, 0.0);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn build_graph_threshold_omits_edges() {
        let supports = vec![set(&[1, 2, 3, 4]), set(&[4, 5, 6, 7]), set(&[1, 2, 3, 4])];
        // w(0,1) = 0.25, w(0,2) = 1.0, w(1,2) = 0.25
        let g = build_graph(&supports, 1.0, 0.3);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.weight(0, 2), Some(1.0));
    }

    #[test]
    fn build_graph_with_zero_threshold_stores_positive_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for _ in 0..50 {
            let supports: Vec<SupportSet> =
                (0..6).map(|_| random_set(&mut rng, 12)).collect();
            let g = build_graph(&supports, 1.0, 0.0);
            for a in 0..6 {
                for b in a + 1..6 {
                    let expect = supports[a].intersection_count(&supports[b]) > 0;
                    assert_eq!(g.has_edge(a, b), expect);
                }
            }
        }
    }

    #[test]
    fn degree_order_examples() {
        let edgeless = EdgeWeightedGraph::new(3, &[]).unwrap();
        assert_eq!(degree_order(&edgeless), vec![0, 1, 2]);

        // degrees (1.0, 1.3, 1.2, 0.9)
        let g = EdgeWeightedGraph::new(
            4,
            &[(0, 1, 0.9), (1, 2, 0.4), (2, 3, 0.8), (0, 3, 0.1)],
        )
        .unwrap();
        assert_eq!(degree_order(&g), vec![1, 2, 0, 3]);

        // tie between vertices 2 and 5 at degree 0.7
        let g = EdgeWeightedGraph::new(6, &[(2, 3, 0.7), (5, 3, 0.7)]).unwrap();
        assert_eq!(degree_order(&g)[..3], [3, 2, 5]);
    }

    #[test]
    fn degree_order_invariant_to_epsilon() {
        // power-of-two factors scale every degree sum exactly, so the argsort
        // must match bit-for-bit; arbitrary ε can reorder exact float ties
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        for _ in 0..50 {
            let supports: Vec<SupportSet> =
                (0..8).map(|_| random_set(&mut rng, 16)).collect();
            let base = degree_order(&build_graph(&supports, 1.0, 0.0));
            for eps in [0.5, 0.25, 0.125] {
                assert_eq!(degree_order(&build_graph(&supports, eps, 0.0)), base);
            }
        }
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert!(EdgeWeightedGraph::new(3, &[(0, 0, 0.5)]).is_err());
        assert!(EdgeWeightedGraph::new(3, &[(0, 3, 0.5)]).is_err());
        assert!(EdgeWeightedGraph::new(3, &[(0, 1, 0.0)]).is_err());
        assert!(EdgeWeightedGraph::new(3, &[(0, 1, 0.5), (1, 0, 0.4)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = EdgeWeightedGraph::new(
            4,
            &[(0, 1, 0.9), (1, 2, 0.4), (2, 3, 0.8), (0, 3, 0.1)],
        )
        .unwrap();
        let text = g.to_edge_list(3);
        assert!(text.starts_with("ewg 4 3\n"));
        let (parsed, hint) = EdgeWeightedGraph::from_edge_list(&text).unwrap();
        assert_eq!(hint, 3);
        assert_eq!(parsed, g);
    }

    #[test]
    fn edge_list_parse_errors() {
        assert!(matches!(
            EdgeWeightedGraph::from_edge_list("").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            EdgeWeightedGraph::from_edge_list("graph 3 2\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            EdgeWeightedGraph::from_edge_list("ewg 3 2\n0 1\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(EdgeWeightedGraph::from_edge_list("ewg 3 2\n0 5 0.5\n").is_err());
        assert!(EdgeWeightedGraph::from_edge_list("ewg 3 2\n0 1 0.5\n1 0 0.5\n").is_err());
    }
}
