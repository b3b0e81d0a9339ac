//! Directed-graph kernel: connectivity, centralities, and rank/set comparisons.

mod centrality;
mod compare;
mod components;

pub use centrality::{betweenness_centrality, pagerank, pagerank_with, PageRankConfig};
pub use compare::{jaccard_edge_similarity, kendall_tau};
pub use components::{largest_component_fraction, strongly_connected_components, weakly_connected_components};

use std::collections::BTreeSet;
use std::ops::Deref;

/// Directed graph over nodes `0..n` with non-negative edge weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirectedGraph {
    out: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl DirectedGraph {
    pub fn new(nodes: usize) -> Self {
        Self {
            out: vec![Vec::new(); nodes],
            edge_count: 0,
        }
    }

    /// Builds a graph with unit weights.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(nodes: usize, edges: I) -> Self {
        let mut g = Self::new(nodes);
        for (u, v) in edges {
            g.add_edge(u, v, 1.0);
        }
        g
    }

    /// Adds `u → v`, or overwrites its weight if it already exists.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) {
        assert!(weight >= 0.0, "edge weights must be non-negative");
        assert!(u < self.out.len() && v < self.out.len(), "node out of range");
        match self.out[u].iter_mut().find(|(t, _)| *t == v) {
            Some(e) => e.1 = weight,
            None => {
                self.out[u].push((v, weight));
                self.edge_count += 1;
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn out_edges(&self, u: usize) -> &[(usize, f64)] {
        &self.out[u]
    }

    pub fn successors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[u].iter().map(|&(v, _)| v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].iter().any(|&(t, _)| t == v)
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        self.out.iter().map(Vec::len).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.out.len()];
        for adj in &self.out {
            for &(v, _) in adj {
                d[v] += 1;
            }
        }
        d
    }

    /// Same nodes with every edge reversed.
    pub fn reversed(&self) -> Self {
        let mut g = Self::new(self.out.len());
        for (u, adj) in self.out.iter().enumerate() {
            for &(v, w) in adj {
                g.out[v].push((u, w));
            }
        }
        g.edge_count = self.edge_count;
        g
    }

    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().map(move |&(v, _)| (u, v)))
            .collect()
    }

    /// Subgraph induced by `nodes`; node `nodes[i]` becomes `i`.
    pub fn induced(&self, nodes: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.out.len()];
        for (i, &n) in nodes.iter().enumerate() {
            pos[n] = i;
        }
        let mut g = Self::new(nodes.len());
        for (i, &n) in nodes.iter().enumerate() {
            for &(v, w) in &self.out[n] {
                if pos[v] != usize::MAX {
                    g.add_edge(i, pos[v], w);
                }
            }
        }
        g
    }
}

/// One score per node of the graph it was computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector(pub Vec<f64>);

impl Deref for RankVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for RankVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
