use std::collections::VecDeque;

use super::{DirectedGraph, RankVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    /// Stop once the L1 change between iterations drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// PageRank with the default iteration cap.
pub fn pagerank(g: &DirectedGraph, damping: f64, tol: f64) -> Result<RankVector> {
    pagerank_with(
        g,
        PageRankConfig {
            damping,
            tol,
            ..Default::default()
        },
    )
}

/// Unweighted power iteration. Mass of dangling nodes is spread uniformly.
pub fn pagerank_with(g: &DirectedGraph, cfg: PageRankConfig) -> Result<RankVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1), got {}",
            cfg.damping
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let d = cfg.damping;
    let nf = n as f64;
    let outdeg = g.out_degrees();
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..cfg.max_iter {
        let dangling: f64 = (0..n).filter(|&u| outdeg[u] == 0).map(|u| rank[u]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for u in 0..n {
            if outdeg[u] > 0 {
                let share = d * rank[u] / outdeg[u] as f64;
                for v in g.successors(u) {
                    next[v] += share;
                }
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < cfg.tol {
            break;
        }
    }
    Ok(RankVector(rank))
}

/// Brandes' algorithm on hop counts (weights ignored). For every ordered pair
/// `(s, t)` with `s ≠ v ≠ t`, node `v` receives the fraction of shortest
/// `s → t` paths passing through it. Scores are not normalized.
pub fn betweenness_centrality(g: &DirectedGraph) -> RankVector {
    let n = g.node_count();
    let mut bc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();

    for s in 0..n {
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = -1);
        delta.iter_mut().for_each(|x| *x = 0.0);
        preds.iter_mut().for_each(Vec::clear);
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in g.successors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    RankVector(bc)
}
