//! Node-weighted latency and k-LatMin target selection.
//!
//! A path costs the sum of latencies of every node on it except the
//! destination, so the search runs over edge weights `w(u→v) = latency(u)`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{betweenness_centrality, strongly_connected_components, DirectedGraph};

/// Largest number of subsets [`exact_k_latmin`] will enumerate.
pub const EXACT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyGraph {
    graph: DirectedGraph,
    latency: Vec<f64>,
    targeted: BTreeSet<usize>,
}

impl LatencyGraph {
    pub fn new(graph: DirectedGraph, latency: Vec<f64>) -> Result<Self> {
        if latency.len() != graph.node_count() {
            return Err(Error::InvalidArgument(format!(
                "{} latencies for {} nodes",
                latency.len(),
                graph.node_count()
            )));
        }
        if let Some((i, l)) = latency.iter().enumerate().find(|(_, l)| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidArgument(format!("node {i} has latency {l}")));
        }
        Ok(Self {
            graph,
            latency,
            targeted: BTreeSet::new(),
        })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn latency(&self, n: usize) -> f64 {
        self.latency[n]
    }

    pub fn latencies(&self) -> &[f64] {
        &self.latency
    }

    pub fn targeted(&self) -> &BTreeSet<usize> {
        &self.targeted
    }

    /// Zeroes the latency of `n`.
    pub fn target(&mut self, n: usize) {
        self.latency[n] = 0.0;
        self.targeted.insert(n);
    }

    /// Copy with every node of `nodes` targeted.
    pub fn with_targets(&self, nodes: &[usize]) -> Self {
        let mut g = self.clone();
        for &n in nodes {
            g.target(n);
        }
        g
    }
}

/// Whether average latency tolerates unreachable pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Permissive,
}

/// Latency of an explicit path.
pub fn path_latency(g: &LatencyGraph, path: &[usize]) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("empty path".into()));
    }
    if let Some(&n) = path.iter().find(|&&n| n >= g.node_count()) {
        return Err(Error::InvalidArgument(format!("node {n} out of range")));
    }
    let mut total = 0.0;
    for w in path.windows(2) {
        if !g.graph.has_edge(w[0], w[1]) {
            return Err(Error::InvalidArgument(format!("no edge {} -> {}", w[0], w[1])));
        }
        total += g.latency[w[0]];
    }
    Ok(total)
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Single-source minimum latencies; unreachable nodes are `INFINITY`.
fn dijkstra(graph: &DirectedGraph, latency: &[f64], s: usize, out: &mut [f64]) {
    out.fill(f64::INFINITY);
    out[s] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, s));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > out[u] {
            continue;
        }
        let nd = d + latency[u];
        for v in graph.successors(u) {
            if nd < out[v] {
                out[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
}

/// Minimum latency from `s` to every node; `None` where unreachable.
pub fn latencies_from(g: &LatencyGraph, s: usize) -> Vec<Option<f64>> {
    let mut d = vec![0.0; g.node_count()];
    dijkstra(&g.graph, &g.latency, s, &mut d);
    d.into_iter().map(|x| x.is_finite().then_some(x)).collect()
}

/// Minimum path latency from `s` to `t`, or `None` if `t` is unreachable.
pub fn pair_latency(g: &LatencyGraph, s: usize, t: usize) -> Result<Option<f64>> {
    let n = g.node_count();
    if s >= n || t >= n {
        return Err(Error::InvalidArgument(format!("node out of range (n = {n})")));
    }
    if s == t {
        return Err(Error::InvalidArgument("pair latency needs distinct nodes".into()));
    }
    Ok(latencies_from(g, s)[t])
}

/// Row-major all-pairs latency matrix.
fn all_pairs(graph: &DirectedGraph, latency: &[f64]) -> Vec<f64> {
    let n = graph.node_count();
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(s, row)| dijkstra(graph, latency, s, row));
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageLatency {
    pub mean: f64,
    pub reachable_pairs: usize,
    pub total_pairs: usize,
}

fn summarize(d: &[f64], n: usize) -> (f64, usize) {
    let mut sum = 0.0;
    let mut reachable = 0;
    for s in 0..n {
        for t in 0..n {
            let x = d[s * n + t];
            if s != t && x.is_finite() {
                sum += x;
                reachable += 1;
            }
        }
    }
    (sum, reachable)
}

fn average_of(d: &[f64], n: usize, mode: Mode) -> Result<AverageLatency> {
    let total = n * n.saturating_sub(1);
    if total == 0 {
        return Err(Error::Undefined("average latency needs at least 2 nodes".into()));
    }
    let (sum, reachable) = summarize(d, n);
    if reachable < total && mode == Mode::Strict {
        return Err(Error::NotStronglyConnected { reachable, total });
    }
    if reachable == 0 {
        return Err(Error::Undefined("no reachable pairs".into()));
    }
    Ok(AverageLatency {
        mean: sum / reachable as f64,
        reachable_pairs: reachable,
        total_pairs: total,
    })
}

/// Mean pair latency over ordered pairs `s ≠ t`.
///
/// Strict mode rejects graphs that are not strongly connected; permissive mode
/// averages over reachable pairs only.
pub fn average_network_latency(g: &LatencyGraph, mode: Mode) -> Result<AverageLatency> {
    let n = g.node_count();
    average_of(&all_pairs(&g.graph, &g.latency), n, mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Heuristic {
    MaxLat,
    MaxBc,
    Greedy,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [Heuristic::MaxLat, Heuristic::MaxBc, Heuristic::Greedy];

    pub fn tag(self) -> &'static str {
        match self {
            Heuristic::MaxLat => "max-lat",
            Heuristic::MaxBc => "max-bc",
            Heuristic::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|h| h.tag() == norm || h.tag().replace('-', "") == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown heuristic `{s}` (expected max-lat, max-bc or greedy)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizationTrace {
    pub heuristic: Heuristic,
    pub baseline: AverageLatency,
    pub selected: Vec<usize>,
    /// Average latency after each selection divided by the baseline.
    pub relative: Vec<f64>,
}

impl MinimizationTrace {
    /// Rows `heuristic step node relative`, steps counted from 1.
    pub fn write_tsv<W: Write>(&self, mut w: W, labels: Option<&[String]>) -> io::Result<()> {
        for (i, (&n, r)) in self.selected.iter().zip(&self.relative).enumerate() {
            match labels {
                Some(l) => writeln!(w, "{}\t{}\t{}\t{}", self.heuristic, i + 1, l[n], r)?,
                None => writeln!(w, "{}\t{}\t{}\t{}", self.heuristic, i + 1, n, r)?,
            }
        }
        Ok(())
    }
}

/// Nodes by descending score, ties by ascending id.
fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Exact average latency with `targets` zeroed.
fn evaluate(g: &LatencyGraph, targets: &[usize], mode: Mode) -> Result<AverageLatency> {
    average_network_latency(&g.with_targets(targets), mode)
}

/// Total latency over `s ≠ t` when `c` is zeroed, given the current matrix.
fn total_with(d: &[f64], n: usize, c: usize, from_c: &[f64]) -> f64 {
    let mut sum = 0.0;
    for s in 0..n {
        let row = &d[s * n..(s + 1) * n];
        if s == c {
            sum += from_c
                .iter()
                .enumerate()
                .filter(|&(t, x)| t != s && x.is_finite())
                .map(|(_, x)| x)
                .sum::<f64>();
            continue;
        }
        let via = row[c];
        let mut acc = 0.0;
        if via.is_finite() {
            for t in 0..n {
                let x = row[t].min(via + from_c[t]);
                if t != s && x.is_finite() {
                    acc += x;
                }
            }
        } else {
            for (t, &x) in row.iter().enumerate() {
                if t != s && x.is_finite() {
                    acc += x;
                }
            }
        }
        sum += acc;
    }
    sum
}

fn greedy_order(g: &LatencyGraph, k: usize) -> Vec<usize> {
    let n = g.node_count();
    let mut lat = g.latency.clone();
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    for _ in 0..k {
        let d = all_pairs(&g.graph, &lat);
        let candidates: Vec<usize> = (0..n).filter(|&c| !taken[c]).collect();
        let scores: Vec<(usize, f64)> = candidates
            .par_iter()
            .map_init(
                || (vec![0.0; n], lat.clone()),
                |(row, l), &c| {
                    let saved = l[c];
                    l[c] = 0.0;
                    dijkstra(&g.graph, l, c, row);
                    l[c] = saved;
                    (c, total_with(&d, n, c, row))
                },
            )
            .collect();
        let best = scores
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("k is at most the node count")
            .0;
        taken[best] = true;
        lat[best] = 0.0;
        chosen.push(best);
    }
    chosen
}

/// Selects `k` nodes to zero with one heuristic and records the relative
/// average latency after each pick.
pub fn minimize(g: &LatencyGraph, k: usize, heuristic: Heuristic, mode: Mode) -> Result<MinimizationTrace> {
    let n = g.node_count();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds the {n} nodes")));
    }
    let baseline = average_network_latency(g, mode)?;
    if baseline.mean <= 0.0 {
        return Err(Error::Undefined("original average latency is 0".into()));
    }
    let selected: Vec<usize> = match heuristic {
        Heuristic::MaxLat => ranked(&g.latency)[..k].to_vec(),
        Heuristic::MaxBc => ranked(&betweenness_centrality(&g.graph))[..k].to_vec(),
        Heuristic::Greedy => greedy_order(g, k),
    };
    let relative = (1..=k)
        .map(|i| evaluate(g, &selected[..i], mode).map(|a| a.mean / baseline.mean))
        .collect::<Result<Vec<_>>>()?;
    Ok(MinimizationTrace {
        heuristic,
        baseline,
        selected,
        relative,
    })
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

/// Exhaustive k-LatMin: the lexicographically first `k`-subset with the
/// smallest average latency, and that latency.
pub fn exact_k_latmin(g: &LatencyGraph, k: usize, mode: Mode) -> Result<(Vec<usize>, f64)> {
    let n = g.node_count();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    if binomial(n, k) > EXACT_BUDGET {
        return Err(Error::BudgetExceeded {
            n,
            k,
            bound: EXACT_BUDGET,
        });
    }
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let v = evaluate(g, &subset, mode)?.mean;
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((subset.clone(), v));
        }
        let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
            break;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    Ok(best.expect("at least one subset"))
}

/// Nodes in the largest strongly connected component, ascending.
pub fn largest_scc(g: &DirectedGraph) -> Vec<usize> {
    strongly_connected_components(g)
        .into_iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lg(n: usize, edges: &[(usize, usize)], lat: &[f64]) -> LatencyGraph {
        LatencyGraph::new(DirectedGraph::from_edges(n, edges.iter().copied()), lat.to_vec()).unwrap()
    }

    fn bidir(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
        edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect()
    }

    #[test]
    fn path_latency_examples() {
        let g = lg(3, &[(0, 1), (1, 2)], &[2.0, 3.0, 7.0]);
        assert_eq!(path_latency(&g, &[0, 1, 2]).unwrap(), 5.0);
        assert_eq!(path_latency(&g, &[0, 1]).unwrap(), 2.0);
        assert!(path_latency(&g, &[0, 2]).is_err());
        let z = g.with_targets(&[1]);
        assert_eq!(path_latency(&z, &[0, 1, 2]).unwrap(), 2.0);
    }

    #[test]
    fn pair_latency_takes_the_cheaper_path() {
        let g = lg(3, &[(0, 1), (1, 2), (0, 2)], &[2.0, 3.0, 1.0]);
        assert_eq!(pair_latency(&g, 0, 2).unwrap(), Some(2.0));
        let sink = lg(3, &[(1, 0), (2, 0)], &[1.0, 1.0, 1.0]);
        assert_eq!(pair_latency(&sink, 0, 1).unwrap(), None);
        assert_eq!(pair_latency(&sink, 0, 2).unwrap(), None);
        assert!(pair_latency(&g, 1, 1).is_err());
    }

    #[test]
    fn average_examples() {
        let two = lg(2, &[(0, 1), (1, 0)], &[1.0, 2.0]);
        assert_eq!(average_network_latency(&two, Mode::Strict).unwrap().mean, 1.5);
        let zero = lg(2, &[(0, 1), (1, 0)], &[0.0, 0.0]);
        assert_eq!(average_network_latency(&zero, Mode::Strict).unwrap().mean, 0.0);
        let cycle = lg(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], &[1.0; 4]);
        assert_eq!(average_network_latency(&cycle, Mode::Strict).unwrap().mean, 2.0);
    }

    #[test]
    fn strict_rejects_and_permissive_counts() {
        let g = lg(3, &[(0, 1), (1, 2)], &[1.0, 1.0, 1.0]);
        assert!(matches!(
            average_network_latency(&g, Mode::Strict),
            Err(Error::NotStronglyConnected { reachable: 3, total: 6 })
        ));
        let a = average_network_latency(&g, Mode::Permissive).unwrap();
        assert_eq!(a.reachable_pairs, 3);
        assert!((a.mean - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn star_center_is_picked_by_all() {
        let g = lg(5, &bidir(&[(0, 1), (0, 2), (0, 3), (0, 4)]), &[10.0, 1.0, 1.0, 1.0, 1.0]);
        for h in Heuristic::ALL {
            assert_eq!(minimize(&g, 1, h, Mode::Strict).unwrap().selected, vec![0], "{h}");
        }
    }

    #[test]
    fn symmetric_cycle_ties_pick_smallest_id() {
        let g = lg(4, &bidir(&[(0, 1), (1, 2), (2, 3), (3, 0)]), &[3.0; 4]);
        for h in Heuristic::ALL {
            assert_eq!(minimize(&g, 1, h, Mode::Strict).unwrap().selected, vec![0], "{h}");
        }
    }

    #[test]
    fn two_cycle_greedy_and_exact() {
        let g = lg(2, &[(0, 1), (1, 0)], &[1.0, 2.0]);
        let t = minimize(&g, 1, Heuristic::Greedy, Mode::Strict).unwrap();
        assert_eq!(t.selected, vec![1]);
        assert!((t.relative[0] - 0.5 / 1.5).abs() < 1e-15);
        assert_eq!(exact_k_latmin(&g, 1, Mode::Strict).unwrap(), (vec![1], 0.5));
        assert_eq!(exact_k_latmin(&g, 2, Mode::Strict).unwrap().1, 0.0);
    }

    #[test]
    fn bad_k_and_flat_baseline() {
        let g = lg(2, &[(0, 1), (1, 0)], &[1.0, 2.0]);
        assert!(minimize(&g, 0, Heuristic::Greedy, Mode::Strict).is_err());
        assert!(minimize(&g, 3, Heuristic::Greedy, Mode::Strict).is_err());
        let z = lg(2, &[(0, 1), (1, 0)], &[0.0, 0.0]);
        assert!(matches!(minimize(&z, 1, Heuristic::MaxLat, Mode::Strict), Err(Error::Undefined(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let n = 40;
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let g = lg(n, &edges, &vec![1.0; n]);
        assert!(matches!(
            exact_k_latmin(&g, 10, Mode::Strict),
            Err(Error::BudgetExceeded { bound: EXACT_BUDGET, .. })
        ));
    }

    #[test]
    fn negative_latency_rejected() {
        let r = LatencyGraph::new(DirectedGraph::from_edges(2, [(0, 1)]), vec![1.0, -1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn heuristic_parsing() {
        assert_eq!("MaxLat".parse::<Heuristic>().unwrap(), Heuristic::MaxLat);
        assert_eq!("max_bc".parse::<Heuristic>().unwrap(), Heuristic::MaxBc);
        assert!("best".parse::<Heuristic>().is_err());
    }
}
