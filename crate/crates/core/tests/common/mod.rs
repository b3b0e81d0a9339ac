//! Brute-force oracles and random instance generators shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgenome::genotype::MetricKind;
use sgenome::graph::DirectedGraph;
use sgenome::ingest::{EventLog, FollowerNetwork, PostEvent, TopicMap};
use sgenome::latmin::LatencyGraph;
use sgenome::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A log kept as plain tuples, independent of the crate's indexes.
#[derive(Debug, Clone)]
pub struct RawLog {
    pub users: usize,
    /// `(followee, follower)`.
    pub edges: BTreeSet<(usize, usize)>,
    /// `(user, hashtag, time)`, de-duplicated.
    pub events: BTreeSet<(usize, usize, i64)>,
    pub topic_of: Vec<Option<usize>>,
}

pub fn user(i: usize) -> String {
    format!("u{i}")
}

pub fn tag(i: usize) -> String {
    format!("h{i}")
}

pub fn random_log(seed: u64) -> RawLog {
    let mut r = rng(seed);
    let users = r.random_range(2..=50);
    let hashtags = r.random_range(1..=20);
    let topics = r.random_range(1..=3);
    let density = r.random_range(0.02..0.3);
    let mut edges = BTreeSet::new();
    for a in 0..users {
        for b in 0..users {
            if a != b && r.random_bool(density) {
                edges.insert((a, b));
            }
        }
    }
    let topic_of: Vec<Option<usize>> = (0..hashtags)
        .map(|_| (!r.random_bool(0.1)).then(|| r.random_range(0..topics)))
        .collect();
    let mut events = BTreeSet::new();
    let horizon = r.random_range(5..80);
    for h in 0..hashtags {
        let adopters = r.random_range(0..=users.min(25));
        for _ in 0..adopters {
            let u = r.random_range(0..users);
            let posts = 1 + (r.random_bool(0.3) as usize) * r.random_range(1..4);
            for _ in 0..posts {
                events.insert((u, h, r.random_range(0..horizon)));
            }
        }
    }
    RawLog {
        users,
        edges,
        events,
        topic_of,
    }
}

pub fn dataset(log: &RawLog) -> Dataset {
    let mut net = FollowerNetwork::new();
    for u in 0..log.users {
        net.add_user(&user(u));
    }
    for &(a, b) in &log.edges {
        let (a, b) = (net.add_user(&user(a)), net.add_user(&user(b)));
        net.insert_edge(a, b);
    }
    let events = EventLog::from_events(
        log.events
            .iter()
            .map(|&(u, h, t)| PostEvent::new(&user(u), &tag(h), t))
            .collect(),
    );
    let mut topics = TopicMap::new();
    for (h, t) in log.topic_of.iter().enumerate() {
        if let Some(t) = t {
            topics.assign(&tag(h), &format!("topic{t}")).unwrap();
        }
    }
    Dataset::new(net, events, topics)
}

impl RawLog {
    pub fn first_use(&self, u: usize, h: usize) -> Option<i64> {
        self.events.iter().filter(|e| e.0 == u && e.1 == h).map(|e| e.2).min()
    }

    fn followees(&self, u: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.1 == u).map(|e| e.0).collect()
    }

    pub fn adopters(&self, h: usize) -> BTreeSet<usize> {
        self.events.iter().filter(|e| e.1 == h).map(|e| e.0).collect()
    }

    /// `(t_u, earliest followee use)` when a followee used `h` strictly first.
    fn exposure(&self, u: usize, h: usize) -> Option<(i64, i64)> {
        let tu = self.first_use(u, h)?;
        let te = self.followees(u).into_iter().filter_map(|v| self.first_use(v, h)).min()?;
        (te < tu).then_some((tu, te))
    }

    fn lat(&self, u: usize, h: usize) -> Option<f64> {
        let topic = self.topic_of[h]?;
        let (tu, te) = self.exposure(u, h)?;
        let fs = self.followees(u);
        let count = self
            .events
            .iter()
            .filter(|&&(v, g, t)| fs.contains(&v) && self.topic_of[g] == Some(topic) && te < t && t < tu)
            .count();
        Some(1.0 / count.max(1) as f64)
    }

    pub fn mean_lat(&self, h: usize) -> Option<f64> {
        let vals: Vec<f64> = self.adopters(h).into_iter().filter_map(|u| self.lat(u, h)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// The six adoption metrics evaluated from their textual definitions.
    pub fn metric(&self, kind: MetricKind, u: usize, h: usize) -> Option<f64> {
        let tu = self.first_use(u, h)?;
        if kind == MetricKind::NUses {
            return Some(self.events.iter().filter(|e| e.0 == u && e.1 == h).count() as f64);
        }
        let (_, te) = self.exposure(u, h)?;
        let fs = self.followees(u);
        let parents = fs.iter().filter(|&&v| self.first_use(v, h).is_some_and(|t| t < tu)).count();
        match kind {
            MetricKind::Time => Some((tu - te) as f64),
            MetricKind::NPar => Some(parents as f64),
            MetricKind::FPar => Some(parents as f64 / fs.len() as f64),
            MetricKind::Lat => self.lat(u, h),
            MetricKind::LogLat => Some((self.lat(u, h)? / self.mean_lat(h)?).ln()),
            MetricKind::NUses => unreachable!(),
        }
    }
}

pub fn random_digraph(r: &mut ChaCha8Rng, max_n: usize) -> DirectedGraph {
    let n = r.random_range(1..=max_n);
    let p = r.random_range(0.0..0.6);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && r.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    DirectedGraph::from_edges(n, edges)
}

/// Boolean transitive closure; `reach[s][t]` includes `s == t`.
pub fn reachability(g: &DirectedGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut reach = vec![vec![false; n]; n];
    for s in 0..n {
        reach[s][s] = true;
        for t in g.successors(s) {
            reach[s][t] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    reach
}

/// Groups nodes by mutual reachability.
pub fn classes(n: usize, related: impl Fn(usize, usize) -> bool) -> BTreeSet<Vec<usize>> {
    (0..n).map(|s| (0..n).filter(|&t| related(s, t)).collect()).collect()
}

/// Betweenness from an explicit enumeration of simple paths.
pub fn betweenness_by_paths(g: &DirectedGraph) -> Vec<Ratio<u64>> {
    fn walk(g: &DirectedGraph, path: &mut Vec<usize>, t: usize, found: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == t {
            found.push(path.clone());
            return;
        }
        for v in g.successors(u) {
            if !path.contains(&v) {
                path.push(v);
                walk(g, path, t, found);
                path.pop();
            }
        }
    }
    let n = g.node_count();
    let mut bc = vec![Ratio::from_integer(0u64); n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let mut paths = Vec::new();
            walk(g, &mut vec![s], t, &mut paths);
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let paths: Vec<_> = paths.into_iter().filter(|p| p.len() == shortest).collect();
            let total = paths.len() as u64;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count() as u64;
                bc[v] += Ratio::new(through, total);
            }
        }
    }
    bc
}

/// Dense power iteration with uniform redistribution of dangling mass.
pub fn dense_pagerank(g: &DirectedGraph, d: f64) -> Vec<f64> {
    let n = g.node_count();
    let nf = n as f64;
    let mut m = vec![vec![0.0; n]; n];
    for u in 0..n {
        let out: Vec<usize> = g.successors(u).collect();
        for v in 0..n {
            m[v][u] = if out.is_empty() {
                1.0 / nf
            } else {
                out.iter().filter(|&&w| w == v).count() as f64 / out.len() as f64
            };
        }
    }
    let mut x = vec![1.0 / nf; n];
    for _ in 0..10_000 {
        let next: Vec<f64> = (0..n)
            .map(|v| (1.0 - d) / nf + d * (0..n).map(|u| m[v][u] * x[u]).sum::<f64>())
            .collect();
        let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    x
}

/// Tau-b from explicit pair counts.
pub fn kendall_by_pairs(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let (mut conc, mut disc, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i].partial_cmp(&a[j]).unwrap();
            let db = b[i].partial_cmp(&b[j]).unwrap();
            use std::cmp::Ordering::Equal;
            match (da, db) {
                (Equal, Equal) => {
                    ties_a += 1;
                    ties_b += 1;
                }
                (Equal, _) => ties_a += 1,
                (_, Equal) => ties_b += 1,
                (x, y) if x == y => conc += 1,
                _ => disc += 1,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = ((n0 - ties_a) as f64 * (n0 - ties_b) as f64).sqrt();
    (denom > 0.0).then(|| (conc - disc) as f64 / denom)
}

/// A strongly connected graph (ring plus random chords) with integer latencies.
pub fn random_latency_graph(r: &mut ChaCha8Rng, min_n: usize, max_n: usize) -> LatencyGraph {
    let n = r.random_range(min_n..=max_n);
    let p = r.random_range(0.0..0.4);
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for a in 0..n {
        for b in 0..n {
            if a != b && r.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    let latency = (0..n).map(|_| r.random_range(0..10) as f64).collect();
    LatencyGraph::new(DirectedGraph::from_edges(n, edges), latency).unwrap()
}

/// All-pairs latency by Floyd–Warshall on the node-weighted edge costs.
pub fn floyd_warshall(g: &LatencyGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for u in 0..n {
        d[u][u] = 0.0;
        for v in g.graph().successors(u) {
            if v != u {
                d[u][v] = d[u][v].min(g.latency(u));
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}
