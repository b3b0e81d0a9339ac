//! Seeded synthetic follower graphs, planted genotypes and topic cascades.
//!
//! Generation is single-threaded and driven by one ChaCha stream, so equal
//! parameters give byte-identical output.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, LogNormal, Pareto, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::ingest::{EventLog, FollowerNetwork, PostEvent, TopicMap};
use crate::latmin::LatencyGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum GraphModel {
    /// Every node follows `followees` distinct others chosen uniformly.
    UniformRandom { followees: usize },
    /// Each new node follows `links` existing nodes chosen with weight
    /// `(followers + 1)^exponent`; the first of them follows it back.
    PreferentialAttachment { links: usize, exponent: f64 },
    /// `0 → 1 → … → n−1`.
    Chain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenParams {
    pub nodes: usize,
    pub graph: GraphModel,
    pub topics: usize,
    pub hashtags_per_topic: usize,
    /// Mean adoption delay per topic level; each user gets its own random
    /// assignment of levels to topics. All equal means no topic signal.
    pub latency_levels: Vec<f64>,
    /// 1 gives a geometric delay starting at 1; smaller values shift the
    /// distribution right and narrow it at the same mean; 0 is deterministic.
    pub delay_dispersion: f64,
    /// Base probability that a newly exposed user adopts.
    pub adoption_prob: f64,
    /// Log-scale spread of the per-user, per-topic activity factor that
    /// multiplies adoption probability and repeat rate.
    pub activity_spread: f64,
    /// Mean extra posts of a hashtag after adopting it.
    pub repeat_rate: f64,
    pub cascades_per_hashtag: usize,
    /// Cascade start times are uniform on `0..=start_window`.
    pub start_window: u32,
    /// Every user posts a per-topic chatter hashtag at time 0 and then every
    /// `ambient_period` ticks, with a random phase.
    pub ambient_period: Option<u32>,
    /// Fixed cascade seed user instead of a uniform draw.
    pub seed_user: Option<usize>,
    pub seed: u64,
}

impl GenParams {
    /// Small mixed dataset for smoke tests and the CLI default.
    pub fn small(seed: u64) -> Self {
        Self {
            nodes: 60,
            graph: GraphModel::UniformRandom { followees: 6 },
            topics: 3,
            hashtags_per_topic: 5,
            latency_levels: vec![2.0, 6.0, 15.0],
            delay_dispersion: 1.0,
            adoption_prob: 0.3,
            activity_spread: 0.5,
            repeat_rate: 0.3,
            cascades_per_hashtag: 1,
            start_window: 50,
            ambient_period: None,
            seed_user: None,
            seed,
        }
    }

    /// 5 topics × 20 hashtags over 300 users with topic-dependent delays.
    /// `separation` scales the spread of the delay levels; 0 makes every
    /// topic identical.
    pub fn classification(separation: f64, seed: u64) -> Self {
        let base = [5.0, 6.0, 7.0, 9.0, 18.0];
        let mid = 9.0;
        Self {
            nodes: 300,
            graph: GraphModel::UniformRandom { followees: 10 },
            topics: 5,
            hashtags_per_topic: 20,
            latency_levels: base.iter().map(|&l| mid + separation * (l - mid)).collect(),
            delay_dispersion: 0.0,
            adoption_prob: 0.3,
            activity_spread: 0.0,
            repeat_rate: 0.0,
            cascades_per_hashtag: 1,
            start_window: 100,
            ambient_period: Some(1),
            seed_user: None,
            seed,
        }
    }

    /// Adoption driven by per-topic activity, for predictor comparisons.
    pub fn prediction(seed: u64) -> Self {
        Self {
            nodes: 400,
            graph: GraphModel::PreferentialAttachment { links: 12, exponent: 1.0 },
            topics: 3,
            hashtags_per_topic: 20,
            latency_levels: vec![3.0, 6.0, 10.0],
            delay_dispersion: 1.0,
            adoption_prob: 0.2,
            activity_spread: 1.5,
            repeat_rate: 1.0,
            cascades_per_hashtag: 1,
            start_window: 200,
            ambient_period: None,
            seed_user: None,
            seed,
        }
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "small" => Ok(Self::small(seed)),
            "classification" => Ok(Self::classification(1.0, seed)),
            "classification-null" => Ok(Self::classification(0.0, seed)),
            "prediction" => Ok(Self::prediction(seed)),
            _ => Err(Error::InvalidArgument(format!(
                "unknown preset `{name}` (expected small, classification, classification-null or prediction)"
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.nodes == 0 || self.topics == 0 || self.hashtags_per_topic == 0 {
            return bad("node, topic and hashtag counts must be positive".into());
        }
        if self.latency_levels.len() != self.topics {
            return bad(format!(
                "{} latency levels for {} topics",
                self.latency_levels.len(),
                self.topics
            ));
        }
        if self.latency_levels.iter().any(|&l| !(l >= 1.0 && l.is_finite())) {
            return bad("latency levels must be finite and at least 1".into());
        }
        for (name, p) in [("adoption-prob", self.adoption_prob), ("delay-dispersion", self.delay_dispersion)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.activity_spread >= 0.0 && self.repeat_rate >= 0.0) {
            return bad("activity spread and repeat rate must be non-negative".into());
        }
        if self.ambient_period == Some(0) {
            return bad("ambient period must be positive".into());
        }
        if let Some(s) = self.seed_user {
            if s >= self.nodes {
                return bad(format!("seed user {s} out of range"));
            }
        }
        match self.graph {
            GraphModel::UniformRandom { followees } if followees == 0 || followees >= self.nodes => bad(format!(
                "uniform-random needs 0 < followees < nodes, got {followees} with {} nodes",
                self.nodes
            )),
            GraphModel::PreferentialAttachment { links, exponent }
                if links == 0 || self.nodes < 2 || !(exponent >= 0.0 && exponent.is_finite()) =>
            {
                bad(format!(
                    "preferential-attachment needs links > 0, a finite exponent >= 0 and 2+ nodes, got {links} and {exponent} with {} nodes",
                    self.nodes
                ))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    pub hashtag: String,
    pub seed_user: String,
    pub start: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    /// Per user, per topic (in topic order): planted mean delay.
    pub latency: BTreeMap<String, Vec<f64>>,
    /// Per user, per topic: activity factor.
    pub activity: BTreeMap<String, Vec<f64>>,
    pub hashtag_topic: BTreeMap<String, String>,
    pub cascades: Vec<Cascade>,
    /// Per hashtag: `(user, time)` in adoption order.
    pub adoption_order: BTreeMap<String, Vec<(String, i64)>>,
    pub params: GenParams,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub net: FollowerNetwork,
    pub events: EventLog,
    pub topics: TopicMap,
    pub truth: PlantedTruth,
}

fn user_names(n: usize) -> Vec<String> {
    let w = (n.max(2) - 1).to_string().len();
    (0..n).map(|i| format!("u{i:0w$}")).collect()
}

pub fn topic_name(t: usize) -> String {
    format!("topic{t}")
}

pub fn hashtag_name(t: usize, i: usize) -> String {
    format!("t{t}h{i:02}")
}

pub fn chatter_name(t: usize) -> String {
    format!("t{t}chatter")
}

/// Followee lists (information source first) under `model`.
fn follow_edges(model: &GraphModel, n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    match *model {
        GraphModel::UniformRandom { followees } => {
            for v in 0..n {
                let mut picked = 0;
                let mut seen = vec![false; n];
                seen[v] = true;
                while picked < followees {
                    let u = rng.random_range(0..n);
                    if !seen[u] {
                        seen[u] = true;
                        edges.push((u, v));
                        picked += 1;
                    }
                }
            }
        }
        GraphModel::PreferentialAttachment { links, exponent } => {
            let mut followers = vec![0usize; n];
            for v in 1..n {
                let want = links.min(v);
                let mut weight: Vec<f64> = (0..v).map(|u| ((followers[u] + 1) as f64).powf(exponent)).collect();
                let mut chosen: Vec<usize> = Vec::with_capacity(want);
                for _ in 0..want {
                    let total: f64 = weight.iter().sum();
                    let mut x = rng.random::<f64>() * total;
                    let mut u = 0;
                    while u + 1 < v && (x >= weight[u] || weight[u] == 0.0) {
                        x -= weight[u];
                        u += 1;
                    }
                    while weight[u] == 0.0 {
                        u -= 1;
                    }
                    weight[u] = 0.0;
                    chosen.push(u);
                }
                for (i, &u) in chosen.iter().enumerate() {
                    edges.push((u, v));
                    followers[u] += 1;
                    if i == 0 {
                        edges.push((v, u));
                        followers[v] += 1;
                    }
                }
            }
        }
        GraphModel::Chain => edges.extend((1..n).map(|v| (v - 1, v))),
    }
    edges
}

fn draw_delay(mean: f64, dispersion: f64, rng: &mut ChaCha8Rng) -> i64 {
    let base = ((mean * (1.0 - dispersion)).floor()).max(1.0);
    let extra = mean - base;
    if extra <= 0.0 {
        return base as i64;
    }
    let g = Geometric::new(1.0 / (1.0 + extra)).expect("valid probability");
    base as i64 + g.sample(rng) as i64
}

/// Runs the generator.
pub fn generate(p: &GenParams) -> Result<Generated> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.nodes;
    let names = user_names(n);

    let edges = follow_edges(&p.graph, n, &mut rng);
    let mut net = FollowerNetwork::new();
    for name in &names {
        net.add_user(name);
    }
    let ids: Vec<_> = names.iter().map(|s| net.id(s).expect("added")).collect();
    let mut followers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &edges {
        if net.insert_edge(ids[u], ids[v]) {
            followers[u].push(v);
        }
    }
    for f in &mut followers {
        f.sort_unstable();
    }

    let mut latency = vec![vec![0.0; p.topics]; n];
    for row in &mut latency {
        let mut levels = p.latency_levels.clone();
        levels.shuffle(&mut rng);
        row.copy_from_slice(&levels);
    }
    let mut activity = vec![vec![1.0; p.topics]; n];
    if p.activity_spread > 0.0 {
        let s = p.activity_spread;
        let ln = LogNormal::new(-s * s / 2.0, s).expect("positive spread");
        for row in &mut activity {
            for a in row.iter_mut() {
                *a = ln.sample(&mut rng);
            }
        }
    }

    let mut topics = TopicMap::new();
    for t in 0..p.topics {
        for i in 0..p.hashtags_per_topic {
            topics.assign(&hashtag_name(t, i), &topic_name(t))?;
        }
    }
    if p.ambient_period.is_some() {
        for t in 0..p.topics {
            topics.assign(&chatter_name(t), &topic_name(t))?;
        }
    }

    let mut events = Vec::new();
    let mut cascades = Vec::new();
    let mut adoption_order = BTreeMap::new();
    let mut horizon = 0i64;
    for t in 0..p.topics {
        for i in 0..p.hashtags_per_topic {
            let h = hashtag_name(t, i);
            let mut adopted: Vec<Option<i64>> = vec![None; n];
            let mut exposed = vec![false; n];
            let mut queue = BinaryHeap::new();
            let mut seq = 0u64;
            for _ in 0..p.cascades_per_hashtag {
                let start = rng.random_range(0..=p.start_window) as i64;
                let seed = p.seed_user.unwrap_or_else(|| rng.random_range(0..n));
                cascades.push(Cascade {
                    hashtag: h.clone(),
                    seed_user: names[seed].clone(),
                    start,
                });
                queue.push(Reverse((start, seq, seed)));
                seq += 1;
            }
            let mut order = Vec::new();
            while let Some(Reverse((time, _, u))) = queue.pop() {
                if adopted[u].is_some() {
                    continue;
                }
                adopted[u] = Some(time);
                order.push((names[u].clone(), time));
                events.push(PostEvent::new(&names[u], &h, time));
                horizon = horizon.max(time);
                if p.repeat_rate > 0.0 {
                    let rate = p.repeat_rate * activity[u][t];
                    let k = Poisson::new(rate).expect("positive rate").sample(&mut rng) as usize;
                    let gap = Geometric::new(1.0 / (1.0 + latency[u][t])).expect("valid probability");
                    let mut at = time;
                    for _ in 0..k {
                        at += 1 + gap.sample(&mut rng) as i64;
                        events.push(PostEvent::new(&names[u], &h, at));
                        horizon = horizon.max(at);
                    }
                }
                for &w in &followers[u] {
                    if exposed[w] || adopted[w].is_some() {
                        continue;
                    }
                    exposed[w] = true;
                    let prob = (p.adoption_prob * activity[w][t]).min(1.0);
                    if rng.random_bool(prob) {
                        let d = draw_delay(latency[w][t], p.delay_dispersion, &mut rng);
                        queue.push(Reverse((time + d, seq, w)));
                        seq += 1;
                    }
                }
            }
            adoption_order.insert(h, order);
        }
    }

    if let Some(period) = p.ambient_period {
        let period = period as i64;
        for t in 0..p.topics {
            let h = chatter_name(t);
            for name in &names {
                events.push(PostEvent::new(name, &h, 0));
                let mut at = rng.random_range(1..=period);
                while at <= horizon + period {
                    events.push(PostEvent::new(name, &h, at));
                    at += period;
                }
            }
        }
    }

    let per_user = |m: &Vec<Vec<f64>>| -> BTreeMap<String, Vec<f64>> {
        names.iter().cloned().zip(m.iter().cloned()).collect()
    };
    let truth = PlantedTruth {
        latency: per_user(&latency),
        activity: per_user(&activity),
        hashtag_topic: topics.iter().map(|(h, t)| (h.to_string(), topics.topic_name(t).to_string())).collect(),
        cascades,
        adoption_order,
        params: p.clone(),
    };
    Ok(Generated {
        net,
        events: EventLog::from_events(events),
        topics,
        truth,
    })
}

pub const MANIFEST: &str = "dataset.toml";

/// Writes `edges.tsv`, `events.tsv`, `topics.tsv`, `truth.json` and a
/// manifest naming the first three.
pub fn write_dataset(dir: &Path, g: &Generated) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut buf = Vec::new();
    g.net.write_tsv(&mut buf)?;
    fs::write(dir.join("edges.tsv"), &buf)?;
    buf.clear();
    g.events.write_tsv(&mut buf)?;
    fs::write(dir.join("events.tsv"), &buf)?;
    buf.clear();
    g.topics.write_tsv(&mut buf)?;
    fs::write(dir.join("topics.tsv"), &buf)?;
    let json = serde_json::to_string_pretty(&g.truth).map_err(|e| Error::Invariant(e.to_string()))?;
    fs::write(dir.join("truth.json"), json + "\n")?;
    let mut m = fs::File::create(dir.join(MANIFEST))?;
    writeln!(m, "edges = \"edges.tsv\"\nevents = \"events.tsv\"\ntopics = \"topics.tsv\"")?;
    Ok(())
}

/// A preferential-attachment graph with Pareto(`alpha`, scale 1) node
/// latencies. Edges follow information flow; the reciprocal first link makes
/// the graph strongly connected.
pub fn latency_instance(nodes: usize, links: usize, exponent: f64, alpha: f64, seed: u64) -> Result<LatencyGraph> {
    if nodes < 2 || links == 0 || !(exponent >= 0.0 && exponent.is_finite()) {
        return Err(Error::InvalidArgument(
            "need 2+ nodes, 1+ links and a finite exponent >= 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = follow_edges(&GraphModel::PreferentialAttachment { links, exponent }, nodes, &mut rng);
    let pareto = Pareto::new(1.0, alpha).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let latency: Vec<f64> = (0..nodes).map(|_| pareto.sample(&mut rng)).collect();
    LatencyGraph::new(DirectedGraph::from_edges(nodes, edges), latency)
}
