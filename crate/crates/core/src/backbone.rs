//! Topic influence backbones.
//!
//! A backbone edge `(u, v)` is a follower edge where followee `u` used some
//! hashtag of the topic strictly before follower `v`. Its weight is the number
//! of such hashtags.
//!
//! Weights count followee-first hashtags, matching the edge direction. The
//! opposite convention (followee adopting after the follower) would weight
//! edges by evidence against influence and is not used.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    self, jaccard_edge_similarity, kendall_tau, largest_component_fraction, pagerank_with,
    DirectedGraph, PageRankConfig,
};
use crate::ingest::{Dataset, HashtagId, TopicId, UserId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceBackbone {
    pub topic: TopicId,
    weights: BTreeMap<(UserId, UserId), u32>,
}

/// Follower edges `(u, v)` along which `h` was adopted by `u` strictly before `v`.
pub fn precedence_pairs(ds: &Dataset, h: HashtagId) -> Vec<(UserId, UserId)> {
    let idx = ds.index();
    let mut out = Vec::new();
    for &(tv, v) in idx.adopters(h) {
        for &u in ds.net().followees(v) {
            if idx.first_use(u, h).is_some_and(|tu| tu < tv) {
                out.push((u, v));
            }
        }
    }
    out
}

fn check_topic(ds: &Dataset, topic: TopicId) -> Result<()> {
    if topic.index() >= ds.topics().topic_count() {
        return Err(Error::UnknownTopic(format!("#{}", topic.0)));
    }
    Ok(())
}

/// Backbone of `topic`.
pub fn extract_backbone(ds: &Dataset, topic: TopicId) -> Result<InfluenceBackbone> {
    extract_backbone_excluding(ds, topic, &[])
}

/// Backbone of `topic` computed without the hashtags in `excluded`.
pub fn extract_backbone_excluding(
    ds: &Dataset,
    topic: TopicId,
    excluded: &[HashtagId],
) -> Result<InfluenceBackbone> {
    check_topic(ds, topic)?;
    let mut weights: BTreeMap<(UserId, UserId), u32> = BTreeMap::new();
    for h in ds.topic_hashtags(topic) {
        if excluded.contains(&h) {
            continue;
        }
        for e in precedence_pairs(ds, h) {
            *weights.entry(e).or_insert(0) += 1;
        }
    }
    Ok(InfluenceBackbone { topic, weights })
}

impl InfluenceBackbone {
    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, u: UserId, v: UserId) -> u32 {
        self.weights.get(&(u, v)).copied().unwrap_or(0)
    }

    /// `((followee, follower), weight)` in id order.
    pub fn edges(&self) -> impl Iterator<Item = ((UserId, UserId), u32)> + '_ {
        self.weights.iter().map(|(&e, &w)| (e, w))
    }

    pub fn edge_set(&self) -> BTreeSet<(UserId, UserId)> {
        self.weights.keys().copied().collect()
    }

    /// Users incident to at least one edge, ascending.
    pub fn touched_nodes(&self) -> Vec<UserId> {
        let set: BTreeSet<UserId> = self.weights.keys().flat_map(|&(u, v)| [u, v]).collect();
        set.into_iter().collect()
    }

    /// The backbone with `h` removed: each of `h`'s precedence edges loses one
    /// unit of weight and zero-weight edges disappear.
    pub fn exclude_hashtag(&self, ds: &Dataset, h: HashtagId) -> Result<Self> {
        if ds.hashtag_topic(h) != Some(self.topic) {
            return Err(Error::InvalidArgument(format!(
                "hashtag `{}` is not in topic `{}`",
                ds.hashtag_name(h),
                ds.topics().topic_name(self.topic)
            )));
        }
        let mut weights = self.weights.clone();
        for e in precedence_pairs(ds, h) {
            match weights.get_mut(&e) {
                Some(w) if *w > 1 => *w -= 1,
                Some(_) => {
                    weights.remove(&e);
                }
                None => {
                    return Err(Error::Invariant(format!(
                        "backbone lacks precedence edge of `{}`",
                        ds.hashtag_name(h)
                    )))
                }
            }
        }
        Ok(Self {
            topic: self.topic,
            weights,
        })
    }

    /// The backbone as a graph over all users of the network (weights kept).
    pub fn to_graph(&self, user_count: usize) -> DirectedGraph {
        let mut g = DirectedGraph::new(user_count);
        for (&(u, v), &w) in &self.weights {
            g.add_edge(u.index(), v.index(), w as f64);
        }
        g
    }

    /// Writes `topic, followee, follower, weight` rows sorted by name.
    pub fn write_tsv<W: Write>(&self, ds: &Dataset, mut w: W) -> Result<()> {
        let topic = ds.topics().topic_name(self.topic);
        let mut rows: Vec<(&str, &str, u32)> = self
            .edges()
            .map(|((u, v), wt)| (ds.user_name(u), ds.user_name(v), wt))
            .collect();
        rows.sort_unstable();
        for (u, v, wt) in rows {
            writeln!(w, "{topic}\t{u}\t{v}\t{wt}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Connectivity {
    pub scc_fraction: f64,
    pub wcc_fraction: f64,
}

/// Kendall tau between the influence and follower graphs for three node rankings.
/// `None` when a ranking is constant on either side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankCorrelations {
    pub followers: Option<f64>,
    pub followees: Option<f64>,
    pub pagerank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackboneReport {
    pub topic: String,
    pub nodes: usize,
    pub influence_edges: usize,
    pub follower_edges: usize,
    pub jaccard: f64,
    pub influence: Connectivity,
    pub follower: Connectivity,
    pub kendall: RankCorrelations,
}

fn connectivity(g: &DirectedGraph) -> Connectivity {
    let n = g.node_count();
    Connectivity {
        scc_fraction: largest_component_fraction(&graph::strongly_connected_components(g), n),
        wcc_fraction: largest_component_fraction(&graph::weakly_connected_components(g), n),
    }
}

fn tau(a: &[f64], b: &[f64]) -> Option<f64> {
    kendall_tau(a, b).ok()
}

/// Follower edges among the backbone's touched nodes.
pub fn follower_counterpart(b: &InfluenceBackbone, ds: &Dataset) -> BTreeSet<(UserId, UserId)> {
    let nodes = b.touched_nodes();
    let mut out = BTreeSet::new();
    for &u in &nodes {
        for &v in ds.net().followers(u) {
            if nodes.binary_search(&v).is_ok() {
                out.insert((u, v));
            }
        }
    }
    out
}

/// Compares a backbone against the follower edges among the same nodes.
pub fn compare_with_follower(b: &InfluenceBackbone, ds: &Dataset) -> Result<BackboneReport> {
    if b.is_empty() {
        return Err(Error::InvalidArgument("backbone has no edges".into()));
    }
    let nodes = b.touched_nodes();
    let pos = |u: UserId| nodes.binary_search(&u).expect("touched node");
    let influence_edges = b.edge_set();
    let follower_edges = follower_counterpart(b, ds);
    if !influence_edges.is_subset(&follower_edges) {
        return Err(Error::Invariant("backbone edge outside follower network".into()));
    }
    let n = nodes.len();
    let ig = DirectedGraph::from_edges(n, influence_edges.iter().map(|&(u, v)| (pos(u), pos(v))));
    let fg = DirectedGraph::from_edges(n, follower_edges.iter().map(|&(u, v)| (pos(u), pos(v))));

    let as_f64 = |v: Vec<usize>| v.into_iter().map(|x| x as f64).collect::<Vec<_>>();
    let pr = |g: &DirectedGraph| pagerank_with(g, PageRankConfig::default()).map(|r| r.0);
    let kendall = RankCorrelations {
        followers: tau(&as_f64(ig.out_degrees()), &as_f64(fg.out_degrees())),
        followees: tau(&as_f64(ig.in_degrees()), &as_f64(fg.in_degrees())),
        pagerank: tau(&pr(&ig)?, &pr(&fg)?),
    };

    Ok(BackboneReport {
        topic: ds.topics().topic_name(b.topic).to_string(),
        nodes: n,
        influence_edges: influence_edges.len(),
        follower_edges: follower_edges.len(),
        jaccard: jaccard_edge_similarity(&influence_edges, &follower_edges)?,
        influence: connectivity(&ig),
        follower: connectivity(&fg),
        kendall,
    })
}

/// Pairwise Jaccard similarity of backbone edge sets; unit diagonal.
/// Two empty backbones are given similarity 0.
pub fn cross_topic_overlap(backbones: &[InfluenceBackbone]) -> Vec<Vec<f64>> {
    let sets: Vec<_> = backbones.iter().map(InfluenceBackbone::edge_set).collect();
    let k = sets.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        m[i][i] = 1.0;
        for j in i + 1..k {
            let s = jaccard_edge_similarity(&sets[i], &sets[j]).unwrap_or(0.0);
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    m
}
