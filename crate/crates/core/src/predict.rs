//! Influencer and adopter prediction over follower candidates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::backbone::{extract_backbone, InfluenceBackbone};
use crate::digest::Digester;
use crate::error::{Error, Result};
use crate::graph::{pagerank_with, DirectedGraph, PageRankConfig};
use crate::ingest::{Dataset, HashtagId, TopicId, UserId};

/// Users need at least this many followees to be prediction targets.
pub const MIN_FOLLOWEES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Influencer,
    Adopter,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Influencer, Direction::Adopter];

    pub fn tag(self) -> &'static str {
        match self {
            Direction::Influencer => "influencer",
            Direction::Adopter => "adopter",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PredictorKind {
    Followees,
    Followers,
    Reciprocal,
    Act,
    TopicAct,
    RwAct,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 6] = [
        PredictorKind::Followees,
        PredictorKind::Followers,
        PredictorKind::Reciprocal,
        PredictorKind::Act,
        PredictorKind::TopicAct,
        PredictorKind::RwAct,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PredictorKind::Followees => "Followees",
            PredictorKind::Followers => "Followers",
            PredictorKind::Reciprocal => "Reciprocal",
            PredictorKind::Act => "Act",
            PredictorKind::TopicAct => "TopicAct",
            PredictorKind::RwAct => "RWAct",
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.tag().to_ascii_lowercase() == norm)
            .ok_or_else(|| {
                let tags: Vec<&str> = Self::ALL.iter().map(|k| k.tag()).collect();
                Error::InvalidArgument(format!("unknown predictor `{s}` (expected one of {})", tags.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredictionInstance {
    pub user: UserId,
    pub hashtag: HashtagId,
    pub topic: TopicId,
    pub direction: Direction,
    /// Followees (influencer) or followers (adopter), ascending.
    pub candidates: Vec<UserId>,
    pub truth: BTreeSet<UserId>,
}

impl PredictionInstance {
    pub fn labels(&self) -> Vec<bool> {
        self.candidates.iter().map(|c| self.truth.contains(c)).collect()
    }
}

/// Area under the ROC curve by the Mann–Whitney rank sum; tied
/// positive/negative pairs count one half.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    if scores.len() != positive.len() {
        return Err(Error::InvalidArgument("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let pos = positive.iter().filter(|&&p| p).count();
    let neg = positive.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Undefined(format!("AUC needs both classes ({pos} positive, {neg} negative)")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based midrank of the tie block
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Backbone of a hashtag's topic with that hashtag removed, plus its PageRank
/// in both orientations.
#[derive(Debug, Clone)]
struct HashtagContext {
    backbone_digest: String,
    touched: BTreeSet<UserId>,
    rank_forward: Vec<f64>,
    rank_reverse: Vec<f64>,
}

/// Everything a predictor may look at for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoringContext {
    pub followees: Vec<f64>,
    pub followers: Vec<f64>,
    pub reciprocal: Vec<f64>,
    pub act: Vec<f64>,
    pub topic_act: Vec<f64>,
    pub centrality: Vec<f64>,
    backbone_digest: String,
    candidates: Vec<String>,
}

impl ScoringContext {
    fn build(
        ds: &Dataset,
        user: UserId,
        candidates: &[UserId],
        topic: TopicId,
        direction: Direction,
        h: Option<HashtagId>,
        ctx: &HashtagContext,
    ) -> Self {
        let net = ds.net();
        let own = |c: UserId| h.map_or(0, |h| ds.index().use_count(c, h)) as f64;
        let rank = match direction {
            Direction::Influencer => &ctx.rank_reverse,
            Direction::Adopter => &ctx.rank_forward,
        };
        Self {
            followees: candidates.iter().map(|&c| net.followees(c).len() as f64).collect(),
            followers: candidates.iter().map(|&c| net.followers(c).len() as f64).collect(),
            reciprocal: candidates
                .iter()
                .map(|&c| (net.has_edge(c, user) && net.has_edge(user, c)) as u8 as f64)
                .collect(),
            act: candidates.iter().map(|&c| ds.activity(c) as f64 - own(c)).collect(),
            topic_act: candidates
                .iter()
                .map(|&c| ds.topic_activity(c, topic) as f64 - own(c))
                .collect(),
            centrality: candidates.iter().map(|&c| rank[c.index()]).collect(),
            backbone_digest: ctx.backbone_digest.clone(),
            candidates: candidates.iter().map(|&c| ds.user_name(c).to_string()).collect(),
        }
    }

    /// Candidate scores for one predictor.
    pub fn scores(&self, kind: PredictorKind) -> Vec<f64> {
        match kind {
            PredictorKind::Followees => self.followees.clone(),
            PredictorKind::Followers => self.followers.clone(),
            PredictorKind::Reciprocal => self.reciprocal.clone(),
            PredictorKind::Act => self.act.clone(),
            PredictorKind::TopicAct => self.topic_act.clone(),
            PredictorKind::RwAct => {
                let norm = |v: &[f64]| -> Vec<f64> {
                    let m = v.iter().copied().fold(0.0, f64::max);
                    v.iter().map(|x| if m > 0.0 { x / m } else { 0.0 }).collect()
                };
                norm(&self.centrality)
                    .into_iter()
                    .zip(norm(&self.topic_act))
                    .map(|(a, b)| a * b)
                    .collect()
            }
        }
    }

    /// Digest over names, so contexts from different datasets compare.
    pub fn digest(&self) -> String {
        let mut d = Digester::new();
        for c in &self.candidates {
            d.str(c);
        }
        for v in [&self.followees, &self.followers, &self.reciprocal, &self.act, &self.topic_act, &self.centrality] {
            d.u64(v.len() as u64);
            for &x in v {
                d.f64(x);
            }
        }
        d.str(&self.backbone_digest);
        d.finish()
    }
}

fn ranks(b: &InfluenceBackbone, users: usize) -> (Vec<f64>, Vec<f64>) {
    let g: DirectedGraph = b.to_graph(users);
    let cfg = PageRankConfig::default();
    let fwd = pagerank_with(&g, cfg).map(|r| r.0).unwrap_or_default();
    let rev = pagerank_with(&g.reversed(), cfg).map(|r| r.0).unwrap_or_default();
    (fwd, rev)
}

fn hashtag_context(ds: &Dataset, backbone: InfluenceBackbone) -> HashtagContext {
    let touched = backbone.touched_nodes().into_iter().collect();
    let (rank_forward, rank_reverse) = ranks(&backbone, ds.net().user_count());
    let mut edges: Vec<(&str, &str, u32)> = backbone
        .edges()
        .map(|((u, v), w)| (ds.user_name(u), ds.user_name(v), w))
        .collect();
    edges.sort_unstable();
    let mut d = Digester::new();
    for (u, v, w) in edges {
        d.str(u).str(v).u64(w as u64);
    }
    HashtagContext {
        backbone_digest: d.finish(),
        touched,
        rank_forward,
        rank_reverse,
    }
}

/// Per-topic AUC summary of one predictor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicAuc {
    pub topic: TopicId,
    pub mean_auc: f64,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub per_topic: Vec<TopicAuc>,
    /// Mean over all scored instances.
    pub mean_auc: f64,
    pub instances: usize,
    /// Instances whose truth covers every candidate.
    pub skipped: usize,
}

/// Dataset plus the hashtag-excluded backbones every instance needs.
pub struct Predictor<'a> {
    ds: &'a Dataset,
    contexts: BTreeMap<HashtagId, HashtagContext>,
}

impl<'a> Predictor<'a> {
    pub fn new(ds: &'a Dataset) -> Result<Self> {
        let mut contexts = BTreeMap::new();
        for t in ds.topics().topics() {
            let full = extract_backbone(ds, t)?;
            let hs = ds.topic_hashtags(t);
            let built: Vec<(HashtagId, HashtagContext)> = hs
                .par_iter()
                .map(|&h| Ok((h, hashtag_context(ds, full.exclude_hashtag(ds, h)?))))
                .collect::<Result<_>>()?;
            contexts.extend(built);
        }
        Ok(Self { ds, contexts })
    }

    pub fn dataset(&self) -> &Dataset {
        self.ds
    }

    /// Every qualifying `(hashtag, user)` instance in `(topic, hashtag, user)` order.
    pub fn build_instances(&self, direction: Direction) -> Vec<PredictionInstance> {
        let ds = self.ds;
        let net = ds.net();
        let idx = ds.index();
        let mut out = Vec::new();
        for topic in ds.topics().topics() {
            for h in ds.topic_hashtags(topic) {
                let ctx = &self.contexts[&h];
                let mut users: Vec<(UserId, i64)> = idx.adopters(h).iter().map(|&(t, u)| (u, t)).collect();
                users.sort_unstable();
                for (u, tu) in users {
                    if net.followees(u).len() < MIN_FOLLOWEES {
                        continue;
                    }
                    let candidates: Vec<UserId> = match direction {
                        Direction::Influencer => net.followees(u).to_vec(),
                        Direction::Adopter => net.followers(u).to_vec(),
                    };
                    let truth: BTreeSet<UserId> = candidates
                        .iter()
                        .copied()
                        .filter(|&c| {
                            idx.first_use(c, h).is_some_and(|tc| match direction {
                                Direction::Influencer => tc < tu,
                                Direction::Adopter => tc > tu,
                            })
                        })
                        .collect();
                    if truth.is_empty() || !candidates.iter().any(|c| ctx.touched.contains(c)) {
                        continue;
                    }
                    out.push(PredictionInstance {
                        user: u,
                        hashtag: h,
                        topic,
                        direction,
                        candidates,
                        truth,
                    });
                }
            }
        }
        out
    }

    /// Scoring context of `inst`, built without any trace of its hashtag.
    pub fn context(&self, inst: &PredictionInstance) -> ScoringContext {
        ScoringContext::build(
            self.ds,
            inst.user,
            &inst.candidates,
            inst.topic,
            inst.direction,
            Some(inst.hashtag),
            &self.contexts[&inst.hashtag],
        )
    }

    pub fn scores(&self, kind: PredictorKind, inst: &PredictionInstance) -> Vec<f64> {
        self.context(inst).scores(kind)
    }

    pub fn evaluate(&self, kind: PredictorKind, instances: &[PredictionInstance]) -> Evaluation {
        self.evaluate_with(instances, |_, ctx| ctx.scores(kind))
    }

    /// Evaluates an arbitrary scoring rule.
    pub fn evaluate_with<F>(&self, instances: &[PredictionInstance], score: F) -> Evaluation
    where
        F: Fn(&PredictionInstance, &ScoringContext) -> Vec<f64> + Sync,
    {
        let aucs: Vec<(TopicId, Option<f64>)> = instances
            .par_iter()
            .map(|inst| {
                let ctx = self.context(inst);
                (inst.topic, roc_auc(&score(inst, &ctx), &inst.labels()).ok())
            })
            .collect();
        let mut by_topic: BTreeMap<TopicId, (f64, usize)> = BTreeMap::new();
        let mut skipped = 0;
        for (t, a) in aucs {
            match a {
                Some(a) => {
                    let e = by_topic.entry(t).or_default();
                    e.0 += a;
                    e.1 += 1;
                }
                None => skipped += 1,
            }
        }
        let instances: usize = by_topic.values().map(|v| v.1).sum();
        let total: f64 = by_topic.values().map(|v| v.0).sum();
        Evaluation {
            per_topic: by_topic
                .into_iter()
                .map(|(topic, (s, n))| TopicAuc {
                    topic,
                    mean_auc: s / n as f64,
                    instances: n,
                })
                .collect(),
            mean_auc: if instances > 0 { total / instances as f64 } else { f64::NAN },
            instances,
            skipped,
        }
    }
}

/// Context for `candidates` computed from a dataset that never contained the
/// target hashtag. Used to check that [`Predictor::context`] leaks nothing.
pub fn clean_context(
    clean: &Dataset,
    user: &str,
    candidates: &[&str],
    topic: TopicId,
    direction: Direction,
) -> Result<ScoringContext> {
    let lookup = |n: &str| clean.user(n).ok_or_else(|| Error::InvalidArgument(format!("unknown user `{n}`")));
    let u = lookup(user)?;
    let cs: Vec<UserId> = candidates.iter().map(|c| lookup(c)).collect::<Result<_>>()?;
    let ctx = hashtag_context(clean, extract_backbone(clean, topic)?);
    Ok(ScoringContext::build(clean, u, &cs, topic, direction, None, &ctx))
}

/// Rows `direction topic predictor mean_auc instances`.
pub fn write_evaluation_tsv<W: Write>(
    mut w: W,
    ds: &Dataset,
    rows: &[(Direction, PredictorKind, Evaluation)],
) -> io::Result<()> {
    writeln!(w, "direction\ttopic\tpredictor\tmean_auc\tinstances")?;
    for (d, k, e) in rows {
        for t in &e.per_topic {
            writeln!(w, "{d}\t{}\t{k}\t{}\t{}", ds.topics().topic_name(t.topic), t.mean_auc, t.instances)?;
        }
        writeln!(w, "{d}\t*\t{k}\t{}\t{}", e.mean_auc, e.instances)?;
    }
    Ok(())
}
