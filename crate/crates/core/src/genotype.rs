//! The six adoption metrics and their per-topic aggregation into genotypes.
//!
//! For an adopter `u` of hashtag `h` with first use `t_u` and followee set `V_u`:
//!
//! | metric  | value |
//! |---------|-------|
//! | TIME    | `t_u − min_{v∈V_u} t_v` |
//! | N-USES  | number of `(u, h)` events |
//! | N-PAR   | `|{v ∈ V_u : t_v < t_u}|` |
//! | F-PAR   | N-PAR / `|V_u|` |
//! | LAT     | `1 / max(1, c)`, `c` = followee posts on `h`'s topic strictly between first exposure and `t_u` |
//! | LOG-LAT | `ln(LAT / mean LAT of h over all adopters with a defined LAT)` |
//!
//! TIME, N-PAR, F-PAR, LAT and LOG-LAT are undefined unless some followee used
//! `h` strictly before `u`; originators therefore contribute N-USES only.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, HashtagId, TopicId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    Time,
    NUses,
    NPar,
    FPar,
    Lat,
    LogLat,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Time,
        MetricKind::NUses,
        MetricKind::NPar,
        MetricKind::FPar,
        MetricKind::Lat,
        MetricKind::LogLat,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            MetricKind::Time => "TIME",
            MetricKind::NUses => "N-USES",
            MetricKind::NPar => "N-PAR",
            MetricKind::FPar => "F-PAR",
            MetricKind::Lat => "LAT",
            MetricKind::LogLat => "LOG-LAT",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase().replace('_', "-");
        MetricKind::ALL
            .into_iter()
            .find(|m| m.tag() == upper)
            .ok_or_else(|| {
                let tags: Vec<&str> = MetricKind::ALL.iter().map(|m| m.tag()).collect();
                Error::InvalidArgument(format!(
                    "unknown metric `{s}`; expected one of {}",
                    tags.join(", ")
                ))
            })
    }
}

/// `t_u` and the earliest followee use, when the latter precedes the former.
fn exposure_before_use(ds: &Dataset, u: UserId, h: HashtagId) -> Result<(i64, Option<i64>)> {
    let idx = ds.index();
    let used = idx.first_use(u, h).ok_or_else(|| Error::NotAnAdopter {
        user: ds.user_name(u).to_string(),
        hashtag: ds.hashtag_name(h).to_string(),
    })?;
    let exposed = idx.first_exposure(u, h).filter(|&e| e < used);
    Ok((used, exposed))
}

fn parents(ds: &Dataset, u: UserId, h: HashtagId, used: i64) -> usize {
    ds.net()
        .followees(u)
        .iter()
        .filter(|&&v| ds.index().first_use(v, h).is_some_and(|t| t < used))
        .count()
}

fn latency(ds: &Dataset, u: UserId, h: HashtagId, exposed: i64, used: i64) -> Option<f64> {
    let topic = ds.hashtag_topic(h)?;
    let count: usize = ds
        .net()
        .followees(u)
        .iter()
        .map(|&v| {
            let times = ds.topic_post_times(v, topic);
            let lo = times.partition_point(|&t| t <= exposed);
            let hi = times.partition_point(|&t| t < used);
            hi.saturating_sub(lo)
        })
        .sum();
    Some(1.0 / count.max(1) as f64)
}

/// Evaluates one metric for `(u, h)`; `Ok(None)` marks an undefined value.
///
/// `hashtag_mean_lat` is required (and must be positive) for LOG-LAT only.
pub fn compute_metric(
    ds: &Dataset,
    kind: MetricKind,
    u: UserId,
    h: HashtagId,
    hashtag_mean_lat: Option<f64>,
) -> Result<Option<f64>> {
    let (used, exposed) = exposure_before_use(ds, u, h)?;
    if kind == MetricKind::NUses {
        return Ok(Some(ds.index().use_count(u, h) as f64));
    }
    if kind == MetricKind::LogLat {
        match hashtag_mean_lat {
            Some(m) if m > 0.0 => {}
            other => {
                return Err(Error::InvalidArgument(format!(
                    "LOG-LAT needs a positive hashtag mean latency, got {other:?}"
                )))
            }
        }
    }
    let Some(exposed) = exposed else {
        return Ok(None);
    };
    Ok(match kind {
        MetricKind::Time => Some((used - exposed) as f64),
        MetricKind::NPar => Some(parents(ds, u, h, used) as f64),
        MetricKind::FPar => {
            let n = ds.net().followees(u).len();
            (n > 0).then(|| parents(ds, u, h, used) as f64 / n as f64)
        }
        MetricKind::Lat => latency(ds, u, h, exposed, used),
        MetricKind::LogLat => {
            let mean = hashtag_mean_lat.expect("checked above");
            latency(ds, u, h, exposed, used).map(|l| (l / mean).ln())
        }
        MetricKind::NUses => unreachable!(),
    })
}

/// Mean LAT of `h` over all adopters with a defined LAT.
pub fn hashtag_mean_lat(ds: &Dataset, h: HashtagId) -> Option<f64> {
    let (sum, n) = ds
        .index()
        .adopters(h)
        .iter()
        .filter_map(|&(_, u)| compute_metric(ds, MetricKind::Lat, u, h, None).ok().flatten())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Values of one `(topic, metric)` genotype component.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// `(hashtag, value)`, ascending by hashtag id.
    pub values: Vec<(HashtagId, f64)>,
    pub mean: f64,
    pub count: usize,
}

impl Cell {
    fn push(&mut self, h: HashtagId, v: f64) {
        self.values.push((h, v));
    }

    fn finalize(&mut self) {
        self.count = self.values.len();
        self.mean = self.values.iter().map(|&(_, v)| v).sum::<f64>() / self.count as f64;
    }
}

/// Per-topic summary of one user's adoption behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genotype {
    pub owner: UserId,
    pub cells: BTreeMap<(TopicId, MetricKind), Cell>,
}

impl Genotype {
    pub fn cell(&self, topic: TopicId, metric: MetricKind) -> Option<&Cell> {
        self.cells.get(&(topic, metric))
    }
}

/// One `(user, hashtag)` metric value with its topic label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub user: UserId,
    pub hashtag: HashtagId,
    pub topic: TopicId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset_digest: String,
    pub topics_digest: String,
}

/// All genotypes of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub genotypes: BTreeMap<UserId, Genotype>,
    pub provenance: Provenance,
}

fn user_genotype(ds: &Dataset, u: UserId, mean_lat: &[Option<f64>]) -> Genotype {
    let mut cells: BTreeMap<(TopicId, MetricKind), Cell> = BTreeMap::new();
    for &h in ds.index().adopted(u) {
        let Some(topic) = ds.hashtag_topic(h) else {
            continue;
        };
        for kind in MetricKind::ALL {
            let m = mean_lat[h.index()];
            if kind == MetricKind::LogLat && m.is_none() {
                continue;
            }
            let v = compute_metric(ds, kind, u, h, m).expect("u adopted h and mean is positive");
            if let Some(v) = v {
                cells.entry((topic, kind)).or_default().push(h, v);
            }
        }
    }
    cells.values_mut().for_each(Cell::finalize);
    Genotype { owner: u, cells }
}

/// Builds one genotype per user with at least one event.
///
/// Users are processed in parallel; the result does not depend on the worker count.
pub fn build_genome(ds: &Dataset) -> Genome {
    let hashtags: Vec<HashtagId> = ds.hashtags().collect();
    let mean_lat: Vec<Option<f64>> = hashtags
        .par_iter()
        .map(|&h| {
            ds.hashtag_topic(h)
                .and_then(|_| hashtag_mean_lat(ds, h))
        })
        .collect();
    let users = ds.active_users();
    let genotypes: Vec<Genotype> = users
        .par_iter()
        .map(|&u| user_genotype(ds, u, &mean_lat))
        .collect();
    Genome {
        genotypes: genotypes.into_iter().map(|g| (g.owner, g)).collect(),
        provenance: Provenance {
            dataset_digest: ds.dataset_digest().to_string(),
            topics_digest: ds.topics_digest().to_string(),
        },
    }
}

impl Genome {
    /// Copy keeping only cells that match the given topic and metric.
    pub fn filtered(&self, topic: Option<TopicId>, metric: Option<MetricKind>) -> Genome {
        let genotypes = self
            .genotypes
            .iter()
            .map(|(&u, g)| {
                let cells = g
                    .cells
                    .iter()
                    .filter(|((t, m), _)| topic.is_none_or(|x| x == *t) && metric.is_none_or(|x| x == *m))
                    .map(|(k, c)| (*k, c.clone()))
                    .collect();
                (u, Genotype { owner: u, cells })
            })
            .filter(|(_, g)| !g.cells.is_empty())
            .collect();
        Genome {
            genotypes,
            provenance: self.provenance.clone(),
        }
    }

    /// All defined values of `metric`, ordered by user then hashtag.
    pub fn observations(&self, metric: MetricKind) -> Vec<Observation> {
        let mut out = Vec::new();
        for (&user, g) in &self.genotypes {
            for (&(topic, kind), cell) in &g.cells {
                if kind != metric {
                    continue;
                }
                out.extend(cell.values.iter().map(|&(hashtag, value)| Observation {
                    user,
                    hashtag,
                    topic,
                    value,
                }));
            }
        }
        out.sort_by_key(|o| (o.user, o.hashtag));
        out
    }

    /// Writes `user, topic, metric, value` rows sorted by name.
    pub fn write_values_tsv<W: Write>(&self, ds: &Dataset, mut w: W) -> Result<()> {
        writeln!(w, "user\ttopic\tmetric\tvalue")?;
        let mut rows = Vec::new();
        for (&u, g) in &self.genotypes {
            for (&(t, m), cell) in &g.cells {
                for &(h, v) in &cell.values {
                    rows.push((ds.user_name(u), t, m, ds.hashtag_name(h), v));
                }
            }
        }
        rows.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));
        for (u, t, m, _, v) in rows {
            writeln!(w, "{u}\t{}\t{m}\t{v}", ds.topics().topic_name(t))?;
        }
        Ok(())
    }

    /// Writes `user, topic, metric, mean, count` rows sorted by name.
    pub fn write_summary_tsv<W: Write>(&self, ds: &Dataset, mut w: W) -> Result<()> {
        writeln!(w, "user\ttopic\tmetric\tmean\tcount")?;
        let mut rows: Vec<_> = self
            .genotypes
            .iter()
            .flat_map(|(&u, g)| {
                g.cells
                    .iter()
                    .map(move |(&(t, m), c)| (ds.user_name(u), t, m, c.mean, c.count))
            })
            .collect();
        rows.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        for (u, t, m, mean, count) in rows {
            writeln!(w, "{u}\t{}\t{m}\t{mean}\t{count}", ds.topics().topic_name(t))?;
        }
        Ok(())
    }
}

/// Per-user mean TIME on `topic`; users without TIME values are omitted.
pub fn node_topic_latency(genome: &Genome, topic: TopicId) -> BTreeMap<UserId, f64> {
    genome
        .genotypes
        .iter()
        .filter_map(|(&u, g)| {
            g.cell(topic, MetricKind::Time)
                .filter(|c| c.count > 0)
                .map(|c| (u, c.mean))
        })
        .collect()
}
