use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{nb_consensus, train_local, LocalClassifier};
use crate::digest::Digester;
use crate::error::{Error, Result};
use crate::genotype::{MetricKind, Observation};
use crate::ingest::{HashtagId, TopicId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopicError {
    pub topic: TopicId,
    pub error: f64,
    pub hashtags: usize,
}

/// Per-topic error rates plus their hashtag-weighted mean `E[x]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub rows: Vec<TopicError>,
    pub expected: f64,
}

impl ErrorTable {
    /// From per-topic `(misclassified, total)` tallies; topics with no
    /// hashtags are left out.
    fn from_tallies(tallies: &BTreeMap<TopicId, (usize, usize)>) -> Self {
        let rows: Vec<TopicError> = tallies
            .iter()
            .filter(|(_, &(_, n))| n > 0)
            .map(|(&topic, &(wrong, n))| TopicError {
                topic,
                error: wrong as f64 / n as f64,
                hashtags: n,
            })
            .collect();
        let total: usize = rows.iter().map(|r| r.hashtags).sum();
        let expected = if total == 0 {
            f64::NAN
        } else {
            rows.iter().map(|r| r.error * r.hashtags as f64).sum::<f64>() / total as f64
        };
        Self { rows, expected }
    }

    pub fn error(&self, topic: TopicId) -> Option<f64> {
        self.rows.iter().find(|r| r.topic == topic).map(|r| r.error)
    }

    pub fn accuracy(&self) -> f64 {
        1.0 - self.expected
    }
}

/// Error of guessing topics in proportion to their hashtag counts:
/// `1 − share(t)` per topic.
pub fn random_baseline(hashtags_per_topic: &BTreeMap<TopicId, usize>) -> ErrorTable {
    let total: usize = hashtags_per_topic.values().sum();
    let rows: Vec<TopicError> = hashtags_per_topic
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(&topic, &n)| TopicError {
            topic,
            error: 1.0 - n as f64 / total as f64,
            hashtags: n,
        })
        .collect();
    let expected = rows.iter().map(|r| r.error * r.hashtags as f64).sum::<f64>() / total as f64;
    ErrorTable { rows, expected }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub hashtag: HashtagId,
    pub truth: TopicId,
    pub predicted: TopicId,
    pub contributors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LooReport {
    pub metric: MetricKind,
    pub test: ErrorTable,
    pub train: Option<ErrorTable>,
    pub random: ErrorTable,
    pub predictions: Vec<Prediction>,
    /// Hashtags not evaluated because their topic has a single hashtag.
    pub skipped: Vec<HashtagId>,
}

#[derive(Debug, Clone, Default)]
pub struct LooOptions {
    /// Also classify every training hashtag of each fold.
    pub with_train: bool,
    /// Only these users contribute to consensus votes.
    pub users: Option<BTreeSet<UserId>>,
}

/// Observations indexed for leave-one-hashtag-out folds.
#[derive(Debug, Clone)]
pub struct Folds {
    metric: MetricKind,
    topics: Vec<TopicId>,
    by_user: BTreeMap<UserId, Vec<(HashtagId, TopicId, f64)>>,
    by_hashtag: BTreeMap<HashtagId, Vec<(UserId, f64)>>,
    hashtag_topic: BTreeMap<HashtagId, TopicId>,
    full: HashMap<UserId, Option<LocalClassifier>>,
}

impl Folds {
    pub fn new(metric: MetricKind, observations: &[Observation], topic_count: usize) -> Self {
        let mut by_user: BTreeMap<UserId, Vec<(HashtagId, TopicId, f64)>> = BTreeMap::new();
        let mut by_hashtag: BTreeMap<HashtagId, Vec<(UserId, f64)>> = BTreeMap::new();
        let mut hashtag_topic = BTreeMap::new();
        for o in observations {
            by_user.entry(o.user).or_default().push((o.hashtag, o.topic, o.value));
            by_hashtag.entry(o.hashtag).or_default().push((o.user, o.value));
            hashtag_topic.insert(o.hashtag, o.topic);
        }
        for v in by_user.values_mut() {
            v.sort_by_key(|&(h, _, _)| h);
        }
        for v in by_hashtag.values_mut() {
            v.sort_by_key(|&(u, _)| u);
        }
        let full = by_user
            .par_iter()
            .map(|(&u, data)| (u, train_local(u, metric, data).ok()))
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
        Self {
            metric,
            topics: (0..topic_count as u16).map(TopicId).collect(),
            by_user,
            by_hashtag,
            hashtag_topic,
            full,
        }
    }

    /// Training triples of `user` with every value of `held_out` removed.
    pub fn training_set(&self, user: UserId, held_out: HashtagId) -> Vec<(HashtagId, TopicId, f64)> {
        self.by_user
            .get(&user)
            .map(|v| v.iter().copied().filter(|&(h, _, _)| h != held_out).collect())
            .unwrap_or_default()
    }

    /// Digest of every training set used by the fold that withholds `held_out`.
    pub fn training_digest(&self, held_out: HashtagId) -> String {
        let mut d = Digester::new();
        for &u in self.by_user.keys() {
            d.u64(u.0 as u64);
            for (h, t, v) in self.training_set(u, held_out) {
                d.u64(h.0 as u64).u64(t.0 as u64).f64(v);
            }
        }
        d.finish()
    }

    /// Users with a classifier trained on all of their data.
    pub fn trained_users(&self) -> Vec<UserId> {
        self.full
            .iter()
            .filter(|(_, c)| c.is_some())
            .map(|(&u, _)| u)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn hashtags(&self) -> impl Iterator<Item = (HashtagId, TopicId)> + '_ {
        self.hashtag_topic.iter().map(|(&h, &t)| (h, t))
    }

    fn hashtag_counts(&self, without: Option<HashtagId>) -> BTreeMap<TopicId, usize> {
        let mut m: BTreeMap<TopicId, usize> = self.topics.iter().map(|&t| (t, 0)).collect();
        for (&h, &t) in &self.hashtag_topic {
            if Some(h) != without {
                *m.entry(t).or_insert(0) += 1;
            }
        }
        m
    }

    fn prior(&self, without: HashtagId) -> Vec<f64> {
        let counts = self.hashtag_counts(Some(without));
        let total: usize = counts.values().sum();
        self.topics
            .iter()
            .map(|t| counts.get(t).copied().unwrap_or(0) as f64 / total.max(1) as f64)
            .collect()
    }

    fn classify(
        &self,
        h: HashtagId,
        prior: &[f64],
        users: Option<&BTreeSet<UserId>>,
        fold: &BTreeMap<UserId, Option<LocalClassifier>>,
    ) -> (TopicId, usize) {
        let locals: Vec<(&LocalClassifier, f64)> = self.by_hashtag[&h]
            .iter()
            .filter(|(u, _)| users.is_none_or(|s| s.contains(u)))
            .filter_map(|&(u, v)| {
                let clf = match fold.get(&u) {
                    Some(c) => c.as_ref(),
                    None => self.full.get(&u).and_then(Option::as_ref),
                };
                clf.map(|c| (c, v))
            })
            .collect();
        let r = nb_consensus(h, &self.topics, prior, &locals);
        (r.predicted, r.contributing_users)
    }

    /// Classifiers of the users of `held_out`, retrained without it.
    fn fold_classifiers(
        &self,
        held_out: HashtagId,
        users: Option<&BTreeSet<UserId>>,
    ) -> BTreeMap<UserId, Option<LocalClassifier>> {
        self.by_hashtag[&held_out]
            .iter()
            .filter(|(u, _)| users.is_none_or(|s| s.contains(u)))
            .map(|&(u, _)| {
                let data = self.training_set(u, held_out);
                let clf = if data.is_empty() {
                    None
                } else {
                    train_local(u, self.metric, &data).ok()
                };
                (u, clf)
            })
            .collect()
    }

    /// Runs every fold.
    pub fn run(&self, opts: &LooOptions) -> LooReport {
        let counts = self.hashtag_counts(None);
        let evaluated: Vec<(HashtagId, TopicId)> = self
            .hashtags()
            .filter(|(_, t)| counts[t] >= 2)
            .collect();
        let skipped: Vec<HashtagId> = self
            .hashtags()
            .filter(|(_, t)| counts[t] < 2)
            .map(|(h, _)| h)
            .collect();
        let users = opts.users.as_ref();

        struct FoldOutcome {
            prediction: Prediction,
            train: Vec<(TopicId, bool)>,
        }

        let outcomes: Vec<FoldOutcome> = evaluated
            .par_iter()
            .map(|&(h, truth)| {
                let prior = self.prior(h);
                let fold = self.fold_classifiers(h, users);
                let (predicted, contributors) = self.classify(h, &prior, users, &fold);
                let train = if opts.with_train {
                    self.hashtags()
                        .filter(|&(h2, _)| h2 != h)
                        .map(|(h2, t2)| (t2, self.classify(h2, &prior, users, &fold).0 != t2))
                        .collect()
                } else {
                    Vec::new()
                };
                FoldOutcome {
                    prediction: Prediction {
                        hashtag: h,
                        truth,
                        predicted,
                        contributors,
                    },
                    train,
                }
            })
            .collect();

        let mut test: BTreeMap<TopicId, (usize, usize)> = BTreeMap::new();
        let mut train: BTreeMap<TopicId, (usize, usize)> = BTreeMap::new();
        for o in &outcomes {
            let e = test.entry(o.prediction.truth).or_default();
            e.1 += 1;
            if o.prediction.predicted != o.prediction.truth {
                e.0 += 1;
            }
            for &(t, wrong) in &o.train {
                let e = train.entry(t).or_default();
                e.1 += 1;
                e.0 += wrong as usize;
            }
        }
        let mut eval_counts: BTreeMap<TopicId, usize> = BTreeMap::new();
        for &(_, t) in &evaluated {
            *eval_counts.entry(t).or_insert(0) += 1;
        }
        LooReport {
            metric: self.metric,
            test: ErrorTable::from_tallies(&test),
            train: opts.with_train.then(|| ErrorTable::from_tallies(&train)),
            random: if eval_counts.is_empty() {
                ErrorTable {
                    rows: Vec::new(),
                    expected: f64::NAN,
                }
            } else {
                random_baseline(&eval_counts)
            },
            predictions: outcomes.into_iter().map(|o| o.prediction).collect(),
            skipped,
        }
    }
}

/// Leave-one-hashtag-out NB-consensus validation of one metric.
pub fn leave_one_out(
    metric: MetricKind,
    observations: &[Observation],
    topic_count: usize,
    opts: &LooOptions,
) -> Result<LooReport> {
    if observations.is_empty() {
        return Err(Error::InvalidArgument(format!("no {metric} observations")));
    }
    Ok(Folds::new(metric, observations, topic_count).run(opts))
}

/// Accuracy of one random ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub size: usize,
    pub repetition: usize,
    pub accuracy: f64,
    pub per_topic: Vec<(TopicId, f64)>,
}

/// Leave-one-out test accuracy using only `size` classifiers drawn uniformly
/// (without replacement) from all trained users, `repetitions` times per size.
///
/// Draw `(i, r)` uses ChaCha8 seeded with `seed` on stream `i << 32 | r`, so
/// results do not depend on thread scheduling.
pub fn accuracy_curve(
    metric: MetricKind,
    observations: &[Observation],
    topic_count: usize,
    sizes: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let folds = Folds::new(metric, observations, topic_count);
    let pool = folds.trained_users();
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be positive".into()));
    }
    for &s in sizes {
        if s == 0 {
            return Err(Error::InvalidArgument("ensemble size must be positive".into()));
        }
        if s > pool.len() {
            return Err(Error::InvalidArgument(format!(
                "ensemble size {s} exceeds the {} trained users",
                pool.len()
            )));
        }
    }
    let tasks: Vec<(usize, usize, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| (0..repetitions).map(move |r| (i, s, r)))
        .collect();
    Ok(tasks
        .par_iter()
        .map(|&(i, size, rep)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((i as u64) << 32) | rep as u64);
            let chosen: BTreeSet<UserId> = sample(&mut rng, pool.len(), size)
                .into_iter()
                .map(|j| pool[j])
                .collect();
            let report = folds.run(&LooOptions {
                with_train: false,
                users: Some(chosen),
            });
            CurvePoint {
                size,
                repetition: rep,
                accuracy: report.test.accuracy(),
                per_topic: report
                    .test
                    .rows
                    .iter()
                    .map(|r| (r.topic, 1.0 - r.error))
                    .collect(),
            }
        })
        .collect())
}

/// Mean accuracy per ensemble size, in first-appearance order of sizes.
pub fn curve_means(points: &[CurvePoint]) -> Vec<(usize, f64)> {
    let mut order = Vec::new();
    let mut acc: HashMap<usize, (f64, usize)> = HashMap::new();
    for p in points {
        let e = acc.entry(p.size).or_insert_with(|| {
            order.push(p.size);
            (0.0, 0)
        });
        e.0 += p.accuracy;
        e.1 += 1;
    }
    order
        .into_iter()
        .map(|s| (s, acc[&s].0 / acc[&s].1 as f64))
        .collect()
}

/// Median over users of the smallest gap between adjacent topic means,
/// in units of that user's pooled within-topic standard deviation.
///
/// Only users with at least two values in each of at least two topics count.
/// `None` when no user qualifies.
pub fn class_separation(observations: &[Observation]) -> Option<f64> {
    let mut by_user: BTreeMap<UserId, BTreeMap<TopicId, Vec<f64>>> = BTreeMap::new();
    for o in observations {
        by_user.entry(o.user).or_default().entry(o.topic).or_default().push(o.value);
    }
    let mut ratios: Vec<f64> = by_user
        .values()
        .filter_map(|topics| {
            let groups: Vec<&Vec<f64>> = topics.values().filter(|v| v.len() >= 2).collect();
            if groups.len() < 2 {
                return None;
            }
            let mut means = Vec::new();
            let (mut ss, mut n) = (0.0, 0usize);
            for g in &groups {
                let m = g.iter().sum::<f64>() / g.len() as f64;
                ss += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
                n += g.len();
                means.push(m);
            }
            means.sort_by(f64::total_cmp);
            let gap = means.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let sd = (ss / (n - groups.len()) as f64).sqrt();
            Some(if sd > 0.0 { gap / sd } else if gap > 0.0 { f64::INFINITY } else { 0.0 })
        })
        .collect();
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    let m = ratios.len();
    Some(if m % 2 == 1 { ratios[m / 2] } else { (ratios[m / 2 - 1] + ratios[m / 2]) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_baseline_even_split() {
        let m: BTreeMap<TopicId, usize> = [(TopicId(0), 4), (TopicId(1), 4)].into();
        let r = random_baseline(&m);
        assert_eq!(r.error(TopicId(0)), Some(0.5));
        assert_eq!(r.expected, 0.5);
    }

    #[test]
    fn random_baseline_is_one_minus_sum_of_squared_shares() {
        let m: BTreeMap<TopicId, usize> = [(TopicId(0), 1), (TopicId(1), 3)].into();
        let r = random_baseline(&m);
        assert!((r.expected - (1.0 - 0.25f64.powi(2) - 0.75f64.powi(2))).abs() < 1e-15);
    }

    fn obs(user: u32, hashtag: u32, topic: u16, value: f64) -> Observation {
        Observation {
            user: UserId(user),
            hashtag: HashtagId(hashtag),
            topic: TopicId(topic),
            value,
        }
    }

    #[test]
    fn singleton_topic_is_skipped() {
        // topic 2 owns only hashtag 9
        let mut o = Vec::new();
        for u in 0..3 {
            for h in 0..4 {
                o.push(obs(u, h, (h % 2) as u16, (h % 2) as f64 * 10.0 + u as f64 * 0.1 + h as f64 * 0.01));
            }
            o.push(obs(u, 9, 2, 50.0));
        }
        let r = leave_one_out(MetricKind::Lat, &o, 3, &LooOptions::default()).unwrap();
        assert_eq!(r.skipped, vec![HashtagId(9)]);
        assert_eq!(r.predictions.len(), 4);
        assert_eq!(r.test.expected, 0.0);
    }

    #[test]
    fn held_out_values_never_reach_training() {
        let mut o = Vec::new();
        for u in 0..4 {
            for h in 0..6 {
                o.push(obs(u, h, (h % 2) as u16, h as f64 + u as f64));
            }
        }
        let folds = Folds::new(MetricKind::Lat, &o, 2);
        let before = folds.training_digest(HashtagId(3));
        for x in o.iter_mut().filter(|x| x.hashtag == HashtagId(3)) {
            x.value += 1000.0;
        }
        let after = Folds::new(MetricKind::Lat, &o, 2).training_digest(HashtagId(3));
        assert_eq!(before, after);
        assert_ne!(before, folds.training_digest(HashtagId(2)));
        assert!(folds
            .training_set(UserId(1), HashtagId(3))
            .iter()
            .all(|&(h, _, _)| h != HashtagId(3)));
    }

    #[test]
    fn zero_size_is_rejected() {
        let o = vec![obs(0, 0, 0, 1.0), obs(0, 1, 1, 2.0)];
        assert!(accuracy_curve(MetricKind::Lat, &o, 2, &[0], 1, 1).is_err());
        assert!(accuracy_curve(MetricKind::Lat, &o, 2, &[2], 1, 1).is_err());
    }
}
