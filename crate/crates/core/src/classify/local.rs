use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::genotype::MetricKind;
use crate::ingest::{HashtagId, TopicId, UserId};

/// Lower bound on the pooled variance.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStats {
    pub topic: TopicId,
    pub mean: f64,
    pub count: usize,
}

/// One user's 1-D equal-variance Gaussian discriminant over the topics present
/// in their training data.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalClassifier {
    pub owner: UserId,
    pub metric: MetricKind,
    /// Ascending by topic.
    pub classes: Vec<ClassStats>,
    pub pooled_variance: f64,
    /// Aligned with `classes`; proportional to class counts.
    pub priors: Vec<f64>,
}

/// Trains on `(hashtag, topic, value)` triples.
///
/// Needs values for at least two topics. Fails with [`Error::Degenerate`] when
/// every value is identical, since no separation can be learned.
pub fn train_local(
    owner: UserId,
    metric: MetricKind,
    training: &[(HashtagId, TopicId, f64)],
) -> Result<LocalClassifier> {
    let mut groups: BTreeMap<TopicId, Vec<f64>> = BTreeMap::new();
    for &(_, t, v) in training {
        groups.entry(t).or_default().push(v);
    }
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "local classifier needs at least 2 topics, got {}",
            groups.len()
        )));
    }
    let first = training[0].2;
    if training.iter().all(|&(_, _, v)| v == first) {
        return Err(Error::Degenerate(format!(
            "all {} training values equal {first}",
            training.len()
        )));
    }
    let n: usize = training.len();
    let k = groups.len();
    let mut classes = Vec::with_capacity(k);
    let mut ss = 0.0;
    for (&topic, vals) in &groups {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        ss += vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        classes.push(ClassStats {
            topic,
            mean,
            count: vals.len(),
        });
    }
    let pooled = if n > k { ss / (n - k) as f64 } else { 0.0 };
    let priors = classes.iter().map(|c| c.count as f64 / n as f64).collect();
    Ok(LocalClassifier {
        owner,
        metric,
        classes,
        pooled_variance: pooled.max(VARIANCE_FLOOR),
        priors,
    })
}

impl LocalClassifier {
    /// Normalized log posterior for every class.
    pub fn log_posterior(&self, value: f64) -> Vec<(TopicId, f64)> {
        let two_var = 2.0 * self.pooled_variance;
        // Offsetting by the nearest squared distance keeps the prior term
        // from being swamped when the variance is tiny.
        let sq: Vec<f64> = self.classes.iter().map(|c| (value - c.mean).powi(2)).collect();
        let nearest = sq.iter().copied().fold(f64::INFINITY, f64::min);
        let scores: Vec<f64> = sq
            .iter()
            .zip(&self.priors)
            .map(|(d, p)| p.ln() - (d - nearest) / two_var)
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
        self.classes
            .iter()
            .zip(scores)
            .map(|(c, s)| (c.topic, s - lse))
            .collect()
    }

    pub fn posterior(&self, value: f64) -> Vec<(TopicId, f64)> {
        self.log_posterior(value)
            .into_iter()
            .map(|(t, l)| (t, l.exp()))
            .collect()
    }

    /// Most probable topic; ties go to the lower topic id.
    pub fn predict(&self, value: f64) -> TopicId {
        let lp = self.log_posterior(value);
        let mut best = lp[0];
        for &(t, l) in &lp[1..] {
            if l > best.1 {
                best = (t, l);
            }
        }
        best.0
    }

    pub fn prior(&self, topic: TopicId) -> f64 {
        self.classes
            .iter()
            .position(|c| c.topic == topic)
            .map_or(0.0, |i| self.priors[i])
    }

    pub fn covers(&self, topic: TopicId) -> bool {
        self.classes.iter().any(|c| c.topic == topic)
    }
}
