use super::LocalClassifier;
use crate::ingest::{HashtagId, TopicId};

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult {
    pub hashtag: HashtagId,
    pub predicted: TopicId,
    /// Aligned with the `topics` argument of [`nb_consensus`].
    pub log_scores: Vec<f64>,
    pub contributing_users: usize,
}

/// Naive Bayes vote over local classifiers.
///
/// Topic score = `ln prior(t) + Σ_u [ln P_u(t | x_u) − ln(1/K_u)]`, where
/// `K_u` is the number of topics user `u`'s classifier was trained on. A topic
/// outside that set gets 0 from the user, the same as a uniform posterior, so
/// missing training data neither supports nor vetoes it. The argmax is taken
/// in `topics` order, so earlier topics win ties; with no finite score the
/// global prior decides.
pub fn nb_consensus(
    hashtag: HashtagId,
    topics: &[TopicId],
    global_prior: &[f64],
    locals: &[(&LocalClassifier, f64)],
) -> ConsensusResult {
    assert_eq!(topics.len(), global_prior.len());
    let mut scores: Vec<f64> = global_prior.iter().map(|p| p.ln()).collect();
    for &(clf, value) in locals {
        let lp = clf.log_posterior(value);
        let uniform = -(lp.len() as f64).ln();
        for (i, t) in topics.iter().enumerate() {
            if let Some(&(_, l)) = lp.iter().find(|(tt, _)| tt == t) {
                scores[i] += l - uniform;
            }
        }
    }
    let argmax = |v: &[f64]| {
        let mut best = 0;
        for i in 1..v.len() {
            if v[i] > v[best] {
                best = i;
            }
        }
        best
    };
    let best = if scores.iter().any(|s| s.is_finite()) {
        argmax(&scores)
    } else {
        argmax(global_prior)
    };
    ConsensusResult {
        hashtag,
        predicted: topics[best],
        log_scores: scores,
        contributing_users: locals.len(),
    }
}
