use std::collections::HashMap;

use super::{FollowerNetwork, HashtagId, Post, UserId};

/// First-use, first-exposure and use-count lookups for every `(user, hashtag)`.
#[derive(Debug, Clone, Default)]
pub struct AdoptionIndex {
    first_use: HashMap<(UserId, HashtagId), i64>,
    first_exposure: HashMap<(UserId, HashtagId), i64>,
    use_counts: HashMap<(UserId, HashtagId), u32>,
    // per hashtag: (first use, user), ascending
    adopters: Vec<Vec<(i64, UserId)>>,
    // per user: adopted hashtags, ascending
    adopted: Vec<Vec<HashtagId>>,
}

impl AdoptionIndex {
    pub fn first_use(&self, u: UserId, h: HashtagId) -> Option<i64> {
        self.first_use.get(&(u, h)).copied()
    }

    /// Earliest first use of `h` among the followees of `u`, whether or not
    /// it precedes `u`'s own use.
    pub fn first_exposure(&self, u: UserId, h: HashtagId) -> Option<i64> {
        self.first_exposure.get(&(u, h)).copied()
    }

    pub fn use_count(&self, u: UserId, h: HashtagId) -> u32 {
        self.use_counts.get(&(u, h)).copied().unwrap_or(0)
    }

    /// Adopters of `h` as `(first use, user)`, earliest first.
    pub fn adopters(&self, h: HashtagId) -> &[(i64, UserId)] {
        self.adopters.get(h.index()).map_or(&[], Vec::as_slice)
    }

    /// Hashtags used at least once by `u`, ascending by id.
    pub fn adopted(&self, u: UserId) -> &[HashtagId] {
        self.adopted.get(u.index()).map_or(&[], Vec::as_slice)
    }

    pub fn pair_count(&self) -> usize {
        self.first_use.len()
    }
}

/// Builds the index from interned posts. Every post user must be a node of `net`.
///
/// The result depends only on the multiset of posts, not on their order.
pub fn build_adoption_index(
    posts: &[Post],
    hashtag_count: usize,
    net: &FollowerNetwork,
) -> AdoptionIndex {
    let mut first_use: HashMap<(UserId, HashtagId), i64> = HashMap::new();
    let mut use_counts: HashMap<(UserId, HashtagId), u32> = HashMap::new();
    for p in posts {
        first_use
            .entry((p.user, p.hashtag))
            .and_modify(|t| *t = (*t).min(p.time))
            .or_insert(p.time);
        *use_counts.entry((p.user, p.hashtag)).or_insert(0) += 1;
    }

    let mut adopters: Vec<Vec<(i64, UserId)>> = vec![Vec::new(); hashtag_count];
    let mut adopted: Vec<Vec<HashtagId>> = vec![Vec::new(); net.user_count()];
    for (&(u, h), &t) in &first_use {
        adopters[h.index()].push((t, u));
        adopted[u.index()].push(h);
    }
    adopters.iter_mut().for_each(|a| a.sort_unstable());
    adopted.iter_mut().for_each(|a| a.sort_unstable());

    let mut first_exposure: HashMap<(UserId, HashtagId), i64> = HashMap::new();
    for (h, list) in adopters.iter().enumerate() {
        let h = HashtagId(h as u32);
        // ascending times: the first writer for each follower is the minimum
        for &(t, v) in list {
            for &w in net.followers(v) {
                first_exposure.entry((w, h)).or_insert(t);
            }
        }
    }

    AdoptionIndex {
        first_use,
        first_exposure,
        use_counts,
        adopters,
        adopted,
    }
}
