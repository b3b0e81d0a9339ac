use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use super::{
    build_adoption_index, load_events, load_follower_edges, load_topics, AdoptionIndex, EventLog,
    FollowerNetwork, HashtagId, TopicId, TopicMap, UserId,
};
use crate::digest::sha256_hex;
use crate::error::{Error, Result};

/// An interned event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Post {
    pub time: i64,
    pub user: UserId,
    pub hashtag: HashtagId,
}

/// Immutable bundle of network, events, topic map and the derived index.
///
/// Users that post but are absent from the edge file become isolated nodes.
/// Hashtag ids follow lexicographic order over the union of event and
/// topic-map hashtags.
#[derive(Debug, Clone)]
pub struct Dataset {
    net: FollowerNetwork,
    topics: TopicMap,
    events: EventLog,
    hashtags: Vec<String>,
    hashtag_ids: HashMap<String, HashtagId>,
    hashtag_topic: Vec<Option<TopicId>>,
    posts: Vec<Post>,
    // per user, per topic: ascending post times
    topic_times: Vec<Vec<Vec<i64>>>,
    activity: Vec<u32>,
    index: AdoptionIndex,
    dataset_digest: String,
    topics_digest: String,
}

impl Dataset {
    pub fn new(mut net: FollowerNetwork, events: EventLog, topics: TopicMap) -> Self {
        let mut names: Vec<String> = events
            .events()
            .iter()
            .map(|e| e.hashtag.clone())
            .chain(topics.iter().map(|(h, _)| h.to_string()))
            .collect();
        names.sort_unstable();
        names.dedup();
        let hashtag_ids: HashMap<String, HashtagId> = names
            .iter()
            .enumerate()
            .map(|(i, h)| (h.clone(), HashtagId(i as u32)))
            .collect();
        let hashtag_topic: Vec<Option<TopicId>> = names.iter().map(|h| topics.topic_of(h)).collect();

        let mut extra: Vec<&str> = events
            .events()
            .iter()
            .map(|e| e.user.as_str())
            .filter(|u| net.id(u).is_none())
            .collect();
        extra.sort_unstable();
        extra.dedup();
        for u in extra {
            net.add_user(u);
        }

        let posts: Vec<Post> = events
            .events()
            .iter()
            .map(|e| Post {
                time: e.time,
                user: net.id(&e.user).expect("user interned above"),
                hashtag: hashtag_ids[&e.hashtag],
            })
            .collect();

        let n_topics = topics.topic_count();
        let mut topic_times = vec![vec![Vec::new(); n_topics]; net.user_count()];
        let mut activity = vec![0u32; net.user_count()];
        for p in &posts {
            activity[p.user.index()] += 1;
            if let Some(t) = hashtag_topic[p.hashtag.index()] {
                topic_times[p.user.index()][t.index()].push(p.time);
            }
        }
        for per_user in &mut topic_times {
            for v in per_user {
                v.sort_unstable();
            }
        }

        let index = build_adoption_index(&posts, names.len(), &net);

        let mut buf = Vec::new();
        net.write_tsv(&mut buf).expect("in-memory write");
        buf.push(0);
        events.write_tsv(&mut buf).expect("in-memory write");
        let dataset_digest = sha256_hex(&buf);
        let mut tbuf = Vec::new();
        topics.write_tsv(&mut tbuf).expect("in-memory write");
        let topics_digest = sha256_hex(&tbuf);

        Self {
            net,
            topics,
            events,
            hashtags: names,
            hashtag_ids,
            hashtag_topic,
            posts,
            topic_times,
            activity,
            index,
            dataset_digest,
            topics_digest,
        }
    }

    /// Loads the three TSV files.
    pub fn load(edges: &Path, events: &Path, topics: &Path) -> Result<Self> {
        let open = |p: &Path| -> Result<BufReader<File>> {
            File::open(p).map(BufReader::new).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
            })
        };
        let net = load_follower_edges(open(edges)?)?;
        let log = load_events(open(events)?)?;
        let map = load_topics(open(topics)?)?;
        Ok(Self::new(net, log, map))
    }

    pub fn net(&self) -> &FollowerNetwork {
        &self.net
    }

    pub fn topics(&self) -> &TopicMap {
        &self.topics
    }

    pub fn events(&self) -> &EventLog {
        &self.events
    }

    pub fn index(&self) -> &AdoptionIndex {
        &self.index
    }

    /// Interned events in `(time, user name, hashtag)` order.
    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn hashtag_count(&self) -> usize {
        self.hashtags.len()
    }

    pub fn hashtags(&self) -> impl Iterator<Item = HashtagId> {
        (0..self.hashtags.len() as u32).map(HashtagId)
    }

    pub fn hashtag_name(&self, h: HashtagId) -> &str {
        &self.hashtags[h.index()]
    }

    /// Looks up a hashtag, normalizing case and a leading `#`.
    pub fn hashtag_id(&self, name: &str) -> Option<HashtagId> {
        self.hashtag_ids
            .get(&super::normalize_hashtag(name))
            .copied()
    }

    pub fn hashtag_topic(&self, h: HashtagId) -> Option<TopicId> {
        self.hashtag_topic[h.index()]
    }

    /// Hashtags assigned to `t`, ascending by id.
    pub fn topic_hashtags(&self, t: TopicId) -> Vec<HashtagId> {
        self.hashtags()
            .filter(|&h| self.hashtag_topic(h) == Some(t))
            .collect()
    }

    pub fn user(&self, name: &str) -> Option<UserId> {
        self.net.id(name)
    }

    pub fn user_name(&self, u: UserId) -> &str {
        self.net.name(u)
    }

    /// Number of hashtag-use events by `u`.
    pub fn activity(&self, u: UserId) -> u32 {
        self.activity[u.index()]
    }

    /// Number of hashtag-use events by `u` on hashtags of topic `t`.
    pub fn topic_activity(&self, u: UserId, t: TopicId) -> u32 {
        self.topic_times[u.index()][t.index()].len() as u32
    }

    /// Ascending times of `u`'s posts on topic `t`.
    pub fn topic_post_times(&self, u: UserId, t: TopicId) -> &[i64] {
        &self.topic_times[u.index()][t.index()]
    }

    /// Users with at least one event, ascending by id.
    pub fn active_users(&self) -> Vec<UserId> {
        self.net
            .users()
            .filter(|&u| self.activity[u.index()] > 0)
            .collect()
    }

    /// SHA-256 over the canonical edge and event serializations.
    pub fn dataset_digest(&self) -> &str {
        &self.dataset_digest
    }

    /// SHA-256 over the canonical topic map serialization.
    pub fn topics_digest(&self) -> &str {
        &self.topics_digest
    }

    /// Same dataset with every event of `hashtag` removed.
    pub fn without_hashtag_events(&self, hashtag: &str) -> Self {
        let kept: Vec<_> = self
            .events
            .events()
            .iter()
            .filter(|e| e.hashtag != hashtag)
            .cloned()
            .collect();
        Self::new(self.net.clone(), EventLog::from_events(kept), self.topics.clone())
    }
}
