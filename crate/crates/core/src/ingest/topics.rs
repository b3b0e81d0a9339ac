use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{data_lines, normalize_hashtag, TopicId};
use crate::error::{Error, Result};

/// Assignment of every known hashtag to exactly one topic.
///
/// Topics are ordered by first appearance; that order is the tie-break order
/// used by the classifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicMap {
    topics: Vec<String>,
    assignment: BTreeMap<String, TopicId>,
}

impl TopicMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns `hashtag` to `topic`, creating the topic on first sight.
    /// Re-assigning a hashtag to a different topic is an error.
    pub fn assign(&mut self, hashtag: &str, topic: &str) -> Result<TopicId> {
        let tid = match self.topic_id(topic) {
            Some(t) => t,
            None => {
                self.topics.push(topic.to_string());
                TopicId((self.topics.len() - 1) as u16)
            }
        };
        let h = normalize_hashtag(hashtag);
        match self.assignment.get(&h) {
            Some(&prev) if prev != tid => Err(Error::InvalidArgument(format!(
                "hashtag `{h}` mapped to both `{}` and `{topic}`",
                self.topics[prev.index()]
            ))),
            _ => {
                self.assignment.insert(h, tid);
                Ok(tid)
            }
        }
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(pairs: I) -> Result<Self> {
        let mut m = Self::new();
        for (h, t) in pairs {
            m.assign(h, t)?;
        }
        Ok(m)
    }

    pub fn topic_count(&self) -> usize {
        self.topics.len()
    }

    pub fn topics(&self) -> impl Iterator<Item = TopicId> {
        (0..self.topics.len() as u16).map(TopicId)
    }

    pub fn topic_name(&self, t: TopicId) -> &str {
        &self.topics[t.index()]
    }

    pub fn topic_id(&self, name: &str) -> Option<TopicId> {
        self.topics
            .iter()
            .position(|t| t == name)
            .map(|i| TopicId(i as u16))
    }

    /// Topic of a normalized hashtag.
    pub fn topic_of(&self, hashtag: &str) -> Option<TopicId> {
        self.assignment.get(hashtag).copied()
    }

    /// Hashtags of `t` in lexicographic order.
    pub fn hashtags_of(&self, t: TopicId) -> impl Iterator<Item = &str> {
        self.assignment
            .iter()
            .filter(move |(_, &tt)| tt == t)
            .map(|(h, _)| h.as_str())
    }

    /// All `(hashtag, topic)` pairs in hashtag order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, TopicId)> {
        self.assignment.iter().map(|(h, &t)| (h.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Copy of the map without `hashtag`.
    pub fn without(&self, hashtag: &str) -> Self {
        let mut m = self.clone();
        m.assignment.remove(hashtag);
        m
    }

    /// Writes `hashtag<TAB>topic` lines, grouped by topic in topic order so
    /// that reloading reproduces the same topic ordering.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for t in self.topics() {
            for h in self.hashtags_of(t) {
                writeln!(w, "{h}\t{}", self.topic_name(t))?;
            }
        }
        Ok(())
    }
}

/// Parses a `topics.tsv` stream.
pub fn load_topics<R: BufRead>(reader: R) -> Result<TopicMap> {
    let mut map = TopicMap::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split('\t').map(str::trim).collect();
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line,
                msg: "expected `hashtag<TAB>topic`".into(),
            });
        }
        let h = normalize_hashtag(fields[0]);
        if h.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty hashtag".into(),
            });
        }
        map.assign(&h, fields[1]).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
    }
    Ok(map)
}
