//! Loading and indexing of the three input artifacts.
//!
//! * `edges.tsv`: `followee<TAB>follower`, plus an optional `[nodes]` section
//!   listing isolated users one per line.
//! * `events.tsv`: `time<TAB>user<TAB>hashtag[,hashtag...]`.
//! * `topics.tsv`: `hashtag<TAB>topic`.
//!
//! Lines starting with `#` are comments in all three files. Hashtags are
//! lowercased and stripped of their leading `#`.

mod dataset;
mod events;
mod index;
mod network;
mod topics;

pub use dataset::{Dataset, Post};
pub use events::{load_events, EventLog, PostEvent};
pub use index::{build_adoption_index, AdoptionIndex};
pub use network::{load_follower_edges, FollowerNetwork};
pub use topics::{load_topics, TopicMap};

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident, $inner:ty) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub struct $name(pub $inner);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Dense index of a user inside a [`FollowerNetwork`].
    UserId,
    u32
);
id_type!(
    /// Dense index of a hashtag inside a [`Dataset`].
    HashtagId,
    u32
);
id_type!(
    /// Position of a topic in the [`TopicMap`] ordering.
    TopicId,
    u16
);

/// Lowercase and strip a single leading `#`.
pub fn normalize_hashtag(raw: &str) -> String {
    let t = raw.trim();
    t.strip_prefix('#').unwrap_or(t).to_lowercase()
}

/// Iterates `(line_number, content)` for non-empty, non-comment lines.
pub(crate) fn data_lines<R: std::io::BufRead>(
    reader: R,
) -> impl Iterator<Item = std::io::Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e)),
        Ok(l) => {
            let l = l.trim_end_matches('\r');
            if l.trim().is_empty() || l.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, l.to_string())))
            }
        }
    })
}

#[cfg(test)]
pub(crate) use dataset::fixtures as dataset_fixtures;
