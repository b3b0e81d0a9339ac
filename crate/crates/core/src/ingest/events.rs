use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{data_lines, normalize_hashtag};
use crate::error::{Error, Result};

/// One use of a hashtag by a user.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PostEvent {
    pub time: i64,
    pub user: String,
    pub hashtag: String,
}

impl PostEvent {
    pub fn new(user: &str, hashtag: &str, time: i64) -> Self {
        Self {
            time,
            user: user.to_string(),
            hashtag: normalize_hashtag(hashtag),
        }
    }
}

/// Time-ordered, de-duplicated hashtag use events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<PostEvent>,
    /// Lines dropped because they carried no hashtag.
    pub skipped_lines: usize,
}

impl EventLog {
    /// Sorts by `(time, user, hashtag)` and collapses identical triples.
    pub fn from_events(mut events: Vec<PostEvent>) -> Self {
        events.sort();
        events.dedup();
        Self {
            events,
            skipped_lines: 0,
        }
    }

    pub fn events(&self) -> &[PostEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Writes one line per event (no hashtag grouping).
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.events {
            writeln!(w, "{}\t{}\t{}", e.time, e.user, e.hashtag)?;
        }
        Ok(())
    }
}

/// Parses an `events.tsv` stream.
pub fn load_events<R: BufRead>(reader: R) -> Result<EventLog> {
    let mut events = Vec::new();
    let mut skipped = 0;
    for item in data_lines(reader) {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 && fields.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let time: i64 = fields[0].trim().parse().map_err(|_| Error::Parse {
            line,
            msg: format!("non-integer time `{}`", fields[0].trim()),
        })?;
        if time < 0 {
            return Err(Error::Parse {
                line,
                msg: format!("negative time {time}"),
            });
        }
        let user = fields[1].trim();
        if user.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty user identifier".into(),
            });
        }
        let tags: Vec<String> = fields
            .get(2)
            .map(|s| {
                s.split(',')
                    .map(normalize_hashtag)
                    .filter(|h| !h.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        if tags.is_empty() {
            skipped += 1;
            continue;
        }
        for hashtag in tags {
            events.push(PostEvent {
                time,
                user: user.to_string(),
                hashtag,
            });
        }
    }
    let mut log = EventLog::from_events(events);
    log.skipped_lines = skipped;
    Ok(log)
}
