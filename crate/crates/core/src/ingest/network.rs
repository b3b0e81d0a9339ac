use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{data_lines, UserId};
use crate::error::{Error, Result};

/// Directed follow graph. An edge `(u, v)` means `v` follows `u`, so
/// information flows from followee `u` to follower `v`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FollowerNetwork {
    names: Vec<String>,
    ids: HashMap<String, UserId>,
    // sorted in-neighbours (followees) and out-neighbours (followers)
    followees: Vec<Vec<UserId>>,
    followers: Vec<Vec<UserId>>,
    edge_count: usize,
}

impl FollowerNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a network from `(followee, follower)` name pairs.
    pub fn from_edges<'a, I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut net = Self::new();
        for (i, (a, b)) in edges.into_iter().enumerate() {
            let u = net.add_user(a);
            let v = net.add_user(b);
            if u == v {
                return Err(Error::SelfLoop {
                    line: i + 1,
                    user: a.to_string(),
                });
            }
            net.insert_edge(u, v);
        }
        Ok(net)
    }

    /// Returns the id of `name`, adding it as an isolated node if absent.
    pub fn add_user(&mut self, name: &str) -> UserId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = UserId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        self.followees.push(Vec::new());
        self.followers.push(Vec::new());
        id
    }

    /// Inserts `followee → follower`; returns false for a duplicate.
    pub fn insert_edge(&mut self, followee: UserId, follower: UserId) -> bool {
        assert_ne!(followee, follower, "self-loops are not allowed");
        let outs = &mut self.followers[followee.index()];
        match outs.binary_search(&follower) {
            Ok(_) => false,
            Err(pos) => {
                outs.insert(pos, follower);
                let ins = &mut self.followees[follower.index()];
                let pos = ins.binary_search(&followee).unwrap_err();
                ins.insert(pos, followee);
                self.edge_count += 1;
                true
            }
        }
    }

    pub fn user_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn name(&self, id: UserId) -> &str {
        &self.names[id.index()]
    }

    pub fn id(&self, name: &str) -> Option<UserId> {
        self.ids.get(name).copied()
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.names.len() as u32).map(UserId)
    }

    /// Users that `u` follows (in-neighbours).
    pub fn followees(&self, u: UserId) -> &[UserId] {
        &self.followees[u.index()]
    }

    /// Users following `u` (out-neighbours).
    pub fn followers(&self, u: UserId) -> &[UserId] {
        &self.followers[u.index()]
    }

    pub fn has_edge(&self, followee: UserId, follower: UserId) -> bool {
        self.followers[followee.index()]
            .binary_search(&follower)
            .is_ok()
    }

    /// All `(followee, follower)` edges, ordered by followee id then follower id.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        self.followers
            .iter()
            .enumerate()
            .flat_map(|(u, outs)| outs.iter().map(move |&v| (UserId(u as u32), v)))
    }

    /// Writes the network in the `edges.tsv` format, edges sorted by name.
    /// Isolated nodes go to a trailing `[nodes]` section.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut edges: Vec<(&str, &str)> = self
            .edges()
            .map(|(u, v)| (self.name(u), self.name(v)))
            .collect();
        edges.sort_unstable();
        for (u, v) in edges {
            writeln!(w, "{u}\t{v}")?;
        }
        let mut isolated: Vec<&str> = self
            .users()
            .filter(|&u| self.followees(u).is_empty() && self.followers(u).is_empty())
            .map(|u| self.name(u))
            .collect();
        if !isolated.is_empty() {
            isolated.sort_unstable();
            writeln!(w, "[nodes]")?;
            for n in isolated {
                writeln!(w, "{n}")?;
            }
        }
        Ok(())
    }
}

/// Parses an `edges.tsv` stream.
pub fn load_follower_edges<R: BufRead>(reader: R) -> Result<FollowerNetwork> {
    let mut net = FollowerNetwork::new();
    let mut in_nodes = false;
    for item in data_lines(reader) {
        let (line, text) = item?;
        if text.trim() == "[nodes]" {
            in_nodes = true;
            continue;
        }
        if in_nodes {
            let name = text.trim();
            if name.contains('\t') {
                return Err(Error::Parse {
                    line,
                    msg: "node list entries take a single field".into(),
                });
            }
            net.add_user(name);
            continue;
        }
        let fields: Vec<&str> = text.split('\t').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 2 tab-separated fields, found {}", fields.len()),
            });
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line,
                msg: "empty user identifier".into(),
            });
        }
        if fields[0] == fields[1] {
            return Err(Error::SelfLoop {
                line,
                user: fields[0].to_string(),
            });
        }
        let u = net.add_user(fields[0]);
        let v = net.add_user(fields[1]);
        net.insert_edge(u, v);
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_names(net: &FollowerNetwork) -> Vec<(String, String)> {
        let mut e: Vec<_> = net
            .edges()
            .map(|(u, v)| (net.name(u).to_string(), net.name(v).to_string()))
            .collect();
        e.sort();
        e
    }

    #[test]
    fn duplicate_edges_collapse() {
        let net = load_follower_edges("a\tb\na\tb".as_bytes()).unwrap();
        assert_eq!(net.edge_count(), 1);
        assert_eq!(edge_names(&net), vec![("a".into(), "b".into())]);
    }

    #[test]
    fn self_loop_is_rejected_with_line() {
        match load_follower_edges("a\ta".as_bytes()) {
            Err(Error::SelfLoop { line, user }) => {
                assert_eq!(line, 1);
                assert_eq!(user, "a");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_line_file() {
        let net = load_follower_edges("a\tb\nc\tb".as_bytes()).unwrap();
        let mut names: Vec<_> = net.users().map(|u| net.name(u)).collect();
        names.sort();
        assert_eq!(names, vec!["a", "b", "c"]);
        assert_eq!(
            edge_names(&net),
            vec![("a".into(), "b".into()), ("c".into(), "b".into())]
        );
        let b = net.id("b").unwrap();
        assert_eq!(net.followees(b).len(), 2);
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            load_follower_edges("a\tb\tc".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_follower_edges("# header\na\tb\n\t b".as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            load_follower_edges("lonely".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn node_section_admits_isolated_users() {
        let net = load_follower_edges("a\tb\n[nodes]\nz\n".as_bytes()).unwrap();
        let z = net.id("z").unwrap();
        assert!(net.followees(z).is_empty() && net.followers(z).is_empty());
        assert_eq!(net.user_count(), 3);
    }

    #[test]
    fn tsv_round_trip() {
        let net = load_follower_edges("a\tb\nc\tb\nb\ta\n[nodes]\nq\n".as_bytes()).unwrap();
        let mut buf = Vec::new();
        net.write_tsv(&mut buf).unwrap();
        let again = load_follower_edges(buf.as_slice()).unwrap();
        assert_eq!(edge_names(&net), edge_names(&again));
        assert_eq!(net.user_count(), again.user_count());
    }
}
