//! Topic-specific behavioral genotypes for social media users.
//!
//! The crate ingests a follower graph, a timestamped hashtag event log and a
//! hashtag→topic map, and derives from them:
//!
//! * per-user, per-topic genotypes built from six adoption metrics ([`genotype`]),
//! * topic influence backbones and their comparison with the follower graph ([`backbone`]),
//! * per-user topic classifiers combined into a network-wide consensus ([`classify`]),
//! * influencer/adopter ranking and ROC evaluation ([`predict`]),
//! * node-weighted latency minimization heuristics ([`latmin`]).
//!
//! [`syngen`] produces seeded synthetic datasets with planted ground truth and
//! [`cli`] binds everything into the `sgenome` command.

pub mod backbone;
pub mod classify;
pub mod cli;
pub mod digest;
pub mod error;
pub mod genotype;
pub mod graph;
pub mod ingest;
pub mod latmin;
pub mod predict;
pub mod syngen;

pub use error::{Error, Result};
pub use ingest::{Dataset, HashtagId, TopicId, UserId};
