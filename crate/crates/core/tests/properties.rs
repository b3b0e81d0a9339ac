mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use sgenome::backbone::extract_backbone;
use sgenome::classify::{nb_consensus, train_local};
use sgenome::genotype::{compute_metric, hashtag_mean_lat, MetricKind};
use sgenome::graph::{kendall_tau, pagerank, strongly_connected_components, weakly_connected_components};
use sgenome::ingest::{load_follower_edges, EventLog, PostEvent};
use sgenome::latmin::{average_network_latency, minimize, pair_latency, Heuristic, Mode};
use sgenome::predict::roc_auc;
use sgenome::syngen::{generate, GenParams, GraphModel};
use sgenome::{Dataset, HashtagId, TopicId, UserId};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn network_tsv_round_trip(seed in any::<u64>()) {
        let ds = dataset(&random_log(seed));
        let mut buf = Vec::new();
        ds.net().write_tsv(&mut buf).unwrap();
        let back = load_follower_edges(&buf[..]).unwrap();
        let names = |n: &sgenome::ingest::FollowerNetwork| -> BTreeSet<(String, String)> {
            n.edges().map(|(a, b)| (n.name(a).to_string(), n.name(b).to_string())).collect()
        };
        prop_assert_eq!(names(ds.net()), names(&back));
    }

    #[test]
    fn index_ignores_event_order(seed in any::<u64>()) {
        let log = random_log(seed);
        let ds = dataset(&log);
        let mut events: Vec<PostEvent> = log.events.iter().map(|&(u, h, t)| PostEvent::new(&user(u), &tag(h), t)).collect();
        events.shuffle(&mut rng(seed ^ 1));
        let shuffled = Dataset::new(ds.net().clone(), EventLog::from_events(events), ds.topics().clone());
        prop_assert_eq!(ds.dataset_digest(), shuffled.dataset_digest());
        for h in ds.hashtags() {
            prop_assert_eq!(ds.index().adopters(h), shuffled.index().adopters(h));
        }
    }

    #[test]
    fn metric_value_ranges(seed in any::<u64>()) {
        let ds = dataset(&random_log(seed));
        for h in ds.hashtags() {
            let mean = hashtag_mean_lat(&ds, h);
            let mut ratios = Vec::new();
            for &(_, u) in ds.index().adopters(h) {
                let m = |k| compute_metric(&ds, k, u, h, None).unwrap();
                if let Some(t) = m(MetricKind::Time) {
                    prop_assert!(t >= 0.0);
                }
                if let (Some(f), Some(n)) = (m(MetricKind::FPar), m(MetricKind::NPar)) {
                    prop_assert!((0.0..=1.0).contains(&f));
                    prop_assert_eq!(f * ds.net().followees(u).len() as f64, n);
                }
                if let Some(l) = m(MetricKind::Lat) {
                    prop_assert!(l > 0.0 && l <= 1.0);
                }
                if let Some(mean) = mean {
                    if let Some(x) = compute_metric(&ds, MetricKind::LogLat, u, h, Some(mean)).unwrap() {
                        ratios.push(x.exp());
                    }
                }
            }
            if !ratios.is_empty() {
                let avg = ratios.iter().sum::<f64>() / ratios.len() as f64;
                prop_assert!((avg - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn backbone_is_a_weighted_follower_subgraph(seed in any::<u64>()) {
        let ds = dataset(&random_log(seed));
        for t in ds.topics().topics() {
            let b = extract_backbone(&ds, t).unwrap();
            for ((u, v), w) in b.edges() {
                prop_assert!(ds.net().has_edge(u, v));
                let used = ds.topic_hashtags(t).iter().filter(|&&h| ds.index().first_use(u, h).is_some()).count();
                prop_assert!(w >= 1 && w as usize <= used);
            }
            for h in ds.topic_hashtags(t) {
                let name = ds.hashtag_name(h).to_string();
                let removed = Dataset::new(ds.net().clone(), ds.events().clone(), ds.topics().without(&name));
                let want = extract_backbone(&removed, t).unwrap();
                let got = b.exclude_hashtag(&ds, h).unwrap();
                prop_assert_eq!(got.edges().collect::<Vec<_>>(), want.edges().collect::<Vec<_>>());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn graph_invariants(seed in any::<u64>()) {
        let g = random_digraph(&mut rng(seed), 10);
        let wcc = weakly_connected_components(&g);
        for c in strongly_connected_components(&g) {
            prop_assert!(wcc.iter().any(|w| c.iter().all(|x| w.contains(x))));
        }
        let pr = pagerank(&g, 0.85, 1e-10).unwrap().0;
        prop_assert!(pr.iter().all(|&x| x >= 0.0));
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let mut r = rng(seed);
        let a: Vec<f64> = (0..g.node_count().max(2)).map(|_| r.random_range(0..4) as f64).collect();
        let b: Vec<f64> = a.iter().map(|_| r.random_range(0..4) as f64).collect();
        if let Ok(x) = kendall_tau(&a, &a) {
            prop_assert!((x - 1.0).abs() < 1e-15);
        }
        prop_assert_eq!(kendall_tau(&a, &b).ok(), kendall_tau(&b, &a).ok());
    }

    #[test]
    fn auc_monotone_invariance_and_swap(
        scores in prop::collection::vec(-50i32..50, 2..40),
        labels in prop::collection::vec(any::<bool>(), 40),
    ) {
        let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
        let labels = &labels[..scores.len()];
        let Ok(auc) = roc_auc(&scores, labels) else { return Ok(()); };
        let warped: Vec<f64> = scores.iter().map(|s| (s / 7.0).exp() * 3.0 + 1.0).collect();
        prop_assert!((roc_auc(&warped, labels).unwrap() - auc).abs() < 1e-12);
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        prop_assert!((roc_auc(&scores, &flipped).unwrap() - (1.0 - auc)).abs() < 1e-12);
    }

    #[test]
    fn posteriors_sum_to_one(seed in any::<u64>(), x in -20.0f64..40.0) {
        let mut r = rng(seed);
        let k = r.random_range(2..6u16);
        let train: Vec<(HashtagId, TopicId, f64)> = (0..r.random_range(k as usize..30))
            .map(|i| (HashtagId(i as u32), TopicId(i as u16 % k), r.random_range(0.0..20.0)))
            .collect();
        let clf = train_local(UserId(0), MetricKind::Time, &train).unwrap();
        let total: f64 = clf.posterior(x).iter().map(|p| p.1).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    /// With every user covering every topic, rescaling a user's posterior
    /// vector by any positive factor leaves the consensus argmax unchanged.
    #[test]
    fn consensus_argmax_ignores_posterior_scale(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.random_range(2..5u16);
        let topics: Vec<TopicId> = (0..k).map(TopicId).collect();
        let users: Vec<_> = (0..r.random_range(1..6))
            .map(|u| {
                let train: Vec<(HashtagId, TopicId, f64)> = (0..3 * k as usize)
                    .map(|i| (HashtagId(i as u32), TopicId(i as u16 % k), r.random_range(0.0..10.0)))
                    .collect();
                (train_local(UserId(u), MetricKind::Lat, &train).unwrap(), r.random_range(0.0..10.0))
            })
            .collect();
        let prior: Vec<f64> = {
            let raw: Vec<f64> = topics.iter().map(|_| r.random_range(0.1..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|p| p / s).collect()
        };
        let locals: Vec<_> = users.iter().map(|(c, x)| (c, *x)).collect();
        let got = nb_consensus(HashtagId(0), &topics, &prior, &locals).predicted;
        let factors: Vec<f64> = users.iter().map(|_| r.random_range(0.01..100.0)).collect();
        let scores: Vec<f64> = (0..k as usize)
            .map(|i| {
                prior[i].ln()
                    + users
                        .iter()
                        .zip(&factors)
                        .map(|((c, x), f)| (f * c.posterior(*x)[i].1).ln())
                        .sum::<f64>()
            })
            .collect();
        let best = scores.iter().enumerate().fold(0, |b, (i, s)| if *s > scores[b] + 1e-9 { i } else { b });
        let margin = scores.iter().enumerate().filter(|&(i, _)| i != best).map(|(_, s)| scores[best] - s).fold(f64::INFINITY, f64::min);
        if margin > 1e-6 {
            prop_assert_eq!(got, topics[best]);
        }
    }

    #[test]
    fn latency_triangle_and_zeroing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_latency_graph(&mut r, 3, 8);
        let n = g.node_count();
        let z = r.random_range(0..n);
        let zeroed = g.with_targets(&[z]);
        for s in 0..n {
            for t in 0..n {
                if s == t {
                    continue;
                }
                let st = pair_latency(&g, s, t).unwrap().unwrap();
                prop_assert!(pair_latency(&zeroed, s, t).unwrap().unwrap() <= st);
                for m in 0..n {
                    if m != s && m != t {
                        let sm = pair_latency(&g, s, m).unwrap().unwrap();
                        let mt = pair_latency(&g, m, t).unwrap().unwrap();
                        prop_assert!(st <= sm + mt);
                    }
                }
            }
        }
    }

    #[test]
    fn heuristic_traces_never_increase(seed in any::<u64>()) {
        let g = random_latency_graph(&mut rng(seed), 4, 12);
        if average_network_latency(&g, Mode::Strict).unwrap().mean == 0.0 {
            return Ok(());
        }
        for h in Heuristic::ALL {
            let tr = minimize(&g, g.node_count().min(5), h, Mode::Strict).unwrap();
            prop_assert!(tr.relative.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(tr.relative.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_adoption_has_a_causal_exposure(seed in any::<u64>()) {
        let g = generate(&GenParams::small(seed)).unwrap();
        let seeds: BTreeSet<(String, String)> =
            g.truth.cascades.iter().map(|c| (c.hashtag.clone(), c.seed_user.clone())).collect();
        for (tag, order) in &g.truth.adoption_order {
            for (u, t) in order {
                if seeds.contains(&(tag.clone(), u.clone())) {
                    continue;
                }
                let uid = g.net.id(u).unwrap();
                let exposed = g.net.followees(uid).iter().any(|&v| {
                    let name = g.net.name(v);
                    order.iter().any(|(w, tw)| w == name && tw < t)
                });
                prop_assert!(exposed, "{u} adopted {tag} at {t} without exposure");
            }
        }
    }

    #[test]
    fn generation_is_a_function_of_the_seed(seed in any::<u64>()) {
        let a = generate(&GenParams::small(seed)).unwrap();
        let b = generate(&GenParams::small(seed)).unwrap();
        let c = generate(&GenParams::small(seed.wrapping_add(1))).unwrap();
        prop_assert_eq!(&a.events, &b.events);
        prop_assert_eq!(&a.truth, &b.truth);
        prop_assert_ne!(&a.events, &c.events);
    }
}

/// Per-user mean TIME tracks the planted mean delay once a user has many
/// adoptions.
#[test]
fn time_converges_to_planted_latency() {
    let p = GenParams {
        nodes: 40,
        graph: GraphModel::UniformRandom { followees: 8 },
        topics: 2,
        hashtags_per_topic: 60,
        latency_levels: vec![10.0, 20.0],
        delay_dispersion: 0.1,
        adoption_prob: 1.0,
        activity_spread: 0.0,
        repeat_rate: 0.0,
        cascades_per_hashtag: 1,
        start_window: 40,
        ambient_period: None,
        seed_user: None,
        seed: 11,
    };
    let g = generate(&p).unwrap();
    let ds = Dataset::new(g.net.clone(), g.events.clone(), g.topics.clone());
    let genome = sgenome::genotype::build_genome(&ds);
    let mut checked = 0;
    for (u, gt) in &genome.genotypes {
        for t in ds.topics().topics() {
            let Some(cell) = gt.cell(t, MetricKind::Time) else { continue };
            if cell.count < 50 {
                continue;
            }
            let planted = g.truth.latency[ds.user_name(*u)][t.0 as usize];
            let err = (cell.mean - planted).abs() / planted;
            assert!(err < 0.1, "{} {}: {} vs {}", ds.user_name(*u), t.0, cell.mean, planted);
            checked += 1;
        }
    }
    assert!(checked >= 20, "only {checked} cells with 50 adoptions");
}
