mod common;

use common::*;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::Rng;
use sgenome::genotype::{build_genome, compute_metric, hashtag_mean_lat, MetricKind};
use sgenome::graph::{
    betweenness_centrality, kendall_tau, pagerank, strongly_connected_components, weakly_connected_components,
};
use sgenome::latmin::{average_network_latency, exact_k_latmin, minimize, pair_latency, Heuristic, Mode};

fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn metrics_match_brute_force(seed in any::<u64>()) {
        let log = random_log(seed);
        let ds = dataset(&log);
        for &(u, h, _) in &log.events {
            let (uid, hid) = (ds.user(&user(u)).unwrap(), ds.hashtag_id(&tag(h)).unwrap());
            for kind in MetricKind::ALL {
                let mean = hashtag_mean_lat(&ds, hid);
                if kind == MetricKind::LogLat && mean.is_none() {
                    prop_assert!(log.mean_lat(h).is_none());
                    continue;
                }
                let got = compute_metric(&ds, kind, uid, hid, mean).unwrap();
                let want = log.metric(kind, u, h);
                match (got, want) {
                    (Some(g), Some(w)) if matches!(kind, MetricKind::Time | MetricKind::NUses | MetricKind::NPar) => {
                        prop_assert_eq!(g, w)
                    }
                    (Some(g), Some(w)) => prop_assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0), "{kind}: {g} vs {w}"),
                    (g, w) => prop_assert_eq!(g, w, "{} u{} h{}", kind, u, h),
                }
            }
        }
    }

    #[test]
    fn genome_is_compute_metric_over_all_pairs(seed in any::<u64>()) {
        let log = random_log(seed);
        let ds = dataset(&log);
        let genome = build_genome(&ds);
        for kind in MetricKind::ALL {
            let mut from_genome: Vec<(u32, u32, u64)> = genome
                .observations(kind)
                .iter()
                .map(|o| (o.user.0, o.hashtag.0, o.value.to_bits()))
                .collect();
            from_genome.sort_unstable();
            let mut direct = Vec::new();
            for h in ds.hashtags() {
                if ds.hashtag_topic(h).is_none() {
                    continue;
                }
                let mean = hashtag_mean_lat(&ds, h);
                for &(_, u) in ds.index().adopters(h) {
                    if kind == MetricKind::LogLat && mean.is_none() {
                        continue;
                    }
                    if let Some(v) = compute_metric(&ds, kind, u, h, mean).unwrap() {
                        direct.push((u.0, h.0, v.to_bits()));
                    }
                }
            }
            direct.sort_unstable();
            prop_assert_eq!(from_genome, direct, "{}", kind);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn components_match_reachability(seed in any::<u64>()) {
        let g = random_digraph(&mut rng(seed), 8);
        let n = g.node_count();
        let reach = reachability(&g);
        let scc: std::collections::BTreeSet<Vec<usize>> = strongly_connected_components(&g)
            .into_iter()
            .map(|mut c| { c.sort_unstable(); c })
            .collect();
        prop_assert_eq!(scc, classes(n, |s, t| reach[s][t] && reach[t][s]));
        let mut both = g.clone();
        for u in 0..n {
            for v in g.successors(u).collect::<Vec<_>>() {
                both.add_edge(v, u, 1.0);
            }
        }
        let ureach = reachability(&both);
        let wcc: std::collections::BTreeSet<Vec<usize>> = weakly_connected_components(&g)
            .into_iter()
            .map(|mut c| { c.sort_unstable(); c })
            .collect();
        prop_assert_eq!(wcc, classes(n, |s, t| ureach[s][t]));
    }

    #[test]
    fn betweenness_matches_path_enumeration(seed in any::<u64>()) {
        let g = random_digraph(&mut rng(seed), 8);
        let bc = betweenness_centrality(&g).0;
        for (got, want) in bc.iter().zip(betweenness_by_paths(&g)) {
            prop_assert!((got - ratio_to_f64(want)).abs() <= 1e-12, "{} vs {}", got, want);
        }
    }

    #[test]
    fn pagerank_matches_dense_iteration(seed in any::<u64>()) {
        let g = random_digraph(&mut rng(seed), 8);
        let pr = pagerank(&g, 0.85, 1e-12).unwrap().0;
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for (a, b) in pr.iter().zip(dense_pagerank(&g, 0.85)) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn kendall_matches_pair_counts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=12);
        let levels = r.random_range(1..=6);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0..levels) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(0..levels) as f64).collect();
        match (kendall_tau(&a, &b), kendall_by_pairs(&a, &b)) {
            (Ok(x), Some(y)) => prop_assert_eq!(x, y),
            (Err(_), None) => {}
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
        }
    }

    #[test]
    fn pair_latency_matches_floyd_warshall(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_latency_graph(&mut r, 2, 8);
        let g = if r.random_bool(0.5) {
            let n = g.node_count();
            let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| g.graph().successors(u).map(move |v| (u, v))).filter(|_| r.random_bool(0.6)).collect();
            sgenome::latmin::LatencyGraph::new(sgenome::graph::DirectedGraph::from_edges(n, edges), g.latencies().to_vec()).unwrap()
        } else {
            g
        };
        let d = floyd_warshall(&g);
        for s in 0..g.node_count() {
            for t in 0..g.node_count() {
                if s == t {
                    continue;
                }
                let want = d[s][t].is_finite().then_some(d[s][t]);
                prop_assert_eq!(pair_latency(&g, s, t).unwrap(), want);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn exact_is_a_lower_bound_for_every_heuristic(seed in any::<u64>(), k in 1usize..=3) {
        let g = random_latency_graph(&mut rng(seed), 3, 10);
        let k = k.min(g.node_count());
        if average_network_latency(&g, Mode::Strict).unwrap().mean == 0.0 {
            return Ok(());
        }
        let (_, best) = exact_k_latmin(&g, k, Mode::Strict).unwrap();
        for h in Heuristic::ALL {
            let trace = minimize(&g, k, h, Mode::Strict).unwrap();
            let value = average_network_latency(&g.with_targets(&trace.selected), Mode::Strict).unwrap().mean;
            prop_assert!(best <= value, "{h}: exact {best} > {value}");
        }
    }
}
