use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::{Command, DataArgs, Failure, Manifest};
use crate::backbone::{compare_with_follower, cross_topic_overlap, extract_backbone};
use crate::classify::{accuracy_curve, curve_means, fit_logistic, leave_one_out, ErrorTable, LooOptions};
use crate::digest::sha256_hex;
use crate::genotype::{build_genome, node_topic_latency, MetricKind};
use crate::graph::DirectedGraph;
use crate::ingest::{Dataset, TopicId, UserId};
use crate::latmin::{largest_scc, minimize, Heuristic, LatencyGraph, Mode};
use crate::predict::{write_evaluation_tsv, Direction, Predictor, PredictorKind};
use crate::syngen::{generate, write_dataset, GenParams};

const SUMMARIES: [&str; 7] = ["ingest-check", "genome", "backbone", "classify", "predict", "latmin", "syngen"];

#[derive(Debug, Clone, Serialize)]
struct Provenance {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    dataset_digest: Option<String>,
    topics_digest: Option<String>,
    seed: Option<u64>,
}

impl Provenance {
    fn new(command: &'static str, ds: Option<&Dataset>, seed: Option<u64>) -> Self {
        Self {
            tool: "sgenome",
            version: env!("CARGO_PKG_VERSION"),
            command,
            dataset_digest: ds.map(|d| d.dataset_digest().to_string()),
            topics_digest: ds.map(|d| d.topics_digest().to_string()),
            seed,
        }
    }

    fn header(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# {} {} {}", self.tool, self.version, self.command)?;
        if let Some(d) = &self.dataset_digest {
            writeln!(w, "# dataset {d}")?;
        }
        if let Some(d) = &self.topics_digest {
            writeln!(w, "# topics {d}")?;
        }
        match self.seed {
            Some(s) => writeln!(w, "# seed {s}"),
            None => writeln!(w, "# seed none"),
        }
    }
}

fn create_out(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out.display())))
}

fn write_tsv<F>(out: &Path, name: &str, prov: &Provenance, body: F) -> Result<(), Failure>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), Failure>,
{
    let mut w = BufWriter::new(File::create(out.join(name))?);
    prov.header(&mut w)?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_summary(out: &Path, prov: &Provenance, body: Value) -> Result<(), Failure> {
    let doc = json!({ "provenance": prov, "summary": body });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Internal(e.to_string()))?;
    fs::write(out.join(format!("{}.json", prov.command)), text + "\n")?;
    Ok(())
}

fn load(data: &DataArgs) -> Result<Dataset, Failure> {
    create_out(&data.out)?;
    Manifest::load(&data.manifest)
}

fn topic_filter(ds: &Dataset, topic: Option<&str>) -> Result<Vec<TopicId>, Failure> {
    match topic {
        None => Ok(ds.topics().topics().collect()),
        Some(name) => ds
            .topics()
            .topic_id(name)
            .map(|t| vec![t])
            .ok_or_else(|| Failure::Usage(format!("unknown topic `{name}`"))),
    }
}

fn parse_metric(m: Option<&str>) -> Result<Option<MetricKind>, Failure> {
    m.map(|s| s.parse::<MetricKind>()).transpose().map_err(Failure::from)
}

pub(super) fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::IngestCheck { data } => ingest_check(&data),
        Command::Genome { data, topic, metric } => genome(&data, topic.as_deref(), metric.as_deref()),
        Command::Backbone { data, topic } => backbone(&data, topic.as_deref()),
        Command::Classify {
            data,
            metric,
            ensemble_sizes,
            repetitions,
            seed,
            train,
        } => classify(&data, metric.as_deref(), &ensemble_sizes, repetitions, seed, train),
        Command::Predict { data, topic } => predict(&data, topic.as_deref()),
        Command::Latmin {
            data,
            topic,
            k,
            strict: _,
            permissive,
            max_nodes,
        } => {
            let mode = if permissive { Mode::Permissive } else { Mode::Strict };
            latmin(&data, topic.as_deref(), k, mode, max_nodes)
        }
        Command::Syngen { out, seed, preset } => syngen(&out, seed, &preset),
        Command::Report { out } => report(&out),
    }
}

fn ingest_check(data: &DataArgs) -> Result<(), Failure> {
    let ds = load(data)?;
    let prov = Provenance::new("ingest-check", Some(&ds), None);
    let unmapped = ds.hashtags().filter(|&h| ds.hashtag_topic(h).is_none()).count();
    write_summary(
        &data.out,
        &prov,
        json!({
            "users": ds.net().user_count(),
            "follower_edges": ds.net().edge_count(),
            "events": ds.posts().len(),
            "skipped_lines": ds.events().skipped_lines,
            "hashtags": ds.hashtag_count(),
            "unmapped_hashtags": unmapped,
            "topics": ds.topics().topic_count(),
            "active_users": ds.active_users().len(),
            "adoptions": ds.index().pair_count(),
        }),
    )
}

fn genome(data: &DataArgs, topic: Option<&str>, metric: Option<&str>) -> Result<(), Failure> {
    let metric = parse_metric(metric)?;
    let ds = load(data)?;
    let topic = match topic {
        Some(_) => Some(topic_filter(&ds, topic)?[0]),
        None => None,
    };
    let g = build_genome(&ds).filtered(topic, metric);
    let prov = Provenance::new("genome", Some(&ds), None);
    write_tsv(&data.out, "genome_values.tsv", &prov, |w| Ok(g.write_values_tsv(&ds, w)?))?;
    write_tsv(&data.out, "genome_summary.tsv", &prov, |w| Ok(g.write_summary_tsv(&ds, w)?))?;
    let cells: usize = g.genotypes.values().map(|x| x.cells.len()).sum();
    write_summary(&data.out, &prov, json!({ "users": g.genotypes.len(), "cells": cells }))
}

fn backbone(data: &DataArgs, topic: Option<&str>) -> Result<(), Failure> {
    let ds = load(data)?;
    let topics = topic_filter(&ds, topic)?;
    let prov = Provenance::new("backbone", Some(&ds), None);
    let backbones = topics
        .iter()
        .map(|&t| extract_backbone(&ds, t))
        .collect::<crate::Result<Vec<_>>>()?;
    write_tsv(&data.out, "backbone.tsv", &prov, |w| {
        writeln!(w, "topic\tfollowee\tfollower\tweight")?;
        for b in &backbones {
            b.write_tsv(&ds, &mut *w)?;
        }
        Ok(())
    })?;
    let mut reports = Vec::new();
    let mut lines = Vec::new();
    for b in &backbones {
        let name = ds.topics().topic_name(b.topic);
        if b.is_empty() {
            reports.push(json!({ "topic": name, "skipped": "empty backbone" }));
            continue;
        }
        let r = compare_with_follower(b, &ds)?;
        lines.push(serde_json::to_string(&r).map_err(|e| Failure::Internal(e.to_string()))?);
        reports.push(serde_json::to_value(&r).map_err(|e| Failure::Internal(e.to_string()))?);
    }
    fs::write(data.out.join("backbone_reports.jsonl"), lines.iter().map(|l| format!("{l}\n")).collect::<String>())?;
    let overlap = cross_topic_overlap(&backbones);
    write_tsv(&data.out, "backbone_overlap.tsv", &prov, |w| {
        let names: Vec<&str> = topics.iter().map(|&t| ds.topics().topic_name(t)).collect();
        writeln!(w, "topic\t{}", names.join("\t"))?;
        for (i, row) in overlap.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}\t{}", names[i], cells.join("\t"))?;
        }
        Ok(())
    })?;
    write_summary(&data.out, &prov, json!({ "reports": reports }))
}

fn error_cells(ds: &Dataset, table: &ErrorTable) -> Vec<String> {
    let mut cells: Vec<String> = ds
        .topics()
        .topics()
        .map(|t| table.error(t).map_or("NA".to_string(), |e| e.to_string()))
        .collect();
    cells.push(table.expected.to_string());
    cells
}

fn classify(
    data: &DataArgs,
    metric: Option<&str>,
    sizes: &[usize],
    repetitions: usize,
    seed: Option<u64>,
    train: bool,
) -> Result<(), Failure> {
    let metrics: Vec<MetricKind> = match parse_metric(metric)? {
        Some(m) => vec![m],
        None => MetricKind::ALL.to_vec(),
    };
    if !sizes.is_empty() && seed.is_none() {
        return Err(Failure::Usage("--seed is required with --ensemble-sizes".into()));
    }
    let ds = load(data)?;
    let k = ds.topics().topic_count();
    let genome = build_genome(&ds);
    let prov = Provenance::new("classify", Some(&ds), seed);

    let mut table_rows: Vec<(String, &'static str, Vec<String>)> = Vec::new();
    let mut curve_rows: Vec<String> = Vec::new();
    let mut fit_rows: Vec<String> = Vec::new();
    let mut summary = BTreeMap::new();
    for m in metrics {
        let obs = genome.observations(m);
        if obs.is_empty() {
            summary.insert(m.tag().to_string(), json!({ "skipped": "no observations" }));
            continue;
        }
        let opts = LooOptions {
            with_train: train,
            users: None,
        };
        let r = leave_one_out(m, &obs, k, &opts)?;
        table_rows.push((m.tag().to_string(), "test", error_cells(&ds, &r.test)));
        if let Some(t) = &r.train {
            table_rows.push((m.tag().to_string(), "train", error_cells(&ds, t)));
        }
        table_rows.push((m.tag().to_string(), "random", error_cells(&ds, &r.random)));
        let mut entry = json!({
            "test_expected_error": r.test.expected,
            "random_expected_error": r.random.expected,
            "evaluated_hashtags": r.predictions.len(),
            "skipped_hashtags": r.skipped.len(),
        });
        if let Some(t) = &r.train {
            entry["train_expected_error"] = json!(t.expected);
        }
        if let Some(seed) = seed.filter(|_| !sizes.is_empty()) {
            let points = accuracy_curve(m, &obs, k, sizes, repetitions, seed)?;
            for p in &points {
                curve_rows.push(format!("{m}\t*\t{}\t{}\t{}", p.size, p.repetition, p.accuracy));
                for &(t, a) in &p.per_topic {
                    curve_rows.push(format!("{m}\t{}\t{}\t{}\t{a}", ds.topics().topic_name(t), p.size, p.repetition));
                }
            }
            let means = curve_means(&points);
            entry["curve"] = json!(means);
            let mut series: Vec<(String, Vec<(f64, f64)>)> =
                vec![("*".into(), means.iter().map(|&(s, a)| (s as f64, a)).collect())];
            for t in ds.topics().topics() {
                let mut per: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
                for p in &points {
                    if let Some(&(_, a)) = p.per_topic.iter().find(|x| x.0 == t) {
                        let e = per.entry(p.size).or_default();
                        e.0 += a;
                        e.1 += 1;
                    }
                }
                series.push((
                    ds.topics().topic_name(t).to_string(),
                    per.into_iter().map(|(s, (a, n))| (s as f64, a / n as f64)).collect(),
                ));
            }
            for (name, pts) in series {
                if pts.len() < 3 {
                    continue;
                }
                let f = fit_logistic(&pts)?;
                fit_rows.push(format!("{m}\t{name}\t{}\t{}\t{}\t{}", f.l, f.k, f.x0, f.rss));
                if name == "*" {
                    entry["logistic"] = json!(f);
                }
            }
        }
        summary.insert(m.tag().to_string(), entry);
    }

    write_tsv(&data.out, "classify_errors.tsv", &prov, |w| {
        let names: Vec<&str> = ds.topics().topics().map(|t| ds.topics().topic_name(t)).collect();
        writeln!(w, "metric\tset\t{}\tE[x]", names.join("\t"))?;
        for (m, set, cells) in &table_rows {
            writeln!(w, "{m}\t{set}\t{}", cells.join("\t"))?;
        }
        Ok(())
    })?;
    if !sizes.is_empty() {
        write_tsv(&data.out, "classify_curve.tsv", &prov, |w| {
            writeln!(w, "metric\ttopic\tsize\trepetition\taccuracy")?;
            for r in &curve_rows {
                writeln!(w, "{r}")?;
            }
            Ok(())
        })?;
        write_tsv(&data.out, "classify_logistic.tsv", &prov, |w| {
            writeln!(w, "metric\ttopic\tL\tk\tx0\trss")?;
            for r in &fit_rows {
                writeln!(w, "{r}")?;
            }
            Ok(())
        })?;
    }
    write_summary(&data.out, &prov, json!(summary))
}

fn predict(data: &DataArgs, topic: Option<&str>) -> Result<(), Failure> {
    let ds = load(data)?;
    let topics: BTreeSet<TopicId> = topic_filter(&ds, topic)?.into_iter().collect();
    let p = Predictor::new(&ds)?;
    let prov = Provenance::new("predict", Some(&ds), None);
    let mut rows = Vec::new();
    let mut summary = BTreeMap::new();
    for d in Direction::ALL {
        let inst: Vec<_> = p
            .build_instances(d)
            .into_iter()
            .filter(|i| topics.contains(&i.topic))
            .collect();
        let mut per = BTreeMap::new();
        for k in PredictorKind::ALL {
            let e = p.evaluate(k, &inst);
            per.insert(k.tag(), json!({ "mean_auc": e.mean_auc, "instances": e.instances, "skipped": e.skipped }));
            rows.push((d, k, e));
        }
        summary.insert(d.tag(), per);
    }
    write_tsv(&data.out, "predict.tsv", &prov, |w| Ok(write_evaluation_tsv(w, &ds, &rows)?))?;
    write_summary(&data.out, &prov, json!(summary))
}

/// Breadth-first prefix of at most `cap` nodes of `g`, restarting from the
/// smallest unvisited node when a component is exhausted.
fn bfs_prefix(g: &DirectedGraph, cap: usize) -> Vec<usize> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    for start in 0..n {
        if order.len() >= cap {
            break;
        }
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            order.push(u);
            if order.len() >= cap {
                break;
            }
            let mut next: Vec<usize> = g.successors(u).filter(|&v| !seen[v]).collect();
            next.sort_unstable();
            for v in next {
                seen[v] = true;
                q.push_back(v);
            }
        }
    }
    order.sort_unstable();
    order
}

/// Topic latency graph: backbone edges among users with a TIME value,
/// reduced to the largest SCC in strict mode and capped at `cap` nodes.
fn topic_latency_graph(
    ds: &Dataset,
    genome: &crate::genotype::Genome,
    t: TopicId,
    mode: Mode,
    cap: usize,
) -> Result<(Vec<UserId>, LatencyGraph), Failure> {
    let lat = node_topic_latency(genome, t);
    let users: Vec<UserId> = lat.keys().copied().collect();
    let pos: BTreeMap<UserId, usize> = users.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let b = extract_backbone(ds, t)?;
    let edges: Vec<(usize, usize)> = b
        .edges()
        .filter_map(|((u, v), _)| Some((*pos.get(&u)?, *pos.get(&v)?)))
        .collect();
    let g = DirectedGraph::from_edges(users.len(), edges);
    let mut keep: Vec<usize> = if mode == Mode::Strict { largest_scc(&g) } else { (0..users.len()).collect() };
    if keep.len() > cap {
        let sub = g.induced(&keep);
        keep = bfs_prefix(&sub, cap).into_iter().map(|i| keep[i]).collect();
        if mode == Mode::Strict {
            let sub = g.induced(&keep);
            keep = largest_scc(&sub).into_iter().map(|i| keep[i]).collect();
        }
    }
    let sub = g.induced(&keep);
    let nodes: Vec<UserId> = keep.iter().map(|&i| users[i]).collect();
    let latency: Vec<f64> = nodes.iter().map(|u| lat[u]).collect();
    Ok((nodes, LatencyGraph::new(sub, latency)?))
}

fn latmin(data: &DataArgs, topic: Option<&str>, k: usize, mode: Mode, cap: usize) -> Result<(), Failure> {
    if k == 0 {
        return Err(Failure::Usage("--k must be positive".into()));
    }
    if cap < 2 {
        return Err(Failure::Usage("--max-nodes must be at least 2".into()));
    }
    let ds = load(data)?;
    let topics = topic_filter(&ds, topic)?;
    let genome = build_genome(&ds);
    let prov = Provenance::new("latmin", Some(&ds), None);
    let mut rows = Vec::new();
    let mut summary = BTreeMap::new();
    for t in topics {
        let name = ds.topics().topic_name(t).to_string();
        let (nodes, g) = topic_latency_graph(&ds, &genome, t, mode, cap)?;
        if nodes.len() < 2 {
            summary.insert(name, json!({ "skipped": format!("{} usable nodes", nodes.len()) }));
            continue;
        }
        let kk = k.min(nodes.len());
        let mut per = BTreeMap::new();
        let mut skipped = None;
        for h in Heuristic::ALL {
            let trace = match minimize(&g, kk, h, mode) {
                Ok(tr) => tr,
                Err(e @ crate::Error::Undefined(_)) => {
                    skipped = Some(e.to_string());
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            for (i, (&n, r)) in trace.selected.iter().zip(&trace.relative).enumerate() {
                rows.push(format!("{name}\t{h}\t{}\t{}\t{r}", i + 1, ds.user_name(nodes[n])));
            }
            per.insert(
                h.tag(),
                json!({
                    "selected": trace.selected.iter().map(|&n| ds.user_name(nodes[n])).collect::<Vec<_>>(),
                    "relative": trace.relative,
                    "baseline": trace.baseline,
                }),
            );
        }
        let entry = match skipped {
            Some(reason) => json!({ "nodes": nodes.len(), "skipped": reason }),
            None => json!({ "nodes": nodes.len(), "k": kk, "mode": mode, "heuristics": per }),
        };
        summary.insert(name, entry);
    }
    write_tsv(&data.out, "latmin_traces.tsv", &prov, |w| {
        writeln!(w, "topic\theuristic\tstep\tnode\trelative_latency")?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })?;
    write_summary(&data.out, &prov, json!(summary))
}

fn syngen(out: &Path, seed: Option<u64>, preset: &str) -> Result<(), Failure> {
    let seed = seed.ok_or_else(|| Failure::Usage("--seed is required for syngen".into()))?;
    let params = GenParams::preset(preset, seed)?;
    create_out(out)?;
    let g = generate(&params)?;
    write_dataset(out, &g)?;
    let mut files = BTreeMap::new();
    for f in ["edges.tsv", "events.tsv", "topics.tsv", "truth.json", crate::syngen::MANIFEST] {
        files.insert(f, sha256_hex(&fs::read(out.join(f))?));
    }
    let prov = Provenance::new("syngen", None, Some(seed));
    write_summary(
        out,
        &prov,
        json!({
            "preset": preset,
            "users": g.net.user_count(),
            "events": g.events.len(),
            "files": files,
        }),
    )
}

fn report(out: &Path) -> Result<(), Failure> {
    let mut found = BTreeMap::new();
    for name in SUMMARIES {
        let p = out.join(format!("{name}.json"));
        if !p.exists() {
            continue;
        }
        let text = fs::read_to_string(&p)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
        found.insert(name, v);
    }
    if found.is_empty() {
        return Err(Failure::Usage(format!("no command summaries in {}", out.display())));
    }
    let text = serde_json::to_string_pretty(&json!({ "tool": "sgenome", "commands": found }))
        .map_err(|e| Failure::Internal(e.to_string()))?;
    fs::write(out.join("report.json"), text + "\n")?;
    Ok(())
}
