use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wikicat::classifiers::{keyword_vote, train_centroid, train_svm, TextClassifier, TrainConfig};
use wikicat::graph::{CategoryGraph, EdgeKind, GraphBuilder, NodeId};
use wikicat::labeler::{
    label_corpus, normalize_and_assign, page_weight, parent_coverage, traverse, CompetitionSet, LabelingConfig,
    LabelingMode, PathMode, ReachableSet, RootSpec, COARSE_GROUP,
};
use wikicat::pipeline::{self, PipelineConfig};
use wikicat::synth::{scale_graph, separable_corpus, ScaleSpec};
use wikicat::taxonomy::{jaro_winkler, map_taxonomy, MatchKind, Taxonomy, TaxonomyLabel};
use wikicat::textproc::{fit_tfidf, DEFAULT_MIN_DF};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthwiki")
}

/// Builds a graph from category names, page titles and `(parent, child)` name pairs.
fn named_graph(categories: &[&str], pages: &[&str], edges: &[(&str, &str)]) -> CategoryGraph {
    let mut b = GraphBuilder::new();
    let mut ids = BTreeMap::new();
    for (i, c) in categories.iter().enumerate() {
        b.add_category(i as u64 + 1, c).unwrap();
        ids.insert(*c, (i as u64 + 1, EdgeKind::Subcat));
    }
    for (i, p) in pages.iter().enumerate() {
        b.add_page(1000 + i as u64, p).unwrap();
        ids.insert(*p, (1000 + i as u64, EdgeKind::Member));
    }
    for (parent, child) in edges {
        let (pid, _) = ids[parent];
        let (cid, kind) = ids[child];
        b.add_edge(pid, cid, kind).unwrap();
    }
    b.build().0
}

fn cat(g: &CategoryGraph, name: &str) -> NodeId {
    g.category_by_name(name).unwrap()
}

fn page(g: &CategoryGraph, title: &str) -> NodeId {
    g.page_by_title(title).unwrap()
}

// Random graphs: one root at level 0, consecutive-level category edges,
// pages whose parents share a level. `extra` adds arbitrary category edges.
struct RandomGraph {
    graph: CategoryGraph,
    root: NodeId,
    pages: Vec<NodeId>,
}

fn random_graph(rng: &mut ChaCha8Rng, extra: usize) -> RandomGraph {
    let levels = rng.gen_range(2..=6);
    let mut level_nodes: Vec<Vec<u64>> = vec![vec![0]];
    let mut next = 1u64;
    let mut edges = Vec::new();
    for l in 1..levels {
        let width = rng.gen_range(1..=5);
        let mut here = Vec::new();
        for _ in 0..width {
            let id = next;
            next += 1;
            let above = &level_nodes[l - 1];
            let k = rng.gen_range(1..=above.len().min(3));
            for &p in above.choose_multiple(rng, k) {
                edges.push((p, id, EdgeKind::Subcat));
            }
            here.push(id);
        }
        level_nodes.push(here);
    }
    let n_cats = next;
    let all_cats: Vec<u64> = (0..n_cats).collect();
    for _ in 0..extra {
        let a = *all_cats.choose(rng).unwrap();
        let b = *all_cats.choose(rng).unwrap();
        if a != b {
            edges.push((a, b, EdgeKind::Subcat));
        }
    }
    let n_pages = rng.gen_range(3..=(50 - n_cats as usize).min(15));
    let mut page_ids = Vec::new();
    for i in 0..n_pages {
        let id = 10_000 + i as u64;
        let lvl = &level_nodes[rng.gen_range(0..levels)];
        let k = rng.gen_range(1..=lvl.len().min(3));
        for &p in lvl.choose_multiple(rng, k) {
            edges.push((p, id, EdgeKind::Member));
        }
        page_ids.push(id);
    }
    let mut b = GraphBuilder::new();
    for c in 0..n_cats {
        b.add_category(c, &format!("C{c}")).unwrap();
    }
    for &p in &page_ids {
        b.add_page(p, &format!("P{p}")).unwrap();
    }
    for (p, c, k) in edges {
        b.add_edge(p, c, k).unwrap();
    }
    let graph = b.build().0;
    let root = graph.node_by_external(0).unwrap();
    let pages = page_ids.iter().map(|&p| graph.node_by_external(p).unwrap()).collect();
    RandomGraph { graph, root, pages }
}

/// `sum 2^-len` over simple paths from `root` to `target` with at most `cap` edges.
fn oracle_weight(g: &CategoryGraph, root: NodeId, target: NodeId, cap: u32) -> f64 {
    fn walk(g: &CategoryGraph, u: NodeId, target: NodeId, len: u32, cap: u32, seen: &mut HashSet<NodeId>) -> f64 {
        if u == target {
            return 0.5f64.powi(len as i32);
        }
        if len == cap || !g.is_category(u) {
            return 0.0;
        }
        let mut total = 0.0;
        for &v in g.children(u).unwrap() {
            if seen.insert(v) {
                total += walk(g, v, target, len + 1, cap, seen);
                seen.remove(&v);
            }
        }
        total
    }
    let mut seen = HashSet::from([root]);
    walk(g, root, target, 0, cap, &mut seen)
}

fn single_reach(g: &CategoryGraph, root: NodeId, cfg: &LabelingConfig) -> ReachableSet {
    let spec = RootSpec::new("x", [root]);
    let set = CompetitionSet::new("g", vec![spec.clone()], g).unwrap();
    traverse(g, &spec, &set, cfg).unwrap()
}

fn crit1() -> Outcome {
    let start = Instant::now();
    let dag_cfg = LabelingConfig::with_mode(LabelingMode::NoPruning);
    let exact_cfg = LabelingConfig {
        path_mode: PathMode::Exact,
        ..dag_cfg.clone()
    };
    let cap = exact_cfg.exact_path_cap;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut dags, mut dag_pages, mut cyclic_pages) = (0, 0, 0);
    for _ in 0..200 {
        let r = random_graph(&mut rng, 0);
        ensure(r.graph.num_nodes() <= 50, "graph too large")?;
        dags += 1;
        let reach = single_reach(&r.graph, r.root, &dag_cfg);
        for &p in &r.pages {
            if !reach.contains(p) {
                continue;
            }
            let dag = page_weight(&r.graph, &reach, p, &dag_cfg).map_err(|e| e.to_string())?;
            let exact = page_weight(&r.graph, &reach, p, &exact_cfg).map_err(|e| e.to_string())?;
            let oracle = oracle_weight(&r.graph, r.root, p, u32::MAX);
            ensure((dag - exact).abs() <= 1e-9, format!("dag {dag} != exact {exact}"))?;
            ensure((exact - oracle).abs() <= 1e-9, format!("exact {exact} != oracle {oracle}"))?;
            dag_pages += 1;
        }
    }
    for _ in 0..200 {
        let r = random_graph(&mut rng, 6);
        let reach = single_reach(&r.graph, r.root, &dag_cfg);
        for &p in &r.pages {
            if reach.depth(p).is_none_or(|d| d > cap) {
                continue;
            }
            let dag = page_weight(&r.graph, &reach, p, &dag_cfg).map_err(|e| e.to_string())?;
            let exact = page_weight(&r.graph, &reach, p, &exact_cfg).map_err(|e| e.to_string())?;
            let oracle = oracle_weight(&r.graph, r.root, p, cap);
            ensure(dag <= exact + 1e-12, format!("cyclic: dag {dag} > exact {exact}"))?;
            ensure((exact - oracle).abs() <= 1e-9, format!("cyclic: exact {exact} != oracle {oracle}"))?;
            cyclic_pages += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1}s"))?;
    Ok(format!(
        "{dags} DAGs, {dag_pages} pages equal; {cyclic_pages} cyclic pages with dag <= exact; {secs:.2}s"
    ))
}

fn figure_graph() -> CategoryGraph {
    named_graph(
        &[
            "Trucks",
            "Trucks by type",
            "Ford trucks",
            "Cab over vehicles",
            "Recreational vehicles",
            "Vehicles introduced in 2018",
            "Clubs and societies in the United Kingdom",
            "Camping in the United Kingdom",
            "Organizations established in 1901",
        ],
        &["Ford F-Max", "Camping and Caravanning Club"],
        &[
            ("Trucks", "Trucks by type"),
            ("Trucks", "Ford trucks"),
            ("Trucks by type", "Cab over vehicles"),
            ("Trucks by type", "Recreational vehicles"),
            ("Trucks by type", "Ford F-Max"),
            ("Ford trucks", "Ford F-Max"),
            ("Cab over vehicles", "Ford F-Max"),
            ("Vehicles introduced in 2018", "Ford F-Max"),
            ("Recreational vehicles", "Camping and Caravanning Club"),
            ("Clubs and societies in the United Kingdom", "Camping and Caravanning Club"),
            ("Camping in the United Kingdom", "Camping and Caravanning Club"),
            ("Organizations established in 1901", "Camping and Caravanning Club"),
        ],
    )
}

fn crit2() -> Outcome {
    let g = figure_graph();
    let root = RootSpec::new("trucks", [cat(&g, "Trucks")]);
    let set = CompetitionSet::new(COARSE_GROUP, vec![root.clone()], &g).map_err(|e| e.to_string())?;
    let full = LabelingConfig::default();
    let reach = traverse(&g, &root, &set, &full).map_err(|e| e.to_string())?;
    let fmax = page(&g, "Ford F-Max");
    let club = page(&g, "Camping and Caravanning Club");
    let fmax_cov = parent_coverage(&g, fmax, &reach).map_err(|e| e.to_string())?;
    let club_cov = parent_coverage(&g, club, &reach).map_err(|e| e.to_string())?;
    ensure(reach.depth(fmax) == Some(2), format!("F-Max depth {:?}", reach.depth(fmax)))?;
    ensure(fmax_cov == 0.75, format!("F-Max coverage {fmax_cov}"))?;
    ensure(club_cov == 0.25, format!("club coverage {club_cov}"))?;

    let labeled = label_corpus(&g, std::slice::from_ref(&set), &full).map_err(|e| e.to_string())?;
    let has = |c: &wikicat::labeler::LabeledCorpus, p| c.get(p).is_some_and(|r| !r.assignments.is_empty());
    ensure(has(&labeled, fmax), "F-Max not retained in full mode")?;
    ensure(!has(&labeled, club), "club retained in full mode")?;
    let np = LabelingConfig::with_mode(LabelingMode::NoPruning);
    let labeled = label_corpus(&g, &[set], &np).map_err(|e| e.to_string())?;
    ensure(has(&labeled, club), "club missing in no_pruning")?;
    Ok(format!("F-Max depth 2 coverage {fmax_cov}; club coverage {club_cov}, pruned only in full"))
}

fn crit3() -> Outcome {
    let g = named_graph(
        &["Trucks", "Trucks by type", "Light trucks", "Sport utility vehicles"],
        &["Ford Explorer", "Jeep Cherokee", "Ford F-150"],
        &[
            ("Trucks", "Trucks by type"),
            ("Trucks by type", "Light trucks"),
            ("Light trucks", "Sport utility vehicles"),
            ("Sport utility vehicles", "Ford Explorer"),
            ("Sport utility vehicles", "Jeep Cherokee"),
            ("Light trucks", "Ford F-150"),
        ],
    );
    let trucks = RootSpec::new("trucks", [cat(&g, "Trucks")]);
    let suvs = RootSpec::new("suvs", [cat(&g, "Sport utility vehicles")]);
    let set = CompetitionSet::new(COARSE_GROUP, vec![trucks, suvs], &g).map_err(|e| e.to_string())?;
    let suv_pages = [page(&g, "Ford Explorer"), page(&g, "Jeep Cherokee")];
    let cfg = LabelingConfig::default();
    let with = label_corpus(&g, std::slice::from_ref(&set), &cfg).map_err(|e| e.to_string())?;
    for &p in &suv_pages {
        let labels: Vec<&str> = with.get(p).map_or(vec![], |r| r.assignments.iter().map(|a| a.label.as_str()).collect());
        ensure(labels == ["suvs"], format!("{} labeled {labels:?} with SUVs competing", g.name(p)))?;
    }
    let without = label_corpus(&g, &[set.without("suvs")], &cfg).map_err(|e| e.to_string())?;
    for &p in &suv_pages {
        let labels: Vec<&str> =
            without.get(p).map_or(vec![], |r| r.assignments.iter().map(|a| a.label.as_str()).collect());
        ensure(labels == ["trucks"], format!("{} labeled {labels:?} without SUVs", g.name(p)))?;
    }
    Ok("SUV pages go to suvs, and to trucks once suvs leaves the set".into())
}

fn crit4() -> Outcome {
    let w = |xs: &[f64]| -> Vec<(String, f64)> { xs.iter().enumerate().map(|(i, &x)| (format!("l{i}"), x)).collect() };
    let one = normalize_and_assign(&w(&[0.5, 0.25, 0.25]), 0.3).map_err(|e| e.to_string())?;
    ensure(one.len() == 1 && one[0].0 == "l0", format!("{{0.5,0.25,0.25}} gave {one:?}"))?;
    let none = normalize_and_assign(&w(&[0.3, 0.3, 0.2, 0.2]), 0.3).map_err(|e| e.to_string())?;
    ensure(none.is_empty(), format!("{{0.3,0.3,0.2,0.2}} gave {none:?}"))?;
    Ok("one label for {0.5,0.25,0.25}, none for {0.3,0.3,0.2,0.2}".into())
}

fn crit5() -> Outcome {
    let m = jaro_winkler("MARTHA", "MARHTA");
    ensure((m - 0.9611).abs() <= 1e-4, format!("MARTHA/MARHTA {m}"))?;
    ensure(jaro_winkler("wikipedia", "wikipedia") == 1.0, "identity != 1")?;
    ensure(jaro_winkler("abc", "xyz") == 0.0, "disjoint != 0")?;

    let g = named_graph(&["Astronomy", "Arts", "Entertainment", "Musical theatre", "Sports"], &[], &[]);
    let taxonomy = Taxonomy::new(vec![
        TaxonomyLabel { id: "astronomy".into(), name: "Astronomy".into(), parent: None },
        TaxonomyLabel { id: "arts".into(), name: "Arts & Entertainment".into(), parent: None },
        TaxonomyLabel { id: "music".into(), name: "Music".into(), parent: None },
    ])
    .map_err(|e| e.to_string())?;
    let mapping = map_taxonomy(&taxonomy, &g, &BTreeMap::new(), 0.9).map_err(|e| e.to_string())?;
    let astro = mapping.get("astronomy").ok_or("astronomy unmapped")?;
    ensure(
        astro.nodes() == [cat(&g, "Astronomy")] && astro.kind == MatchKind::Exact,
        "astronomy not an exact match",
    )?;
    let arts = mapping.nodes("arts").ok_or("arts unmapped")?;
    ensure(arts == [cat(&g, "Arts"), cat(&g, "Entertainment")], format!("arts mapped to {arts:?}"))?;
    ensure(mapping.get("music").is_none(), "music accepted below threshold")?;
    let miss = mapping
        .near_misses
        .iter()
        .find(|n| n.label == "music")
        .ok_or("no near miss reported for music")?;
    ensure(miss.score < 0.9, format!("near miss scored {}", miss.score))?;
    Ok(format!(
        "MARTHA/MARHTA {m:.4}; split mapping ok; near miss {} at {:.3}",
        g.name(miss.candidate),
        miss.score
    ))
}

fn crit6() -> Outcome {
    let start = Instant::now();
    let data = separable_corpus(5, 200, 11);
    let tfidf = fit_tfidf(data.train.iter().map(|d| d.text.as_str()), DEFAULT_MIN_DF).map_err(|e| e.to_string())?;
    let xs: Vec<_> = data.train.iter().map(|d| tfidf.transform(&d.text)).collect();
    let ys: Vec<String> = data.train.iter().map(|d| d.label.clone()).collect();
    let dim = tfidf.vocab_size();
    let svm = train_svm(&xs, &ys, dim, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let centroid = train_centroid(&xs, &ys, dim).map_err(|e| e.to_string())?;
    let test: Vec<_> = data.test.iter().map(|d| (tfidf.transform(&d.text), d)).collect();
    let acc = |f: &dyn Fn(usize) -> String| -> f64 {
        let hits = (0..test.len()).filter(|&i| f(i) == test[i].1.label).count();
        hits as f64 / test.len() as f64
    };
    let svm_acc = acc(&|i| svm.predict(&test[i].0).to_string());
    let cen_acc = acc(&|i| centroid.predict(&test[i].0).to_string());
    let kw_acc = acc(&|i| keyword_vote(&test[i].1.text, &data.label_names, 11).to_string());
    let secs = start.elapsed().as_secs_f64();
    let summary = format!("svm {svm_acc:.3}, centroid {cen_acc:.3}, keyword {kw_acc:.3}, {secs:.1}s");
    ensure(svm_acc >= 0.95 && cen_acc >= 0.95, summary.clone())?;
    ensure(svm_acc > kw_acc && cen_acc > kw_acc, summary.clone())?;
    ensure(secs < 120.0, summary.clone())?;
    Ok(summary)
}

fn crit7() -> Outcome {
    let cfg = PipelineConfig::load(&fixture_dir().join("config.json")).map_err(|e| e.to_string())?;
    let (graph, _) = wikicat::graph::load_graph(&cfg.graph_files(), Default::default()).map_err(|e| e.to_string())?;
    let taxonomy = pipeline::load_taxonomy(&cfg).map_err(|e| e.to_string())?;
    let mapping = pipeline::compute_mapping(&cfg, &graph, &taxonomy).map_err(|e| e.to_string())?;
    let corpus = pipeline::load_corpus(&cfg).map_err(|e| e.to_string())?;
    let eval = pipeline::load_eval(&cfg).map_err(|e| e.to_string())?;
    let report = pipeline::run_ablation(&cfg, &graph, &taxonomy, &mapping, &corpus, &eval).map_err(|e| e.to_string())?;
    let f1 = |mode: LabelingMode| -> Result<f64, String> {
        report
            .rows
            .iter()
            .find(|r| r.mode == mode)
            .and_then(|r| r.svm.as_ref())
            .map(|s| s.macro_f1)
            .ok_or_else(|| format!("no svm score for {}", mode.as_str()))
    };
    let full = f1(LabelingMode::Full)?;
    let mut parts = vec![format!("full {full:.3}")];
    for mode in [LabelingMode::ChildOnly, LabelingMode::AllDescendants, LabelingMode::NoPruning] {
        let other = f1(mode)?;
        parts.push(format!("{} {other:.3}", mode.as_str()));
        ensure(full >= other, format!("full {full} < {} {other}", mode.as_str()))?;
    }
    Ok(parts.join(", "))
}

fn copy_fixture(dest: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dest)?;
    for entry in fs::read_dir(fixture_dir())? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            fs::copy(entry.path(), dest.join(entry.file_name()))?;
        }
    }
    Ok(())
}

fn run_pipeline(dir: &Path, workers: usize) -> Result<BTreeMap<String, Vec<u8>>, String> {
    copy_fixture(dir).map_err(|e| e.to_string())?;
    let config = dir.join("config.json");
    for step in ["build-graph", "map", "label", "sample", "train", "evaluate"] {
        let out = Command::new(env!("CARGO_BIN_EXE_wikicat"))
            .arg(step)
            .arg("--config")
            .arg(&config)
            .args(["--seed", "7", "--workers", &workers.to_string()])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(
            out.status.success(),
            format!("{step} failed: {}", String::from_utf8_lossy(&out.stderr)),
        )?;
    }
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir.join("out")).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let bytes = fs::read(entry.path()).map_err(|e| e.to_string())?;
        files.insert(entry.file_name().to_string_lossy().into_owned(), bytes);
    }
    Ok(files)
}

fn crit8() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_pipeline(&tmp.path().join("a"), 1)?;
    let b = run_pipeline(&tmp.path().join("b"), 1)?;
    let c = run_pipeline(&tmp.path().join("c"), 8)?;
    for name in ["labels.jsonl", "tfidf_model.json", "centroid_model.json", "svm_model.json", "report.json"] {
        ensure(a.contains_key(name), format!("{name} not written"))?;
    }
    ensure(a.keys().eq(b.keys()) && a.keys().eq(c.keys()), "different artifact sets")?;
    for (name, bytes) in &a {
        ensure(&b[name] == bytes, format!("{name} differs between identical runs"))?;
        ensure(&c[name] == bytes, format!("{name} differs between --workers 1 and 8"))?;
    }
    Ok(format!("{} artifacts byte-identical across 3 runs", a.len()))
}

fn peak_rss_mb() -> Option<f64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

fn crit9() -> Outcome {
    let spec = ScaleSpec::default();
    let synth = scale_graph(&spec);
    let start = Instant::now();
    let graph = synth.build();
    let roots: Vec<RootSpec> = synth.categories[..spec.roots]
        .iter()
        .map(|(id, _)| RootSpec::new(format!("topic-{id}"), [graph.node_by_external(*id).unwrap()]))
        .collect();
    let set = CompetitionSet::new(COARSE_GROUP, roots, &graph).map_err(|e| e.to_string())?;
    let labeled = label_corpus(&graph, &[set], &LabelingConfig::default()).map_err(|e| e.to_string())?;
    labeled.write_jsonl(&graph, std::io::sink()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let rss = peak_rss_mb().ok_or("cannot read peak RSS")?;
    let summary = format!(
        "{} edges, {} pages, {} labeled in {secs:.1}s, peak RSS {rss:.0} MB",
        graph.num_edges(),
        graph.num_pages(),
        labeled.labeled().count()
    );
    ensure(graph.num_edges() >= 1_000_000 && graph.num_pages() >= 100_000, summary.clone())?;
    ensure(secs < 120.0 && rss < 2048.0, summary.clone())?;
    Ok(summary)
}

fn main() {
    let criteria: [Criterion; 9] = [
        (9, "scale: 1M edges, 100k pages", crit9),
        (1, "dag weights equal exact path weights", crit1),
        (2, "depth and coverage pruning", crit2),
        (3, "competing branch pruning", crit3),
        (4, "assignment threshold", crit4),
        (5, "jaro-winkler and mapping", crit5),
        (6, "separable corpus classifiers", crit6),
        (7, "full mode wins the ablation", crit7),
        (8, "byte-identical outputs", crit8),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {n} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n} {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
