//! Synthetic inputs for tests, benchmarks and demos: a separable text
//! corpus, a small three-label wiki with distractor pages, and large random
//! category graphs.

use std::collections::{BTreeSet, HashSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::PageDoc;
use crate::eval::EvalInstance;
use crate::graph::{CategoryGraph, EdgeKind, GraphBuilder};
use crate::rng::rng_for;
use crate::taxonomy::{TaxonomyFile, TaxonomyLabel};

const CONSONANTS: &[u8] = b"bdfgklmnprtvz";
const VOWELS: &[u8] = b"aeiou";

/// `n` distinct pronounceable pseudo-words not already in `taken`.
pub fn pseudo_words(rng: &mut ChaCha8Rng, n: usize, taken: &mut HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=4);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
            w.push(VOWELS[rng.gen_range(0..VOWELS.len())] as char);
        }
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Word distribution of one class: a private core plus shared noise.
#[derive(Debug, Clone)]
pub struct ClassModel {
    pub core: Vec<String>,
}

/// A document with `n_core` core tokens and `n_noise` noise tokens in
/// random order.
pub fn document(rng: &mut ChaCha8Rng, core: &[String], noise: &[String], n_core: usize, n_noise: usize) -> String {
    let mut toks: Vec<&str> = Vec::with_capacity(n_core + n_noise);
    for _ in 0..n_core {
        toks.push(&core[rng.gen_range(0..core.len())]);
    }
    for _ in 0..n_noise {
        toks.push(&noise[rng.gen_range(0..noise.len())]);
    }
    toks.shuffle(rng);
    toks.join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledText {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparableCorpus {
    /// `(label id, display name)`; names never occur in the documents.
    pub label_names: Vec<(String, String)>,
    pub train: Vec<LabeledText>,
    pub test: Vec<LabeledText>,
}

const CLASS_NAMES: &[&str] = &[
    "Astronomy",
    "Botany",
    "Cuisine",
    "Dance",
    "Economics",
    "Fencing",
    "Geology",
    "Heraldry",
    "Ichthyology",
    "Jazz",
];

/// `classes` classes of `docs_per_class` documents each with disjoint core
/// vocabularies and shared noise. A quarter of every class is held out.
pub fn separable_corpus(classes: usize, docs_per_class: usize, seed: u64) -> SeparableCorpus {
    assert!(classes <= CLASS_NAMES.len(), "at most {} classes", CLASS_NAMES.len());
    let mut rng = rng_for(seed, "separable");
    let mut taken: HashSet<String> = CLASS_NAMES.iter().map(|n| n.to_lowercase()).collect();
    let noise = pseudo_words(&mut rng, 300, &mut taken);
    let mut out = SeparableCorpus {
        label_names: Vec::new(),
        train: Vec::new(),
        test: Vec::new(),
    };
    for name in &CLASS_NAMES[..classes] {
        let label = name.to_lowercase();
        out.label_names.push((label.clone(), name.to_string()));
        let core = pseudo_words(&mut rng, 40, &mut taken);
        let held_out = docs_per_class / 4;
        for i in 0..docs_per_class {
            let doc = LabeledText {
                label: label.clone(),
                text: document(&mut rng, &core, &noise, 12, 25),
            };
            if i < held_out {
                out.test.push(doc);
            } else {
                out.train.push(doc);
            }
        }
    }
    out
}

/// Categories, pages and edges keyed by external id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynthGraph {
    pub categories: Vec<(u64, String)>,
    pub pages: Vec<(u64, String)>,
    pub edges: Vec<(u64, u64, EdgeKind)>,
    pub redirects: Vec<(String, u64)>,
}

impl SynthGraph {
    pub fn build(&self) -> CategoryGraph {
        let mut b = GraphBuilder::new();
        for (id, name) in &self.categories {
            b.add_category(*id, name).expect("synthetic category");
        }
        for (id, title) in &self.pages {
            b.add_page(*id, title).expect("synthetic page");
        }
        for &(p, c, k) in &self.edges {
            b.add_edge(p, c, k).expect("synthetic edge");
        }
        for (alias, target) in &self.redirects {
            b.add_alias(alias, *target).expect("synthetic redirect");
        }
        b.build().0
    }

    /// Writes `categories.tsv`, `pages.tsv`, `edges.tsv` and `redirects.tsv`.
    pub fn write_tsv(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("categories.tsv"))?);
        for (id, name) in &self.categories {
            writeln!(w, "{id}\t{name}")?;
        }
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("pages.tsv"))?);
        for (id, title) in &self.pages {
            writeln!(w, "{id}\t{title}")?;
        }
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("edges.tsv"))?);
        for (p, c, k) in &self.edges {
            writeln!(w, "{p}\t{c}\t{}", k.as_str())?;
        }
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("redirects.tsv"))?);
        for (alias, target) in &self.redirects {
            writeln!(w, "{alias}\t{target}")?;
        }
        w.flush()
    }
}

/// A complete pipeline input set.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthWiki {
    pub graph: SynthGraph,
    pub corpus: Vec<PageDoc>,
    pub taxonomy: TaxonomyFile,
    pub eval: Vec<EvalInstance>,
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

impl SynthWiki {
    /// Writes the graph TSVs, `corpus.jsonl`, `taxonomy.json`, `eval.jsonl`
    /// and a `config.json` that points at them.
    pub fn write_to(&self, dir: &Path, n_per_class: usize, seed: u64) -> std::io::Result<()> {
        self.graph.write_tsv(dir)?;
        write_jsonl(&dir.join("corpus.jsonl"), &self.corpus)?;
        write_jsonl(&dir.join("eval.jsonl"), &self.eval)?;
        let mut w = BufWriter::new(File::create(dir.join("taxonomy.json"))?);
        serde_json::to_writer_pretty(&mut w, &self.taxonomy)?;
        w.write_all(b"\n")?;
        w.flush()?;
        let config = serde_json::json!({
            "graph_dir": ".",
            "corpus": "corpus.jsonl",
            "taxonomy": "taxonomy.json",
            "eval": "eval.jsonl",
            "output_dir": "out",
            "task": "coarse",
            "n_per_class": n_per_class,
            "seed": seed,
        });
        let mut w = BufWriter::new(File::create(dir.join("config.json"))?);
        serde_json::to_writer_pretty(&mut w, &config)?;
        w.write_all(b"\n")?;
        w.flush()
    }
}

const WIKI_LABELS: [&str; 3] = ["Astronomy", "Botany", "Cuisine"];
const MAINTENANCE: [&str; 6] = [
    "Articles with short description",
    "All stub articles",
    "Pages with broken links",
    "Articles needing cleanup",
    "Webarchive template links",
    "Use dmy dates",
];

struct WikiBuilder {
    graph: SynthGraph,
    corpus: Vec<PageDoc>,
    next_cat: u64,
    next_page: u64,
}

impl WikiBuilder {
    fn category(&mut self, name: String) -> u64 {
        let id = self.next_cat;
        self.next_cat += 1;
        self.graph.categories.push((id, name));
        id
    }

    fn page(&mut self, title: String, text: String, parents: &[u64]) -> u64 {
        let id = self.next_page;
        self.next_page += 1;
        self.graph.pages.push((id, title.clone()));
        self.corpus.push(PageDoc { id, title, text });
        let unique: BTreeSet<u64> = parents.iter().copied().collect();
        for p in unique {
            self.graph.edges.push((p, id, EdgeKind::Member));
        }
        id
    }

    fn subcat(&mut self, parent: u64, child: u64) {
        self.graph.edges.push((parent, child, EdgeKind::Subcat));
    }
}

/// A three-label wiki of about 200 clean pages plus distractors.
///
/// Every label has a root category with three subcategories of two
/// subcategories each. Clean pages sit at depths 1 to 3 with text of their
/// own label. The distractors are
///
/// * pages filed under one deep category of a label but three maintenance
///   categories, with text of a different label;
/// * a subcategory link from each label's deep category into a subcategory
///   of the next label;
/// * a link from the first root straight to the second.
///
/// Titles are neutral, so classifiers learn only from the text.
pub fn ablation_wiki(seed: u64) -> SynthWiki {
    let mut rng = rng_for(seed, "ablation-wiki");
    let mut taken: HashSet<String> = WIKI_LABELS.iter().map(|n| n.to_lowercase()).collect();
    let noise = pseudo_words(&mut rng, 400, &mut taken);
    let models: Vec<ClassModel> = WIKI_LABELS
        .iter()
        .map(|_| ClassModel {
            core: pseudo_words(&mut rng, 120, &mut taken),
        })
        .collect();
    let mut b = WikiBuilder {
        graph: SynthGraph::default(),
        corpus: Vec::new(),
        next_cat: 1,
        next_page: 100_000,
    };
    let maintenance: Vec<u64> = MAINTENANCE.iter().map(|m| b.category(m.to_string())).collect();

    let mut roots = Vec::new();
    let mut subs: Vec<Vec<u64>> = Vec::new();
    let mut deep: Vec<Vec<u64>> = Vec::new();
    for (i, name) in WIKI_LABELS.iter().enumerate() {
        let root = b.category(name.to_string());
        roots.push(root);
        let mut s_ids = Vec::new();
        let mut t_ids = Vec::new();
        for s in 1..=3 {
            let sid = b.category(format!("Area {s} of {name}"));
            b.subcat(root, sid);
            s_ids.push(sid);
            for t in 1..=2 {
                let tid = b.category(format!("Topic {t} in area {s} of {name}"));
                b.subcat(sid, tid);
                t_ids.push(tid);
            }
        }
        subs.push(s_ids);
        deep.push(t_ids);
        b.graph.redirects.push((format!("{name} (field)"), roots[i]));
    }

    let mut page_no = 0;
    let mut title = || {
        page_no += 1;
        format!("Article {page_no:04}")
    };
    for i in 0..WIKI_LABELS.len() {
        let own: Vec<u64> = subs[i].iter().chain(&deep[i]).copied().collect();
        let mut place = |b: &mut WikiBuilder, rng: &mut ChaCha8Rng, home: u64| {
            let mut parents = vec![home];
            if rng.gen_bool(0.3) {
                parents.push(own[rng.gen_range(0..own.len())]);
            }
            let text = document(rng, &models[i].core, &noise, 10, 30);
            b.page(title(), text, &parents);
        };
        for _ in 0..6 {
            place(&mut b, &mut rng, roots[i]);
        }
        for s in subs[i].clone() {
            for _ in 0..4 {
                place(&mut b, &mut rng, s);
            }
        }
        for t in deep[i].clone() {
            for _ in 0..7 {
                place(&mut b, &mut rng, t);
            }
        }
    }

    for i in 0..WIKI_LABELS.len() {
        for _ in 0..25 {
            let other = (i + rng.gen_range(1..WIKI_LABELS.len())) % WIKI_LABELS.len();
            let mut parents = vec![deep[i][rng.gen_range(0..deep[i].len())]];
            parents.extend(
                index::sample(&mut rng, maintenance.len(), 3)
                    .into_iter()
                    .map(|k| maintenance[k]),
            );
            let text = document(&mut rng, &models[other].core, &noise, 10, 30);
            b.page(title(), text, &parents);
        }
    }
    for i in 0..WIKI_LABELS.len() {
        let next = (i + 1) % WIKI_LABELS.len();
        b.subcat(deep[i][0], subs[next][0]);
    }
    b.subcat(roots[0], roots[1]);

    let taxonomy = TaxonomyFile {
        labels: WIKI_LABELS
            .iter()
            .map(|n| TaxonomyLabel {
                id: n.to_lowercase(),
                name: n.to_string(),
                parent: None,
            })
            .collect(),
    };
    let mut eval = Vec::new();
    for (i, name) in WIKI_LABELS.iter().enumerate() {
        for _ in 0..60 {
            eval.push(EvalInstance {
                text: document(&mut rng, &models[i].core, &noise, 6, 30),
                labels: vec![name.to_lowercase()],
                parent: None,
            });
        }
    }
    SynthWiki {
        graph: b.graph,
        corpus: b.corpus,
        taxonomy,
        eval,
    }
}

/// Shape of a random layered category graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleSpec {
    pub roots: usize,
    pub categories: usize,
    pub pages: usize,
    pub edges: usize,
    pub levels: usize,
    pub seed: u64,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec {
            roots: 20,
            categories: 50_000,
            pages: 100_000,
            edges: 1_000_000,
            levels: 7,
            seed: 1,
        }
    }
}

/// First external id used for pages in [`scale_graph`].
pub const SCALE_PAGE_BASE: u64 = 10_000_000;

/// A layered category graph with cross-level back edges (so it has cycles)
/// and pages attached to clusters of nearby categories. Categories `0..roots`
/// are the top level. The edge count is exact.
pub fn scale_graph(spec: &ScaleSpec) -> SynthGraph {
    assert!(spec.roots >= 1 && spec.categories > spec.roots && spec.levels >= 2);
    let mut rng = rng_for(spec.seed, "scale-graph");
    let mut g = SynthGraph::default();
    for c in 0..spec.categories {
        g.categories.push((c as u64, format!("Category {c}")));
    }
    for p in 0..spec.pages {
        g.pages.push((SCALE_PAGE_BASE + p as u64, format!("Page {p}")));
    }
    let rest = spec.categories - spec.roots;
    let per_level = rest.div_ceil(spec.levels - 1);
    let level_start = |l: usize| if l == 0 { 0 } else { spec.roots + (l - 1) * per_level };
    let level_end = |l: usize| {
        if l == 0 {
            spec.roots
        } else {
            (spec.roots + l * per_level).min(spec.categories)
        }
    };
    for l in 1..spec.levels {
        let (ps, pe) = (level_start(l - 1), level_end(l - 1));
        for c in level_start(l)..level_end(l) {
            let k = rng.gen_range(1..=3).min(pe - ps);
            for j in index::sample(&mut rng, pe - ps, k) {
                g.edges.push(((ps + j) as u64, c as u64, EdgeKind::Subcat));
            }
            if l >= 2 && c + 1 < spec.categories && rng.gen_bool(0.02) {
                let deeper = rng.gen_range(c + 1..spec.categories);
                g.edges.push((deeper as u64, c as u64, EdgeKind::Subcat));
            }
        }
    }
    let members = spec.edges.saturating_sub(g.edges.len());
    let window = 64.min(rest);
    for p in 0..spec.pages {
        let k = (members / spec.pages + usize::from(p < members % spec.pages)).min(window);
        let home = spec.roots + rng.gen_range(0..rest);
        let lo = home.saturating_sub(window / 2).max(spec.roots).min(spec.categories - window);
        for j in index::sample(&mut rng, window, k) {
            g.edges.push(((lo + j) as u64, SCALE_PAGE_BASE + p as u64, EdgeKind::Member));
        }
    }
    g
}
