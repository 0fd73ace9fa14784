//! The end-to-end pipeline behind the `wikicat` subcommands.
//!
//! Each step reads its inputs from the paths of a [`PipelineConfig`] and the
//! artifacts of earlier steps from the output directory:
//!
//! ```text
//! build-graph  -> graph.bin, graph_stats.json
//! map          -> mapping.json
//! label        -> labels.jsonl, label_summary.json      (needs mapping.json)
//! sample       -> sample.jsonl                          (needs labels.jsonl)
//! train        -> tfidf_model.json, centroid_model.json, svm_model.json
//!                                                       (needs sample.jsonl)
//! predict      -> predictions.jsonl                     (needs the models)
//! evaluate     -> report.json                           (needs the models)
//! ablate       -> ablation.json                         (needs mapping.json)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{
    sample_balance, train_centroid, train_svm, CentroidModel, ClassifierError, KeywordVoter, LinearSvmModel,
    ModelSet, TextClassifier, TrainConfig,
};
use crate::corpus::{CorpusError, PageCorpus};
use crate::eval::{evaluate_grouped, EvalError, EvalInstance, GroupedReport};
use crate::graph::{load_graph as load_tsv, CategoryGraph, GraphError, GraphFiles, GraphStats, LoadOptions, LoadReport};
use crate::labeler::{
    competition_sets, label_corpus, read_label_lines, LabelError, LabelLine, LabelingConfig, LabelingMode, Task,
    COARSE_GROUP,
};
use crate::rng::derive_seed;
use crate::snapshot::{load_snapshot, save_snapshot};
use crate::taxonomy::{
    map_taxonomy, resolve_overrides, CategoryMapping, MappingFile, Taxonomy, TaxonomyError, TaxonomyFile,
    DEFAULT_THRESHOLD,
};
use crate::textproc::{fit_tfidf, TextError, DEFAULT_MIN_DF};

pub const GRAPH_SNAPSHOT: &str = "graph.bin";
pub const GRAPH_STATS: &str = "graph_stats.json";
pub const MAPPING: &str = "mapping.json";
pub const LABELS: &str = "labels.jsonl";
pub const LABEL_SUMMARY: &str = "label_summary.json";
pub const SAMPLE: &str = "sample.jsonl";
pub const TFIDF_MODEL: &str = "tfidf_model.json";
pub const CENTROID_MODEL: &str = "centroid_model.json";
pub const SVM_MODEL: &str = "svm_model.json";
pub const PREDICTIONS: &str = "predictions.jsonl";
pub const REPORT: &str = "report.json";
pub const ABLATION: &str = "ablation.json";

pub const FINE_N_PER_CLASS: usize = 1000;
pub const COARSE_N_PER_CLASS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input, config or missing prerequisite artifact.
    Input,
    /// Anything else, such as a failed write.
    Internal,
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct PipelineError {
    pub class: ErrorClass,
    pub message: String,
}

impl PipelineError {
    pub fn input(message: impl Into<String>) -> Self {
        PipelineError {
            class: ErrorClass::Input,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        PipelineError {
            class: ErrorClass::Internal,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class {
            ErrorClass::Input => 2,
            ErrorClass::Internal => 3,
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for PipelineError {
            fn from(e: $t) -> Self {
                PipelineError::input(e.to_string())
            }
        }
    )*};
}

input_error!(GraphError, TaxonomyError, LabelError, ClassifierError, EvalError, CorpusError, TextError);

pub type Result<T> = std::result::Result<T, PipelineError>;

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_min_df() -> u32 {
    DEFAULT_MIN_DF
}

fn default_task() -> Task {
    Task::Coarse
}

/// `config.json`. Relative paths are resolved against the directory of the
/// config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory with `categories.tsv`, `pages.tsv`, `edges.tsv` and an
    /// optional `redirects.tsv`.
    pub graph_dir: PathBuf,
    /// Binary snapshot used instead of the TSV files when it exists.
    #[serde(default)]
    pub snapshot: Option<PathBuf>,
    #[serde(default)]
    pub lenient: bool,
    pub corpus: PathBuf,
    pub taxonomy: PathBuf,
    #[serde(default)]
    pub overrides: Option<PathBuf>,
    #[serde(default)]
    pub eval: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default = "default_task")]
    pub task: Task,
    #[serde(default)]
    pub labeling: LabelingConfig,
    /// The `seed` field is replaced by the top-level seed.
    #[serde(default)]
    pub train: TrainConfig,
    /// Defaults to 20000 for the coarse task and 1000 for the fine task.
    #[serde(default)]
    pub n_per_class: Option<usize>,
    #[serde(default = "default_threshold")]
    pub map_threshold: f64,
    #[serde(default = "default_min_df")]
    pub min_df: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// The settings that determine results, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub task: Task,
    pub seed: u64,
    pub labeling: LabelingConfig,
    pub train: TrainConfig,
    pub n_per_class: usize,
    pub map_threshold: f64,
    pub min_df: u32,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| PipelineError::input(format!("invalid config {}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.labeling.validate()?;
        self.train().validate()?;
        if !(0.0..=1.0).contains(&self.map_threshold) {
            return Err(PipelineError::input(format!(
                "map_threshold {} is outside [0, 1]",
                self.map_threshold
            )));
        }
        if self.n_per_class == Some(0) {
            return Err(PipelineError::input("n_per_class must be at least 1"));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.resolve(&self.output_dir).join(name)
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train
        }
    }

    pub fn n_per_class(&self) -> usize {
        self.n_per_class.unwrap_or(match self.task {
            Task::Coarse => COARSE_N_PER_CLASS,
            Task::Fine => FINE_N_PER_CLASS,
        })
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            task: self.task,
            seed: self.seed,
            labeling: self.labeling.clone(),
            train: self.train(),
            n_per_class: self.n_per_class(),
            map_threshold: self.map_threshold,
            min_df: self.min_df,
        }
    }

    pub fn graph_files(&self) -> GraphFiles {
        GraphFiles::in_dir(&self.resolve(&self.graph_dir))
    }

    fn snapshot_path(&self) -> PathBuf {
        match &self.snapshot {
            Some(p) => self.resolve(p),
            None => self.out(GRAPH_SNAPSHOT),
        }
    }

    fn prepare_output(&self) -> Result<()> {
        let dir = self.resolve(&self.output_dir);
        fs::create_dir_all(&dir)
            .map_err(|e| PipelineError::input(format!("cannot create output dir {}: {e}", dir.display())))
    }
}

fn open(path: &Path, hint: &str) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| PipelineError::input(format!("cannot open {}: {e}{hint}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path, hint: &str) -> Result<T> {
    serde_json::from_reader(open(path, hint)?)
        .map_err(|e| PipelineError::input(format!("invalid JSON in {}: {e}", path.display())))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let fail = |e: std::io::Error| PipelineError::internal(format!("cannot write {}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(fail)?);
    f(&mut w).map_err(fail)?;
    w.flush().map_err(fail)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_file(path, |w| {
        for r in rows {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

fn read_jsonl<T: DeserializeOwned>(path: &Path, hint: &str) -> Result<Vec<T>> {
    use std::io::BufRead;
    let mut out = Vec::new();
    for (i, line) in open(path, hint)?.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::input(format!("cannot read {}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| {
            PipelineError::input(format!("{}:{}: {e}", path.display(), i + 1))
        })?);
    }
    Ok(out)
}

pub fn load_graph(cfg: &PipelineConfig) -> Result<CategoryGraph> {
    let snapshot = cfg.snapshot_path();
    if snapshot.exists() {
        log::info!("loading graph snapshot {}", snapshot.display());
        return Ok(load_snapshot(&snapshot)?);
    }
    let (graph, report) = load_tsv(&cfg.graph_files(), LoadOptions { lenient: cfg.lenient })?;
    log_load_report(&report);
    Ok(graph)
}

fn log_load_report(report: &LoadReport) {
    if report.duplicate_edges > 0 {
        log::warn!("{} duplicate edges ignored", report.duplicate_edges);
    }
    if report.dropped_edges + report.dropped_redirects > 0 {
        log::warn!(
            "dropped {} dangling edges and {} dangling redirects",
            report.dropped_edges,
            report.dropped_redirects
        );
    }
}

pub fn load_taxonomy(cfg: &PipelineConfig) -> Result<Taxonomy> {
    let file: TaxonomyFile = read_json(&cfg.resolve(&cfg.taxonomy), "")?;
    Ok(Taxonomy::from_file(file)?)
}

pub fn load_corpus(cfg: &PipelineConfig) -> Result<PageCorpus> {
    Ok(PageCorpus::read_jsonl(open(&cfg.resolve(&cfg.corpus), "")?)?)
}

pub fn load_eval(cfg: &PipelineConfig) -> Result<Vec<EvalInstance>> {
    let path = cfg
        .eval
        .as_ref()
        .ok_or_else(|| PipelineError::input("config has no \"eval\" dataset"))?;
    Ok(crate::eval::read_eval_jsonl(open(&cfg.resolve(path), "")?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub stats: GraphStats,
    pub load: LoadReport,
}

/// Loads the TSV graph, writes the snapshot and the stats report.
pub fn build_graph(cfg: &PipelineConfig) -> Result<GraphSummary> {
    cfg.prepare_output()?;
    let (graph, load) = load_tsv(&cfg.graph_files(), LoadOptions { lenient: cfg.lenient })?;
    log_load_report(&load);
    let snapshot = cfg.snapshot_path();
    save_snapshot(&graph, &snapshot).map_err(|e| PipelineError::internal(e.to_string()))?;
    let summary = GraphSummary {
        stats: graph.stats(),
        load,
    };
    write_json(&cfg.out(GRAPH_STATS), &summary)?;
    Ok(summary)
}

pub fn compute_mapping(cfg: &PipelineConfig, graph: &CategoryGraph, taxonomy: &Taxonomy) -> Result<CategoryMapping> {
    let overrides = match &cfg.overrides {
        Some(p) => {
            let names: BTreeMap<String, Vec<String>> = read_json(&cfg.resolve(p), "")?;
            resolve_overrides(&names, graph)?
        }
        None => BTreeMap::new(),
    };
    Ok(map_taxonomy(taxonomy, graph, &overrides, cfg.map_threshold)?)
}

pub fn map(cfg: &PipelineConfig) -> Result<MappingFile> {
    cfg.prepare_output()?;
    let graph = load_graph(cfg)?;
    let taxonomy = load_taxonomy(cfg)?;
    let mapping = compute_mapping(cfg, &graph, &taxonomy)?;
    for l in &mapping.unmapped {
        log::warn!("label {l:?} is not mapped to any category");
    }
    let file = mapping.to_file(&graph);
    write_json(&cfg.out(MAPPING), &file)?;
    Ok(file)
}

fn read_mapping(cfg: &PipelineConfig, graph: &CategoryGraph) -> Result<CategoryMapping> {
    let file: MappingFile = read_json(&cfg.out(MAPPING), "; run `wikicat map` first")?;
    Ok(CategoryMapping::from_file(&file, graph)?)
}

pub fn compute_labels(
    graph: &CategoryGraph,
    taxonomy: &Taxonomy,
    mapping: &CategoryMapping,
    task: Task,
    labeling: &LabelingConfig,
) -> Result<Vec<LabelLine>> {
    let sets = competition_sets(taxonomy, mapping, graph, task)?;
    Ok(label_corpus(graph, &sets, labeling)?.lines(graph))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub config: ConfigEcho,
    pub candidate_pages: usize,
    pub labeled_pages: usize,
    pub assignments: usize,
    /// Labeled pages per taxonomy label.
    pub label_counts: BTreeMap<String, usize>,
}

fn summarize_labels(cfg: &PipelineConfig, lines: &[LabelLine]) -> LabelSummary {
    let mut label_counts = BTreeMap::new();
    for l in lines {
        for a in &l.assignments {
            *label_counts.entry(a.label.clone()).or_insert(0) += 1;
        }
    }
    LabelSummary {
        config: cfg.echo(),
        candidate_pages: lines.len(),
        labeled_pages: lines.iter().filter(|l| !l.assignments.is_empty()).count(),
        assignments: label_counts.values().sum(),
        label_counts,
    }
}

pub fn label(cfg: &PipelineConfig) -> Result<LabelSummary> {
    cfg.prepare_output()?;
    let graph = load_graph(cfg)?;
    let taxonomy = load_taxonomy(cfg)?;
    let mapping = read_mapping(cfg, &graph)?;
    let lines = compute_labels(&graph, &taxonomy, &mapping, cfg.task, &cfg.labeling)?;
    write_jsonl(&cfg.out(LABELS), &lines)?;
    let summary = summarize_labels(cfg, &lines);
    write_json(&cfg.out(LABEL_SUMMARY), &summary)?;
    Ok(summary)
}

/// Competition groups of a task with their classes.
pub fn task_groups(taxonomy: &Taxonomy, task: Task) -> BTreeMap<String, Vec<String>> {
    let own = |v: Vec<&str>| v.into_iter().map(str::to_string).collect();
    match task {
        Task::Coarse => BTreeMap::from([(COARSE_GROUP.to_string(), own(taxonomy.roots()))]),
        Task::Fine => taxonomy
            .internal_labels()
            .into_iter()
            .map(|p| (p.to_string(), own(taxonomy.children(p))))
            .collect(),
    }
}

/// One line of `sample.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleLine {
    pub group: String,
    pub page: u64,
    pub label: String,
}

/// Balances the labeled pages of every group. Pages without text in the
/// corpus are skipped.
pub fn compute_sample(
    taxonomy: &Taxonomy,
    task: Task,
    lines: &[LabelLine],
    corpus: &PageCorpus,
    n_per_class: usize,
    seed: u64,
) -> Result<Vec<SampleLine>> {
    let missing = lines
        .iter()
        .filter(|l| !l.assignments.is_empty() && corpus.get(l.page).is_none())
        .count();
    if missing > 0 {
        log::warn!("{missing} labeled pages have no text in the corpus and are skipped");
    }
    let mut out = Vec::new();
    for (group, classes) in task_groups(taxonomy, task) {
        let wanted: BTreeSet<&str> = classes.iter().map(String::as_str).collect();
        let docs: Vec<(u64, Vec<String>)> = lines
            .iter()
            .filter(|l| corpus.get(l.page).is_some())
            .filter_map(|l| {
                let labels: Vec<String> = l
                    .assignments
                    .iter()
                    .filter(|a| wanted.contains(a.label.as_str()))
                    .map(|a| a.label.clone())
                    .collect();
                (!labels.is_empty()).then_some((l.page, labels))
            })
            .collect();
        let balanced = sample_balance(&docs, &classes, n_per_class, derive_seed(seed, &format!("group:{group}")))?;
        out.extend(balanced.items.into_iter().map(|(page, label)| SampleLine {
            group: group.clone(),
            page,
            label,
        }));
    }
    Ok(out)
}

pub fn sample(cfg: &PipelineConfig) -> Result<usize> {
    cfg.prepare_output()?;
    let taxonomy = load_taxonomy(cfg)?;
    let corpus = load_corpus(cfg)?;
    let lines = read_label_lines(open(&cfg.out(LABELS), "; run `wikicat label` first")?)?;
    let rows = compute_sample(&taxonomy, cfg.task, &lines, &corpus, cfg.n_per_class(), cfg.seed)?;
    write_jsonl(&cfg.out(SAMPLE), &rows)?;
    Ok(rows.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModels {
    pub centroid: ModelSet<CentroidModel>,
    pub svm: ModelSet<LinearSvmModel>,
}

/// Fits the shared vocabulary on the distinct sampled pages and trains both
/// models for every group that has samples.
pub fn fit_models(
    task: Task,
    samples: &[SampleLine],
    corpus: &PageCorpus,
    min_df: u32,
    train: &TrainConfig,
) -> Result<TrainedModels> {
    let text = |page: u64| {
        corpus
            .get(page)
            .map(|d| d.full_text())
            .ok_or_else(|| PipelineError::input(format!("sampled page {page} has no text in the corpus")))
    };
    let pages: BTreeSet<u64> = samples.iter().map(|s| s.page).collect();
    if pages.is_empty() {
        return Err(PipelineError::input("no labeled documents to train on"));
    }
    let texts = pages.iter().map(|&p| text(p)).collect::<Result<Vec<_>>>()?;
    let tfidf = fit_tfidf(texts.iter(), min_df)?;
    if tfidf.vocab_size() == 0 {
        log::warn!("every term fell below min_df {min_df}; the vocabulary is empty");
    }
    let vectors: BTreeMap<u64, _> = pages
        .iter()
        .zip(&texts)
        .map(|(&p, t)| (p, tfidf.transform(t)))
        .collect();

    let mut by_group: BTreeMap<&str, Vec<&SampleLine>> = BTreeMap::new();
    for s in samples {
        by_group.entry(&s.group).or_default().push(s);
    }
    let dim = tfidf.vocab_size();
    let mut centroid = BTreeMap::new();
    let mut svm = BTreeMap::new();
    for (group, rows) in by_group {
        let xs: Vec<_> = rows.iter().map(|s| vectors[&s.page].clone()).collect();
        let ys: Vec<String> = rows.iter().map(|s| s.label.clone()).collect();
        centroid.insert(group.to_string(), train_centroid(&xs, &ys, dim)?);
        let classes: BTreeSet<&String> = ys.iter().collect();
        let model = if classes.len() == 1 {
            log::warn!("group {group:?} has a single class; its SVM always predicts it");
            LinearSvmModel {
                dim,
                config: *train,
                labels: vec![ys[0].clone()],
                weights: vec![Default::default()],
                biases: vec![0.0],
            }
        } else {
            train_svm(&xs, &ys, dim, train)?
        };
        svm.insert(group.to_string(), model);
    }
    Ok(TrainedModels {
        centroid: ModelSet {
            task,
            tfidf: tfidf.clone(),
            groups: centroid,
        },
        svm: ModelSet {
            task,
            tfidf,
            groups: svm,
        },
    })
}

pub fn train(cfg: &PipelineConfig) -> Result<TrainedModels> {
    cfg.prepare_output()?;
    let corpus = load_corpus(cfg)?;
    let samples: Vec<SampleLine> = read_jsonl(&cfg.out(SAMPLE), "; run `wikicat sample` first")?;
    let models = fit_models(cfg.task, &samples, &corpus, cfg.min_df, &cfg.train())?;
    write_json(&cfg.out(TFIDF_MODEL), &models.svm.tfidf.to_file())?;
    write_json(&cfg.out(CENTROID_MODEL), &models.centroid.to_file())?;
    write_json(&cfg.out(SVM_MODEL), &models.svm.to_file())?;
    Ok(models)
}

pub fn load_models(cfg: &PipelineConfig) -> Result<TrainedModels> {
    let hint = "; run `wikicat train` first";
    let centroid = ModelSet::<CentroidModel>::from_file(read_json(&cfg.out(CENTROID_MODEL), hint)?)?;
    let svm = ModelSet::<LinearSvmModel>::from_file(read_json(&cfg.out(SVM_MODEL), hint)?)?;
    if centroid.task != cfg.task || svm.task != cfg.task {
        return Err(PipelineError::input("models were trained for a different task"));
    }
    Ok(TrainedModels { centroid, svm })
}

/// Keyword voters restricted to the label space of every trained group.
pub fn keyword_voters(taxonomy: &Taxonomy, svm: &ModelSet<LinearSvmModel>) -> BTreeMap<String, KeywordVoter> {
    svm.groups
        .iter()
        .map(|(g, m)| {
            let names = m
                .labels()
                .iter()
                .map(|l| (l.as_str(), taxonomy.get(l).map_or(l.as_str(), |t| t.name.as_str())));
            (g.clone(), KeywordVoter::new(names))
        })
        .collect()
}

fn group_of(task: Task, parent: Option<&str>) -> Option<String> {
    match task {
        Task::Coarse => Some(COARSE_GROUP.to_string()),
        Task::Fine => parent.map(str::to_string),
    }
}

/// Input line of `wikicat predict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictInput {
    pub text: String,
    #[serde(default)]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub index: usize,
    pub group: String,
    pub centroid: String,
    pub svm: String,
    pub keyword: String,
}

pub fn predict(cfg: &PipelineConfig, input: &Path) -> Result<Vec<Prediction>> {
    cfg.prepare_output()?;
    let taxonomy = load_taxonomy(cfg)?;
    let models = load_models(cfg)?;
    let voters = keyword_voters(&taxonomy, &models.svm);
    let docs: Vec<PredictInput> = read_jsonl(input, "")?;
    let preds = docs
        .iter()
        .enumerate()
        .map(|(index, d)| {
            let group = group_of(cfg.task, d.parent.as_deref())
                .ok_or_else(|| PipelineError::input(format!("input {index} has no parent")))?;
            let v = models.svm.tfidf.transform(&d.text);
            Ok(Prediction {
                index,
                centroid: models.centroid.group(&group)?.predict(&v).to_string(),
                svm: models.svm.group(&group)?.predict(&v).to_string(),
                keyword: voters[&group].vote(&d.text, cfg.seed).to_string(),
                group,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_jsonl(&cfg.out(PREDICTIONS), &preds)?;
    Ok(preds)
}

fn grouped_instances(task: Task, instances: &[EvalInstance]) -> Result<Vec<EvalInstance>> {
    instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let parent = group_of(task, inst.parent.as_deref())
                .ok_or_else(|| PipelineError::input(format!("eval instance {i} has no parent")))?;
            Ok(EvalInstance {
                parent: Some(parent),
                ..inst.clone()
            })
        })
        .collect()
}

fn score_model<M: TextClassifier + Sync>(
    models: &ModelSet<M>,
    instances: &[EvalInstance],
) -> Result<GroupedReport> {
    Ok(evaluate_grouped(instances, |group, text| {
        models.predict(group, text).ok().map(str::to_string)
    })?)
}

fn score_keyword(voters: &BTreeMap<String, KeywordVoter>, instances: &[EvalInstance], seed: u64) -> Result<GroupedReport> {
    Ok(evaluate_grouped(instances, |group, text| {
        voters.get(group).map(|v| v.vote(text, seed).to_string())
    })?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: ConfigEcho,
    pub n: usize,
    /// Keyed by `centroid`, `keyword` and `svm`.
    pub models: BTreeMap<String, GroupedReport>,
}

pub fn score_all(
    cfg: &PipelineConfig,
    taxonomy: &Taxonomy,
    models: &TrainedModels,
    instances: &[EvalInstance],
) -> Result<EvaluationReport> {
    let grouped = grouped_instances(cfg.task, instances)?;
    let voters = keyword_voters(taxonomy, &models.svm);
    let reports = BTreeMap::from([
        ("centroid".to_string(), score_model(&models.centroid, &grouped)?),
        ("keyword".to_string(), score_keyword(&voters, &grouped, cfg.seed)?),
        ("svm".to_string(), score_model(&models.svm, &grouped)?),
    ]);
    Ok(EvaluationReport {
        config: cfg.echo(),
        n: instances.len(),
        models: reports,
    })
}

pub fn evaluate(cfg: &PipelineConfig) -> Result<EvaluationReport> {
    cfg.prepare_output()?;
    let taxonomy = load_taxonomy(cfg)?;
    let models = load_models(cfg)?;
    let instances = load_eval(cfg)?;
    let report = score_all(cfg, &taxonomy, &models, &instances)?;
    write_json(&cfg.out(REPORT), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: f64,
    pub macro_f1: f64,
}

impl From<&GroupedReport> for Scores {
    fn from(r: &GroupedReport) -> Self {
        Scores {
            accuracy: r.aggregate.accuracy,
            macro_f1: r.aggregate.macro_f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub mode: LabelingMode,
    pub labeled_pages: usize,
    pub training_instances: usize,
    pub centroid: Option<Scores>,
    pub svm: Option<Scores>,
    /// Why the mode could not be scored.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub config: ConfigEcho,
    pub n: usize,
    pub rows: Vec<AblationRow>,
}

/// Labels, samples, trains and evaluates once per labeling mode.
pub fn run_ablation(
    cfg: &PipelineConfig,
    graph: &CategoryGraph,
    taxonomy: &Taxonomy,
    mapping: &CategoryMapping,
    corpus: &PageCorpus,
    instances: &[EvalInstance],
) -> Result<AblationReport> {
    let grouped = grouped_instances(cfg.task, instances)?;
    let mut rows = Vec::new();
    for mode in LabelingMode::ALL {
        let labeling = LabelingConfig {
            mode,
            ..cfg.labeling.clone()
        };
        let lines = compute_labels(graph, taxonomy, mapping, cfg.task, &labeling)?;
        let labeled_pages = lines.iter().filter(|l| !l.assignments.is_empty()).count();
        let samples = compute_sample(taxonomy, cfg.task, &lines, corpus, cfg.n_per_class(), cfg.seed)?;
        let scored = fit_models(cfg.task, &samples, corpus, cfg.min_df, &cfg.train()).and_then(|m| {
            Ok((
                Scores::from(&score_model(&m.centroid, &grouped)?),
                Scores::from(&score_model(&m.svm, &grouped)?),
            ))
        });
        let row = match scored {
            Ok((c, s)) => AblationRow {
                mode,
                labeled_pages,
                training_instances: samples.len(),
                centroid: Some(c),
                svm: Some(s),
                error: None,
            },
            Err(e) if e.class == ErrorClass::Input => AblationRow {
                mode,
                labeled_pages,
                training_instances: samples.len(),
                centroid: None,
                svm: None,
                error: Some(e.message),
            },
            Err(e) => return Err(e),
        };
        log::info!("ablation {}: {} labeled pages", mode.as_str(), labeled_pages);
        rows.push(row);
    }
    Ok(AblationReport {
        config: cfg.echo(),
        n: instances.len(),
        rows,
    })
}

pub fn ablate(cfg: &PipelineConfig) -> Result<AblationReport> {
    cfg.prepare_output()?;
    let graph = load_graph(cfg)?;
    let taxonomy = load_taxonomy(cfg)?;
    let mapping = read_mapping(cfg, &graph)?;
    let corpus = load_corpus(cfg)?;
    let instances = load_eval(cfg)?;
    let report = run_ablation(cfg, &graph, &taxonomy, &mapping, &corpus, &instances)?;
    write_json(&cfg.out(ABLATION), &report)?;
    Ok(report)
}

/// Runs map, label, sample, train and evaluate in sequence.
pub fn run_all(cfg: &PipelineConfig) -> Result<EvaluationReport> {
    map(cfg)?;
    label(cfg)?;
    sample(cfg)?;
    train(cfg)?;
    evaluate(cfg)
}
