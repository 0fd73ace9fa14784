//! Corpus balancing, nearest-centroid and one-vs-rest linear SVM
//! classifiers, and the keyword-voting baseline.
//!
//! The SVM minimizes `max(0, 1 - y(w.x + b)) + lambda/2 |w|^2` per class by
//! SGD with learning rate `eta0 / (1 + eta0 * lambda * t)`. Every class gets
//! its own shuffling stream derived from the run seed and the label, so
//! classes can be trained in any order or in parallel.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeler::Task;
use crate::rng::rng_for;
use crate::textproc::{strip_plural, tokenize, SparseVector, TextError, TfIdfFile, TfIdfModel};

pub const CENTROID_FORMAT: &str = "wikicat-centroid/1";
pub const SVM_FORMAT: &str = "wikicat-svm/1";

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("no training documents")]
    EmptyTraining,
    #[error("need at least two classes, got only {0:?}")]
    SingleClass(String),
    #[error("{vectors} vectors but {labels} labels")]
    LengthMismatch { vectors: usize, labels: usize },
    #[error("feature {index} is outside the model dimension {dim}")]
    FeatureOutOfRange { index: u32, dim: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("invalid model file: {0}")]
    InvalidModel(String),
    #[error("no model for group {0:?}")]
    UnknownGroup(String),
    #[error(transparent)]
    Text(#[from] TextError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: u32,
    pub eta0: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-4,
            epochs: 5,
            eta0: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(ClassifierError::InvalidConfig(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(ClassifierError::InvalidConfig(format!("eta0 must be positive, got {}", self.eta0)));
        }
        if self.epochs == 0 {
            return Err(ClassifierError::InvalidConfig("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Exactly `n_per_class` instances for every class that has documents.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedCorpus<T> {
    pub n_per_class: usize,
    /// Grouped by class in ascending label order.
    pub items: Vec<(T, String)>,
    /// Classes that had no documents.
    pub dropped: Vec<String>,
}

/// Down- or oversamples every class to `n_per_class` instances. A document
/// with several labels counts once for each of them. Classes listed in
/// `classes` without any document are dropped with a warning.
pub fn sample_balance<T: Clone>(
    docs: &[(T, Vec<String>)],
    classes: &[String],
    n_per_class: usize,
    seed: u64,
) -> Result<BalancedCorpus<T>, ClassifierError> {
    if n_per_class == 0 {
        return Err(ClassifierError::InvalidConfig("n_per_class must be at least 1".into()));
    }
    let mut members: BTreeMap<&str, Vec<usize>> = classes.iter().map(|c| (c.as_str(), Vec::new())).collect();
    for (i, (_, labels)) in docs.iter().enumerate() {
        let unique: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
        for l in unique {
            members.entry(l).or_default().push(i);
        }
    }
    let mut items = Vec::with_capacity(members.len() * n_per_class);
    let mut dropped = Vec::new();
    for (label, idx) in members {
        if idx.is_empty() {
            log::warn!("class {label:?} has no documents and is dropped");
            dropped.push(label.to_string());
            continue;
        }
        let mut rng = rng_for(seed, &format!("sample:{label}"));
        let picked: Vec<usize> = if idx.len() >= n_per_class {
            let mut p: Vec<usize> = index::sample(&mut rng, idx.len(), n_per_class)
                .into_iter()
                .map(|k| idx[k])
                .collect();
            p.sort_unstable();
            p
        } else {
            let mut p = idx.clone();
            p.extend((idx.len()..n_per_class).map(|_| idx[rng.gen_range(0..idx.len())]));
            p
        };
        items.extend(picked.into_iter().map(|i| (docs[i].0.clone(), label.to_string())));
    }
    Ok(BalancedCorpus {
        n_per_class,
        items,
        dropped,
    })
}

/// A classifier over tf-idf vectors with a fixed, sorted label list.
pub trait TextClassifier {
    fn labels(&self) -> &[String];

    /// One score per label, in label order.
    fn scores(&self, vector: &SparseVector) -> Vec<f64>;

    /// Highest-scoring label; ties go to the smaller label.
    fn predict(&self, vector: &SparseVector) -> &str {
        let scores = self.scores(vector);
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
            }
        }
        &self.labels()[best]
    }
}

fn check_inputs(vectors: &[SparseVector], labels: &[String], dim: usize) -> Result<Vec<String>, ClassifierError> {
    if vectors.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    if vectors.is_empty() {
        return Err(ClassifierError::EmptyTraining);
    }
    for v in vectors {
        if let Some(&index) = v.indices.last().filter(|&&i| i as usize >= dim) {
            return Err(ClassifierError::FeatureOutOfRange { index, dim });
        }
    }
    let classes: BTreeSet<&String> = labels.iter().collect();
    Ok(classes.into_iter().cloned().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    pub dim: usize,
    pub labels: Vec<String>,
    /// Unit-norm mean vector per label.
    pub centroids: Vec<SparseVector>,
}

pub fn train_centroid(
    vectors: &[SparseVector],
    labels: &[String],
    dim: usize,
) -> Result<CentroidModel, ClassifierError> {
    let classes = check_inputs(vectors, labels, dim)?;
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    let centroids = classes
        .par_iter()
        .map(|c| {
            let idx = &members[c.as_str()];
            let mut sum = vec![0.0; dim];
            for &i in idx {
                for (j, x) in vectors[i].iter() {
                    sum[j as usize] += x;
                }
            }
            let n = idx.len() as f64;
            let mut v = SparseVector::from_pairs(
                sum.into_iter()
                    .enumerate()
                    .filter(|&(_, x)| x != 0.0)
                    .map(|(j, x)| (j as u32, x / n)),
            );
            v.normalize();
            v
        })
        .collect();
    Ok(CentroidModel {
        dim,
        labels: classes,
        centroids,
    })
}

impl TextClassifier for CentroidModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn scores(&self, vector: &SparseVector) -> Vec<f64> {
        self.centroids.iter().map(|c| c.dot(vector)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    pub dim: usize,
    pub config: TrainConfig,
    pub labels: Vec<String>,
    pub weights: Vec<SparseVector>,
    pub biases: Vec<f64>,
}

pub fn train_svm(
    vectors: &[SparseVector],
    labels: &[String],
    dim: usize,
    cfg: &TrainConfig,
) -> Result<LinearSvmModel, ClassifierError> {
    cfg.validate()?;
    let classes = check_inputs(vectors, labels, dim)?;
    if classes.len() < 2 {
        return Err(ClassifierError::SingleClass(classes[0].clone()));
    }
    let trained: Vec<(SparseVector, f64)> = classes
        .par_iter()
        .map(|c| {
            let ys: Vec<f64> = labels.iter().map(|l| if l == c { 1.0 } else { -1.0 }).collect();
            train_binary(vectors, &ys, dim, cfg, c)
        })
        .collect();
    let (weights, biases) = trained.into_iter().unzip();
    Ok(LinearSvmModel {
        dim,
        config: *cfg,
        labels: classes,
        weights,
        biases,
    })
}

/// SGD on one binary problem. The weight vector is kept as `scale * v` so
/// the per-step L2 shrink costs O(1).
fn train_binary(
    vectors: &[SparseVector],
    ys: &[f64],
    dim: usize,
    cfg: &TrainConfig,
    label: &str,
) -> (SparseVector, f64) {
    let mut rng = rng_for(cfg.seed, &format!("svm:{label}"));
    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = cfg.eta0 / (1.0 + cfg.eta0 * cfg.lambda * t as f64);
            let x = &vectors[i];
            let y = ys[i];
            let margin = y * (scale * x.dot_dense(&v) + bias);
            let shrink = 1.0 - eta * cfg.lambda;
            if shrink <= 0.0 {
                v.fill(0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if margin < 1.0 {
                let step = eta * y / scale;
                for (j, xj) in x.iter() {
                    v[j as usize] += step * xj;
                }
                bias += eta * y;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
            t += 1;
        }
    }
    let w = SparseVector::from_pairs(
        v.into_iter()
            .enumerate()
            .filter(|&(_, w)| w != 0.0)
            .map(|(j, w)| (j as u32, w * scale)),
    );
    (w, bias)
}

/// Mean hinge loss plus the L2 penalty of one class's hyperplane.
pub fn svm_objective(model: &LinearSvmModel, class: usize, vectors: &[SparseVector], labels: &[String]) -> f64 {
    let w = &model.weights[class];
    let b = model.biases[class];
    let hinge: f64 = vectors
        .iter()
        .zip(labels)
        .map(|(x, l)| {
            let y = if *l == model.labels[class] { 1.0 } else { -1.0 };
            (1.0 - y * (w.dot(x) + b)).max(0.0)
        })
        .sum();
    hinge / vectors.len().max(1) as f64 + 0.5 * model.config.lambda * w.norm().powi(2)
}

impl TextClassifier for LinearSvmModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn scores(&self, vector: &SparseVector) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.dot(vector) + b)
            .collect()
    }
}

/// Predicts the label whose name tokens occur most often in a document.
#[derive(Debug, Clone)]
pub struct KeywordVoter {
    labels: Vec<String>,
    name_tokens: Vec<Vec<String>>,
}

impl KeywordVoter {
    /// `names` pairs label ids with display names.
    pub fn new<'a>(names: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut pairs: Vec<(String, Vec<String>)> = names
            .into_iter()
            .map(|(label, name)| {
                let toks: BTreeSet<String> = tokenize(name).iter().map(|t| strip_plural(t)).collect();
                (label.to_string(), toks.into_iter().collect())
            })
            .collect();
        pairs.sort();
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (labels, name_tokens) = pairs.into_iter().unzip();
        KeywordVoter { labels, name_tokens }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Occurrence count of each label's name tokens, in label order.
    pub fn counts(&self, text: &str) -> Vec<usize> {
        let mut freq: BTreeMap<String, usize> = BTreeMap::new();
        for t in tokenize(text) {
            *freq.entry(strip_plural(&t)).or_insert(0) += 1;
        }
        self.name_tokens
            .iter()
            .map(|toks| toks.iter().map(|t| freq.get(t).copied().unwrap_or(0)).sum())
            .collect()
    }

    /// Argmax of [`KeywordVoter::counts`]. Ties, and documents that match no
    /// name at all, are broken by a random draw keyed by the seed and text.
    pub fn vote(&self, text: &str, seed: u64) -> &str {
        assert!(!self.labels.is_empty(), "keyword voter needs at least one label");
        let counts = self.counts(text);
        let best = counts.iter().copied().max().unwrap_or(0);
        let tied: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] == best).collect();
        if tied.len() == 1 {
            return &self.labels[tied[0]];
        }
        let mut rng = rng_for(seed, &format!("keyword:{text}"));
        &self.labels[*tied.choose(&mut rng).expect("non-empty")]
    }
}

pub fn keyword_vote<'a>(text: &str, label_names: &'a [(String, String)], seed: u64) -> &'a str {
    let voter = KeywordVoter::new(label_names.iter().map(|(l, n)| (l.as_str(), n.as_str())));
    let winner = voter.vote(text, seed);
    &label_names.iter().find(|(l, _)| l == winner).expect("label from input").0
}

/// Models of one kind for every competition group of a task, sharing one
/// tf-idf vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet<M> {
    pub task: Task,
    pub tfidf: TfIdfModel,
    pub groups: BTreeMap<String, M>,
}

impl<M: TextClassifier> ModelSet<M> {
    pub fn group(&self, group: &str) -> Result<&M, ClassifierError> {
        self.groups
            .get(group)
            .ok_or_else(|| ClassifierError::UnknownGroup(group.to_string()))
    }

    pub fn predict(&self, group: &str, text: &str) -> Result<&str, ClassifierError> {
        Ok(self.group(group)?.predict(&self.tfidf.transform(text)))
    }
}

type SparsePairs = Vec<(u32, f64)>;

fn to_pairs(v: &SparseVector) -> SparsePairs {
    v.iter().collect()
}

fn from_pairs(pairs: SparsePairs, dim: usize) -> Result<SparseVector, ClassifierError> {
    if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(ClassifierError::InvalidModel("sparse indices are not increasing".into()));
    }
    if let Some(&(index, _)) = pairs.last().filter(|p| p.0 as usize >= dim) {
        return Err(ClassifierError::FeatureOutOfRange { index, dim });
    }
    let (indices, values) = pairs.into_iter().unzip();
    Ok(SparseVector { indices, values })
}

/// `centroid_model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidModelFile {
    pub format: String,
    pub task: Task,
    pub tfidf: TfIdfFile,
    pub groups: Vec<CentroidGroupFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidGroupFile {
    pub group: String,
    pub classes: Vec<CentroidClassFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidClassFile {
    pub label: String,
    /// `[feature, weight]` pairs with increasing features.
    pub centroid: SparsePairs,
}

/// `svm_model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModelFile {
    pub format: String,
    pub task: Task,
    pub config: TrainConfig,
    pub tfidf: TfIdfFile,
    pub groups: Vec<SvmGroupFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmGroupFile {
    pub group: String,
    pub classes: Vec<SvmClassFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmClassFile {
    pub label: String,
    pub bias: f64,
    pub weights: SparsePairs,
}

fn check_format(found: &str, expected: &str) -> Result<(), ClassifierError> {
    if found != expected {
        return Err(ClassifierError::InvalidModel(format!(
            "format tag {found:?}, expected {expected:?}"
        )));
    }
    Ok(())
}

fn check_labels<'a>(labels: impl Iterator<Item = &'a String>, group: &str) -> Result<(), ClassifierError> {
    let labels: Vec<&String> = labels.collect();
    if labels.is_empty() || labels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ClassifierError::InvalidModel(format!(
            "group {group:?} labels must be non-empty and strictly sorted"
        )));
    }
    Ok(())
}

impl ModelSet<CentroidModel> {
    pub fn to_file(&self) -> CentroidModelFile {
        CentroidModelFile {
            format: CENTROID_FORMAT.to_string(),
            task: self.task,
            tfidf: self.tfidf.to_file(),
            groups: self
                .groups
                .iter()
                .map(|(g, m)| CentroidGroupFile {
                    group: g.clone(),
                    classes: m
                        .labels
                        .iter()
                        .zip(&m.centroids)
                        .map(|(l, c)| CentroidClassFile {
                            label: l.clone(),
                            centroid: to_pairs(c),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: CentroidModelFile) -> Result<Self, ClassifierError> {
        check_format(&file.format, CENTROID_FORMAT)?;
        let tfidf = TfIdfModel::from_file(file.tfidf)?;
        let dim = tfidf.vocab_size();
        let mut groups = BTreeMap::new();
        for g in file.groups {
            check_labels(g.classes.iter().map(|c| &c.label), &g.group)?;
            let mut labels = Vec::new();
            let mut centroids = Vec::new();
            for c in g.classes {
                labels.push(c.label);
                centroids.push(from_pairs(c.centroid, dim)?);
            }
            groups.insert(g.group, CentroidModel { dim, labels, centroids });
        }
        Ok(ModelSet {
            task: file.task,
            tfidf,
            groups,
        })
    }
}

impl ModelSet<LinearSvmModel> {
    pub fn to_file(&self) -> SvmModelFile {
        SvmModelFile {
            format: SVM_FORMAT.to_string(),
            task: self.task,
            config: self.groups.values().next().map_or_else(TrainConfig::default, |m| m.config),
            tfidf: self.tfidf.to_file(),
            groups: self
                .groups
                .iter()
                .map(|(g, m)| SvmGroupFile {
                    group: g.clone(),
                    classes: m
                        .labels
                        .iter()
                        .zip(&m.weights)
                        .zip(&m.biases)
                        .map(|((l, w), &b)| SvmClassFile {
                            label: l.clone(),
                            bias: b,
                            weights: to_pairs(w),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: SvmModelFile) -> Result<Self, ClassifierError> {
        check_format(&file.format, SVM_FORMAT)?;
        file.config.validate()?;
        let tfidf = TfIdfModel::from_file(file.tfidf)?;
        let dim = tfidf.vocab_size();
        let mut groups = BTreeMap::new();
        for g in file.groups {
            check_labels(g.classes.iter().map(|c| &c.label), &g.group)?;
            let mut model = LinearSvmModel {
                dim,
                config: file.config,
                labels: Vec::new(),
                weights: Vec::new(),
                biases: Vec::new(),
            };
            for c in g.classes {
                model.labels.push(c.label);
                model.weights.push(from_pairs(c.weights, dim)?);
                model.biases.push(c.bias);
            }
            groups.insert(g.group, model);
        }
        Ok(ModelSet {
            task: file.task,
            tfidf,
            groups,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.iter().copied())
    }

    fn unit(pairs: &[(u32, f64)]) -> SparseVector {
        let mut v = sv(pairs);
        v.normalize();
        v
    }

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn downsampling_picks_distinct_docs() {
        let docs: Vec<(u32, Vec<String>)> = (0..5).map(|i| (i, strings(&["a"]))).collect();
        let out = sample_balance(&docs, &[], 3, 1).unwrap();
        assert_eq!(out.items.len(), 3);
        let ids: BTreeSet<u32> = out.items.iter().map(|x| x.0).collect();
        assert_eq!(ids.len(), 3);
    }

    #[test]
    fn oversampling_keeps_every_original() {
        let docs = vec![(1u32, strings(&["a"])), (2, strings(&["a"]))];
        let out = sample_balance(&docs, &[], 5, 9).unwrap();
        assert_eq!(out.items.len(), 5);
        for id in [1, 2] {
            assert!(out.items.iter().any(|x| x.0 == id));
        }
    }

    #[test]
    fn sampling_is_seeded_and_replicates_multi_label_docs() {
        let docs: Vec<(u32, Vec<String>)> = (0..40)
            .map(|i| (i, if i % 3 == 0 { strings(&["a", "b"]) } else { strings(&["b"]) }))
            .collect();
        let classes = strings(&["a", "b", "c"]);
        let x = sample_balance(&docs, &classes, 10, 4).unwrap();
        let y = sample_balance(&docs, &classes, 10, 4).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.dropped, ["c"]);
        assert_eq!(x.items.iter().filter(|i| i.1 == "a").count(), 10);
        assert_eq!(x.items.iter().filter(|i| i.1 == "b").count(), 10);
        let z = sample_balance(&docs, &classes, 10, 5).unwrap();
        assert_ne!(x.items, z.items);
        assert!(sample_balance(&docs, &classes, 0, 4).is_err());
    }

    #[test]
    fn centroid_examples() {
        let a = unit(&[(0, 1.0), (1, 1.0)]);
        let m = train_centroid(std::slice::from_ref(&a), &strings(&["x"]), 3).unwrap();
        for (p, q) in m.centroids[0].values.iter().zip(&a.values) {
            assert!((p - q).abs() < 1e-12);
        }
        let m = train_centroid(&[unit(&[(0, 1.0)]), unit(&[(1, 1.0)])], &strings(&["x", "x"]), 3).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((m.centroids[0].values[0] - h).abs() < 1e-12);
        assert!((m.centroids[0].norm() - 1.0).abs() < 1e-9);
        assert!(train_centroid(&[], &[], 3).is_err());
    }

    #[test]
    fn centroid_prediction() {
        // A = e0, B = (e1 + e2)/sqrt2; query (0.2, 0.6, 0.7) scores 0.2 vs ~0.919
        let m = CentroidModel {
            dim: 3,
            labels: strings(&["A", "B"]),
            centroids: vec![unit(&[(0, 1.0)]), unit(&[(1, 1.0), (2, 1.0)])],
        };
        assert_eq!(m.predict(&unit(&[(0, 0.2), (1, 0.6), (2, 0.7)])), "B");
        assert_eq!(m.predict(&unit(&[(0, 1.0)])), "A");
        assert_eq!(m.predict(&SparseVector::default()), "A");
    }

    #[test]
    fn svm_prediction_by_hand() {
        let m = LinearSvmModel {
            dim: 3,
            config: TrainConfig::default(),
            labels: strings(&["A", "B", "C"]),
            weights: vec![sv(&[(0, 1.0)]), sv(&[(1, 2.0)]), sv(&[(0, -1.0), (2, 3.0)])],
            biases: vec![0.0, -0.5, 0.1],
        };
        // scores: A 0.5, B 0.1, C 0.4
        assert_eq!(m.predict(&sv(&[(0, 0.5), (1, 0.3), (2, 0.3)])), "A");
        assert_eq!(m.predict(&SparseVector::default()), "C");
    }

    fn separable() -> (Vec<SparseVector>, Vec<String>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..20u32 {
            xs.push(unit(&[(i % 5, 1.0), (5 + i % 3, 0.5)]));
            ys.push("a".to_string());
            xs.push(unit(&[(10 + i % 5, 1.0), (15 + i % 3, 0.5)]));
            ys.push("b".to_string());
        }
        (xs, ys)
    }

    fn train_accuracy(m: &LinearSvmModel, xs: &[SparseVector], ys: &[String]) -> f64 {
        xs.iter().zip(ys).filter(|(x, y)| m.predict(x) == y.as_str()).count() as f64 / xs.len() as f64
    }

    #[test]
    fn svm_separates_disjoint_vocabularies() {
        let (xs, ys) = separable();
        let m = train_svm(&xs, &ys, 20, &TrainConfig::default()).unwrap();
        assert_eq!(train_accuracy(&m, &xs, &ys), 1.0);
        let again = train_svm(&xs, &ys, 20, &TrainConfig::default()).unwrap();
        assert_eq!(m, again);
        let strong = TrainConfig {
            lambda: 1e3,
            ..TrainConfig::default()
        };
        let m = train_svm(&xs, &ys, 20, &strong).unwrap();
        assert!(m.weights.iter().all(|w| w.norm() < 1e-3));
        assert!(train_accuracy(&m, &xs, &ys) < 1.0);
    }

    #[test]
    fn svm_objective_does_not_grow_over_epochs() {
        let (xs, ys) = separable();
        let mut prev = f64::INFINITY;
        for epochs in 1..=5 {
            let cfg = TrainConfig {
                epochs,
                ..TrainConfig::default()
            };
            let m = train_svm(&xs, &ys, 20, &cfg).unwrap();
            let loss: f64 = (0..2).map(|c| svm_objective(&m, c, &xs, &ys)).sum();
            assert!(loss <= prev * 1.05, "epoch {epochs}: {loss} > {prev}");
            prev = loss;
        }
    }

    #[test]
    fn svm_input_errors() {
        let (xs, ys) = separable();
        let one = vec!["a".to_string(); xs.len()];
        assert!(matches!(
            train_svm(&xs, &one, 20, &TrainConfig::default()),
            Err(ClassifierError::SingleClass(_))
        ));
        assert!(matches!(
            train_svm(&xs, &ys, 10, &TrainConfig::default()),
            Err(ClassifierError::FeatureOutOfRange { .. })
        ));
        assert!(matches!(
            train_svm(&xs[..2], &ys, 20, &TrainConfig::default()),
            Err(ClassifierError::LengthMismatch { .. })
        ));
        let bad = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(train_svm(&xs, &ys, 20, &bad).is_err());
    }

    #[test]
    fn keyword_examples() {
        let names = vec![
            ("trucks".to_string(), "Trucks".to_string()),
            ("suvs".to_string(), "SUVs".to_string()),
        ];
        assert_eq!(keyword_vote("trucks trucks suv", &names, 0), "trucks");
        let voter = KeywordVoter::new([("sa", "South America"), ("food", "Food")]);
        assert_eq!(voter.counts("Seoul is in South Korea"), vec![0, 1]);
        let voter = KeywordVoter::new([("a", "Astronomy"), ("b", "Baking"), ("c", "Chess")]);
        let first = voter.vote("nothing relevant here", 11);
        for _ in 0..3 {
            assert_eq!(voter.vote("nothing relevant here", 11), first);
        }
        let picks: BTreeSet<&str> = (0..64).map(|s| voter.vote("nothing relevant here", s)).collect();
        assert!(picks.len() > 1);
    }

    #[test]
    fn model_files_round_trip() {
        let texts = ["alpha beta", "alpha gamma", "beta gamma", "alpha beta gamma"];
        let tfidf = crate::textproc::fit_tfidf(texts.iter(), 1).unwrap();
        let xs: Vec<SparseVector> = texts.iter().map(|t| tfidf.transform(t)).collect();
        let ys = strings(&["p", "q", "p", "q"]);
        let dim = tfidf.vocab_size();
        let svm = train_svm(&xs, &ys, dim, &TrainConfig::default()).unwrap();
        let cen = train_centroid(&xs, &ys, dim).unwrap();
        let svm_set = ModelSet {
            task: Task::Coarse,
            tfidf: tfidf.clone(),
            groups: BTreeMap::from([("_all".to_string(), svm)]),
        };
        let json = serde_json::to_string(&svm_set.to_file()).unwrap();
        let back = ModelSet::<LinearSvmModel>::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, svm_set);
        let cen_set = ModelSet {
            task: Task::Coarse,
            tfidf,
            groups: BTreeMap::from([("_all".to_string(), cen)]),
        };
        let json = serde_json::to_string(&cen_set.to_file()).unwrap();
        let back = ModelSet::<CentroidModel>::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, cen_set);
        let mut file = cen_set.to_file();
        file.format = "other".into();
        assert!(ModelSet::<CentroidModel>::from_file(file).is_err());
        assert!(matches!(back.predict("missing", "alpha"), Err(ClassifierError::UnknownGroup(_))));
    }
}
