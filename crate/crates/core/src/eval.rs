//! Accuracy, macro-F1 and per-parent evaluation.
//!
//! Gold labels may be sets. Accuracy counts a prediction as correct when it
//! is in the gold set. For confusion counting a gold set is resolved to the
//! predicted label if it contains it and to its first label otherwise;
//! macro-F1 then averages per-class F1 over the classes that occur among the
//! resolved golds.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{preds} predictions but {golds} gold sets")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("instance {0} has an empty gold label set")]
    EmptyGold(usize),
    #[error("instance {0} has no parent")]
    MissingParent(usize),
    #[error("no model for parent {parent:?} (instance {index})")]
    UnknownParent { index: usize, parent: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One line of `eval.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalInstance {
    pub text: String,
    pub labels: Vec<String>,
    #[serde(default)]
    pub parent: Option<String>,
}

pub fn read_eval_jsonl<R: BufRead>(input: R) -> Result<Vec<EvalInstance>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: EvalInstance = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if inst.labels.is_empty() {
            return Err(EvalError::Parse {
                line: i + 1,
                message: "empty label list".into(),
            });
        }
        out.push(inst);
    }
    Ok(out)
}

fn check<P: AsRef<str>>(preds: &[P], golds: &[Vec<String>]) -> Result<(), EvalError> {
    if preds.len() != golds.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(i) = golds.iter().position(Vec::is_empty) {
        return Err(EvalError::EmptyGold(i));
    }
    Ok(())
}

/// Fraction of predictions contained in their gold set.
pub fn accuracy<P: AsRef<str>>(preds: &[P], golds: &[Vec<String>]) -> Result<f64, EvalError> {
    check(preds, golds)?;
    let hits = preds
        .iter()
        .zip(golds)
        .filter(|(p, g)| g.iter().any(|l| l == p.as_ref()))
        .count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Single gold label per instance used for confusion counting.
pub fn resolve_golds<'a, P: AsRef<str>>(preds: &[P], golds: &'a [Vec<String>]) -> Vec<&'a str> {
    preds
        .iter()
        .zip(golds)
        .map(|(p, g)| {
            g.iter()
                .find(|l| *l == p.as_ref())
                .unwrap_or(&g[0])
                .as_str()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Instances whose resolved gold is this class.
    pub support: usize,
}

pub fn per_class<P: AsRef<str>>(preds: &[P], golds: &[Vec<String>]) -> Result<Vec<ClassMetrics>, EvalError> {
    check(preds, golds)?;
    let resolved = resolve_golds(preds, golds);
    let classes: BTreeSet<&str> = resolved.iter().copied().collect();
    Ok(classes
        .into_iter()
        .map(|c| {
            let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
            for (p, &g) in preds.iter().zip(&resolved) {
                match (p.as_ref() == c, g == c) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fnn += 1,
                    (false, false) => {}
                }
            }
            let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fnn);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                label: c.to_string(),
                precision,
                recall,
                f1,
                support: tp + fnn,
            }
        })
        .collect())
}

pub fn macro_f1<P: AsRef<str>>(preds: &[P], golds: &[Vec<String>]) -> Result<f64, EvalError> {
    let classes = per_class(preds, golds)?;
    Ok(classes.iter().map(|c| c.f1).sum::<f64>() / classes.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

pub fn evaluate<P: AsRef<str>>(preds: &[P], golds: &[Vec<String>]) -> Result<EvalReport, EvalError> {
    let per_class = per_class(preds, golds)?;
    Ok(EvalReport {
        n: preds.len(),
        accuracy: accuracy(preds, golds)?,
        macro_f1: per_class.iter().map(|c| c.f1).sum::<f64>() / per_class.len() as f64,
        per_class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedReport {
    /// Metrics over all instances pooled.
    pub aggregate: EvalReport,
    /// Metrics per parent.
    pub groups: BTreeMap<String, EvalReport>,
}

/// Classifies every instance with the model of its parent.
/// `predict(parent, text)` returns `None` when there is no model for that
/// parent.
pub fn evaluate_grouped<F>(instances: &[EvalInstance], predict: F) -> Result<GroupedReport, EvalError>
where
    F: Fn(&str, &str) -> Option<String> + Sync,
{
    if instances.is_empty() {
        return Err(EvalError::Empty);
    }
    let preds: Vec<String> = instances
        .par_iter()
        .enumerate()
        .map(|(index, inst)| {
            let parent = inst.parent.as_deref().ok_or(EvalError::MissingParent(index))?;
            predict(parent, &inst.text).ok_or_else(|| EvalError::UnknownParent {
                index,
                parent: parent.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;
    let golds: Vec<Vec<String>> = instances.iter().map(|i| i.labels.clone()).collect();
    let mut by_parent: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        by_parent.entry(inst.parent.as_deref().unwrap_or_default()).or_default().push(i);
    }
    let mut groups = BTreeMap::new();
    for (parent, idx) in by_parent {
        let p: Vec<&String> = idx.iter().map(|&i| &preds[i]).collect();
        let g: Vec<Vec<String>> = idx.iter().map(|&i| golds[i].clone()).collect();
        groups.insert(parent.to_string(), evaluate(&p, &g)?);
    }
    Ok(GroupedReport {
        aggregate: evaluate(&preds, &golds)?,
        groups,
    })
}
