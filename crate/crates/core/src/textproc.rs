//! Tokenization and tf-idf vectorization.
//!
//! idf uses the smoothed form `ln((1 + N) / (1 + df)) + 1`, term weights are
//! raw counts times idf, and every non-empty document vector is scaled to
//! unit L2 norm.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MIN_DF: u32 = 3;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,
    #[error("invalid tf-idf model: {0}")]
    InvalidModel(String),
}

/// Lowercases, splits on anything that is not alphanumeric and drops tokens
/// shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().nth(1).is_some())
        .map(str::to_lowercase)
        .collect()
}

/// Rule-based plural stripping for a single lowercase token.
///
/// `-ies` becomes `-y`; `-es` is dropped after `ch`, `sh`, `x`, `z` and `ss`;
/// otherwise a final `s` is dropped unless the token ends in `ss`, `us` or
/// `is`. Tokens of three characters or fewer are left alone.
pub fn strip_plural(token: &str) -> String {
    if token.chars().count() <= 3 || !token.ends_with('s') {
        return token.to_string();
    }
    if let Some(stem) = token.strip_suffix("ies") {
        return format!("{stem}y");
    }
    if let Some(stem) = token.strip_suffix("es") {
        if ["ch", "sh", "x", "z", "ss"].iter().any(|s| stem.ends_with(s)) {
            return stem.to_string();
        }
    }
    if ["ss", "us", "is"].iter().any(|s| token.ends_with(s)) {
        return token.to_string();
    }
    token[..token.len() - 1].to_string()
}

/// Sparse vector with strictly increasing indices and no zero entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from unordered `(index, value)` pairs, summing
    /// duplicates and dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, v) in pairs {
            *acc.entry(i).or_insert(0.0) += v;
        }
        let (indices, values) = acc.into_iter().filter(|&(_, v)| v != 0.0).unzip();
        SparseVector { indices, values }
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Scales to unit norm. A zero vector is left untouched.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= n);
        }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i as usize]).sum()
    }
}

/// Fitted tf-idf vocabulary. Terms are stored in lexicographic order, which
/// is also feature-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    n_docs: u64,
    min_df: u32,
    terms: Vec<String>,
    df: Vec<u64>,
    idf: Vec<f64>,
    index: HashMap<String, u32>,
}

pub fn idf(n_docs: u64, df: u64) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Fits a vocabulary over `docs`, keeping terms that occur in at least
/// `min_df` documents.
pub fn fit_tfidf<I, S>(docs: I, min_df: u32) -> Result<TfIdfModel, TextError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut n_docs = 0u64;
    for doc in docs {
        n_docs += 1;
        let mut seen: Vec<String> = tokenize(doc.as_ref());
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    if n_docs == 0 {
        return Err(TextError::EmptyCorpus);
    }
    let mut kept: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, df)| df >= u64::from(min_df))
        .collect();
    kept.sort_unstable();
    if kept.is_empty() {
        log::warn!("tf-idf vocabulary is empty after the min_df={min_df} cutoff");
    }
    let (terms, df): (Vec<String>, Vec<u64>) = kept.into_iter().unzip();
    Ok(TfIdfModel::from_parts(n_docs, min_df, terms, df))
}

impl TfIdfModel {
    fn from_parts(n_docs: u64, min_df: u32, terms: Vec<String>, df: Vec<u64>) -> Self {
        let idf = df.iter().map(|&d| idf(n_docs, d)).collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        TfIdfModel {
            n_docs,
            min_df,
            terms,
            df,
            idf,
            index,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn min_df(&self) -> u32 {
        self.min_df
    }

    pub fn feature(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, feature: u32) -> &str {
        &self.terms[feature as usize]
    }

    pub fn df(&self, feature: u32) -> u64 {
        self.df[feature as usize]
    }

    pub fn idf(&self, feature: u32) -> f64 {
        self.idf[feature as usize]
    }

    /// Counts times idf, L2-normalized. Out-of-vocabulary terms are ignored.
    pub fn transform(&self, text: &str) -> SparseVector {
        let pairs = tokenize(text)
            .into_iter()
            .filter_map(|t| self.feature(&t))
            .map(|f| (f, self.idf(f)));
        let mut v = SparseVector::from_pairs(pairs);
        v.normalize();
        v
    }

    pub fn to_file(&self) -> TfIdfFile {
        TfIdfFile {
            n_docs: self.n_docs,
            min_df: self.min_df,
            terms: self
                .terms
                .iter()
                .zip(&self.df)
                .zip(&self.idf)
                .map(|((t, &d), &i)| (t.clone(), d, i))
                .collect(),
        }
    }

    /// Rebuilds a model from its serialized form. idf values are recomputed
    /// from the document frequencies and checked against the stored ones.
    pub fn from_file(file: TfIdfFile) -> Result<Self, TextError> {
        if file.terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(TextError::InvalidModel("terms are not strictly sorted".into()));
        }
        let mut terms = Vec::with_capacity(file.terms.len());
        let mut df = Vec::with_capacity(file.terms.len());
        for (t, d, stored) in file.terms {
            if d == 0 || d > file.n_docs {
                return Err(TextError::InvalidModel(format!("bad df {d} for {t:?}")));
            }
            if (idf(file.n_docs, d) - stored).abs() > 1e-9 {
                return Err(TextError::InvalidModel(format!("idf mismatch for {t:?}")));
            }
            terms.push(t);
            df.push(d);
        }
        Ok(Self::from_parts(file.n_docs, file.min_df, terms, df))
    }
}

/// `tfidf_model.json`: `{"n_docs": int, "min_df": int, "terms": [[term, df, idf], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfFile {
    pub n_docs: u64,
    pub min_df: u32,
    pub terms: Vec<(String, u64, f64)>,
}
