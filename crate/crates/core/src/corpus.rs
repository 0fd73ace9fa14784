//! Page texts from `corpus.jsonl`.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("page id {0} appears twice")]
    DuplicateId(u64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageDoc {
    pub id: u64,
    pub title: String,
    pub text: String,
}

impl PageDoc {
    /// Title and body, as seen by the classifiers.
    pub fn full_text(&self) -> String {
        format!("{}\n{}", self.title, self.text)
    }
}

/// Page documents keyed by external page id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PageCorpus {
    docs: BTreeMap<u64, PageDoc>,
}

impl PageCorpus {
    pub fn from_docs(docs: impl IntoIterator<Item = PageDoc>) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        for d in docs {
            let id = d.id;
            if map.insert(id, d).is_some() {
                return Err(CorpusError::DuplicateId(id));
            }
        }
        Ok(PageCorpus { docs: map })
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, CorpusError> {
        let mut docs = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            docs.push(serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?);
        }
        Self::from_docs(docs)
    }

    pub fn get(&self, id: u64) -> Option<&PageDoc> {
        self.docs.get(&id)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PageDoc> {
        self.docs.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_lines_and_rejects_duplicates() {
        let text = "{\"id\": 3, \"title\": \"T\", \"text\": \"body\"}\n\n{\"id\": 1, \"title\": \"U\", \"text\": \"\"}\n";
        let c = PageCorpus::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get(3).unwrap().full_text(), "T\nbody");
        assert_eq!(c.iter().map(|d| d.id).collect::<Vec<_>>(), [1, 3]);
        let dup = "{\"id\": 1, \"title\": \"a\", \"text\": \"\"}\n{\"id\": 1, \"title\": \"b\", \"text\": \"\"}";
        assert!(matches!(PageCorpus::read_jsonl(dup.as_bytes()), Err(CorpusError::DuplicateId(1))));
        assert!(matches!(
            PageCorpus::read_jsonl("{\"id\": 1}".as_bytes()),
            Err(CorpusError::Parse { line: 1, .. })
        ));
    }
}
