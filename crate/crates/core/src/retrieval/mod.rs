//! Evidence corpus, BM25 retrieval, program-guided iterative retrieval and
//! recall@k.

mod corpus;
mod index;
mod iterative;
mod storage;
mod tokenize;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use corpus::CorpusReader;
pub use index::{Bm25Index, Bm25Params, IndexBuilder, Posting};
pub use iterative::{iterative_retrieve, IterativeRetrieval};
pub use storage::{FORMAT_VERSION, MAGIC};
pub use tokenize::tokenize;

/// Depth of the combined ranking reported for iterative retrieval.
pub const COMBINED_DEPTH: usize = 10;
/// Documents retrieved per step and for one-step baselines.
pub const DEFAULT_TOP_K: usize = 10;
/// Character budget for the evidence block handed to a handler.
pub const DEFAULT_EVIDENCE_BUDGET: usize = 3_000;

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),
    #[error("document `{0}` has empty text")]
    EmptyText(String),
    #[error("corpus line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid index file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One paragraph of the knowledge source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceDoc {
    #[serde(rename = "id")]
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
}

impl EvidenceDoc {
    pub fn new(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        text: impl Into<String>,
    ) -> Self {
        Self {
            doc_id: doc_id.into(),
            title: title.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

/// Ranked hits, descending by score, ties by ascending doc id, no duplicate
/// ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RetrievalResult {
    ranked: Vec<ScoredDoc>,
}

fn rank_order(a: &ScoredDoc, b: &ScoredDoc) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

impl RetrievalResult {
    /// Sorts hits into rank order and keeps the first `k`. Hits must have
    /// distinct ids.
    pub fn from_unsorted(mut hits: Vec<ScoredDoc>, k: usize) -> Self {
        if hits.len() > k && k > 0 {
            hits.select_nth_unstable_by(k - 1, rank_order);
            hits.truncate(k);
        }
        hits.sort_unstable_by(rank_order);
        hits.truncate(k);
        Self { ranked: hits }
    }

    pub fn ranked(&self) -> &[ScoredDoc] {
        &self.ranked
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.ranked.iter().map(|d| d.doc_id.as_str())
    }

    pub fn truncated(&self, k: usize) -> Self {
        Self {
            ranked: self.ranked.iter().take(k).cloned().collect(),
        }
    }
}

/// Union of several rankings, keeping each document's maximum score,
/// re-sorted and cut to `limit`.
pub fn combine_results<'a, I>(results: I, limit: usize) -> RetrievalResult
where
    I: IntoIterator<Item = &'a RetrievalResult>,
{
    let mut best: HashMap<&str, f64> = HashMap::new();
    for r in results {
        for hit in r.ranked() {
            best.entry(&hit.doc_id)
                .and_modify(|s| *s = s.max(hit.score))
                .or_insert(hit.score);
        }
    }
    let hits = best
        .into_iter()
        .map(|(doc_id, score)| ScoredDoc {
            doc_id: doc_id.to_string(),
            score,
        })
        .collect();
    RetrievalResult::from_unsorted(hits, limit)
}

/// `|top-k ∩ gold| / |gold|`; `None` when `gold` is empty.
pub fn recall_at_k<S: AsRef<str>>(result: &RetrievalResult, gold: &[S], k: usize) -> Option<f64> {
    let gold: HashSet<&str> = gold.iter().map(AsRef::as_ref).collect();
    if gold.is_empty() {
        return None;
    }
    let found = result
        .doc_ids()
        .take(k)
        .filter(|id| gold.contains(id))
        .count();
    Some(found as f64 / gold.len() as f64)
}

/// Length of the evidence block produced by joining doc texts with a blank
/// line.
pub fn evidence_block_len(docs: &[EvidenceDoc]) -> usize {
    let text: usize = docs.iter().map(|d| d.text.chars().count()).sum();
    text + 2 * docs.len().saturating_sub(1)
}

/// Drops trailing (lowest-ranked) docs until the joined evidence block fits
/// in `budget` characters. A single remaining doc that is still too long is
/// cut to the budget.
pub fn apply_evidence_budget(mut docs: Vec<EvidenceDoc>, budget: usize) -> Vec<EvidenceDoc> {
    if budget == 0 {
        return Vec::new();
    }
    while docs.len() > 1 && evidence_block_len(&docs) > budget {
        docs.pop();
    }
    if let Some(first) = docs.first_mut() {
        if first.text.chars().count() > budget {
            first.text = first.text.chars().take(budget).collect();
        }
    }
    docs
}
