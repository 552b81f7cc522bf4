//! In-memory BM25 inverted index.

use std::collections::HashMap;

use super::tokenize::tokenize;
use super::{EvidenceDoc, RetrievalError, RetrievalResult, ScoredDoc};

/// BM25 free parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    /// Lucene/Anserini defaults.
    fn default() -> Self {
        Self { k1: 0.9, b: 0.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Okapi BM25 index over title + text of each document.
///
/// Postings lists are sorted by document ordinal; ordinals follow ingestion
/// order.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    pub(crate) params: Bm25Params,
    pub(crate) postings: HashMap<String, Vec<Posting>>,
    pub(crate) docs: Vec<EvidenceDoc>,
    pub(crate) doc_lengths: Vec<u32>,
    pub(crate) avg_doc_length: f64,
    pub(crate) id_lookup: HashMap<String, u32>,
}

/// Text that gets tokenized for a document.
pub(crate) fn indexed_text(doc: &EvidenceDoc) -> String {
    if doc.title.is_empty() {
        doc.text.clone()
    } else {
        format!("{} {}", doc.title, doc.text)
    }
}

impl Bm25Index {
    /// Builds an index from a stream of documents. Aborts on the first
    /// duplicate id, empty text, or reader error.
    pub fn ingest<I>(docs: I, params: Bm25Params) -> Result<Self, RetrievalError>
    where
        I: IntoIterator<Item = Result<EvidenceDoc, RetrievalError>>,
    {
        let mut builder = IndexBuilder::new(params);
        for doc in docs {
            builder.add(doc?)?;
        }
        Ok(builder.finish())
    }

    /// Convenience for in-memory document lists.
    pub fn from_docs(docs: Vec<EvidenceDoc>, params: Bm25Params) -> Result<Self, RetrievalError> {
        Self::ingest(docs.into_iter().map(Ok), params)
    }

    pub(crate) fn from_parts(
        params: Bm25Params,
        docs: Vec<EvidenceDoc>,
        doc_lengths: Vec<u32>,
        postings: HashMap<String, Vec<Posting>>,
    ) -> Result<Self, RetrievalError> {
        let mut id_lookup = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if id_lookup.insert(d.doc_id.clone(), i as u32).is_some() {
                return Err(RetrievalError::DuplicateDocId(d.doc_id.clone()));
            }
        }
        let avg_doc_length = mean(&doc_lengths);
        Ok(Self {
            params,
            postings,
            docs,
            doc_lengths,
            avg_doc_length,
            id_lookup,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    pub fn doc(&self, ordinal: u32) -> Option<&EvidenceDoc> {
        self.docs.get(ordinal as usize)
    }

    pub fn doc_by_id(&self, doc_id: &str) -> Option<&EvidenceDoc> {
        self.id_lookup.get(doc_id).and_then(|&i| self.doc(i))
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    /// Number of documents containing `term`.
    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.doc_freq(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn term_weight(&self, idf: f64, tf: u32, doc_len: u32) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = f64::from(tf);
        let norm = 1.0 - b + b * f64::from(doc_len) / self.avg_doc_length;
        idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// BM25 score of one document. Each query term occurrence contributes
    /// separately; terms absent from the document contribute 0.
    pub fn bm25_score<S: AsRef<str>>(&self, query_terms: &[S], ordinal: u32) -> f64 {
        let Some(&doc_len) = self.doc_lengths.get(ordinal as usize) else {
            return 0.0;
        };
        let mut score = 0.0;
        for term in query_terms {
            let term = term.as_ref();
            let postings = self.postings(term);
            if let Ok(pos) = postings.binary_search_by_key(&ordinal, |p| p.doc) {
                score += self.term_weight(self.idf(term), postings[pos].tf, doc_len);
            }
        }
        score
    }

    /// Top-`k` documents for a free-text query, by descending score with ties
    /// broken by ascending doc id. Only documents with a positive score are
    /// returned.
    pub fn retrieve(&self, query: &str, k: usize) -> RetrievalResult {
        let terms = tokenize(query);
        self.retrieve_terms(&terms, k)
    }

    pub fn retrieve_terms<S: AsRef<str>>(&self, terms: &[S], k: usize) -> RetrievalResult {
        if k == 0 || self.docs.is_empty() {
            return RetrievalResult::default();
        }
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for term in terms {
            let term = term.as_ref();
            let postings = self.postings(term);
            if postings.is_empty() {
                continue;
            }
            let idf = self.idf(term);
            for p in postings {
                *acc.entry(p.doc).or_insert(0.0) +=
                    self.term_weight(idf, p.tf, self.doc_lengths[p.doc as usize]);
            }
        }
        let hits: Vec<ScoredDoc> = acc
            .into_iter()
            .filter(|&(_, s)| s > 0.0)
            .map(|(ord, score)| ScoredDoc {
                doc_id: self.docs[ord as usize].doc_id.clone(),
                score,
            })
            .collect();
        RetrievalResult::from_unsorted(hits, k)
    }
}

fn mean(values: &[u32]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().map(|&v| f64::from(v)).sum::<f64>() / values.len() as f64
    }
}

/// Single-writer incremental builder used by ingestion.
pub struct IndexBuilder {
    params: Bm25Params,
    postings: HashMap<String, Vec<Posting>>,
    docs: Vec<EvidenceDoc>,
    doc_lengths: Vec<u32>,
    id_lookup: HashMap<String, u32>,
}

impl IndexBuilder {
    pub fn new(params: Bm25Params) -> Self {
        Self {
            params,
            postings: HashMap::new(),
            docs: Vec::new(),
            doc_lengths: Vec::new(),
            id_lookup: HashMap::new(),
        }
    }

    pub fn add(&mut self, doc: EvidenceDoc) -> Result<(), RetrievalError> {
        if doc.text.trim().is_empty() {
            return Err(RetrievalError::EmptyText(doc.doc_id));
        }
        if self.id_lookup.contains_key(&doc.doc_id) {
            return Err(RetrievalError::DuplicateDocId(doc.doc_id));
        }
        let ordinal = self.docs.len() as u32;
        let tokens = tokenize(&indexed_text(&doc));
        let mut tf: HashMap<String, u32> = HashMap::new();
        for t in &tokens {
            *tf.entry(t.clone()).or_insert(0) += 1;
        }
        for (term, count) in tf {
            self.postings.entry(term).or_default().push(Posting {
                doc: ordinal,
                tf: count,
            });
        }
        self.doc_lengths.push(tokens.len() as u32);
        self.id_lookup.insert(doc.doc_id.clone(), ordinal);
        self.docs.push(doc);
        Ok(())
    }

    pub fn finish(self) -> Bm25Index {
        let avg_doc_length = mean(&self.doc_lengths);
        Bm25Index {
            params: self.params,
            postings: self.postings,
            docs: self.docs,
            doc_lengths: self.doc_lengths,
            avg_doc_length,
            id_lookup: self.id_lookup,
        }
    }
}
