//! The three online retrievers and their shared substrate: an Okapi BM25
//! inverted index and an embedding-provider contract.
//!
//! The passage retriever and the individual question retriever run a BM25
//! prefilter and re-rank the survivors by embedding dot product. The
//! aggregated question retriever treats each answer's question set as a
//! single BM25 document.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::token_surfaces;
use crate::error::{Error, Result};
use crate::space::{QAPair, QASpace, QSetASpace};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BM25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for BM25Params {
    fn default() -> Self {
        BM25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RetrievalConfig {
    /// Number of questions retrieved by the individual question retriever.
    pub k: usize,
    /// BM25 prefilter size before embedding re-rank.
    pub prefilter_n: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            k: 10,
            prefilter_n: 10_000,
        }
    }
}

/// Inverted index over string-keyed documents, in insertion order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct InvertedIndex {
    /// term -> postings (doc position, term frequency), sorted by position.
    pub postings: HashMap<String, Vec<(usize, u32)>>,
    pub doc_keys: Vec<String>,
    pub doc_lengths: Vec<usize>,
    #[serde(skip)]
    key_positions: HashMap<String, usize>,
    pub avgdl: f64,
}

impl InvertedIndex {
    /// Index documents as (key, text) pairs; texts go through the shared
    /// tokenizer.
    pub fn build<'a>(docs: impl Iterator<Item = (String, &'a str)>) -> InvertedIndex {
        let mut index = InvertedIndex::default();
        for (key, text) in docs {
            let pos = index.doc_keys.len();
            let tokens = token_surfaces(text);
            index.doc_lengths.push(tokens.len());
            let mut freqs: HashMap<String, u32> = HashMap::new();
            for t in tokens {
                *freqs.entry(t).or_insert(0) += 1;
            }
            for (term, tf) in freqs {
                index.postings.entry(term).or_default().push((pos, tf));
            }
            index.key_positions.insert(key.clone(), pos);
            index.doc_keys.push(key);
        }
        for list in index.postings.values_mut() {
            list.sort_by_key(|&(pos, _)| pos);
        }
        index.avgdl = if index.doc_lengths.is_empty() {
            0.0
        } else {
            index.doc_lengths.iter().sum::<usize>() as f64 / index.doc_lengths.len() as f64
        };
        index
    }

    pub fn len(&self) -> usize {
        self.doc_keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_keys.is_empty()
    }

    pub fn position(&self, doc_key: &str) -> Option<usize> {
        self.key_positions.get(doc_key).copied()
    }

    /// Rebuild the key lookup after deserialization.
    pub fn rebuild_lookup(&mut self) {
        self.key_positions = self
            .doc_keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.len() as f64;
        let n_t = self.postings.get(term).map_or(0, Vec::len) as f64;
        (1.0 + (n - n_t + 0.5) / (n_t + 0.5)).ln()
    }

    fn term_frequency(&self, term: &str, pos: usize) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| {
                list.binary_search_by_key(&pos, |&(p, _)| p)
                    .ok()
                    .map(|i| list[i].1)
            })
            .unwrap_or(0)
    }

    /// Okapi BM25 score of one document for a tokenized query. Terms
    /// absent from the index contribute zero.
    pub fn score_at(&self, query_terms: &[String], pos: usize, params: &BM25Params) -> f64 {
        let dl = self.doc_lengths[pos] as f64;
        let norm = params.k1 * (1.0 - params.b + params.b * dl / self.avgdl.max(f64::MIN_POSITIVE));
        let mut score = 0.0;
        let mut seen: Vec<&str> = Vec::with_capacity(query_terms.len());
        for term in query_terms {
            if seen.contains(&term.as_str()) {
                continue; // distinct terms only
            }
            seen.push(term);
            let tf = self.term_frequency(term, pos) as f64;
            if tf > 0.0 {
                score += self.idf(term) * tf * (params.k1 + 1.0) / (tf + norm);
            }
        }
        score
    }

    /// All documents scored, in corpus order.
    pub fn score_all(&self, query_terms: &[String], params: &BM25Params) -> Vec<f64> {
        (0..self.len())
            .map(|pos| self.score_at(query_terms, pos, params))
            .collect()
    }
}

pub fn bm25_score(
    query_terms: &[String],
    doc_key: &str,
    index: &InvertedIndex,
    params: &BM25Params,
) -> Result<f64> {
    let pos = index.position(doc_key).ok_or_else(|| Error::UnknownDocKey {
        key: doc_key.to_string(),
    })?;
    Ok(index.score_at(query_terms, pos, params))
}

/// Embedding adapter contract. The built-in provider is deterministic and
/// emits unit-norm vectors.
pub trait EmbeddingProvider {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f64>;
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deterministic built-in embedder: corpus-vocabulary TF-IDF hashed into
/// `dim` signed buckets, L2-normalized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashedTfIdfEmbedder {
    dim: usize,
    /// vocabulary term -> document frequency in the corpus it was built on.
    doc_freq: HashMap<String, u32>,
    n_docs: u32,
}

impl HashedTfIdfEmbedder {
    pub fn from_texts<'a>(texts: impl Iterator<Item = &'a str>, dim: usize) -> Self {
        let mut doc_freq: HashMap<String, u32> = HashMap::new();
        let mut n_docs = 0;
        for text in texts {
            n_docs += 1;
            let mut seen: Vec<String> = token_surfaces(text);
            seen.sort_unstable();
            seen.dedup();
            for term in seen {
                *doc_freq.entry(term).or_insert(0) += 1;
            }
        }
        HashedTfIdfEmbedder {
            dim,
            doc_freq,
            n_docs,
        }
    }

    fn idf(&self, term: &str) -> f64 {
        let df = self.doc_freq.get(term).copied().unwrap_or(0) as f64;
        ((self.n_docs as f64 + 1.0) / (df + 1.0)).ln() + 1.0
    }
}

/// FNV-1a, fixed seed, so vectors are stable across processes.
fn stable_hash(term: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in term.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl EmbeddingProvider for HashedTfIdfEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        let mut vec = vec![0.0; self.dim];
        let mut tf: HashMap<String, u32> = HashMap::new();
        for term in token_surfaces(text) {
            *tf.entry(term).or_insert(0) += 1;
        }
        for (term, freq) in tf {
            let h = stable_hash(&term);
            let bucket = (h % self.dim as u64) as usize;
            let sign = if (h >> 63) == 0 { 1.0 } else { -1.0 };
            vec[bucket] += sign * freq as f64 * self.idf(&term);
        }
        let norm = dot(&vec, &vec).sqrt();
        if norm > 0.0 {
            for v in &mut vec {
                *v /= norm;
            }
        }
        vec
    }
}

/// BM25 prefilter: positions of the top `n` documents by score, ties by
/// earlier position.
fn prefilter(index: &InvertedIndex, query_terms: &[String], n: usize, params: &BM25Params) -> Vec<usize> {
    let scores = index.score_all(query_terms, params);
    let mut order: Vec<usize> = (0..index.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(n);
    order
}

/// Rank candidate positions by embedding dot product; ties by earlier
/// position. Returns (position, similarity) in descending similarity.
fn rerank_by_embedding(
    candidates: &[usize],
    query_vec: &[f64],
    doc_vecs: &[Vec<f64>],
) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .map(|&pos| (pos, dot(query_vec, &doc_vecs[pos])))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    scored
}

/// Passage retrieval substrate shared by build and query phases: the BM25
/// index plus cached passage embeddings, in corpus order.
#[derive(Debug, Clone)]
pub struct PassageIndex {
    pub index: InvertedIndex,
    pub embeddings: Vec<Vec<f64>>,
}

impl PassageIndex {
    pub fn build<'a>(
        passages: impl Iterator<Item = (String, &'a str)> + Clone,
        embedder: &dyn EmbeddingProvider,
    ) -> PassageIndex {
        let index = InvertedIndex::build(passages.clone());
        let embeddings = passages.map(|(_, text)| embedder.embed(text)).collect();
        PassageIndex { index, embeddings }
    }
}

/// Two-stage passage retrieval: BM25 prefilter then embedding re-rank,
/// top-1 wins. Returns the passage key and its similarity.
pub fn retrieve_passage(
    query: &str,
    passages: &PassageIndex,
    embedder: &dyn EmbeddingProvider,
    config: &RetrievalConfig,
    params: &BM25Params,
) -> Result<(String, f64)> {
    if passages.index.is_empty() {
        return Err(Error::EmptyCollection {
            what: "passage index".into(),
        });
    }
    let query_terms = token_surfaces(query);
    let candidates = prefilter(&passages.index, &query_terms, config.prefilter_n, params);
    let query_vec = embedder.embed(query);
    let ranked = rerank_by_embedding(&candidates, &query_vec, &passages.embeddings);
    let (pos, sim) = ranked[0];
    Ok((passages.index.doc_keys[pos].clone(), sim))
}

/// Question index over a QA Space for the individual question retriever.
#[derive(Debug, Clone)]
pub struct QuestionIndex {
    pub index: InvertedIndex,
    pub embeddings: Vec<Vec<f64>>,
}

impl QuestionIndex {
    pub fn build(qa: &QASpace, embedder: &dyn EmbeddingProvider) -> QuestionIndex {
        let index = InvertedIndex::build(
            qa.pairs
                .iter()
                .map(|p| (p.pair_id.clone(), p.question_text.as_str())),
        );
        let embeddings = qa
            .pairs
            .iter()
            .map(|p| embedder.embed(&p.question_text))
            .collect();
        QuestionIndex { index, embeddings }
    }
}

/// Individual question retriever: the answers attached to the k questions
/// most similar to the query, in descending similarity. This is the
/// ordered list {Answer 2}; duplicates are allowed.
pub fn retrieve_individual<'a>(
    query: &str,
    qa: &'a QASpace,
    questions: &QuestionIndex,
    embedder: &dyn EmbeddingProvider,
    config: &RetrievalConfig,
    params: &BM25Params,
) -> Result<Vec<(&'a QAPair, f64)>> {
    if qa.pairs.is_empty() {
        return Err(Error::EmptyCollection {
            what: "QA space".into(),
        });
    }
    let query_terms = token_surfaces(query);
    // Same staging as the passage retriever; the prefilter only kicks in
    // when the space outgrows it.
    let candidates: Vec<usize> = if qa.pairs.len() > config.prefilter_n {
        prefilter(&questions.index, &query_terms, config.prefilter_n, params)
    } else {
        (0..qa.pairs.len()).collect()
    };
    let query_vec = embedder.embed(query);
    let mut ranked = rerank_by_embedding(&candidates, &query_vec, &questions.embeddings);
    ranked.truncate(config.k);
    Ok(ranked
        .into_iter()
        .map(|(pos, sim)| (&qa.pairs[pos], sim))
        .collect())
}

/// Aggregated question retriever: each answer's question set, joined by
/// spaces, is one BM25 document; the best-scoring answer is Answer 3.
pub fn retrieve_aggregated(
    query: &str,
    qsa: &QSetASpace,
    params: &BM25Params,
) -> Result<(String, String)> {
    let index = build_aggregated_index(qsa);
    retrieve_aggregated_with_index(query, qsa, &index, params)
}

/// The {Q}A-space BM25 index, reusable across queries. Documents are
/// keyed by answer_id in lexicographic order.
pub fn build_aggregated_index(qsa: &QSetASpace) -> InvertedIndex {
    let docs: Vec<(String, String)> = qsa
        .pairs
        .values()
        .map(|p| (p.answer_id.clone(), p.questions.join(" ")))
        .collect();
    InvertedIndex::build(docs.iter().map(|(k, t)| (k.clone(), t.as_str())))
}

pub fn retrieve_aggregated_with_index(
    query: &str,
    qsa: &QSetASpace,
    index: &InvertedIndex,
    params: &BM25Params,
) -> Result<(String, String)> {
    if qsa.pairs.is_empty() {
        return Err(Error::EmptyCollection {
            what: "{Q}A space".into(),
        });
    }
    let query_terms = token_surfaces(query);
    let scores = index.score_all(&query_terms, params);
    // doc_keys are answer_ids in lexicographic (BTreeMap) order, so the
    // first argmax is the lexicographically smallest tied answer.
    let mut best = 0;
    for pos in 1..index.len() {
        if scores[pos] > scores[best] {
            best = pos;
        }
    }
    let answer_id = index.doc_keys[best].clone();
    let name = qsa.pairs[&answer_id].canonical_name.clone();
    Ok((answer_id, name))
}
