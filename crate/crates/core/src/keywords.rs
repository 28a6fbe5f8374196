//! Embedding-based keyword extraction with maximal marginal relevance.
//!
//! Candidates are the distinct stopword-filtered n-grams of a document (never
//! spanning a line break). Relevance is the cosine between a candidate's
//! embedding and the document's. Selection is greedy: the first pick is the
//! most relevant candidate, and each later pick maximizes
//! `lambda * relevance(c) - (1 - lambda) * max_s cosine(c, s)` over the
//! already selected `s`. Ties go to the earlier candidate.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::provider::{EmbeddingProvider, ProviderError};
use crate::semantic::{cosine, SemanticError};
use crate::textstats::{remove_stopwords, tokenize, Stoplist};

#[derive(Debug, Clone, PartialEq)]
pub struct KeywordConfig {
    /// Inclusive n-gram length range.
    pub ngram_range: (usize, usize),
    pub k: usize,
    pub lambda: f64,
    /// Only the most frequent candidates are embedded.
    pub max_candidates: usize,
    pub batch_size: usize,
}

impl Default for KeywordConfig {
    fn default() -> Self {
        Self {
            ngram_range: (1, 3),
            k: 10,
            lambda: 0.5,
            max_candidates: 2000,
            batch_size: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Keyword {
    pub phrase: String,
    pub relevance: f64,
}

/// Distinct candidate phrases, most frequent first, ties alphabetical,
/// capped at `cap`.
pub fn keyword_candidates(
    document: &str,
    stoplist: &Stoplist,
    ngram_range: (usize, usize),
    cap: usize,
) -> Vec<String> {
    let (lo, hi) = ngram_range;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for line in document.lines() {
        let tokens = remove_stopwords(&tokenize(line), stoplist);
        for n in lo.max(1)..=hi {
            for window in tokens.tokens().windows(n) {
                *counts.entry(window.join(" ")).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by_key(|r| core::cmp::Reverse(r.1));
    ranked.into_iter().take(cap).map(|(p, _)| p).collect()
}

/// Greedy MMR over candidate indices. `similarity(i, j)` is the
/// candidate-candidate similarity.
pub fn mmr_select(
    relevance: &[f64],
    similarity: impl Fn(usize, usize) -> f64,
    k: usize,
    lambda: f64,
) -> Vec<usize> {
    let mut selected: Vec<usize> = Vec::with_capacity(k.min(relevance.len()));
    if k == 0 || relevance.is_empty() {
        return selected;
    }
    let first = argmax(relevance.iter().copied().enumerate());
    selected.push(first);
    // redundancy[c] = max similarity of c to anything selected so far
    let mut redundancy: Vec<f64> = (0..relevance.len()).map(|c| similarity(c, first)).collect();
    let mut taken = alloc::vec![false; relevance.len()];
    taken[first] = true;

    while selected.len() < k && selected.len() < relevance.len() {
        let scores = (0..relevance.len())
            .filter(|&c| !taken[c])
            .map(|c| (c, lambda * relevance[c] - (1.0 - lambda) * redundancy[c]));
        let pick = argmax(scores);
        taken[pick] = true;
        selected.push(pick);
        for (c, r) in redundancy.iter_mut().enumerate() {
            if !taken[c] {
                *r = r.max(similarity(c, pick));
            }
        }
    }
    selected
}

fn argmax(scores: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i).unwrap_or(0)
}

fn embed_all(
    provider: &dyn EmbeddingProvider,
    texts: &[&str],
    batch_size: usize,
) -> Result<Vec<Vec<f64>>, KeywordError> {
    let mut out = Vec::with_capacity(texts.len());
    for batch in texts.chunks(batch_size.max(1)) {
        let vectors = provider.embed(batch)?;
        if vectors.len() != batch.len() {
            return Err(ProviderError::cardinality(batch.len(), vectors.len()).into());
        }
        out.extend(vectors);
    }
    Ok(out)
}

pub fn mmr_keywords(
    document: &str,
    provider: &dyn EmbeddingProvider,
    stoplist: &Stoplist,
    config: &KeywordConfig,
) -> Result<Vec<Keyword>, KeywordError> {
    let (lo, hi) = config.ngram_range;
    if config.k == 0 || lo == 0 || lo > hi || !(0.0..=1.0).contains(&config.lambda) {
        return Err(KeywordError::InvalidConfig);
    }
    if document.trim().is_empty() {
        return Err(KeywordError::EmptyDocument);
    }
    let candidates = keyword_candidates(
        document,
        stoplist,
        config.ngram_range,
        config.max_candidates,
    );
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let doc_vector = embed_all(provider, &[document], 1)?.remove(0);
    let texts: Vec<&str> = candidates.iter().map(String::as_str).collect();
    let vectors = embed_all(provider, &texts, config.batch_size)?;

    let relevance = vectors
        .iter()
        .map(|v| cosine(v, &doc_vector))
        .collect::<Result<Vec<f64>, _>>()?;
    // every vector matched the document's dimension and is non-zero, so
    // pairwise cosines below cannot fail
    let similarity = |i: usize, j: usize| cosine(&vectors[i], &vectors[j]).unwrap_or(0.0);
    let picks = mmr_select(&relevance, similarity, config.k, config.lambda);
    Ok(picks
        .into_iter()
        .map(|i| Keyword {
            phrase: candidates[i].clone(),
            relevance: relevance[i],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KeywordError {
    #[error("document is empty")]
    EmptyDocument,
    #[error("keyword settings need k >= 1, lambda in [0, 1] and 1 <= lo <= hi")]
    InvalidConfig,
    #[error(transparent)]
    Semantic(#[from] SemanticError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}
