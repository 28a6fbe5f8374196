//! Embedding sets, cosine similarity and per-chapter similarity statistics.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::{TranslationCorpus, VerseRef, Warning};
use crate::provider::{EmbeddingProvider, ProviderError};

/// A finite, non-empty real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, SemanticError> {
        if values.is_empty() {
            return Err(SemanticError::EmptyVector);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SemanticError::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `u·v / (‖u‖‖v‖)`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SemanticError> {
    if u.len() != v.len() {
        return Err(SemanticError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (dot, uu, vv) = u.iter().zip(v).fold((0.0, 0.0, 0.0), |(d, a, b), (x, y)| {
        (d + x * y, a + x * x, b + y * y)
    });
    if uu == 0.0 || vv == 0.0 {
        return Err(SemanticError::ZeroVector);
    }
    Ok(dot / (libm::sqrt(uu) * libm::sqrt(vv)))
}

/// Per-verse embeddings of one corpus under one model, all of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    corpus_id: String,
    model_id: String,
    dim: usize,
    per_verse: BTreeMap<VerseRef, EmbeddingVector>,
}

impl EmbeddingSet {
    pub fn new(corpus_id: &str, model_id: &str, dim: usize) -> Self {
        Self {
            corpus_id: corpus_id.into(),
            model_id: model_id.into(),
            dim,
            per_verse: BTreeMap::new(),
        }
    }

    pub fn insert(
        &mut self,
        verse_ref: VerseRef,
        vector: EmbeddingVector,
    ) -> Result<(), SemanticError> {
        if vector.dim() != self.dim {
            return Err(SemanticError::DimensionMismatch {
                expected: self.dim,
                found: vector.dim(),
            });
        }
        self.per_verse.insert(verse_ref, vector);
        Ok(())
    }

    pub fn corpus_id(&self) -> &str {
        &self.corpus_id
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, verse_ref: &VerseRef) -> Option<&EmbeddingVector> {
        self.per_verse.get(verse_ref)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VerseRef, &EmbeddingVector)> {
        self.per_verse.iter()
    }

    pub fn len(&self) -> usize {
        self.per_verse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_verse.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRecord {
    pub verse_ref: VerseRef,
    pub score: f64,
    /// (left corpus id, right corpus id)
    pub pair: (String, String),
}

/// Cosine similarity of every ref embedded in both sets, in ref order.
pub fn verse_similarities(
    a: &EmbeddingSet,
    b: &EmbeddingSet,
) -> Result<(Vec<SimilarityRecord>, Vec<Warning>), SemanticError> {
    if a.dim != b.dim {
        return Err(SemanticError::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let pair = (a.corpus_id.clone(), b.corpus_id.clone());
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (r, u) in &a.per_verse {
        match b.per_verse.get(r) {
            Some(v) => records.push(SimilarityRecord {
                verse_ref: *r,
                score: cosine(u.as_slice(), v.as_slice())?,
                pair: pair.clone(),
            }),
            None => warnings.push(Warning::Unmatched {
                verse_ref: *r,
                present_in: a.corpus_id.clone(),
                missing_from: b.corpus_id.clone(),
            }),
        }
    }
    for r in b.per_verse.keys().filter(|r| !a.per_verse.contains_key(r)) {
        warnings.push(Warning::Unmatched {
            verse_ref: *r,
            present_in: b.corpus_id.clone(),
            missing_from: a.corpus_id.clone(),
        });
    }
    Ok((records, warnings))
}

/// Mean and population standard deviation of one chapter's scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChapterStats {
    pub chapter: u32,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl ChapterStats {
    /// Pools several chapters into one (mean, std, n) over all their verses,
    /// using the law of total variance.
    pub fn pooled(stats: &[ChapterStats]) -> Option<(f64, f64, usize)> {
        let n: usize = stats.iter().map(|s| s.n).sum();
        if n == 0 {
            return None;
        }
        let total = n as f64;
        let mean = stats.iter().map(|s| s.n as f64 * s.mean).sum::<f64>() / total;
        let second_moment = stats
            .iter()
            .map(|s| s.n as f64 * (s.std * s.std + s.mean * s.mean))
            .sum::<f64>()
            / total;
        let var = (second_moment - mean * mean).max(0.0);
        Some((mean, libm::sqrt(var), n))
    }
}

/// Welford's running mean/variance over the records of `chapter`.
pub fn chapter_stats(
    records: &[SimilarityRecord],
    chapter: u32,
) -> Result<ChapterStats, SemanticError> {
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for score in records
        .iter()
        .filter(|r| r.verse_ref.chapter == chapter)
        .map(|r| r.score)
    {
        n += 1;
        let delta = score - mean;
        mean += delta / n as f64;
        m2 += delta * (score - mean);
    }
    if n == 0 {
        return Err(SemanticError::EmptyChapter(chapter));
    }
    Ok(ChapterStats {
        chapter,
        mean,
        std: libm::sqrt((m2 / n as f64).max(0.0)),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Most,
    Least,
}

/// The `k` highest (`Most`) or lowest (`Least`) scoring records. Equal scores
/// are ordered by verse ref, then pair.
pub fn extremes(
    records: &[SimilarityRecord],
    k: usize,
    direction: Direction,
) -> Vec<SimilarityRecord> {
    let mut sorted: Vec<&SimilarityRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        let by_score = a.score.partial_cmp(&b.score).unwrap_or(Ordering::Equal);
        let by_score = match direction {
            Direction::Most => by_score.reverse(),
            Direction::Least => by_score,
        };
        by_score
            .then_with(|| a.verse_ref.cmp(&b.verse_ref))
            .then_with(|| a.pair.cmp(&b.pair))
    });
    sorted.into_iter().take(k).cloned().collect()
}

/// Embeds every verse's clean text in batches of `batch_size`.
pub fn embed_corpus(
    provider: &dyn EmbeddingProvider,
    corpus: &TranslationCorpus,
    batch_size: usize,
) -> Result<EmbeddingSet, SemanticError> {
    let verses: Vec<_> = corpus.verses().collect();
    let mut set: Option<EmbeddingSet> = None;
    for batch in verses.chunks(batch_size.max(1)) {
        let texts: Vec<&str> = batch.iter().map(|v| v.clean_text.as_str()).collect();
        let vectors = provider.embed(&texts)?;
        if vectors.len() != texts.len() {
            return Err(ProviderError::cardinality(texts.len(), vectors.len()).into());
        }
        for (verse, values) in batch.iter().zip(vectors) {
            let vector = EmbeddingVector::new(values)?;
            let set = set.get_or_insert_with(|| {
                EmbeddingSet::new(corpus.id(), provider.model_id(), vector.dim())
            });
            set.insert(verse.verse_ref, vector)?;
        }
    }
    Ok(set.unwrap_or_else(|| EmbeddingSet::new(corpus.id(), provider.model_id(), 0)))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SemanticError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cosine is undefined for a zero vector")]
    ZeroVector,
    #[error("embedding vectors must not be empty")]
    EmptyVector,
    #[error("non-finite embedding component at index {index}")]
    NonFinite { index: usize },
    #[error("no similarity records for chapter {0}")]
    EmptyChapter(u32),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(ch: u32, v: u32, score: f64) -> SimilarityRecord {
        SimilarityRecord {
            verse_ref: VerseRef::new(ch, v).unwrap(),
            score,
            pair: ("a".into(), "b".into()),
        }
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), Ok(0.0));
        assert!((cosine(&[1.0, 2.0, 2.0], &[1.0, 2.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - 0.7071067811865475).abs() < 1e-15);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(SemanticError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
        assert_eq!(
            cosine(&[0.0, 0.0], &[1.0, 2.0]),
            Err(SemanticError::ZeroVector)
        );
    }

    #[test]
    fn vector_validation() {
        assert!(EmbeddingVector::new(vec![]).is_err());
        assert_eq!(
            EmbeddingVector::new(vec![1.0, f64::INFINITY]),
            Err(SemanticError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn set_rejects_dimension_drift() {
        let mut s = EmbeddingSet::new("a", "m", 2);
        let r = VerseRef::new(1, 1).unwrap();
        assert!(s
            .insert(r, EmbeddingVector::new(vec![1.0, 2.0]).unwrap())
            .is_ok());
        assert!(s
            .insert(r, EmbeddingVector::new(vec![1.0]).unwrap())
            .is_err());
    }

    #[test]
    fn identical_and_disjoint_sets() {
        let mut a = EmbeddingSet::new("a", "m", 2);
        a.insert(
            VerseRef::new(1, 1).unwrap(),
            EmbeddingVector::new(vec![1.0, 3.0]).unwrap(),
        )
        .unwrap();
        a.insert(
            VerseRef::new(1, 2).unwrap(),
            EmbeddingVector::new(vec![-2.0, 1.0]).unwrap(),
        )
        .unwrap();
        let (same, warnings) = verse_similarities(&a, &a).unwrap();
        assert_eq!(same.len(), 2);
        assert!(same.iter().all(|r| (r.score - 1.0).abs() < 1e-15));
        assert!(warnings.is_empty());

        let mut b = EmbeddingSet::new("b", "m", 2);
        b.insert(
            VerseRef::new(2, 1).unwrap(),
            EmbeddingVector::new(vec![1.0, 0.0]).unwrap(),
        )
        .unwrap();
        let (none, warnings) = verse_similarities(&a, &b).unwrap();
        assert!(none.is_empty());
        assert_eq!(warnings.len(), 3);

        let c = EmbeddingSet::new("c", "m", 3);
        assert!(verse_similarities(&a, &c).is_err());
    }

    #[test]
    fn stats_examples() {
        let s = chapter_stats(&[rec(1, 1, 0.5), rec(1, 2, 0.7), rec(2, 1, 0.0)], 1).unwrap();
        assert!((s.mean - 0.6).abs() < 1e-15);
        assert!((s.std - 0.1).abs() < 1e-15);
        assert_eq!(s.n, 2);
        let single = chapter_stats(&[rec(1, 1, 0.37)], 1).unwrap();
        assert_eq!((single.mean, single.std), (0.37, 0.0));
        assert_eq!(chapter_stats(&[], 1), Err(SemanticError::EmptyChapter(1)));
    }

    #[test]
    fn pooled_matches_direct() {
        let records = [
            rec(1, 1, 0.2),
            rec(1, 2, 0.4),
            rec(2, 1, 0.9),
            rec(2, 2, 0.5),
            rec(2, 3, 0.6),
        ];
        let stats = [
            chapter_stats(&records, 1).unwrap(),
            chapter_stats(&records, 2).unwrap(),
        ];
        let (mean, std, n) = ChapterStats::pooled(&stats).unwrap();
        let all: Vec<f64> = records.iter().map(|r| r.score).collect();
        let m = all.iter().sum::<f64>() / 5.0;
        let sd = libm::sqrt(all.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 5.0);
        assert_eq!(n, 5);
        assert!((mean - m).abs() < 1e-12 && (std - sd).abs() < 1e-12);
    }

    #[test]
    fn extremes_examples() {
        let records = [rec(1, 1, 0.9), rec(1, 2, 0.1), rec(1, 3, 0.5)];
        assert_eq!(
            extremes(&records, 1, Direction::Most),
            vec![records[0].clone()]
        );
        assert_eq!(
            extremes(&records, 1, Direction::Least),
            vec![records[1].clone()]
        );
        assert_eq!(extremes(&records, 10, Direction::Most).len(), 3);
    }

    #[test]
    fn extremes_tie_order() {
        let records = [rec(2, 1, 0.5), rec(1, 1, 0.5), rec(1, 2, 0.5)];
        let most = extremes(&records, 3, Direction::Most);
        let refs: Vec<_> = most
            .iter()
            .map(|r| (r.verse_ref.chapter, r.verse_ref.verse))
            .collect();
        assert_eq!(refs, [(1, 1), (1, 2), (2, 1)]);
    }
}
