//! Multi-label sentiment: thresholding, Jaccard agreement, label counts and
//! co-occurrence.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{TranslationCorpus, VerseRef};
use crate::provider::{ProviderError, SentimentProvider};

pub const LABEL_COUNT: usize = 10;

/// The ten sentiment labels, in canonical index order. Serialized by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SentimentLabel {
    Optimistic,
    Thankful,
    Empathetic,
    Pessimistic,
    Anxious,
    Sad,
    Annoyed,
    Denial,
    Surprise,
    Joking,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; LABEL_COUNT] = [
        SentimentLabel::Optimistic,
        SentimentLabel::Thankful,
        SentimentLabel::Empathetic,
        SentimentLabel::Pessimistic,
        SentimentLabel::Anxious,
        SentimentLabel::Sad,
        SentimentLabel::Annoyed,
        SentimentLabel::Denial,
        SentimentLabel::Surprise,
        SentimentLabel::Joking,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SentimentLabel::Optimistic => "optimistic",
            SentimentLabel::Thankful => "thankful",
            SentimentLabel::Empathetic => "empathetic",
            SentimentLabel::Pessimistic => "pessimistic",
            SentimentLabel::Anxious => "anxious",
            SentimentLabel::Sad => "sad",
            SentimentLabel::Annoyed => "annoyed",
            SentimentLabel::Denial => "denial",
            SentimentLabel::Surprise => "surprise",
            SentimentLabel::Joking => "joking",
        }
    }

    pub fn parse(name: &str) -> Result<Self, SentimentError> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == name)
            .ok_or_else(|| SentimentError::UnknownLabel(name.into()))
    }

    /// Canonical label names, in index order.
    pub fn names() -> [&'static str; LABEL_COUNT] {
        Self::ALL.map(Self::name)
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Independent per-label probabilities in `[0, 1]`; they need not sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentProbabilities([f64; LABEL_COUNT]);

impl SentimentProbabilities {
    pub fn new(values: [f64; LABEL_COUNT]) -> Result<Self, SentimentError> {
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(SentimentError::ProbabilityOutOfRange { index, value });
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64; LABEL_COUNT] {
        &self.0
    }

    pub fn get(&self, label: SentimentLabel) -> f64 {
        self.0[label.index()]
    }
}

/// Binarization cut, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(value: f64) -> Result<Self, SentimentError> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(SentimentError::InvalidThreshold(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Self(0.5)
    }
}

/// A subset of the ten labels, stored as a bitmask over label indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LabelSet(u16);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn from_bits(bits: u16) -> Self {
        Self(bits & ((1 << LABEL_COUNT) - 1))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn insert(&mut self, label: SentimentLabel) {
        self.0 |= 1 << label.index();
    }

    pub fn contains(self, label: SentimentLabel) -> bool {
        self.0 & (1 << label.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersection(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 & other.0)
    }

    pub fn union(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = SentimentLabel> {
        SentimentLabel::ALL
            .into_iter()
            .filter(move |l| self.contains(*l))
    }
}

impl FromIterator<SentimentLabel> for LabelSet {
    fn from_iter<I: IntoIterator<Item = SentimentLabel>>(iter: I) -> Self {
        let mut set = LabelSet::EMPTY;
        for label in iter {
            set.insert(label);
        }
        set
    }
}

/// Labels whose probability reaches the threshold (inclusive).
pub fn binarize(p: &SentimentProbabilities, threshold: Threshold) -> LabelSet {
    SentimentLabel::ALL
        .into_iter()
        .filter(|l| p.get(*l) >= threshold.value())
        .collect()
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets counting as full agreement.
pub fn jaccard(a: LabelSet, b: LabelSet) -> f64 {
    let union = a.union(b).len();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).len() as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VersePrediction {
    pub probabilities: SentimentProbabilities,
    pub labels: LabelSet,
}

/// Per-verse predictions for one corpus. Stored label sets always equal the
/// binarized probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentPredictions {
    corpus_id: String,
    threshold: Threshold,
    per_verse: BTreeMap<VerseRef, VersePrediction>,
}

impl SentimentPredictions {
    pub fn new(corpus_id: &str, threshold: Threshold) -> Self {
        Self {
            corpus_id: corpus_id.into(),
            threshold,
            per_verse: BTreeMap::new(),
        }
    }

    pub fn corpus_id(&self) -> &str {
        &self.corpus_id
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    /// Stores the probabilities and their binarized label set, replacing any
    /// previous entry.
    pub fn insert(&mut self, verse_ref: VerseRef, probabilities: SentimentProbabilities) {
        let labels = binarize(&probabilities, self.threshold);
        self.per_verse.insert(
            verse_ref,
            VersePrediction {
                probabilities,
                labels,
            },
        );
    }

    /// Inserts a stored record, checking the label set against the
    /// probabilities.
    pub fn insert_checked(
        &mut self,
        verse_ref: VerseRef,
        probabilities: SentimentProbabilities,
        labels: LabelSet,
    ) -> Result<(), SentimentError> {
        let expected = binarize(&probabilities, self.threshold);
        if expected != labels {
            return Err(SentimentError::LabelMismatch(verse_ref));
        }
        self.insert(verse_ref, probabilities);
        Ok(())
    }

    pub fn get(&self, verse_ref: &VerseRef) -> Option<&VersePrediction> {
        self.per_verse.get(verse_ref)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VerseRef, &VersePrediction)> {
        self.per_verse.iter()
    }

    pub fn len(&self) -> usize {
        self.per_verse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_verse.is_empty()
    }

    pub fn chapters(&self) -> Vec<u32> {
        let mut chapters: Vec<u32> = self.per_verse.keys().map(|r| r.chapter).collect();
        chapters.dedup();
        chapters
    }

    fn chapter(&self, chapter: u32) -> impl Iterator<Item = (&VerseRef, &VersePrediction)> {
        let lo = VerseRef { chapter, verse: 0 };
        let hi = VerseRef {
            chapter,
            verse: u32::MAX,
        };
        self.per_verse.range(lo..=hi)
    }
}

/// What to do with verses where both label sets are empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyPairPolicy {
    /// Score them 1.0.
    #[default]
    Agree,
    /// Leave them out of the chapter mean.
    Skip,
}

/// Mean per-verse Jaccard over the refs of `chapter` present in both.
pub fn chapter_jaccard(
    a: &SentimentPredictions,
    b: &SentimentPredictions,
    chapter: u32,
    policy: EmptyPairPolicy,
) -> Result<f64, SentimentError> {
    let mut sum = 0.0;
    let mut common = 0usize;
    let mut scored = 0usize;
    for (r, pa) in a.chapter(chapter) {
        let Some(pb) = b.get(r) else { continue };
        common += 1;
        if policy == EmptyPairPolicy::Skip && pa.labels.is_empty() && pb.labels.is_empty() {
            continue;
        }
        sum += jaccard(pa.labels, pb.labels);
        scored += 1;
    }
    if common == 0 {
        return Err(SentimentError::NoCommonVerses(chapter));
    }
    if scored == 0 {
        return Err(SentimentError::NothingToScore(chapter));
    }
    Ok(sum / scored as f64)
}

/// Number of verses carrying each label, indexed by label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelCounts(pub [u64; LABEL_COUNT]);

impl LabelCounts {
    pub fn get(&self, label: SentimentLabel) -> u64 {
        self.0[label.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SentimentLabel, u64)> + '_ {
        SentimentLabel::ALL.into_iter().zip(self.0.iter().copied())
    }
}

fn count_labels<'a>(labels: impl Iterator<Item = LabelSet> + 'a) -> LabelCounts {
    let mut counts = [0u64; LABEL_COUNT];
    for set in labels {
        for label in set.iter() {
            counts[label.index()] += 1;
        }
    }
    LabelCounts(counts)
}

pub fn cumulative_counts(predictions: &SentimentPredictions) -> LabelCounts {
    count_labels(predictions.iter().map(|(_, p)| p.labels))
}

pub fn chapter_counts(predictions: &SentimentPredictions, chapter: u32) -> LabelCounts {
    count_labels(predictions.chapter(chapter).map(|(_, p)| p.labels))
}

/// Symmetric label co-occurrence counts; the diagonal holds per-label totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CooccurrenceMatrix(pub [[u64; LABEL_COUNT]; LABEL_COUNT]);

impl CooccurrenceMatrix {
    pub fn get(&self, a: SentimentLabel, b: SentimentLabel) -> u64 {
        self.0[a.index()][b.index()]
    }

    pub fn max(&self) -> u64 {
        self.0.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn diagonal(&self) -> LabelCounts {
        let mut d = [0u64; LABEL_COUNT];
        for (i, slot) in d.iter_mut().enumerate() {
            *slot = self.0[i][i];
        }
        LabelCounts(d)
    }
}

pub fn cooccurrence(predictions: &SentimentPredictions) -> CooccurrenceMatrix {
    let mut m = [[0u64; LABEL_COUNT]; LABEL_COUNT];
    for (_, p) in predictions.iter() {
        for a in p.labels.iter() {
            for b in p.labels.iter() {
                m[a.index()][b.index()] += 1;
            }
        }
    }
    CooccurrenceMatrix(m)
}

/// Runs the provider over every verse's clean text in batches of
/// `batch_size` and thresholds the result. Any provider failure or
/// out-of-range probability aborts the whole run.
pub fn predict_corpus(
    provider: &dyn SentimentProvider,
    corpus: &TranslationCorpus,
    threshold: Threshold,
    batch_size: usize,
) -> Result<SentimentPredictions, SentimentError> {
    let mut predictions = SentimentPredictions::new(corpus.id(), threshold);
    let verses: Vec<_> = corpus.verses().collect();
    for batch in verses.chunks(batch_size.max(1)) {
        let texts: Vec<&str> = batch.iter().map(|v| v.clean_text.as_str()).collect();
        let rows = provider.predict(&texts)?;
        if rows.len() != texts.len() {
            return Err(SentimentError::Provider(ProviderError::cardinality(
                texts.len(),
                rows.len(),
            )));
        }
        for (verse, row) in batch.iter().zip(rows) {
            predictions.insert(verse.verse_ref, SentimentProbabilities::new(row)?);
        }
    }
    Ok(predictions)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SentimentError {
    #[error("unknown sentiment label {0:?}")]
    UnknownLabel(String),
    #[error("probability {value} for label index {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("threshold {0} must lie strictly between 0 and 1")]
    InvalidThreshold(f64),
    #[error("stored labels for verse {0} disagree with its probabilities")]
    LabelMismatch(VerseRef),
    #[error("no verses of chapter {0} are shared by both predictions")]
    NoCommonVerses(u32),
    #[error("every shared verse of chapter {0} has two empty label sets")]
    NothingToScore(u32),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}
