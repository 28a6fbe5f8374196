//! Verse coordinates, translation corpora and verse alignment.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::clean::clean_verse;

/// A (chapter, verse) coordinate. Ordered by chapter, then verse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VerseRef {
    pub chapter: u32,
    pub verse: u32,
}

impl VerseRef {
    pub fn new(chapter: u32, verse: u32) -> Result<Self, CorpusError> {
        if chapter == 0 || verse == 0 {
            return Err(CorpusError::InvalidRef { chapter, verse });
        }
        Ok(Self { chapter, verse })
    }
}

impl fmt::Display for VerseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.chapter, self.verse)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verse {
    pub verse_ref: VerseRef,
    pub raw_text: String,
    pub clean_text: String,
}

impl Verse {
    /// Builds a verse, deriving `clean_text` from `raw_text`.
    pub fn new(verse_ref: VerseRef, raw_text: String) -> Result<Self, CorpusError> {
        if raw_text.trim().is_empty() {
            return Err(CorpusError::EmptyText(verse_ref));
        }
        let clean_text = clean_verse(&raw_text);
        Ok(Self {
            verse_ref,
            raw_text,
            clean_text,
        })
    }
}

/// Provenance of one translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusMeta {
    pub id: String,
    pub title: String,
    pub translator: String,
    /// BCP-47 style tag, e.g. `en` or `sa`.
    pub language: String,
    pub source: String,
}

impl CorpusMeta {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.id.is_empty() || self.id.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidId(self.id.clone()));
        }
        Ok(())
    }
}

/// One translator's verse collection. Immutable once handed out; construction
/// goes through [`TranslationCorpus::insert`] so duplicate refs are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationCorpus {
    meta: CorpusMeta,
    verses: BTreeMap<VerseRef, Verse>,
}

impl TranslationCorpus {
    pub fn new(meta: CorpusMeta) -> Result<Self, CorpusError> {
        meta.validate()?;
        Ok(Self {
            meta,
            verses: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, verse_ref: VerseRef, raw_text: String) -> Result<(), CorpusError> {
        if self.verses.contains_key(&verse_ref) {
            return Err(CorpusError::DuplicateRef(verse_ref));
        }
        let verse = Verse::new(verse_ref, raw_text)?;
        self.verses.insert(verse_ref, verse);
        Ok(())
    }

    pub fn meta(&self) -> &CorpusMeta {
        &self.meta
    }

    pub fn id(&self) -> &str {
        &self.meta.id
    }

    pub fn len(&self) -> usize {
        self.verses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verses.is_empty()
    }

    pub fn get(&self, verse_ref: &VerseRef) -> Option<&Verse> {
        self.verses.get(verse_ref)
    }

    pub fn contains(&self, verse_ref: &VerseRef) -> bool {
        self.verses.contains_key(verse_ref)
    }

    /// Verses in canonical (chapter, verse) order.
    pub fn verses(&self) -> impl Iterator<Item = &Verse> {
        self.verses.values()
    }

    pub fn refs(&self) -> impl Iterator<Item = VerseRef> + '_ {
        self.verses.keys().copied()
    }

    /// Distinct chapters, ascending.
    pub fn chapters(&self) -> Vec<u32> {
        let mut chapters: Vec<u32> = self.verses.keys().map(|r| r.chapter).collect();
        chapters.dedup();
        chapters
    }
}

/// Corpora keyed by exact, case-sensitive id.
#[derive(Debug, Clone, Default)]
pub struct CorpusSet {
    corpora: BTreeMap<String, TranslationCorpus>,
}

impl CorpusSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, corpus: TranslationCorpus) -> Result<(), CorpusError> {
        if self.corpora.contains_key(corpus.id()) {
            return Err(CorpusError::DuplicateId(corpus.id().into()));
        }
        self.corpora.insert(corpus.id().into(), corpus);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&TranslationCorpus> {
        self.corpora.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.corpora.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.corpora.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corpora.is_empty()
    }
}

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// The ref exists in `present_in` but has no counterpart in `missing_from`.
    Unmatched {
        verse_ref: VerseRef,
        present_in: String,
        missing_from: String,
    },
    /// A verse of `corpus_id` has no stored prediction or embedding.
    MissingEntry {
        verse_ref: VerseRef,
        corpus_id: String,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Unmatched {
                verse_ref,
                present_in,
                missing_from,
            } => write!(
                f,
                "verse {verse_ref} present in {present_in} but missing from {missing_from}"
            ),
            Warning::MissingEntry {
                verse_ref,
                corpus_id,
            } => write!(f, "no entry for verse {verse_ref} of {corpus_id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPair<'a> {
    pub verse_ref: VerseRef,
    pub left: &'a Verse,
    pub right: &'a Verse,
}

/// Pairs the verses present in both corpora, in ref order. Every ref present
/// in only one side produces a [`Warning::Unmatched`].
pub fn align<'a>(
    a: &'a TranslationCorpus,
    b: &'a TranslationCorpus,
) -> (Vec<AlignedPair<'a>>, Vec<Warning>) {
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    for (r, left) in &a.verses {
        match b.verses.get(r) {
            Some(right) => pairs.push(AlignedPair {
                verse_ref: *r,
                left,
                right,
            }),
            None => warnings.push(Warning::Unmatched {
                verse_ref: *r,
                present_in: a.id().into(),
                missing_from: b.id().into(),
            }),
        }
    }
    for r in b.verses.keys().filter(|r| !a.verses.contains_key(r)) {
        warnings.push(Warning::Unmatched {
            verse_ref: *r,
            present_in: b.id().into(),
            missing_from: a.id().into(),
        });
    }
    (pairs, warnings)
}

/// All verses of one chapter, ordered by verse number.
pub fn chapter_slice(corpus: &TranslationCorpus, chapter: u32) -> Vec<&Verse> {
    let lo = VerseRef { chapter, verse: 0 };
    let hi = VerseRef {
        chapter,
        verse: u32::MAX,
    };
    corpus.verses.range(lo..=hi).map(|(_, v)| v).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid verse reference ({chapter},{verse}): chapter and verse start at 1")]
    InvalidRef { chapter: u32, verse: u32 },
    #[error("duplicate verse reference {0}")]
    DuplicateRef(VerseRef),
    #[error("empty text for verse {0}")]
    EmptyText(VerseRef),
    #[error("invalid corpus id {0:?}: ids are non-empty and contain no whitespace")]
    InvalidId(String),
    #[error("duplicate corpus id {0:?}")]
    DuplicateId(String),
}
