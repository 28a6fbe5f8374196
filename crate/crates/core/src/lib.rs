//! Pure building blocks for comparing verse-aligned parallel translations.
//!
//! Everything here is `no_std` + `alloc`: verse cleaning and alignment,
//! tokenization and n-gram statistics, multi-label sentiment aggregation with
//! Jaccard agreement, embedding cosine statistics, and maximal-marginal-relevance
//! keyword selection. Model inference is reached only through the provider
//! traits in [`provider`]; file formats, HTTP and the command line live in the
//! `verse-eval` crate.
#![no_std]
#![forbid(unsafe_code)]
extern crate alloc;

pub mod clean;
pub mod corpus;
pub mod keywords;
pub mod mock;
pub mod provider;
pub mod semantic;
pub mod sentiment;
pub mod textstats;

pub use clean::clean_verse;
pub use corpus::{
    align, chapter_slice, AlignedPair, CorpusError, CorpusMeta, CorpusSet, TranslationCorpus,
    Verse, VerseRef, Warning,
};
pub use keywords::{mmr_keywords, mmr_select, Keyword, KeywordConfig, KeywordError};
pub use provider::{EmbeddingProvider, ProviderError, ProviderErrorKind, SentimentProvider};
pub use semantic::{
    chapter_stats, cosine, embed_corpus, extremes, verse_similarities, ChapterStats, Direction,
    EmbeddingSet, EmbeddingVector, SemanticError, SimilarityRecord,
};
pub use sentiment::{
    binarize, chapter_counts, chapter_jaccard, cooccurrence, cumulative_counts, jaccard,
    predict_corpus, CooccurrenceMatrix, EmptyPairPolicy, LabelCounts, LabelSet, SentimentError,
    SentimentLabel, SentimentPredictions, SentimentProbabilities, Threshold, VersePrediction,
};
pub use textstats::{
    remove_stopwords, sentiment_conditioned_ngrams, tokenize, top_ngrams, NGramTable, Stoplist,
    TokenSequence,
};
