//! Deterministic stand-ins for the embedding and sentiment models.

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::provider::{EmbeddingProvider, ProviderError, SentimentProvider};
use crate::sentiment::{SentimentLabel, LABEL_COUNT};
use crate::textstats::tokenize;

pub const MOCK_EMBEDDING_DIM: usize = 16;

/// Pseudo-random unit-cube vectors seeded by the SHA-256 of the NFC text.
/// Identical text gives identical vectors on every run and platform.
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    dim: usize,
}

impl MockEmbedder {
    pub fn new(dim: usize) -> Self {
        Self { dim: dim.max(1) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, text: &str) -> Vec<f64> {
        let normalized: String = text.nfc().collect();
        let seed: [u8; 32] = Sha256::digest(normalized.as_bytes()).into();
        let mut rng = ChaCha8Rng::from_seed(seed);
        let mut v: Vec<f64> = (0..self.dim)
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
            .collect();
        if v.iter().all(|x| *x == 0.0) {
            v[0] = 1.0;
        }
        v
    }
}

impl Default for MockEmbedder {
    fn default() -> Self {
        Self::new(MOCK_EMBEDDING_DIM)
    }
}

impl EmbeddingProvider for MockEmbedder {
    fn model_id(&self) -> &str {
        "mock-sha256-chacha8"
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| self.vector(t)).collect())
    }
}

const LEXICON: [(SentimentLabel, &[&str]); LABEL_COUNT] = [
    (
        SentimentLabel::Optimistic,
        &[
            "rejoice",
            "hope",
            "joy",
            "peace",
            "bliss",
            "attain",
            "attains",
            "victory",
            "delight",
            "happiness",
            "liberation",
            "glory",
            "supreme",
        ],
    ),
    (
        SentimentLabel::Thankful,
        &[
            "thank",
            "thanks",
            "grateful",
            "gratitude",
            "blessed",
            "bless",
            "grace",
            "offering",
            "worship",
        ],
    ),
    (
        SentimentLabel::Empathetic,
        &[
            "compassion",
            "compassionate",
            "friendly",
            "kind",
            "kindness",
            "love",
            "dear",
            "mercy",
            "beloved",
            "devotees",
        ],
    ),
    (
        SentimentLabel::Pessimistic,
        &[
            "doom",
            "ruin",
            "destruction",
            "hell",
            "sin",
            "sins",
            "death",
            "perish",
            "lost",
            "wicked",
        ],
    ),
    (
        SentimentLabel::Anxious,
        &[
            "fear",
            "afraid",
            "anxiety",
            "doubt",
            "tremble",
            "worry",
            "confusion",
            "agitated",
            "agitating",
        ],
    ),
    (
        SentimentLabel::Sad,
        &[
            "grief",
            "sorrow",
            "weep",
            "lament",
            "despair",
            "pain",
            "suffering",
            "sad",
        ],
    ),
    (
        SentimentLabel::Annoyed,
        &[
            "anger", "angry", "wrath", "hate", "hatred", "hated", "enemy", "contempt", "ill-will",
        ],
    ),
    (
        SentimentLabel::Denial,
        &["deny", "denied", "refuse", "reject", "never", "neither"],
    ),
    (
        SentimentLabel::Surprise,
        &[
            "wonder",
            "wondrous",
            "amazing",
            "astonished",
            "marvel",
            "behold",
            "strange",
        ],
    ),
    (
        SentimentLabel::Joking,
        &["laugh", "jest", "joke", "play", "playing", "fun"],
    ),
];

/// Keyword-lexicon sentiment heuristic: each lexicon hit for a label raises
/// its probability as `1 - 0.95 * 0.35^hits`; labels without hits sit at 0.05.
#[derive(Debug, Clone, Default)]
pub struct MockSentiment;

impl MockSentiment {
    pub fn probabilities(&self, text: &str) -> [f64; LABEL_COUNT] {
        let tokens = tokenize(text);
        let mut out = [0.0; LABEL_COUNT];
        for (label, words) in LEXICON {
            let hits = tokens
                .tokens()
                .iter()
                .filter(|t| words.contains(&t.as_str()))
                .count();
            out[label.index()] = 1.0 - 0.95 * libm::pow(0.35, hits as f64);
        }
        out
    }
}

impl SentimentProvider for MockSentiment {
    fn model_id(&self) -> &str {
        "mock-lexicon-v1"
    }

    fn predict(&self, texts: &[&str]) -> Result<Vec<[f64; LABEL_COUNT]>, ProviderError> {
        Ok(texts.iter().map(|t| self.probabilities(t)).collect())
    }
}
