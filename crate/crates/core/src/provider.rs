//! Model-facing contracts. Implementations must preserve order: output `i`
//! always answers input `i`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::sentiment::LABEL_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderErrorKind {
    /// The backend could not be reached (after any retries).
    Transport,
    /// The backend answered with something that breaks the contract.
    Protocol,
    /// A precomputed store has no entry for a text.
    MissingKey,
    /// The backend refused one specific input.
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?} provider error: {message}")]
pub struct ProviderError {
    pub kind: ProviderErrorKind,
    pub message: String,
}

impl ProviderError {
    pub fn new(kind: ProviderErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn transport(message: impl Into<String>) -> Self {
        Self::new(ProviderErrorKind::Transport, message)
    }

    pub fn protocol(message: impl Into<String>) -> Self {
        Self::new(ProviderErrorKind::Protocol, message)
    }

    pub fn cardinality(expected: usize, got: usize) -> Self {
        Self::protocol(format!("expected {expected} results, got {got}"))
    }

    pub fn missing_key(text: &str) -> Self {
        Self::new(
            ProviderErrorKind::MissingKey,
            format!("no stored entry for text {text:?}"),
        )
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn model_id(&self) -> &str;

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Returns one row of independent per-label probabilities per text, in
/// canonical label order.
pub trait SentimentProvider: Send + Sync {
    fn model_id(&self) -> &str;

    fn predict(&self, texts: &[&str]) -> Result<Vec<[f64; LABEL_COUNT]>, ProviderError>;
}

impl<T: EmbeddingProvider + ?Sized> EmbeddingProvider for &T {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        (**self).embed(texts)
    }
}

impl<T: SentimentProvider + ?Sized> SentimentProvider for &T {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn predict(&self, texts: &[&str]) -> Result<Vec<[f64; LABEL_COUNT]>, ProviderError> {
        (**self).predict(texts)
    }
}
