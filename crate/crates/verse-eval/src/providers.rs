//! Embedding and sentiment backends: deterministic mocks, precomputed file
//! stores, and an HTTP inference service.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;
use verse_eval_core::mock::{MockEmbedder, MockSentiment};
use verse_eval_core::sentiment::LABEL_COUNT;
use verse_eval_core::{EmbeddingProvider, ProviderError, SentimentLabel, SentimentProvider};

use crate::exec::{bounded_map, RetryPolicy};
use crate::formats::{
    check_label_order, parse_line, probability_row, read_lines, write_jsonl, FormatError,
};
use crate::http;

fn nfc(text: &str) -> String {
    text.nfc().collect()
}

fn canonical_labels() -> Vec<String> {
    SentimentLabel::names()
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingStoreHeader {
    model_id: String,
    dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingStoreRecord {
    text: String,
    vector: Vec<f64>,
}

/// Precomputed embeddings keyed by NFC text.
#[derive(Debug, Clone)]
pub struct FileEmbeddingStore {
    model_id: String,
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl FileEmbeddingStore {
    pub fn load(path: &Path) -> Result<Self, FormatError> {
        let lines = read_lines(path)?;
        let Some(((hl, ht), rest)) = lines.split_first() else {
            return Err(FormatError::Header {
                path: path.into(),
                message: "missing header line".into(),
            });
        };
        let header: EmbeddingStoreHeader = parse_line(path, *hl, ht)?;
        let mut vectors = HashMap::new();
        for (line, text) in rest {
            let r: EmbeddingStoreRecord = parse_line(path, *line, text)?;
            if r.vector.len() != header.dim {
                return Err(FormatError::Malformed {
                    path: path.into(),
                    line: *line,
                    message: format!(
                        "vector has {} components, header says {}",
                        r.vector.len(),
                        header.dim
                    ),
                });
            }
            vectors.insert(nfc(&r.text), r.vector);
        }
        Ok(Self {
            model_id: header.model_id,
            dim: header.dim,
            vectors,
        })
    }

    /// Writes a store from `(text, vector)` pairs, e.g. to precompute one
    /// with another provider.
    pub fn save<'a>(
        path: &Path,
        model_id: &str,
        dim: usize,
        entries: impl IntoIterator<Item = (&'a str, &'a [f64])>,
    ) -> Result<(), FormatError> {
        write_jsonl(
            path,
            Some(&EmbeddingStoreHeader {
                model_id: model_id.into(),
                dim,
            }),
            entries.into_iter().map(|(t, v)| EmbeddingStoreRecord {
                text: t.into(),
                vector: v.to_vec(),
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for FileEmbeddingStore {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        texts
            .iter()
            .map(|t| {
                self.vectors
                    .get(&nfc(t))
                    .cloned()
                    .ok_or_else(|| ProviderError::missing_key(t))
            })
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SentimentStoreHeader {
    model_id: String,
    label_order: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SentimentStoreRecord {
    text: String,
    probabilities: Vec<f64>,
}

/// Precomputed sentiment probabilities keyed by NFC text.
#[derive(Debug, Clone)]
pub struct FileSentimentStore {
    model_id: String,
    rows: HashMap<String, [f64; LABEL_COUNT]>,
}

impl FileSentimentStore {
    pub fn load(path: &Path) -> Result<Self, FormatError> {
        let lines = read_lines(path)?;
        let Some(((hl, ht), rest)) = lines.split_first() else {
            return Err(FormatError::Header {
                path: path.into(),
                message: "missing header line".into(),
            });
        };
        let header: SentimentStoreHeader = parse_line(path, *hl, ht)?;
        check_label_order(path, &header.label_order)?;
        let mut rows = HashMap::new();
        for (line, text) in rest {
            let r: SentimentStoreRecord = parse_line(path, *line, text)?;
            rows.insert(
                nfc(&r.text),
                probability_row(path, *line, &r.probabilities)?,
            );
        }
        Ok(Self {
            model_id: header.model_id,
            rows,
        })
    }

    pub fn save<'a>(
        path: &Path,
        model_id: &str,
        entries: impl IntoIterator<Item = (&'a str, [f64; LABEL_COUNT])>,
    ) -> Result<(), FormatError> {
        write_jsonl(
            path,
            Some(&SentimentStoreHeader {
                model_id: model_id.into(),
                label_order: canonical_labels(),
            }),
            entries.into_iter().map(|(t, p)| SentimentStoreRecord {
                text: t.into(),
                probabilities: p.to_vec(),
            }),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl SentimentProvider for FileSentimentStore {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn predict(&self, texts: &[&str]) -> Result<Vec<[f64; LABEL_COUNT]>, ProviderError> {
        texts
            .iter()
            .map(|t| {
                self.rows
                    .get(&nfc(t))
                    .copied()
                    .ok_or_else(|| ProviderError::missing_key(t))
            })
            .collect()
    }
}

/// What an inference service reports about itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceInfo {
    pub embedding_model: String,
    pub sentiment_model: String,
    pub embedding_dim: usize,
    pub label_order: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct HealthResponse {
    info: ServiceInfo,
}

#[derive(Serialize)]
struct TextsRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct SentimentResponse {
    labels: Vec<String>,
    probabilities: Vec<Vec<f64>>,
}

/// Client for an inference service with `GET /v1/health`,
/// `POST /v1/embed` and `POST /v1/sentiments`. Requests are split into
/// batches of `batch_size`, with at most `max_in_flight` outstanding.
pub struct HttpInferenceClient {
    endpoint: String,
    agent: ureq::Agent,
    batch_size: usize,
    max_in_flight: usize,
    retry: RetryPolicy,
    info: OnceLock<ServiceInfo>,
    fallback_id: String,
}

impl HttpInferenceClient {
    pub fn new(
        endpoint: &str,
        batch_size: usize,
        max_in_flight: usize,
        timeout: Duration,
        retry: RetryPolicy,
    ) -> Self {
        Self {
            endpoint: endpoint.trim_end_matches('/').into(),
            agent: http::agent(timeout),
            batch_size: batch_size.max(1),
            max_in_flight: max_in_flight.max(1),
            retry,
            info: OnceLock::new(),
            fallback_id: format!("http:{}", endpoint.trim_end_matches('/')),
        }
    }

    /// Fetches and validates the service description once.
    pub fn health(&self) -> Result<&ServiceInfo, ProviderError> {
        if let Some(info) = self.info.get() {
            return Ok(info);
        }
        let url = http::join(&self.endpoint, "v1/health");
        let response: HealthResponse = self.retry.run(|| http::get_json(&self.agent, &url))?;
        if response.info.label_order != canonical_labels() {
            return Err(ProviderError::protocol(format!(
                "service label order {:?} differs from the canonical order",
                response.info.label_order
            )));
        }
        if response.info.embedding_dim == 0 {
            return Err(ProviderError::protocol(
                "service reports embedding dimension 0",
            ));
        }
        Ok(self.info.get_or_init(|| response.info))
    }

    fn batched<T: Send>(
        &self,
        texts: &[&str],
        call: impl Fn(&[&str]) -> Result<Vec<T>, ProviderError> + Sync,
    ) -> Result<Vec<T>, ProviderError> {
        let batches: Vec<&[&str]> = texts.chunks(self.batch_size).collect();
        let answers = bounded_map(batches.len(), self.max_in_flight, |i| {
            let batch = batches[i];
            let rows = self.retry.run(|| call(batch))?;
            if rows.len() != batch.len() {
                return Err(ProviderError::cardinality(batch.len(), rows.len()));
            }
            Ok(rows)
        });
        let mut out = Vec::with_capacity(texts.len());
        for answer in answers {
            out.extend(answer?);
        }
        Ok(out)
    }
}

impl EmbeddingProvider for HttpInferenceClient {
    fn model_id(&self) -> &str {
        self.info
            .get()
            .map_or(&self.fallback_id, |i| &i.embedding_model)
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let dim = self.health()?.embedding_dim;
        let url = http::join(&self.endpoint, "v1/embed");
        self.batched(texts, |batch| {
            let r: EmbedResponse =
                http::post_json(&self.agent, &url, &TextsRequest { texts: batch })?;
            if let Some(bad) = r.vectors.iter().find(|v| v.len() != dim) {
                return Err(ProviderError::protocol(format!(
                    "vector of dimension {} from a service declaring {dim}",
                    bad.len()
                )));
            }
            Ok(r.vectors)
        })
    }
}

impl SentimentProvider for HttpInferenceClient {
    fn model_id(&self) -> &str {
        self.info
            .get()
            .map_or(&self.fallback_id, |i| &i.sentiment_model)
    }

    fn predict(&self, texts: &[&str]) -> Result<Vec<[f64; LABEL_COUNT]>, ProviderError> {
        self.health()?;
        let url = http::join(&self.endpoint, "v1/sentiments");
        let canonical = canonical_labels();
        self.batched(texts, |batch| {
            let r: SentimentResponse =
                http::post_json(&self.agent, &url, &TextsRequest { texts: batch })?;
            if r.labels != canonical {
                return Err(ProviderError::protocol(format!(
                    "response label order {:?} differs from the canonical order",
                    r.labels
                )));
            }
            r.probabilities
                .iter()
                .map(|row| {
                    <[f64; LABEL_COUNT]>::try_from(row.as_slice()).map_err(|_| {
                        ProviderError::protocol(format!(
                            "expected {LABEL_COUNT} probabilities, got {}",
                            row.len()
                        ))
                    })
                })
                .collect()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    File,
    Http,
}

/// How to reach a model. Each kind takes exactly its own fields: `file`
/// needs `path`, `http` needs `endpoint`, `mock` takes neither.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    /// Mock embedding dimension.
    #[serde(default)]
    pub dim: Option<usize>,
}

fn default_batch_size() -> usize {
    32
}

fn default_timeout_secs() -> f64 {
    30.0
}

fn default_max_attempts() -> u32 {
    3
}

fn default_max_in_flight() -> usize {
    4
}

impl ProviderConfig {
    pub fn mock() -> Self {
        Self {
            kind: ProviderKind::Mock,
            path: None,
            endpoint: None,
            batch_size: default_batch_size(),
            timeout_secs: default_timeout_secs(),
            max_attempts: default_max_attempts(),
            max_in_flight: default_max_in_flight(),
            dim: None,
        }
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        Self {
            kind: ProviderKind::File,
            path: Some(path.into()),
            ..Self::mock()
        }
    }

    pub fn http(endpoint: impl Into<String>) -> Self {
        Self {
            kind: ProviderKind::Http,
            endpoint: Some(endpoint.into()),
            ..Self::mock()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let has_path = self.path.is_some();
        let has_endpoint = self
            .endpoint
            .as_deref()
            .is_some_and(|e| !e.trim().is_empty());
        let expected = match self.kind {
            ProviderKind::Mock => (false, false),
            ProviderKind::File => (true, false),
            ProviderKind::Http => (false, true),
        };
        if (has_path, has_endpoint) != expected {
            return Err(ConfigError(format!(
                "provider kind {:?} needs {}",
                self.kind,
                match self.kind {
                    ProviderKind::Mock => "neither `path` nor `endpoint`",
                    ProviderKind::File => "`path` and no `endpoint`",
                    ProviderKind::Http => "`endpoint` and no `path`",
                }
            )));
        }
        if self.dim.is_some() && self.kind != ProviderKind::Mock {
            return Err(ConfigError(
                "`dim` only applies to the mock provider".into(),
            ));
        }
        if self.batch_size == 0 || self.max_in_flight == 0 || self.max_attempts == 0 {
            return Err(ConfigError(
                "batch_size, max_in_flight and max_attempts must be positive".into(),
            ));
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(ConfigError("timeout_secs must be a positive number".into()));
        }
        Ok(())
    }

    fn http_client(&self) -> HttpInferenceClient {
        HttpInferenceClient::new(
            self.endpoint.as_deref().unwrap_or_default(),
            self.batch_size,
            self.max_in_flight,
            Duration::from_secs_f64(self.timeout_secs),
            RetryPolicy {
                max_attempts: self.max_attempts,
                ..RetryPolicy::default()
            },
        )
    }

    pub fn embedding_provider(&self) -> Result<Box<dyn EmbeddingProvider>, ConfigError> {
        self.validate()?;
        Ok(match self.kind {
            ProviderKind::Mock => Box::new(
                self.dim
                    .map_or_else(MockEmbedder::default, MockEmbedder::new),
            ),
            ProviderKind::File => Box::new(
                FileEmbeddingStore::load(self.path.as_deref().unwrap_or(Path::new("")))
                    .map_err(|e| ConfigError(e.to_string()))?,
            ),
            ProviderKind::Http => Box::new(self.http_client()),
        })
    }

    pub fn sentiment_provider(&self) -> Result<Box<dyn SentimentProvider>, ConfigError> {
        self.validate()?;
        Ok(match self.kind {
            ProviderKind::Mock => Box::new(MockSentiment),
            ProviderKind::File => Box::new(
                FileSentimentStore::load(self.path.as_deref().unwrap_or(Path::new("")))
                    .map_err(|e| ConfigError(e.to_string()))?,
            ),
            ProviderKind::Http => Box::new(self.http_client()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

#[cfg(test)]
mod tests {
    use super::*;
    use verse_eval_core::ProviderErrorKind;

    #[test]
    fn config_fields_follow_kind() {
        assert!(ProviderConfig::mock().validate().is_ok());
        assert!(ProviderConfig::file("x").validate().is_ok());
        assert!(ProviderConfig::http("http://localhost:1")
            .validate()
            .is_ok());
        let mut bad = ProviderConfig::http("http://localhost:1");
        bad.path = Some("x".into());
        assert!(bad.validate().is_err());
        let mut bad = ProviderConfig::mock();
        bad.endpoint = Some("http://x".into());
        assert!(bad.validate().is_err());
        let mut bad = ProviderConfig::file("x");
        bad.path = None;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let r: Result<ProviderConfig, _> = toml::from_str("kind = \"mock\"\nurl = \"x\"\n");
        assert!(r.is_err());
        let c: ProviderConfig = toml::from_str("kind = \"file\"\npath = \"s.jsonl\"\n").unwrap();
        assert_eq!(c.kind, ProviderKind::File);
        assert_eq!(c.batch_size, 32);
    }

    #[test]
    fn embedding_store_missing_key_names_the_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        FileEmbeddingStore::save(&path, "m", 2, [("known verse", &[1.0, 0.5][..])]).unwrap();
        let store = FileEmbeddingStore::load(&path).unwrap();
        assert_eq!(store.embed(&["known verse"]).unwrap(), vec![vec![1.0, 0.5]]);
        let err = store.embed(&["unknown verse"]).unwrap_err();
        assert_eq!(err.kind, ProviderErrorKind::MissingKey);
        assert!(err.message.contains("unknown verse"));
    }

    #[test]
    fn sentiment_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let row = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0 / 3.0];
        FileSentimentStore::save(&path, "m", [("t", row)]).unwrap();
        let store = FileSentimentStore::load(&path).unwrap();
        assert_eq!(store.predict(&["t"]).unwrap(), vec![row]);
        assert_eq!(store.model_id(), "m");
    }
}
