//! Building translated corpora through a translation backend.
//!
//! Translations are cached per (provider, NFC source text) and persisted as
//! JSONL, so a rerun over the same sources never calls the backend again.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{Duration, SystemTime};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;
use verse_eval_core::{
    clean_verse, CorpusError, CorpusMeta, ProviderError, TranslationCorpus, VerseRef,
};

use crate::exec::{bounded_map, RateLimiter, RetryPolicy};
use crate::formats::{parse_line, read_lines, FormatError};
use crate::http;

/// A translation backend. `translate` answers a whole batch: the outer error
/// means the request itself failed; inner errors reject single items.
pub trait TranslationProvider: Send + Sync {
    fn id(&self) -> &str;

    fn target_language(&self) -> &str {
        "en"
    }

    fn translate(&self, texts: &[&str]) -> Result<Vec<Result<String, String>>, ProviderError>;
}

fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// Offline provider answering from a recorded fixture of source/translation
/// pairs, matched on the cleaned source text. Unknown sources are rejected
/// per item.
#[derive(Debug, Clone)]
pub struct ReplayProvider {
    id: String,
    entries: HashMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReplayRecord {
    source: String,
    translation: String,
}

impl ReplayProvider {
    pub fn from_pairs<I, S, T>(id: &str, pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: Into<String>,
    {
        Self {
            id: id.into(),
            entries: pairs
                .into_iter()
                .map(|(s, t)| (clean_verse(s.as_ref()), t.into()))
                .collect(),
        }
    }

    /// Reads `{"source": .., "translation": ..}` lines.
    pub fn from_jsonl(id: &str, path: &Path) -> Result<Self, FormatError> {
        let mut pairs = Vec::new();
        for (line, text) in read_lines(path)? {
            let r: ReplayRecord = parse_line(path, line, &text)?;
            pairs.push((r.source, r.translation));
        }
        Ok(Self::from_pairs(id, pairs))
    }
}

impl TranslationProvider for ReplayProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn translate(&self, texts: &[&str]) -> Result<Vec<Result<String, String>>, ProviderError> {
        Ok(texts
            .iter()
            .map(|t| {
                self.entries
                    .get(&clean_verse(t))
                    .cloned()
                    .ok_or_else(|| "no recorded translation for this source".to_string())
            })
            .collect())
    }
}

/// Client for a translation service exposing
/// `POST <endpoint>/translate {source_lang, target_lang, texts}` answering
/// `{translations: [string | null]}`.
pub struct HttpTranslator {
    id: String,
    endpoint: String,
    source_lang: String,
    target_lang: String,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    source_lang: &'a str,
    target_lang: &'a str,
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct TranslateResponse {
    translations: Vec<Option<String>>,
}

impl HttpTranslator {
    pub fn new(endpoint: &str, source_lang: &str, target_lang: &str, timeout: Duration) -> Self {
        Self {
            id: format!("http:{}", endpoint.trim_end_matches('/')),
            endpoint: endpoint.into(),
            source_lang: source_lang.into(),
            target_lang: target_lang.into(),
            agent: http::agent(timeout),
        }
    }
}

impl TranslationProvider for HttpTranslator {
    fn id(&self) -> &str {
        &self.id
    }

    fn target_language(&self) -> &str {
        &self.target_lang
    }

    fn translate(&self, texts: &[&str]) -> Result<Vec<Result<String, String>>, ProviderError> {
        let url = http::join(&self.endpoint, "translate");
        let response: TranslateResponse = http::post_json(
            &self.agent,
            &url,
            &TranslateRequest {
                source_lang: &self.source_lang,
                target_lang: &self.target_lang,
                texts,
            },
        )?;
        if response.translations.len() != texts.len() {
            return Err(ProviderError::cardinality(
                texts.len(),
                response.translations.len(),
            ));
        }
        Ok(response
            .translations
            .into_iter()
            .map(|t| t.ok_or_else(|| "service rejected this text".to_string()))
            .collect())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    provider: String,
    source: String,
    translation: String,
}

/// Translation cache keyed by (provider id, NFC source text), optionally
/// backed by an append-only JSONL file.
#[derive(Debug, Default)]
pub struct TranslationCache {
    entries: RwLock<HashMap<(String, String), String>>,
    file: Option<Mutex<fs::File>>,
    path: Option<PathBuf>,
}

impl TranslationCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` if it exists; new entries are appended to it.
    pub fn open(path: &Path) -> Result<Self, FormatError> {
        let mut entries = HashMap::new();
        if path.exists() {
            for (line, text) in read_lines(path)? {
                let r: CacheRecord = parse_line(path, line, &text)?;
                entries.insert((r.provider, nfc(&r.source)), r.translation);
            }
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|source| FormatError::Io {
                path: parent.into(),
                source,
            })?;
        }
        let file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| FormatError::Io {
                path: path.into(),
                source,
            })?;
        Ok(Self {
            entries: RwLock::new(entries),
            file: Some(Mutex::new(file)),
            path: Some(path.into()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, provider: &str, source: &str) -> Option<String> {
        self.entries
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(&(provider.to_string(), nfc(source)))
            .cloned()
    }

    pub fn insert(&self, provider: &str, source: &str, translation: &str) -> std::io::Result<()> {
        let key = (provider.to_string(), nfc(source));
        let mut entries = self.entries.write().unwrap_or_else(|e| e.into_inner());
        if entries.get(&key).map(String::as_str) == Some(translation) {
            return Ok(());
        }
        if let Some(file) = &self.file {
            let record = CacheRecord {
                provider: key.0.clone(),
                source: key.1.clone(),
                translation: translation.into(),
            };
            let mut line = serde_json::to_string(&record).expect("cache records serialize");
            line.push('\n');
            file.lock()
                .unwrap_or_else(|e| e.into_inner())
                .write_all(line.as_bytes())?;
        }
        entries.insert(key, translation.into());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslateOptions {
    pub batch_size: usize,
    pub max_in_flight: usize,
    /// Requests per second; `0` disables limiting.
    pub rate_limit: f64,
    pub retry: RetryPolicy,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        Self {
            batch_size: 25,
            max_in_flight: 4,
            rate_limit: 5.0,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationRecord {
    pub verse_ref: VerseRef,
    pub source_text: String,
    pub result: Result<String, String>,
    pub provider_id: String,
    pub retrieved_at: SystemTime,
    pub from_cache: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum AcquireError {
    #[error("nothing to translate")]
    EmptyInput,
    #[error("translation backend unreachable: {0}")]
    Unreachable(ProviderError),
    #[error("cannot write translation cache: {0}")]
    Cache(#[from] std::io::Error),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Translates every source, in input order. Items the backend rejects are
/// recorded as failures; only an unreachable backend aborts the call.
pub fn translate_batch(
    provider: &dyn TranslationProvider,
    cache: &TranslationCache,
    sources: &[(VerseRef, String)],
    options: &TranslateOptions,
) -> Result<Vec<TranslationRecord>, AcquireError> {
    if sources.is_empty() {
        return Err(AcquireError::EmptyInput);
    }
    let provider_id = provider.id().to_string();
    let mut results: Vec<Option<(Result<String, String>, bool)>> = vec![None; sources.len()];
    // distinct uncached texts, each requested once
    let mut pending: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, (_, source)) in sources.iter().enumerate() {
        if source.trim().is_empty() {
            results[i] = Some((Err("empty source text".into()), false));
        } else if let Some(hit) = cache.get(&provider_id, source) {
            results[i] = Some((Ok(hit), true));
        } else {
            pending.entry(nfc(source)).or_default().push(i);
        }
    }

    let texts: Vec<&str> = pending.keys().map(String::as_str).collect();
    let batches: Vec<&[&str]> = texts.chunks(options.batch_size.max(1)).collect();
    let limiter = RateLimiter::new(options.rate_limit);
    let answers = bounded_map(batches.len(), options.max_in_flight, |b| {
        let batch = batches[b];
        options.retry.run(|| {
            limiter.acquire();
            let out = provider.translate(batch)?;
            if out.len() != batch.len() {
                return Err(ProviderError::cardinality(batch.len(), out.len()));
            }
            Ok(out)
        })
    });

    let mut translated: HashMap<&str, Result<String, String>> = HashMap::new();
    // keep caching successful batches even after one batch became unreachable
    let mut unreachable = None;
    for (batch, answer) in batches.iter().zip(answers) {
        match answer {
            Ok(items) => {
                for (text, item) in batch.iter().zip(items) {
                    let item = item.and_then(|t| {
                        if t.trim().is_empty() {
                            Err("empty translation".to_string())
                        } else {
                            Ok(t)
                        }
                    });
                    if let Ok(t) = &item {
                        cache.insert(&provider_id, text, t)?;
                    }
                    translated.insert(text, item);
                }
            }
            Err(e) if e.kind == verse_eval_core::ProviderErrorKind::Transport => {
                unreachable.get_or_insert(e);
            }
            Err(e) => {
                for text in batch.iter() {
                    translated.insert(text, Err(e.message.clone()));
                }
            }
        }
    }
    if let Some(e) = unreachable {
        return Err(AcquireError::Unreachable(e));
    }
    for (text, indices) in &pending {
        let result = translated[text.as_str()].clone();
        for &i in indices {
            results[i] = Some((result.clone(), false));
        }
    }

    let retrieved_at = SystemTime::now();
    Ok(sources
        .iter()
        .zip(results)
        .map(|((verse_ref, source), r)| {
            let (result, from_cache) = r.expect("every source is resolved");
            TranslationRecord {
                verse_ref: *verse_ref,
                source_text: source.clone(),
                result,
                provider_id: provider_id.clone(),
                retrieved_at,
                from_cache,
            }
        })
        .collect())
}

/// Translates the clean text of every verse of `source` into a new corpus
/// called `id`. Verses that fail to translate are left out, each with a
/// warning naming the ref.
pub fn build_parallel_corpus(
    source: &TranslationCorpus,
    provider: &dyn TranslationProvider,
    cache: &TranslationCache,
    id: &str,
    options: &TranslateOptions,
) -> Result<(TranslationCorpus, Vec<String>), AcquireError> {
    let meta = CorpusMeta {
        id: id.into(),
        title: format!("{} (machine translation)", source.meta().title),
        translator: provider.id().into(),
        language: provider.target_language().into(),
        source: format!("{} translated by {}", source.id(), provider.id()),
    };
    let mut corpus = TranslationCorpus::new(meta)?;
    let sources: Vec<(VerseRef, String)> = source
        .verses()
        .map(|v| (v.verse_ref, v.clean_text.clone()))
        .collect();
    let mut warnings = Vec::new();
    for record in translate_batch(provider, cache, &sources, options)? {
        match record.result {
            Ok(text) if !clean_verse(&text).is_empty() => corpus.insert(record.verse_ref, text)?,
            Ok(_) => warnings.push(format!(
                "verse {} dropped: translation is empty after cleaning",
                record.verse_ref
            )),
            Err(reason) => warnings.push(format!("verse {} dropped: {reason}", record.verse_ref)),
        }
    }
    Ok((corpus, warnings))
}
