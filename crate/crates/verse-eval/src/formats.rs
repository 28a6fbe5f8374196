//! On-disk formats: corpus directories, prediction and embedding JSONL files.
//!
//! Every JSONL file is UTF-8 with LF line endings. Floats are written in
//! shortest round-trip form, so write-then-read is exact.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use verse_eval_core::sentiment::LABEL_COUNT;
use verse_eval_core::{
    CorpusError, CorpusMeta, EmbeddingSet, EmbeddingVector, LabelSet, SemanticError,
    SentimentError, SentimentLabel, SentimentPredictions, SentimentProbabilities, Threshold,
    TranslationCorpus, VerseRef,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const VERSES_FILE: &str = "verses.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: file not found", .0.display())]
    Missing(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: malformed record: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}:{line}: {source}", path.display())]
    Corpus {
        path: PathBuf,
        line: usize,
        source: CorpusError,
    },
    #[error("{}:{line}: {source}", path.display())]
    Sentiment {
        path: PathBuf,
        line: usize,
        source: SentimentError,
    },
    #[error("{}:{line}: {source}", path.display())]
    Semantic {
        path: PathBuf,
        line: usize,
        source: SemanticError,
    },
    #[error("{}: {message}", path.display())]
    Header { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
    move |source| {
        if source.kind() == io::ErrorKind::NotFound {
            FormatError::Missing(path.to_path_buf())
        } else {
            FormatError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

/// Non-blank lines of a file with their 1-based line numbers.
pub(crate) fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, FormatError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

pub(crate) fn parse_line<T: DeserializeOwned>(
    path: &Path,
    line: usize,
    text: &str,
) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Malformed {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    })
}

/// Writes `header` (if any) and `records` as JSONL, creating parent dirs.
pub(crate) fn write_jsonl<H: Serialize, R: Serialize>(
    path: &Path,
    header: Option<&H>,
    records: impl IntoIterator<Item = R>,
) -> Result<(), FormatError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut buf = String::new();
    if let Some(h) = header {
        buf.push_str(&serde_json::to_string(h).expect("headers serialize"));
        buf.push('\n');
    }
    for r in records {
        buf.push_str(&serde_json::to_string(&r).expect("records serialize"));
        buf.push('\n');
    }
    fs::write(path, buf).map_err(io_err(path))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    id: String,
    title: String,
    translator: String,
    language: String,
    #[serde(default)]
    source: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct VerseRecord {
    chapter: u32,
    verse: u32,
    text: String,
}

/// Loads `<dir>/manifest.json` and `<dir>/verses.jsonl`.
pub fn load_corpus(dir: &Path) -> Result<TranslationCorpus, FormatError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest_text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: Manifest = parse_line(&manifest_path, 1, &manifest_text)?;
    let mut corpus = TranslationCorpus::new(CorpusMeta {
        id: manifest.id,
        title: manifest.title,
        translator: manifest.translator,
        language: manifest.language,
        source: manifest.source,
    })
    .map_err(|source| FormatError::Corpus {
        path: manifest_path.clone(),
        line: 1,
        source,
    })?;

    let verses_path = dir.join(VERSES_FILE);
    for (line, text) in read_lines(&verses_path)? {
        let record: VerseRecord = parse_line(&verses_path, line, &text)?;
        let corpus_err = |source| FormatError::Corpus {
            path: verses_path.clone(),
            line,
            source,
        };
        let verse_ref = VerseRef::new(record.chapter, record.verse).map_err(corpus_err)?;
        corpus.insert(verse_ref, record.text).map_err(corpus_err)?;
    }
    Ok(corpus)
}

/// Writes a corpus directory; raw verse text is stored unchanged.
pub fn save_corpus(corpus: &TranslationCorpus, dir: &Path) -> Result<(), FormatError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let meta = corpus.meta();
    let manifest = Manifest {
        id: meta.id.clone(),
        title: meta.title.clone(),
        translator: meta.translator.clone(),
        language: meta.language.clone(),
        source: meta.source.clone(),
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    write_jsonl::<(), _>(
        &dir.join(VERSES_FILE),
        None,
        corpus.verses().map(|v| VerseRecord {
            chapter: v.verse_ref.chapter,
            verse: v.verse_ref.verse,
            text: v.raw_text.clone(),
        }),
    )
}

/// Every sub-directory of `root` holding a manifest, sorted by name.
pub fn corpus_dirs(root: &Path) -> Result<Vec<PathBuf>, FormatError> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        if entry.path().join(MANIFEST_FILE).is_file() {
            dirs.push(entry.path());
        }
    }
    dirs.sort();
    Ok(dirs)
}

pub fn predictions_path(dir: &Path, corpus_id: &str) -> PathBuf {
    dir.join(format!("{corpus_id}.predictions.jsonl"))
}

pub fn embeddings_path(dir: &Path, corpus_id: &str) -> PathBuf {
    dir.join(format!("{corpus_id}.embeddings.jsonl"))
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionsHeader {
    corpus_id: String,
    threshold: f64,
    label_order: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionRecord {
    chapter: u32,
    verse: u32,
    probabilities: Vec<f64>,
    labels: Vec<String>,
}

pub(crate) fn check_label_order(path: &Path, order: &[String]) -> Result<(), FormatError> {
    let canonical = SentimentLabel::names();
    if order.len() != LABEL_COUNT || order.iter().zip(canonical).any(|(a, b)| a != b) {
        return Err(FormatError::Header {
            path: path.to_path_buf(),
            message: format!("label order {order:?} differs from canonical {canonical:?}"),
        });
    }
    Ok(())
}

pub(crate) fn probability_row(
    path: &Path,
    line: usize,
    values: &[f64],
) -> Result<[f64; LABEL_COUNT], FormatError> {
    values.try_into().map_err(|_| FormatError::Malformed {
        path: path.to_path_buf(),
        line,
        message: format!(
            "expected {LABEL_COUNT} probabilities, found {}",
            values.len()
        ),
    })
}

pub fn write_predictions(
    path: &Path,
    predictions: &SentimentPredictions,
) -> Result<(), FormatError> {
    let header = PredictionsHeader {
        corpus_id: predictions.corpus_id().into(),
        threshold: predictions.threshold().value(),
        label_order: SentimentLabel::names()
            .iter()
            .map(|s| s.to_string())
            .collect(),
    };
    write_jsonl(
        path,
        Some(&header),
        predictions.iter().map(|(r, p)| PredictionRecord {
            chapter: r.chapter,
            verse: r.verse,
            probabilities: p.probabilities.values().to_vec(),
            labels: p.labels.iter().map(|l| l.name().to_string()).collect(),
        }),
    )
}

/// Reads a predictions file, validating label order and that every stored
/// label set equals the thresholded probabilities.
pub fn read_predictions(path: &Path) -> Result<SentimentPredictions, FormatError> {
    let lines = read_lines(path)?;
    let Some(((header_line, header_text), records)) = lines.split_first() else {
        return Err(FormatError::Header {
            path: path.to_path_buf(),
            message: "missing header line".into(),
        });
    };
    let header: PredictionsHeader = parse_line(path, *header_line, header_text)?;
    check_label_order(path, &header.label_order)?;
    let sentiment_err = |line: usize| {
        move |source| FormatError::Sentiment {
            path: path.to_path_buf(),
            line,
            source,
        }
    };
    let threshold = Threshold::new(header.threshold).map_err(sentiment_err(*header_line))?;
    let mut predictions = SentimentPredictions::new(&header.corpus_id, threshold);
    for (line, text) in records {
        let record: PredictionRecord = parse_line(path, *line, text)?;
        let verse_ref =
            VerseRef::new(record.chapter, record.verse).map_err(|source| FormatError::Corpus {
                path: path.to_path_buf(),
                line: *line,
                source,
            })?;
        let row = probability_row(path, *line, &record.probabilities)?;
        let probabilities = SentimentProbabilities::new(row).map_err(sentiment_err(*line))?;
        let labels = record
            .labels
            .iter()
            .map(|name| SentimentLabel::parse(name))
            .collect::<Result<LabelSet, _>>()
            .map_err(sentiment_err(*line))?;
        predictions
            .insert_checked(verse_ref, probabilities, labels)
            .map_err(sentiment_err(*line))?;
    }
    Ok(predictions)
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingsHeader {
    corpus_id: String,
    model_id: String,
    dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingRecord {
    chapter: u32,
    verse: u32,
    vector: Vec<f64>,
}

pub fn write_embeddings(path: &Path, set: &EmbeddingSet) -> Result<(), FormatError> {
    let header = EmbeddingsHeader {
        corpus_id: set.corpus_id().into(),
        model_id: set.model_id().into(),
        dim: set.dim(),
    };
    write_jsonl(
        path,
        Some(&header),
        set.iter().map(|(r, v)| EmbeddingRecord {
            chapter: r.chapter,
            verse: r.verse,
            vector: v.as_slice().to_vec(),
        }),
    )
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingSet, FormatError> {
    let lines = read_lines(path)?;
    let Some(((header_line, header_text), records)) = lines.split_first() else {
        return Err(FormatError::Header {
            path: path.to_path_buf(),
            message: "missing header line".into(),
        });
    };
    let header: EmbeddingsHeader = parse_line(path, *header_line, header_text)?;
    let mut set = EmbeddingSet::new(&header.corpus_id, &header.model_id, header.dim);
    for (line, text) in records {
        let record: EmbeddingRecord = parse_line(path, *line, text)?;
        let semantic_err = |source| FormatError::Semantic {
            path: path.to_path_buf(),
            line: *line,
            source,
        };
        let verse_ref =
            VerseRef::new(record.chapter, record.verse).map_err(|source| FormatError::Corpus {
                path: path.to_path_buf(),
                line: *line,
                source,
            })?;
        let vector = EmbeddingVector::new(record.vector).map_err(semantic_err)?;
        set.insert(verse_ref, vector).map_err(semantic_err)?;
    }
    Ok(set)
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, manifest: &str, verses: &str) {
        fs::write(dir.join(MANIFEST_FILE), manifest).unwrap();
        fs::write(dir.join(VERSES_FILE), verses).unwrap();
    }

    const MANIFEST: &str = r#"{"id":"GT","title":"Test","translator":"Google Translate","language":"en","source":"test"}"#;

    #[test]
    fn loads_three_records() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            MANIFEST,
            "{\"chapter\":1,\"verse\":1,\"text\":\"a\"}\n{\"chapter\":1,\"verse\":2,\"text\":\"b\"}\n{\"chapter\":2,\"verse\":1,\"text\":\"c\"}\n",
        );
        let c = load_corpus(dir.path()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.chapters(), [1, 2]);
    }

    #[test]
    fn missing_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_corpus(dir.path()),
            Err(FormatError::Missing(_))
        ));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            MANIFEST,
            "{\"chapter\":1,\"verse\":1,\"text\":\"a\"}\n{\"chapter\":1,\"verse\":\n",
        );
        match load_corpus(dir.path()) {
            Err(FormatError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_empty_records() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            MANIFEST,
            "{\"chapter\":1,\"verse\":1,\"text\":\"a\"}\n{\"chapter\":1,\"verse\":1,\"text\":\"b\"}\n",
        );
        let err = load_corpus(dir.path()).unwrap_err();
        assert!(err.to_string().contains("(1,1)"), "{err}");

        write(
            dir.path(),
            MANIFEST,
            "{\"chapter\":1,\"verse\":1,\"text\":\"\"}\n",
        );
        assert!(matches!(
            load_corpus(dir.path()),
            Err(FormatError::Corpus {
                source: CorpusError::EmptyText(_),
                ..
            })
        ));
    }

    #[test]
    fn predictions_reject_foreign_label_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let mut order: Vec<String> = SentimentLabel::names()
            .iter()
            .map(|s| s.to_string())
            .collect();
        order.swap(0, 1);
        let header = serde_json::json!({"corpus_id": "GT", "threshold": 0.5, "label_order": order});
        fs::write(&path, format!("{header}\n")).unwrap();
        assert!(matches!(
            read_predictions(&path),
            Err(FormatError::Header { .. })
        ));
    }

    #[test]
    fn predictions_reject_inconsistent_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let header = serde_json::json!({"corpus_id": "GT", "threshold": 0.5, "label_order": SentimentLabel::names()});
        let record = serde_json::json!({"chapter": 1, "verse": 1, "probabilities": [0.9,0,0,0,0,0,0,0,0,0], "labels": ["sad"]});
        fs::write(&path, format!("{header}\n{record}\n")).unwrap();
        assert!(matches!(
            read_predictions(&path),
            Err(FormatError::Sentiment {
                source: SentimentError::LabelMismatch(_),
                line: 2,
                ..
            })
        ));
    }
}
