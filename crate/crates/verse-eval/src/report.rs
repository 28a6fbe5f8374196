//! Chapter tables, charts and the on-disk report layout.
//!
//! Layout under the output directory (pair directories are named `A-B`):
//!
//! ```text
//! jaccard.{csv,json}            all pairs side by side
//! cosine.{csv,json}
//! <A-B>/jaccard.{csv,json}
//! <A-B>/cosine.{csv,json}
//! <corpus>/ngrams_2.{csv,svg}
//! <corpus>/ngrams_3.{csv,svg}
//! <corpus>/heatmap.svg
//! <corpus>/sentiment_cumulative.{csv,svg}
//! extremes_most.{csv,json}
//! extremes_least.{csv,json}
//! ```
//!
//! Rendering is deterministic: the same inputs give byte-identical files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use verse_eval_core::{
    chapter_jaccard, chapter_stats, cooccurrence, cumulative_counts, extremes, top_ngrams,
    verse_similarities, ChapterStats, CorpusSet, Direction, EmbeddingSet, EmptyPairPolicy,
    SemanticError, SentimentError, SentimentLabel, SentimentPredictions, SimilarityRecord,
    Stoplist, TranslationCorpus,
};

use crate::config::{ChapterSelection, Formats};
use crate::formats::{write_text, FormatError};
use crate::svg;

pub fn format_jaccard(value: f64) -> String {
    format!("{value:.3}")
}

/// `M.MM(S.SSS)`: mean to two decimals, standard deviation to three.
pub fn format_cosine_cell(mean: f64, std: f64) -> String {
    format!("{mean:.2}({std:.3})")
}

pub fn parse_cosine_cell(cell: &str) -> Option<(f64, f64)> {
    let (mean, rest) = cell.split_once('(')?;
    let std = rest.strip_suffix(')')?;
    Some((mean.parse().ok()?, std.parse().ok()?))
}

/// The number a formatted cell shows, so CSV and JSON agree exactly.
fn shown(formatted: &str) -> f64 {
    formatted.parse().expect("formatted numbers parse")
}

fn csv_string(rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("flushing memory cannot fail"))
        .expect("csv output is UTF-8")
}

fn json_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Per-chapter mean Jaccard for one or more corpus pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct JaccardTable {
    pub pairs: Vec<String>,
    pub chapters: Vec<u32>,
    /// `values[row][column]`
    pub values: Vec<Vec<Option<f64>>>,
}

impl JaccardTable {
    pub fn from_columns(columns: &[(String, Vec<(u32, f64)>)]) -> Self {
        let chapters: Vec<u32> = columns
            .iter()
            .flat_map(|(_, col)| col.iter().map(|(c, _)| *c))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let values = chapters
            .iter()
            .map(|ch| {
                columns
                    .iter()
                    .map(|(_, col)| col.iter().find(|(c, _)| c == ch).map(|(_, v)| *v))
                    .collect()
            })
            .collect();
        Self {
            pairs: columns.iter().map(|(p, _)| p.clone()).collect(),
            chapters,
            values,
        }
    }

    /// Unweighted mean of each column's chapter values.
    pub fn averages(&self) -> Vec<Option<f64>> {
        (0..self.pairs.len())
            .map(|c| {
                let vals: Vec<f64> = self.values.iter().filter_map(|row| row[c]).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: &Option<f64>| v.map(format_jaccard).unwrap_or_default();
        let mut rows = vec![std::iter::once("chapter".to_string())
            .chain(self.pairs.iter().cloned())
            .collect()];
        for (ch, row) in self.chapters.iter().zip(&self.values) {
            rows.push(
                std::iter::once(ch.to_string())
                    .chain(row.iter().map(cell))
                    .collect(),
            );
        }
        rows.push(
            std::iter::once("Average".to_string())
                .chain(self.averages().iter().map(cell))
                .collect(),
        );
        csv_string(&rows)
    }

    pub fn to_json(&self) -> String {
        let num = |v: &Option<f64>| v.map_or(Value::Null, |v| json!(shown(&format_jaccard(v))));
        json_string(&json!({
            "metric": "jaccard",
            "pairs": self.pairs,
            "rows": self.chapters.iter().zip(&self.values).map(|(ch, row)| json!({
                "chapter": ch,
                "values": row.iter().map(num).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "average": self.averages().iter().map(num).collect::<Vec<_>>(),
        }))
    }
}

/// The Average row of a cosine table: the mean of the chapter means, shown
/// with the pooled standard deviation over all verses of those chapters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineAverage {
    pub mean_of_means: f64,
    pub pooled_mean: f64,
    pub pooled_std: f64,
    pub n: usize,
}

/// Per-chapter cosine mean and standard deviation for one or more pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineTable {
    pub pairs: Vec<String>,
    pub chapters: Vec<u32>,
    pub cells: Vec<Vec<Option<ChapterStats>>>,
}

impl CosineTable {
    pub fn from_columns(columns: &[(String, Vec<ChapterStats>)]) -> Self {
        let chapters: Vec<u32> = columns
            .iter()
            .flat_map(|(_, col)| col.iter().map(|s| s.chapter))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let cells = chapters
            .iter()
            .map(|ch| {
                columns
                    .iter()
                    .map(|(_, col)| col.iter().find(|s| s.chapter == *ch).copied())
                    .collect()
            })
            .collect();
        Self {
            pairs: columns.iter().map(|(p, _)| p.clone()).collect(),
            chapters,
            cells,
        }
    }

    pub fn averages(&self) -> Vec<Option<CosineAverage>> {
        (0..self.pairs.len())
            .map(|c| {
                let stats: Vec<ChapterStats> = self.cells.iter().filter_map(|row| row[c]).collect();
                let (pooled_mean, pooled_std, n) = ChapterStats::pooled(&stats)?;
                Some(CosineAverage {
                    mean_of_means: stats.iter().map(|s| s.mean).sum::<f64>() / stats.len() as f64,
                    pooled_mean,
                    pooled_std,
                    n,
                })
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let cell = |s: &Option<ChapterStats>| {
            s.map(|s| format_cosine_cell(s.mean, s.std))
                .unwrap_or_default()
        };
        let mut rows = vec![std::iter::once("chapter".to_string())
            .chain(self.pairs.iter().cloned())
            .collect()];
        for (ch, row) in self.chapters.iter().zip(&self.cells) {
            rows.push(
                std::iter::once(ch.to_string())
                    .chain(row.iter().map(cell))
                    .collect(),
            );
        }
        rows.push(
            std::iter::once("Average".to_string())
                .chain(self.averages().iter().map(|a| {
                    a.map(|a| format_cosine_cell(a.mean_of_means, a.pooled_std))
                        .unwrap_or_default()
                }))
                .collect(),
        );
        csv_string(&rows)
    }

    pub fn to_json(&self) -> String {
        let stat = |mean: f64, std: f64| {
            let (m, s) =
                parse_cosine_cell(&format_cosine_cell(mean, std)).expect("own format parses");
            (m, s)
        };
        let cell = |s: &Option<ChapterStats>| match s {
            Some(s) => {
                let (mean, std) = stat(s.mean, s.std);
                json!({"mean": mean, "std": std, "n": s.n})
            }
            None => Value::Null,
        };
        let averages = self.averages();
        json_string(&json!({
            "metric": "cosine",
            "pairs": self.pairs,
            "rows": self.chapters.iter().zip(&self.cells).map(|(ch, row)| json!({
                "chapter": ch,
                "cells": row.iter().map(cell).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "average": averages.iter().map(|a| match a {
                Some(a) => {
                    let (mean, std) = stat(a.mean_of_means, a.pooled_std);
                    json!({"mean": mean, "std": std})
                }
                None => Value::Null,
            }).collect::<Vec<_>>(),
            "pooled": averages.iter().map(|a| match a {
                Some(a) => {
                    let (mean, std) = stat(a.pooled_mean, a.pooled_std);
                    json!({"mean": mean, "std": std, "n": a.n})
                }
                None => Value::Null,
            }).collect::<Vec<_>>(),
        }))
    }
}

pub fn pair_name(a: &str, b: &str) -> String {
    format!("{a}-{b}")
}

/// Per-chapter Jaccard means for the selected chapters shared by both
/// prediction sets. Chapters that cannot be scored become warnings.
pub fn jaccard_column(
    a: &SentimentPredictions,
    b: &SentimentPredictions,
    chapters: &ChapterSelection,
    policy: EmptyPairPolicy,
) -> (Vec<(u32, f64)>, Vec<String>) {
    let available: Vec<u32> = a
        .chapters()
        .into_iter()
        .chain(b.chapters())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let (selected, missing) = chapters.resolve(&available);
    let mut warnings: Vec<String> = missing
        .iter()
        .map(|c| {
            format!(
                "chapter {c} has no predictions in {} or {}",
                a.corpus_id(),
                b.corpus_id()
            )
        })
        .collect();
    let mut column = Vec::new();
    for ch in selected {
        match chapter_jaccard(a, b, ch, policy) {
            Ok(v) => column.push((ch, v)),
            Err(e @ (SentimentError::NoCommonVerses(_) | SentimentError::NothingToScore(_))) => {
                warnings.push(format!("{}-{}: {e}", a.corpus_id(), b.corpus_id()))
            }
            Err(e) => warnings.push(e.to_string()),
        }
    }
    (column, warnings)
}

/// Similarity records, per-chapter stats and warnings for one pair.
pub type CosineColumn = (Vec<SimilarityRecord>, Vec<ChapterStats>, Vec<String>);

/// Similarity records of the selected chapters and their per-chapter stats.
pub fn cosine_column(
    a: &EmbeddingSet,
    b: &EmbeddingSet,
    chapters: &ChapterSelection,
) -> Result<CosineColumn, SemanticError> {
    let (records, unmatched) = verse_similarities(a, b)?;
    let mut warnings: Vec<String> = unmatched.iter().map(ToString::to_string).collect();
    let records: Vec<SimilarityRecord> = records
        .into_iter()
        .filter(|r| chapters.contains(r.verse_ref.chapter))
        .collect();
    let available: Vec<u32> = records
        .iter()
        .map(|r| r.verse_ref.chapter)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let (selected, missing) = chapters.resolve(&available);
    warnings.extend(missing.iter().map(|c| {
        format!(
            "chapter {c} has no verses embedded in both {} and {}",
            a.corpus_id(),
            b.corpus_id()
        )
    }));
    let stats = selected
        .iter()
        .map(|&ch| chapter_stats(&records, ch))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((records, stats, warnings))
}

/// A copy of `corpus` holding only the selected chapters.
pub fn restrict_corpus(
    corpus: &TranslationCorpus,
    chapters: &ChapterSelection,
) -> TranslationCorpus {
    let mut out =
        TranslationCorpus::new(corpus.meta().clone()).expect("metadata was already valid");
    for v in corpus
        .verses()
        .filter(|v| chapters.contains(v.verse_ref.chapter))
    {
        out.insert(v.verse_ref, v.raw_text.clone())
            .expect("refs are unique and texts non-blank");
    }
    out
}

/// A copy of `predictions` holding only the selected chapters.
pub fn restrict_predictions(
    p: &SentimentPredictions,
    chapters: &ChapterSelection,
) -> SentimentPredictions {
    let mut out = SentimentPredictions::new(p.corpus_id(), p.threshold());
    for (r, v) in p.iter().filter(|(r, _)| chapters.contains(r.chapter)) {
        out.insert(*r, v.probabilities);
    }
    out
}

pub fn ngram_csv(ngrams: &[(Vec<String>, u64)]) -> String {
    let mut rows = vec![vec!["rank".to_string(), "ngram".into(), "count".into()]];
    for (i, (g, c)) in ngrams.iter().enumerate() {
        rows.push(vec![(i + 1).to_string(), g.join(" "), c.to_string()]);
    }
    csv_string(&rows)
}

pub fn ngram_svg(title: &str, ngrams: &[(Vec<String>, u64)]) -> String {
    let items: Vec<(String, f64)> = ngrams
        .iter()
        .map(|(g, c)| (g.join(" "), *c as f64))
        .collect();
    svg::bar_chart(title, &items)
}

pub fn heatmap_svg(title: &str, predictions: &SentimentPredictions) -> String {
    let m = cooccurrence(predictions);
    let rows: Vec<Vec<u64>> = m.0.iter().map(|r| r.to_vec()).collect();
    svg::heatmap(title, &SentimentLabel::names(), &rows)
}

pub fn cumulative_csv(predictions: &SentimentPredictions) -> String {
    let mut rows = vec![vec!["label".to_string(), "verses".into()]];
    for (label, n) in cumulative_counts(predictions).iter() {
        rows.push(vec![label.name().into(), n.to_string()]);
    }
    csv_string(&rows)
}

pub fn cumulative_svg(title: &str, predictions: &SentimentPredictions) -> String {
    let items: Vec<(String, f64)> = cumulative_counts(predictions)
        .iter()
        .map(|(l, n)| (l.name().to_string(), n as f64))
        .collect();
    svg::bar_chart(title, &items)
}

fn extremes_rows(
    records: &[SimilarityRecord],
    corpora: &CorpusSet,
) -> Vec<(SimilarityRecord, String, String)> {
    let text = |id: &str, r: &SimilarityRecord| {
        corpora
            .get(id)
            .and_then(|c| c.get(&r.verse_ref))
            .map(|v| v.clean_text.clone())
            .unwrap_or_default()
    };
    records
        .iter()
        .map(|r| (r.clone(), text(&r.pair.0, r), text(&r.pair.1, r)))
        .collect()
}

pub fn extremes_csv(rows: &[(SimilarityRecord, String, String)]) -> String {
    let mut out = vec![vec![
        "pair".to_string(),
        "chapter".into(),
        "verse".into(),
        "score".into(),
        "left".into(),
        "right".into(),
    ]];
    for (r, left, right) in rows {
        out.push(vec![
            pair_name(&r.pair.0, &r.pair.1),
            r.verse_ref.chapter.to_string(),
            r.verse_ref.verse.to_string(),
            r.score.to_string(),
            left.clone(),
            right.clone(),
        ]);
    }
    csv_string(&out)
}

pub fn extremes_json(rows: &[(SimilarityRecord, String, String)]) -> String {
    json_string(&Value::Array(
        rows.iter()
            .map(|(r, left, right)| {
                json!({
                    "pair": pair_name(&r.pair.0, &r.pair.1),
                    "chapter": r.verse_ref.chapter,
                    "verse": r.verse_ref.verse,
                    "score": r.score,
                    "left": left,
                    "right": right,
                })
            })
            .collect(),
    ))
}

/// Everything a report is computed from.
pub struct ReportInputs<'a> {
    pub corpora: &'a CorpusSet,
    pub predictions: &'a BTreeMap<String, SentimentPredictions>,
    pub embeddings: &'a BTreeMap<String, EmbeddingSet>,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub pairs: Vec<(String, String)>,
    pub chapters: ChapterSelection,
    pub output_dir: PathBuf,
    pub formats: Formats,
    pub stoplist: Stoplist,
    pub ngram_k: usize,
    pub extremes_k: usize,
    pub empty_policy: EmptyPairPolicy,
}

#[derive(Debug, Default)]
pub struct ReportSummary {
    /// Written files, relative to the output directory, in write order.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("unknown corpus {0:?}")]
    UnknownCorpus(String),
    #[error("no sentiment predictions for corpus {0:?}")]
    MissingPredictions(String),
    #[error("no embeddings for corpus {0:?}")]
    MissingEmbeddings(String),
    #[error("pair {0}: {1}")]
    Semantic(String, SemanticError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

struct Writer<'a> {
    root: &'a Path,
    formats: Formats,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn put(
        &mut self,
        enabled: bool,
        rel: PathBuf,
        body: impl FnOnce() -> String,
    ) -> Result<(), FormatError> {
        if enabled {
            write_text(&self.root.join(&rel), &body())?;
            self.files.push(rel);
        }
        Ok(())
    }
}

/// Computes and writes every report artifact for the configured pairs.
pub fn write_report(
    inputs: &ReportInputs,
    options: &ReportOptions,
) -> Result<ReportSummary, ReportError> {
    let mut w = Writer {
        root: &options.output_dir,
        formats: options.formats,
        files: Vec::new(),
    };
    let mut warnings = Vec::new();
    let corpus_ids: BTreeSet<&str> = options
        .pairs
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect();
    for id in &corpus_ids {
        if inputs.corpora.get(id).is_none() {
            return Err(ReportError::UnknownCorpus(id.to_string()));
        }
    }
    let preds = |id: &str| {
        inputs
            .predictions
            .get(id)
            .ok_or_else(|| ReportError::MissingPredictions(id.into()))
    };
    let embs = |id: &str| {
        inputs
            .embeddings
            .get(id)
            .ok_or_else(|| ReportError::MissingEmbeddings(id.into()))
    };

    let mut jaccard_columns = Vec::new();
    let mut cosine_columns = Vec::new();
    let mut all_records = Vec::new();
    for (a, b) in &options.pairs {
        let name = pair_name(a, b);
        let (column, warn) = jaccard_column(
            preds(a)?,
            preds(b)?,
            &options.chapters,
            options.empty_policy,
        );
        warnings.extend(warn);
        let table = JaccardTable::from_columns(&[(name.clone(), column.clone())]);
        w.put(w.formats.csv, Path::new(&name).join("jaccard.csv"), || {
            table.to_csv()
        })?;
        w.put(
            w.formats.json,
            Path::new(&name).join("jaccard.json"),
            || table.to_json(),
        )?;
        jaccard_columns.push((name.clone(), column));

        let (records, stats, warn) = cosine_column(embs(a)?, embs(b)?, &options.chapters)
            .map_err(|e| ReportError::Semantic(name.clone(), e))?;
        warnings.extend(warn);
        let table = CosineTable::from_columns(&[(name.clone(), stats.clone())]);
        w.put(w.formats.csv, Path::new(&name).join("cosine.csv"), || {
            table.to_csv()
        })?;
        w.put(w.formats.json, Path::new(&name).join("cosine.json"), || {
            table.to_json()
        })?;
        cosine_columns.push((name, stats));
        all_records.push(records);
    }
    let table = JaccardTable::from_columns(&jaccard_columns);
    w.put(w.formats.csv, "jaccard.csv".into(), || table.to_csv())?;
    w.put(w.formats.json, "jaccard.json".into(), || table.to_json())?;
    let table = CosineTable::from_columns(&cosine_columns);
    w.put(w.formats.csv, "cosine.csv".into(), || table.to_csv())?;
    w.put(w.formats.json, "cosine.json".into(), || table.to_json())?;

    for (direction, stem) in [
        (Direction::Most, "extremes_most"),
        (Direction::Least, "extremes_least"),
    ] {
        let picked: Vec<SimilarityRecord> = all_records
            .iter()
            .flat_map(|records| extremes(records, options.extremes_k, direction))
            .collect();
        let rows = extremes_rows(&picked, inputs.corpora);
        w.put(w.formats.csv, format!("{stem}.csv").into(), || {
            extremes_csv(&rows)
        })?;
        w.put(w.formats.json, format!("{stem}.json").into(), || {
            extremes_json(&rows)
        })?;
    }

    for id in &corpus_ids {
        let corpus = restrict_corpus(
            inputs.corpora.get(id).expect("checked above"),
            &options.chapters,
        );
        for n in [2, 3] {
            let top = top_ngrams(&corpus, n, options.ngram_k, &options.stoplist);
            let dir = Path::new(id);
            w.put(w.formats.csv, dir.join(format!("ngrams_{n}.csv")), || {
                ngram_csv(&top)
            })?;
            w.put(w.formats.svg, dir.join(format!("ngrams_{n}.svg")), || {
                ngram_svg(&format!("{id}: top {n}-grams"), &top)
            })?;
        }
        let p = restrict_predictions(preds(id)?, &options.chapters);
        w.put(w.formats.svg, Path::new(id).join("heatmap.svg"), || {
            heatmap_svg(&format!("{id}: sentiment co-occurrence"), &p)
        })?;
        w.put(
            w.formats.csv,
            Path::new(id).join("sentiment_cumulative.csv"),
            || cumulative_csv(&p),
        )?;
        w.put(
            w.formats.svg,
            Path::new(id).join("sentiment_cumulative.svg"),
            || cumulative_svg(&format!("{id}: verses per sentiment"), &p),
        )?;
    }

    Ok(ReportSummary {
        files: w.files,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_cell_format() {
        assert_eq!(format_cosine_cell(0.52, 0.156), "0.52(0.156)");
        assert_eq!(parse_cosine_cell("0.52(0.156)"), Some((0.52, 0.156)));
        assert_eq!(parse_cosine_cell("0.52"), None);
    }

    #[test]
    fn jaccard_table_average_row() {
        let t = JaccardTable::from_columns(&[
            ("A-B".into(), vec![(1, 0.5), (2, 0.25)]),
            ("A-C".into(), vec![(2, 1.0)]),
        ]);
        assert_eq!(t.averages(), [Some(0.375), Some(1.0)]);
        assert_eq!(
            t.to_csv(),
            "chapter,A-B,A-C\n1,0.500,\n2,0.250,1.000\nAverage,0.375,1.000\n"
        );
    }

    #[test]
    fn cosine_average_uses_mean_of_means_and_pooled_std() {
        let s = |chapter, mean, std, n| ChapterStats {
            chapter,
            mean,
            std,
            n,
        };
        let t = CosineTable::from_columns(&[(
            "A-B".into(),
            vec![s(1, 0.2, 0.0, 1), s(2, 0.6, 0.0, 3)],
        )]);
        let a = t.averages()[0].unwrap();
        assert!((a.mean_of_means - 0.4).abs() < 1e-12);
        assert!((a.pooled_mean - 0.5).abs() < 1e-12);
        assert!((a.pooled_std - 0.03f64.sqrt()).abs() < 1e-12);
        assert!(t.to_csv().ends_with("Average,0.40(0.173)\n"));
    }
}
