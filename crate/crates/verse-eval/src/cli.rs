//! The `verse-eval` command line.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 1 for
//! runtime failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use verse_eval_core::{
    chapter_counts, cooccurrence, embed_corpus, mmr_keywords, predict_corpus,
    sentiment_conditioned_ngrams, top_ngrams, CorpusMeta, CorpusSet, EmptyPairPolicy,
    KeywordConfig, SentimentLabel, Stoplist, Threshold, TranslationCorpus, VerseRef,
};

use crate::acquire::{
    build_parallel_corpus, HttpTranslator, ReplayProvider, TranslateOptions, TranslationCache,
    TranslationProvider,
};
use crate::config::{parse_pair, ChapterSelection, Formats, RunConfig};
use crate::exec::RetryPolicy;
use crate::formats::{
    corpus_dirs, embeddings_path, load_corpus, predictions_path, read_embeddings, read_predictions,
    save_corpus, write_embeddings, write_predictions,
};
use crate::providers::{ConfigError, ProviderConfig, ProviderKind};
use crate::report::{
    cosine_column, jaccard_column, ngram_csv, pair_name, restrict_corpus, restrict_predictions,
    write_report, CosineTable, JaccardTable, ReportInputs, ReportOptions,
};

pub const ENDPOINT_ENV: &str = "VERSE_EVAL_ENDPOINT";
pub const CACHE_ENV: &str = "VERSE_EVAL_CACHE";
/// Cache file created inside the translated corpus directory by default.
pub const DEFAULT_CACHE_FILE: &str = "translation_cache.jsonl";

#[derive(Debug, Parser)]
#[command(
    name = "verse-eval",
    version,
    about = "Compare verse-aligned translations of a text"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a corpus directory from a tab-separated `chapter verse text` file.
    Ingest(IngestArgs),
    /// Machine-translate a corpus into a new one.
    Translate(TranslateArgs),
    /// Most frequent n-grams of a corpus.
    Ngrams(NgramsArgs),
    /// Sentiment prediction and summaries.
    #[command(subcommand)]
    Sentiment(SentimentCommand),
    /// Per-chapter mean Jaccard agreement between two prediction files.
    Jaccard(JaccardArgs),
    /// Embed every verse of a corpus.
    Embed(EmbedArgs),
    /// Per-chapter cosine similarity between two embedding files.
    Semantic(SemanticArgs),
    /// MMR keyword extraction over a corpus.
    Keywords(KeywordsArgs),
    /// Compute and write every table and chart.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
enum SentimentCommand {
    /// Predict labels for every verse of a corpus.
    Predict(PredictArgs),
    /// Label counts and co-occurrence for a prediction file.
    Summary(SummaryArgs),
}

fn chapters_arg(s: &str) -> Result<ChapterSelection, String> {
    s.parse().map_err(|e: ConfigError| e.0)
}

fn formats_arg(s: &str) -> Result<Formats, String> {
    s.parse().map_err(|e: ConfigError| e.0)
}

fn pair_arg(s: &str) -> Result<(String, String), String> {
    parse_pair(s).map_err(|e| e.0)
}

#[derive(Debug, Args)]
struct ProviderArgs {
    /// Backend kind.
    #[arg(long, value_enum, default_value_t = KindArg::Mock)]
    provider: KindArg,
    /// Precomputed store for `--provider file`.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Service URL for `--provider http` (falls back to $VERSE_EVAL_ENDPOINT).
    #[arg(long)]
    endpoint: Option<String>,
    /// Texts per provider request.
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Concurrent requests to an http provider.
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    /// Attempts per request on transport errors.
    #[arg(long, default_value_t = 3)]
    max_attempts: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Mock,
    File,
    Http,
}

impl ProviderArgs {
    fn config(&self) -> Result<ProviderConfig, ConfigError> {
        let kind = match self.provider {
            KindArg::Mock => ProviderKind::Mock,
            KindArg::File => ProviderKind::File,
            KindArg::Http => ProviderKind::Http,
        };
        let endpoint = match kind {
            ProviderKind::Http => self
                .endpoint
                .clone()
                .or_else(|| std::env::var(ENDPOINT_ENV).ok()),
            _ => self.endpoint.clone(),
        };
        let config = ProviderConfig {
            kind,
            path: self.store.clone(),
            endpoint,
            batch_size: self.batch_size,
            timeout_secs: self.timeout,
            max_attempts: self.max_attempts,
            max_in_flight: self.max_in_flight,
            dim: None,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Tab-separated lines `chapter<TAB>verse<TAB>text`; `\n` in text is a line break.
    #[arg(long)]
    input: PathBuf,
    /// Corpus directory to create.
    #[arg(long)]
    out: PathBuf,
    /// Corpus id (no whitespace).
    #[arg(long)]
    id: String,
    /// Human-readable title.
    #[arg(long, default_value = "")]
    title: String,
    /// Name of the translator.
    #[arg(long, default_value = "")]
    translator: String,
    /// Language code of the verse texts.
    #[arg(long, default_value = "en")]
    language: String,
    /// Where the text came from.
    #[arg(long, default_value = "")]
    source: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TranslatorKind {
    Replay,
    Http,
}

#[derive(Debug, Args)]
struct TranslateArgs {
    /// Source corpus directory.
    #[arg(long)]
    corpus: PathBuf,
    /// Directory for the translated corpus.
    #[arg(long)]
    out: PathBuf,
    /// Id of the translated corpus.
    #[arg(long)]
    id: String,
    /// Translation backend.
    #[arg(long, value_enum, default_value_t = TranslatorKind::Replay)]
    provider: TranslatorKind,
    /// Recorded `{"source", "translation"}` JSONL for `--provider replay`.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Service URL for `--provider http` (falls back to $VERSE_EVAL_ENDPOINT).
    #[arg(long)]
    endpoint: Option<String>,
    /// Language code of the source verses.
    #[arg(long, default_value = "sa")]
    source_lang: String,
    /// Language code to translate into.
    #[arg(long, default_value = "en")]
    target_lang: String,
    /// Translation cache file (falls back to $VERSE_EVAL_CACHE, then to a file inside --out).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Verses per translation request.
    #[arg(long, default_value_t = 25)]
    batch_size: usize,
    /// Concurrent translation requests.
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    /// Requests per second; 0 disables limiting.
    #[arg(long, default_value_t = 5.0)]
    rate_limit: f64,
    /// Attempts per request on transport errors.
    #[arg(long, default_value_t = 3)]
    max_attempts: u32,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
}

#[derive(Debug, Args)]
struct StopArgs {
    /// Stopword file, one word per line (`#` starts a comment).
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Count stopwords too.
    #[arg(long)]
    keep_stopwords: bool,
}

impl StopArgs {
    fn stoplist(&self) -> anyhow::Result<Stoplist> {
        load_stoplist(self.keep_stopwords, self.stoplist.as_deref())
    }
}

fn load_stoplist(keep: bool, path: Option<&Path>) -> anyhow::Result<Stoplist> {
    if keep {
        return Ok(Stoplist::empty());
    }
    match path {
        Some(p) => Ok(Stoplist::parse(
            &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )),
        None => Ok(Stoplist::english()),
    }
}

#[derive(Debug, Args)]
struct NgramsArgs {
    /// Corpus directory.
    #[arg(long)]
    corpus: PathBuf,
    /// N-gram length.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// How many n-grams to list.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Chapters such as `3,5,7-12` or `all`.
    #[arg(long, value_parser = chapters_arg, default_value = "all")]
    chapters: ChapterSelection,
    #[command(flatten)]
    stop: StopArgs,
    /// Only count verses predicted to carry this sentiment label.
    #[arg(long, requires = "predictions")]
    label: Option<String>,
    /// Prediction file used with `--label`.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Corpus directory.
    #[arg(long)]
    corpus: PathBuf,
    /// Output prediction file (default `<preds-dir>/<id>.predictions.jsonl`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the default output file.
    #[arg(long, default_value = "predictions")]
    preds_dir: PathBuf,
    /// A label is predicted when its probability reaches this value.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Debug, Args)]
struct SummaryArgs {
    /// Prediction file.
    #[arg(long)]
    predictions: PathBuf,
    /// Chapters such as `3,5,7-12` or `all`.
    #[arg(long, value_parser = chapters_arg, default_value = "all")]
    chapters: ChapterSelection,
    /// Print the label co-occurrence matrix instead of per-chapter counts.
    #[arg(long)]
    cooccurrence: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct JaccardArgs {
    /// First corpus id.
    #[arg(long)]
    a: String,
    /// Second corpus id.
    #[arg(long)]
    b: String,
    /// Directory holding `<id>.predictions.jsonl` files.
    #[arg(long, default_value = "predictions")]
    preds_dir: PathBuf,
    /// Chapters such as `3,5,7-12` or `all`.
    #[arg(long, value_parser = chapters_arg, default_value = "all")]
    chapters: ChapterSelection,
    /// Leave verses where both label sets are empty out of the mean.
    #[arg(long)]
    skip_empty_pairs: bool,
    /// Table format.
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Corpus directory.
    #[arg(long)]
    corpus: PathBuf,
    /// Output file (default `<embeddings-dir>/<id>.embeddings.jsonl`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the default output file.
    #[arg(long, default_value = "embeddings")]
    embeddings_dir: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Debug, Args)]
struct SemanticArgs {
    /// First corpus id.
    #[arg(long)]
    a: String,
    /// Second corpus id.
    #[arg(long)]
    b: String,
    /// Directory holding `<id>.embeddings.jsonl` files.
    #[arg(long, default_value = "embeddings")]
    embeddings_dir: PathBuf,
    /// Chapters such as `3,5,7-12` or `all`.
    #[arg(long, value_parser = chapters_arg, default_value = "all")]
    chapters: ChapterSelection,
    /// Table format.
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
}

#[derive(Debug, Args)]
struct KeywordsArgs {
    /// Corpus directory.
    #[arg(long)]
    corpus: PathBuf,
    /// Chapters such as `3,5,7-12` or `all`.
    #[arg(long, value_parser = chapters_arg, default_value = "all")]
    chapters: ChapterSelection,
    /// How many keywords to select.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Relevance weight against redundancy, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Shortest candidate phrase, in tokens.
    #[arg(long, default_value_t = 1)]
    min_n: usize,
    /// Longest candidate phrase, in tokens.
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    /// Only the most frequent candidates are embedded.
    #[arg(long, default_value_t = 2000)]
    max_candidates: usize,
    #[command(flatten)]
    stop: StopArgs,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory with one sub-directory per corpus.
    #[arg(long)]
    corpora: Option<PathBuf>,
    /// Comma-separated pairs such as `GT:Gandhi,GT:Easwaran`.
    #[arg(long, value_parser = pair_arg, value_delimiter = ',')]
    pairs: Vec<(String, String)>,
    /// Chapters such as `3,5,7-12` or `all`.
    #[arg(long, value_parser = chapters_arg)]
    chapters: Option<ChapterSelection>,
    /// Report directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, value_parser = formats_arg)]
    formats: Option<Formats>,
    /// Sentiment probability threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Read `<id>.predictions.jsonl` from here instead of running the sentiment provider.
    #[arg(long)]
    preds_dir: Option<PathBuf>,
    /// Read `<id>.embeddings.jsonl` from here instead of running the embedding provider.
    #[arg(long)]
    embeddings_dir: Option<PathBuf>,
    /// Service URL for http providers (falls back to $VERSE_EVAL_ENDPOINT).
    #[arg(long)]
    endpoint: Option<String>,
}

/// Runs the command line with stdout as output; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(argv, &mut lock)
}

/// Like [`run`], writing command output to `out`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.downcast_ref::<ConfigError>().is_some()) {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::Ingest(a) => ingest(a, out),
        Command::Translate(a) => translate(a, out),
        Command::Ngrams(a) => ngrams(a, out),
        Command::Sentiment(SentimentCommand::Predict(a)) => predict(a, out),
        Command::Sentiment(SentimentCommand::Summary(a)) => summary(a, out),
        Command::Jaccard(a) => jaccard(a, out),
        Command::Embed(a) => embed(a, out),
        Command::Semantic(a) => semantic(a, out),
        Command::Keywords(a) => keywords(a, out),
        Command::Report(a) => report(a, out),
    }
}

fn load(dir: &Path) -> anyhow::Result<TranslationCorpus> {
    load_corpus(dir).with_context(|| format!("loading corpus {}", dir.display()))
}

fn ingest(a: IngestArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let mut corpus = TranslationCorpus::new(CorpusMeta {
        id: a.id,
        title: a.title,
        translator: a.translator,
        language: a.language,
        source: a.source,
    })
    .map_err(|e| ConfigError(e.to_string()))?;
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let mut parts = line.splitn(3, '\t');
        let (Some(ch), Some(v), Some(body)) = (parts.next(), parts.next(), parts.next()) else {
            bail!(
                "{}:{}: expected chapter<TAB>verse<TAB>text",
                a.input.display(),
                i + 1
            );
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<u32>()
                .with_context(|| format!("{}:{}: bad number {s:?}", a.input.display(), i + 1))
        };
        let verse_ref = VerseRef::new(parse(ch)?, parse(v)?)?;
        corpus
            .insert(verse_ref, body.replace("\\n", "\n"))
            .with_context(|| format!("{}:{}", a.input.display(), i + 1))?;
    }
    save_corpus(&corpus, &a.out)?;
    writeln!(out, "wrote {} verses to {}", corpus.len(), a.out.display())?;
    Ok(())
}

fn translate(a: TranslateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let source = load(&a.corpus)?;
    let provider: Box<dyn TranslationProvider> = match a.provider {
        TranslatorKind::Replay => {
            let Some(fixture) = &a.fixture else {
                return Err(ConfigError("--provider replay needs --fixture".into()).into());
            };
            Box::new(ReplayProvider::from_jsonl("replay", fixture)?)
        }
        TranslatorKind::Http => {
            let Some(endpoint) = a
                .endpoint
                .clone()
                .or_else(|| std::env::var(ENDPOINT_ENV).ok())
            else {
                return Err(ConfigError(format!(
                    "--provider http needs --endpoint or ${ENDPOINT_ENV}"
                ))
                .into());
            };
            Box::new(HttpTranslator::new(
                &endpoint,
                &a.source_lang,
                &a.target_lang,
                Duration::from_secs_f64(a.timeout.max(0.001)),
            ))
        }
    };
    let cache_path = a
        .cache
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| a.out.join(DEFAULT_CACHE_FILE));
    let cache = TranslationCache::open(&cache_path)?;
    let options = TranslateOptions {
        batch_size: a.batch_size,
        max_in_flight: a.max_in_flight,
        rate_limit: a.rate_limit,
        retry: RetryPolicy {
            max_attempts: a.max_attempts,
            ..RetryPolicy::default()
        },
    };
    let (corpus, warnings) =
        build_parallel_corpus(&source, provider.as_ref(), &cache, &a.id, &options)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    save_corpus(&corpus, &a.out)?;
    writeln!(
        out,
        "translated {} of {} verses into {}",
        corpus.len(),
        source.len(),
        a.out.display()
    )?;
    Ok(())
}

fn ngrams(a: NgramsArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    if a.n == 0 {
        return Err(ConfigError("--n must be at least 1".into()).into());
    }
    let corpus = restrict_corpus(&load(&a.corpus)?, &a.chapters);
    let stoplist = a.stop.stoplist()?;
    let top = match (&a.label, &a.predictions) {
        (Some(label), Some(path)) => {
            let label = SentimentLabel::parse(label).map_err(|e| ConfigError(e.to_string()))?;
            let preds = read_predictions(path)?;
            let (top, warnings) =
                sentiment_conditioned_ngrams(&corpus, &preds, label, a.n, a.k, &stoplist);
            for w in warnings {
                eprintln!("warning: {w}");
            }
            top
        }
        _ => top_ngrams(&corpus, a.n, a.k, &stoplist),
    };
    out.write_all(ngram_csv(&top).as_bytes())?;
    Ok(())
}

fn predict(a: PredictArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let corpus = load(&a.corpus)?;
    let threshold = Threshold::new(a.threshold).map_err(|e| ConfigError(e.to_string()))?;
    let config = a.provider.config()?;
    let provider = config.sentiment_provider()?;
    let predictions = predict_corpus(provider.as_ref(), &corpus, threshold, config.batch_size)?;
    let path = a
        .out
        .unwrap_or_else(|| predictions_path(&a.preds_dir, corpus.id()));
    write_predictions(&path, &predictions)?;
    writeln!(
        out,
        "wrote {} predictions to {}",
        predictions.len(),
        path.display()
    )?;
    Ok(())
}

fn summary(a: SummaryArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let preds = restrict_predictions(&read_predictions(&a.predictions)?, &a.chapters);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if a.cooccurrence {
        let m = cooccurrence(&preds);
        w.write_record(std::iter::once("label").chain(SentimentLabel::names()))?;
        for (label, row) in SentimentLabel::ALL.iter().zip(m.0.iter()) {
            w.write_record(
                std::iter::once(label.name().to_string()).chain(row.iter().map(u64::to_string)),
            )?;
        }
    } else {
        w.write_record(std::iter::once("chapter").chain(SentimentLabel::names()))?;
        for ch in preds.chapters() {
            let counts = chapter_counts(&preds, ch);
            w.write_record(
                std::iter::once(ch.to_string()).chain(counts.0.iter().map(u64::to_string)),
            )?;
        }
        let total = verse_eval_core::cumulative_counts(&preds);
        w.write_record(
            std::iter::once("total".to_string()).chain(total.0.iter().map(u64::to_string)),
        )?;
    }
    out.write_all(&w.into_inner()?)?;
    Ok(())
}

fn jaccard(a: JaccardArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let pa = read_predictions(&predictions_path(&a.preds_dir, &a.a))?;
    let pb = read_predictions(&predictions_path(&a.preds_dir, &a.b))?;
    let policy = if a.skip_empty_pairs {
        EmptyPairPolicy::Skip
    } else {
        EmptyPairPolicy::Agree
    };
    let (column, warnings) = jaccard_column(&pa, &pb, &a.chapters, policy);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if column.is_empty() {
        bail!("no chapter could be scored for {}", pair_name(&a.a, &a.b));
    }
    let table = JaccardTable::from_columns(&[(pair_name(&a.a, &a.b), column)]);
    let text = match a.format {
        TableFormat::Csv => table.to_csv(),
        TableFormat::Json => table.to_json(),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn embed(a: EmbedArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let corpus = load(&a.corpus)?;
    let config = a.provider.config()?;
    let provider = config.embedding_provider()?;
    let set = embed_corpus(provider.as_ref(), &corpus, config.batch_size)?;
    let path = a
        .out
        .unwrap_or_else(|| embeddings_path(&a.embeddings_dir, corpus.id()));
    write_embeddings(&path, &set)?;
    writeln!(out, "wrote {} embeddings to {}", set.len(), path.display())?;
    Ok(())
}

fn semantic(a: SemanticArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let ea = read_embeddings(&embeddings_path(&a.embeddings_dir, &a.a))?;
    let eb = read_embeddings(&embeddings_path(&a.embeddings_dir, &a.b))?;
    let (_, stats, warnings) = cosine_column(&ea, &eb, &a.chapters)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if stats.is_empty() {
        bail!("no chapter could be scored for {}", pair_name(&a.a, &a.b));
    }
    let table = CosineTable::from_columns(&[(pair_name(&a.a, &a.b), stats)]);
    let text = match a.format {
        TableFormat::Csv => table.to_csv(),
        TableFormat::Json => table.to_json(),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn keywords(a: KeywordsArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let corpus = restrict_corpus(&load(&a.corpus)?, &a.chapters);
    let document: Vec<&str> = corpus.verses().map(|v| v.clean_text.as_str()).collect();
    let config = a.provider.config()?;
    let provider = config.embedding_provider()?;
    let settings = KeywordConfig {
        ngram_range: (a.min_n, a.max_n),
        k: a.k,
        lambda: a.lambda,
        max_candidates: a.max_candidates,
        batch_size: config.batch_size,
    };
    let found = mmr_keywords(
        &document.join("\n"),
        provider.as_ref(),
        &a.stop.stoplist()?,
        &settings,
    )
    .map_err(|e| match e {
        verse_eval_core::KeywordError::InvalidConfig => {
            anyhow::Error::new(ConfigError(e.to_string()))
        }
        other => anyhow::Error::new(other),
    })?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["rank", "keyword", "relevance"])?;
    for (i, k) in found.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            k.phrase.clone(),
            format!("{:.4}", k.relevance),
        ])?;
    }
    out.write_all(&w.into_inner()?)?;
    Ok(())
}

fn report(a: ReportArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut config = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let endpoint = a
        .endpoint
        .clone()
        .or_else(|| std::env::var(ENDPOINT_ENV).ok());
    for provider in [
        &mut config.sentiment.provider,
        &mut config.semantic.provider,
    ] {
        if provider.kind == ProviderKind::Http {
            if let Some(e) = &endpoint {
                provider.endpoint = Some(e.clone());
            }
        }
    }
    if let Some(t) = a.threshold {
        config.sentiment.threshold = t;
    }
    config.validate()?;

    let corpora_dir = a
        .corpora
        .clone()
        .or(config.corpus.dir.clone())
        .ok_or_else(|| ConfigError("no corpora directory (--corpora or [corpus] dir)".into()))?;
    let pairs: Vec<(String, String)> = if a.pairs.is_empty() {
        config
            .report
            .pairs
            .iter()
            .map(|p| parse_pair(p))
            .collect::<Result<_, _>>()?
    } else {
        a.pairs.clone()
    };
    if pairs.is_empty() {
        return Err(ConfigError("no pairs to compare (--pairs or [report] pairs)".into()).into());
    }
    let chapters = match a.chapters.clone() {
        Some(c) => c,
        None => config.report.chapters.parse()?,
    };
    let formats = match a.formats {
        Some(f) => f,
        None => config.report.formats.join(",").parse()?,
    };
    if formats == Formats::default() {
        return Err(ConfigError("at least one output format is required".into()).into());
    }
    let output_dir = a.output.clone().unwrap_or(config.report.output.clone());

    let mut corpora = CorpusSet::new();
    for dir in corpus_dirs(&corpora_dir)? {
        corpora.insert(load(&dir)?)?;
    }
    let threshold =
        Threshold::new(config.sentiment.threshold).map_err(|e| ConfigError(e.to_string()))?;
    let ids: Vec<String> = pairs
        .iter()
        .flat_map(|(x, y)| [x.clone(), y.clone()])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    for id in &ids {
        if corpora.get(id).is_none() {
            bail!("corpus {id:?} not found under {}", corpora_dir.display());
        }
    }

    let mut predictions = BTreeMap::new();
    let mut embeddings = BTreeMap::new();
    let sentiment = match a.preds_dir {
        None => Some(config.sentiment.provider.sentiment_provider()?),
        Some(_) => None,
    };
    let embedder = match a.embeddings_dir {
        None => Some(config.semantic.provider.embedding_provider()?),
        Some(_) => None,
    };
    for id in &ids {
        let corpus = corpora.get(id).expect("checked above");
        let p = match (&a.preds_dir, &sentiment) {
            (Some(dir), _) => read_predictions(&predictions_path(dir, id))?,
            (None, Some(provider)) => predict_corpus(
                provider.as_ref(),
                corpus,
                threshold,
                config.sentiment.provider.batch_size,
            )?,
            (None, None) => unreachable!(),
        };
        predictions.insert(id.clone(), p);
        let e = match (&a.embeddings_dir, &embedder) {
            (Some(dir), _) => read_embeddings(&embeddings_path(dir, id))?,
            (None, Some(provider)) => embed_corpus(
                provider.as_ref(),
                corpus,
                config.semantic.provider.batch_size,
            )?,
            (None, None) => unreachable!(),
        };
        embeddings.insert(id.clone(), e);
    }

    let stoplist = load_stoplist(config.text.keep_stopwords, config.text.stoplist.as_deref())?;
    let options = ReportOptions {
        pairs,
        chapters,
        output_dir: output_dir.clone(),
        formats,
        stoplist,
        ngram_k: config.text.top_k,
        extremes_k: config.semantic.extremes_k,
        empty_policy: if config.sentiment.skip_empty_pairs {
            EmptyPairPolicy::Skip
        } else {
            EmptyPairPolicy::Agree
        },
    };
    let summary = write_report(
        &ReportInputs {
            corpora: &corpora,
            predictions: &predictions,
            embeddings: &embeddings,
        },
        &options,
    )?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    writeln!(
        out,
        "wrote {} files under {}",
        summary.files.len(),
        output_dir.display()
    )?;
    Ok(())
}
