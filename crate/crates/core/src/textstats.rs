//! Tokenization, stopword filtering and n-gram counts.
//!
//! N-grams are counted per verse and never span two verses. Ranked output is
//! ordered by descending count, ties by the n-gram's token sequence.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{TranslationCorpus, Warning};
use crate::sentiment::{SentimentLabel, SentimentPredictions};

const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Lowercase word tokens; none is empty or contains whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric()
        || is_joiner(c)
        || matches!(c, '\u{300}'..='\u{36F}')
        || (matches!(c, '\u{900}'..='\u{97F}') && !matches!(c, '\u{964}' | '\u{965}'))
}

/// Lowercases, splits on whitespace and punctuation, trims apostrophes and
/// hyphens from token edges and drops purely numeric tokens. Curly
/// apostrophes are folded to `'`.
pub fn tokenize(text: &str) -> TokenSequence {
    let lowered = text.to_lowercase();
    let tokens = lowered
        .split(|c: char| !is_token_char(c))
        .map(|piece| piece.trim_matches(is_joiner))
        .filter(|t| !t.is_empty() && !t.chars().all(char::is_numeric))
        .map(|t| t.replace('\u{2019}', "'"))
        .collect();
    TokenSequence(tokens)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stoplist(BTreeSet<String>);

impl Stoplist {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled 179-word English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    /// One token per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_lowercase())
                .collect(),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<String> for Stoplist {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

pub fn remove_stopwords(tokens: &TokenSequence, stoplist: &Stoplist) -> TokenSequence {
    TokenSequence(
        tokens
            .0
            .iter()
            .filter(|t| !stoplist.contains(t))
            .cloned()
            .collect(),
    )
}

pub type NGram = Vec<String>;

/// Counts of n-token windows. Every key has exactly `n` tokens and a count of
/// at least one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramTable {
    n: usize,
    counts: BTreeMap<NGram, u64>,
}

impl NGramTable {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            counts: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds every window of one token sequence; `max(0, m - n + 1)` windows.
    pub fn add_tokens(&mut self, tokens: &[String]) {
        if self.n == 0 {
            return;
        }
        for window in tokens.windows(self.n) {
            *self.counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: &NGramTable) {
        debug_assert_eq!(self.n, other.n);
        for (k, v) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += v;
        }
    }

    pub fn get(&self, ngram: &[String]) -> u64 {
        self.counts.get(ngram).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NGram, u64)> {
        self.counts.iter().map(|(k, v)| (k, *v))
    }

    /// At most `k` entries, count descending, ties by token sequence.
    pub fn top(&self, k: usize) -> Vec<(NGram, u64)> {
        let mut ranked: Vec<(NGram, u64)> =
            self.counts.iter().map(|(g, c)| (g.clone(), *c)).collect();
        // BTreeMap iteration is already key-ordered, so a stable sort on the
        // count alone keeps lexicographic tie order.
        ranked.sort_by_key(|r| core::cmp::Reverse(r.1));
        ranked.truncate(k);
        ranked
    }
}

fn verse_tokens(text: &str, stoplist: &Stoplist) -> TokenSequence {
    remove_stopwords(&tokenize(text), stoplist)
}

/// N-gram table of all verses (clean text) in `corpus`.
pub fn corpus_ngrams(corpus: &TranslationCorpus, n: usize, stoplist: &Stoplist) -> NGramTable {
    let mut table = NGramTable::new(n);
    for verse in corpus.verses() {
        table.add_tokens(verse_tokens(&verse.clean_text, stoplist).tokens());
    }
    table
}

pub fn top_ngrams(
    corpus: &TranslationCorpus,
    n: usize,
    k: usize,
    stoplist: &Stoplist,
) -> Vec<(NGram, u64)> {
    corpus_ngrams(corpus, n, stoplist).top(k)
}

/// Like [`top_ngrams`] but only over verses whose predicted label set
/// contains `label`. Verses without a prediction are skipped with a warning.
pub fn sentiment_conditioned_ngrams(
    corpus: &TranslationCorpus,
    predictions: &SentimentPredictions,
    label: SentimentLabel,
    n: usize,
    k: usize,
    stoplist: &Stoplist,
) -> (Vec<(NGram, u64)>, Vec<Warning>) {
    let mut table = NGramTable::new(n);
    let mut warnings = Vec::new();
    for verse in corpus.verses() {
        match predictions.get(&verse.verse_ref) {
            Some(p) if p.labels.contains(label) => {
                table.add_tokens(verse_tokens(&verse.clean_text, stoplist).tokens());
            }
            Some(_) => {}
            None => warnings.push(Warning::MissingEntry {
                verse_ref: verse.verse_ref,
                corpus_id: predictions.corpus_id().into(),
            }),
        }
    }
    (table.top(k), warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusMeta, VerseRef};
    use crate::sentiment::{SentimentProbabilities, Threshold};
    use alloc::vec;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| String::from(*s)).collect()
    }

    fn corpus(verses: &[((u32, u32), &str)]) -> TranslationCorpus {
        let mut c = TranslationCorpus::new(CorpusMeta {
            id: "T".into(),
            title: "t".into(),
            translator: "t".into(),
            language: "en".into(),
            source: "test".into(),
        })
        .unwrap();
        for &((ch, v), text) in verses {
            c.insert(VerseRef::new(ch, v).unwrap(), text.into())
                .unwrap();
        }
        c
    }

    #[test]
    fn tokenize_strips_punctuation() {
        assert_eq!(
            tokenize("The mind, grace, silence,").into_inner(),
            strings(&["the", "mind", "grace", "silence"])
        );
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_keeps_internal_joiners_drops_numbers() {
        assert_eq!(
            tokenize("'Self-control' isn\u{2019}t 42 -x- 3rd").into_inner(),
            strings(&["self-control", "isn't", "x", "3rd"])
        );
    }

    #[test]
    fn stopword_filter() {
        let stop: Stoplist = [String::from("the")].into_iter().collect();
        let t = TokenSequence(strings(&["the", "supreme", "personality"]));
        assert_eq!(
            remove_stopwords(&t, &stop).into_inner(),
            strings(&["supreme", "personality"])
        );
        assert_eq!(remove_stopwords(&t, &Stoplist::empty()), t);
    }

    #[test]
    fn bundled_list() {
        let s = Stoplist::english();
        assert_eq!(s.len(), 179);
        assert!(s.contains("of") && s.contains("don't"));
        assert!(!s.contains("without"));
    }

    #[test]
    fn bigrams_of_one_verse() {
        let c = corpus(&[((1, 1), "a b c")]);
        let table = corpus_ngrams(&c, 2, &Stoplist::empty());
        assert_eq!(table.len(), 2);
        assert_eq!(table.get(&strings(&["a", "b"])), 1);
        assert_eq!(table.get(&strings(&["b", "c"])), 1);
    }

    #[test]
    fn ngrams_do_not_cross_verses() {
        let c = corpus(&[((1, 1), "a b"), ((1, 2), "c d")]);
        let table = corpus_ngrams(&c, 2, &Stoplist::empty());
        assert_eq!(table.get(&strings(&["b", "c"])), 0);
        assert_eq!(table.total(), 2);
    }

    #[test]
    fn ranking_breaks_ties_lexicographically() {
        let c = corpus(&[
            ((1, 1), "z y"),
            ((1, 2), "b c"),
            ((1, 3), "a b"),
            ((1, 4), "z y"),
        ]);
        let top = top_ngrams(&c, 2, 3, &Stoplist::empty());
        assert_eq!(
            top,
            vec![
                (strings(&["z", "y"]), 2),
                (strings(&["a", "b"]), 1),
                (strings(&["b", "c"]), 1)
            ]
        );
    }

    #[test]
    fn stopwords_removed_before_windowing() {
        let c = corpus(&[((1, 1), "the Supreme Personality of Godhead")]);
        let top = top_ngrams(&c, 2, 10, &Stoplist::english());
        assert_eq!(
            top,
            vec![
                (strings(&["personality", "godhead"]), 1),
                (strings(&["supreme", "personality"]), 1)
            ]
        );
    }

    #[test]
    fn conditioned_on_label() {
        let c = corpus(&[((1, 1), "a b"), ((1, 2), "c d")]);
        let mut preds = SentimentPredictions::new("T", Threshold::new(0.5).unwrap());
        let mut p = [0.0; 10];
        p[0] = 0.9;
        preds.insert(
            VerseRef::new(1, 1).unwrap(),
            SentimentProbabilities::new(p).unwrap(),
        );
        preds.insert(
            VerseRef::new(1, 2).unwrap(),
            SentimentProbabilities::new([0.0; 10]).unwrap(),
        );
        let (top, warnings) = sentiment_conditioned_ngrams(
            &c,
            &preds,
            SentimentLabel::Optimistic,
            2,
            10,
            &Stoplist::empty(),
        );
        assert_eq!(top, vec![(strings(&["a", "b"]), 1)]);
        assert!(warnings.is_empty());

        let (none, _) = sentiment_conditioned_ngrams(
            &c,
            &preds,
            SentimentLabel::Sad,
            2,
            10,
            &Stoplist::empty(),
        );
        assert!(none.is_empty());
    }

    #[test]
    fn conditioned_warns_on_missing_prediction() {
        let c = corpus(&[((1, 1), "a b")]);
        let preds = SentimentPredictions::new("T", Threshold::new(0.5).unwrap());
        let (top, warnings) = sentiment_conditioned_ngrams(
            &c,
            &preds,
            SentimentLabel::Optimistic,
            2,
            10,
            &Stoplist::empty(),
        );
        assert!(top.is_empty());
        assert_eq!(warnings.len(), 1);
    }
}
