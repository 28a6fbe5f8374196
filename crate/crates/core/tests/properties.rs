//! Property tests and brute-force oracles for the core operations.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use unicode_normalization::UnicodeNormalization;
use verse_eval_core::keywords::mmr_select;
use verse_eval_core::mock::MockEmbedder;
use verse_eval_core::sentiment::{chapter_counts, LABEL_COUNT};
use verse_eval_core::*;

fn meta(id: &str) -> CorpusMeta {
    CorpusMeta {
        id: id.into(),
        title: id.into(),
        translator: "prop".into(),
        language: "en".into(),
        source: "proptest".into(),
    }
}

fn corpus_from(id: &str, verses: &BTreeMap<(u32, u32), String>) -> TranslationCorpus {
    let mut c = TranslationCorpus::new(meta(id)).unwrap();
    for (&(ch, v), text) in verses {
        c.insert(VerseRef::new(ch, v).unwrap(), text.clone())
            .unwrap();
    }
    c
}

fn refs_strategy() -> impl Strategy<Value = BTreeSet<(u32, u32)>> {
    prop::collection::btree_set((1u32..5, 1u32..8), 0..20)
}

fn label_set() -> impl Strategy<Value = LabelSet> {
    (0u16..1024).prop_map(LabelSet::from_bits)
}

fn predictions(id: &'static str) -> impl Strategy<Value = SentimentPredictions> {
    prop::collection::btree_map(
        (1u32..4, 1u32..10),
        prop::array::uniform10(0.0f64..=1.0),
        0..30,
    )
    .prop_map(move |rows| {
        let mut p = SentimentPredictions::new(id, Threshold::default());
        for ((ch, v), probs) in rows {
            p.insert(
                VerseRef::new(ch, v).unwrap(),
                SentimentProbabilities::new(probs).unwrap(),
            );
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn clean_is_idempotent(s in any::<String>()) {
        let once = clean_verse(&s);
        prop_assert_eq!(clean_verse(&once), once.clone());
    }

    #[test]
    fn clean_output_shape(s in "[a-zA-Z0-9 .,;:|\n\t\r#*\u{964}\u{965}\u{915}-\u{94D}\u{966}-\u{96F}-]{0,60}") {
        let out = clean_verse(&s);
        prop_assert!(!out.contains('\n') && !out.contains('\r'));
        prop_assert_eq!(out.trim(), out.as_str());
        prop_assert!(!out.contains("  "));
        let nfc: String = s.nfc().collect();
        prop_assert!(out.chars().count() <= nfc.chars().count());
    }

    #[test]
    fn tokens_never_contain_whitespace(s in any::<String>()) {
        let t = tokenize(&s);
        for token in t.tokens() {
            prop_assert!(!token.is_empty());
            prop_assert!(!token.chars().any(char::is_whitespace));
        }
    }

    #[test]
    fn stopword_removal_partitions(words in prop::collection::vec("[a-e]{1,2}", 0..30),
                                   stop in prop::collection::btree_set("[a-e]{1,2}", 0..6)) {
        let text = words.join(" ");
        let tokens = tokenize(&text);
        let stoplist: Stoplist = stop.iter().cloned().collect();
        let kept = remove_stopwords(&tokens, &stoplist);
        let removed = tokens.tokens().iter().filter(|t| stop.contains(*t)).count();
        prop_assert_eq!(kept.len() + removed, tokens.len());
        // order-preserving subsequence
        let mut it = tokens.tokens().iter();
        for k in kept.tokens() {
            prop_assert!(it.any(|t| t == k));
        }
    }

    #[test]
    fn ngram_count_identity(words in prop::collection::vec("[a-d]", 0..15), n in 1usize..5) {
        let mut c = TranslationCorpus::new(meta("x")).unwrap();
        if !words.is_empty() {
            c.insert(VerseRef::new(1, 1).unwrap(), words.join(" ")).unwrap();
        }
        let m = words.len();
        let table = verse_eval_core::textstats::corpus_ngrams(&c, n, &Stoplist::empty());
        prop_assert_eq!(table.total() as usize, (m + 1).saturating_sub(n));
    }

    #[test]
    fn align_matches_set_intersection(a in refs_strategy(), b in refs_strategy()) {
        let ca = corpus_from("a", &a.iter().map(|r| (*r, "x".to_string())).collect());
        let cb = corpus_from("b", &b.iter().map(|r| (*r, "y".to_string())).collect());
        let (ab, wab) = align(&ca, &cb);
        let (ba, _) = align(&cb, &ca);
        let expected: Vec<(u32, u32)> = a.intersection(&b).copied().collect();
        let got: Vec<(u32, u32)> = ab.iter().map(|p| (p.verse_ref.chapter, p.verse_ref.verse)).collect();
        let got_rev: Vec<(u32, u32)> = ba.iter().map(|p| (p.verse_ref.chapter, p.verse_ref.verse)).collect();
        prop_assert_eq!(&got, &expected);
        prop_assert_eq!(&got_rev, &expected);
        prop_assert!(ab.len() <= a.len().min(b.len()));
        prop_assert_eq!(wab.len(), a.symmetric_difference(&b).count());
    }

    #[test]
    fn chapter_slices_partition_corpus(a in refs_strategy()) {
        let c = corpus_from("a", &a.iter().map(|r| (*r, "x".to_string())).collect());
        let mut seen = Vec::new();
        for ch in 1..6 {
            let slice = chapter_slice(&c, ch);
            prop_assert!(slice.windows(2).all(|w| w[0].verse_ref.verse < w[1].verse_ref.verse));
            seen.extend(slice.iter().map(|v| (v.verse_ref.chapter, v.verse_ref.verse)));
        }
        prop_assert_eq!(seen, a.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn jaccard_laws(a in label_set(), b in label_set()) {
        let j = jaccard(a, b);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard(b, a));
        prop_assert_eq!(jaccard(a, a), 1.0);
    }

    #[test]
    fn chapter_jaccard_reflexive(p in predictions("p")) {
        for ch in p.chapters() {
            prop_assert_eq!(chapter_jaccard(&p, &p, ch, EmptyPairPolicy::Agree), Ok(1.0));
        }
    }

    #[test]
    fn cumulative_double_counting(p in predictions("p")) {
        let total: usize = p.iter().map(|(_, v)| v.labels.len()).sum();
        prop_assert_eq!(cumulative_counts(&p).total() as usize, total);
        let per_chapter: u64 = p.chapters().into_iter().map(|ch| chapter_counts(&p, ch).total()).sum();
        prop_assert_eq!(per_chapter as usize, total);
    }

    #[test]
    fn stored_labels_are_binarized(p in predictions("p")) {
        for (_, v) in p.iter() {
            prop_assert_eq!(v.labels, binarize(&v.probabilities, p.threshold()));
        }
    }

    #[test]
    fn conditioned_ngrams_subset(words in prop::collection::vec(prop::collection::vec("[a-c]", 1..6), 1..10),
                                 flags in prop::collection::vec(any::<bool>(), 10)) {
        let verses: BTreeMap<(u32, u32), String> = words.iter().enumerate()
            .map(|(i, w)| ((1, i as u32 + 1), w.join(" "))).collect();
        let c = corpus_from("c", &verses);
        let mut preds = SentimentPredictions::new("c", Threshold::default());
        for (i, _) in words.iter().enumerate() {
            let mut probs = [0.0; LABEL_COUNT];
            if flags[i] { probs[0] = 0.9; }
            preds.insert(VerseRef::new(1, i as u32 + 1).unwrap(), SentimentProbabilities::new(probs).unwrap());
        }
        let all: BTreeMap<_, _> = top_ngrams(&c, 2, usize::MAX, &Stoplist::empty()).into_iter().collect();
        let (cond, _) = sentiment_conditioned_ngrams(&c, &preds, SentimentLabel::Optimistic, 2, usize::MAX, &Stoplist::empty());
        for (g, count) in cond {
            prop_assert!(all.get(&g).is_some_and(|c| *c >= count));
        }
    }

    #[test]
    fn cosine_laws(u in prop::collection::vec(-10.0f64..10.0, 16), v in prop::collection::vec(-10.0f64..10.0, 16),
                   alpha in 0.01f64..100.0, beta in 0.01f64..100.0) {
        prop_assume!(u.iter().any(|x| *x != 0.0) && v.iter().any(|x| *x != 0.0));
        let c = cosine(&u, &v).unwrap();
        prop_assert!((c - cosine(&v, &u).unwrap()).abs() <= 1e-12);
        prop_assert!(c.abs() <= 1.0 + 1e-9);
        let su: Vec<f64> = u.iter().map(|x| alpha * x).collect();
        let sv: Vec<f64> = v.iter().map(|x| beta * x).collect();
        prop_assert!((cosine(&su, &sv).unwrap() - c).abs() <= 1e-9);
    }

    #[test]
    fn chapter_stats_two_pass(scores in prop::collection::vec(-1.0f64..1.0, 1..60)) {
        let records: Vec<SimilarityRecord> = scores.iter().enumerate().map(|(i, s)| SimilarityRecord {
            verse_ref: VerseRef::new(1, i as u32 + 1).unwrap(),
            score: *s,
            pair: ("a".into(), "b".into()),
        }).collect();
        let stats = chapter_stats(&records, 1).unwrap();
        let n = scores.len() as f64;
        let mut sum = 0.0;
        for s in &scores { sum += s; }
        let mean = sum / n;
        let mut sq = 0.0;
        for s in &scores { sq += (s - mean) * (s - mean); }
        let std = (sq / n).sqrt();
        prop_assert!((stats.mean - mean).abs() <= 1e-12);
        prop_assert!((stats.std - std).abs() <= 1e-12);
        prop_assert!(stats.std >= 0.0);
    }

    #[test]
    fn extremes_partition(scores in prop::collection::btree_set(0u32..100_000, 1..40), k in 0usize..40) {
        let records: Vec<SimilarityRecord> = scores.iter().enumerate().map(|(i, s)| SimilarityRecord {
            verse_ref: VerseRef::new(1 + (i as u32 % 3), i as u32 + 1).unwrap(),
            score: *s as f64 / 100_000.0,
            pair: ("a".into(), "b".into()),
        }).collect();
        let n = records.len();
        let k = k.min(n);
        let most = extremes(&records, k, Direction::Most);
        let least = extremes(&records, n - k, Direction::Least);
        let mut union: Vec<VerseRef> = most.iter().chain(least.iter()).map(|r| r.verse_ref).collect();
        union.sort();
        let mut all: Vec<VerseRef> = records.iter().map(|r| r.verse_ref).collect();
        all.sort();
        prop_assert_eq!(union, all);
    }

    #[test]
    fn mmr_first_pick_is_relevance_argmax(rel in prop::collection::vec(-1.0f64..1.0, 1..12), lambda in 0.01f64..=1.0) {
        let picks = mmr_select(&rel, |i, j| if i == j { 1.0 } else { 0.3 }, 3, lambda);
        let best = rel.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(rel[picks[0]], best);
        let distinct: BTreeSet<usize> = picks.iter().copied().collect();
        prop_assert_eq!(distinct.len(), picks.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn mock_vectors_never_zero(s in any::<String>()) {
        let v = MockEmbedder::default().vector(&s);
        prop_assert!(v.iter().map(|x| x * x).sum::<f64>() > 0.0);
    }
}

#[test]
fn cooccurrence_properties_against_pair_enumeration() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..200 {
        let p = predictions("p").new_tree(&mut runner).unwrap().current();
        let m = cooccurrence(&p);
        let mut brute = [[0u64; LABEL_COUNT]; LABEL_COUNT];
        for (_, v) in p.iter() {
            for i in 0..LABEL_COUNT {
                for j in 0..LABEL_COUNT {
                    let li = SentimentLabel::from_index(i).unwrap();
                    let lj = SentimentLabel::from_index(j).unwrap();
                    if v.labels.contains(li) && v.labels.contains(lj) {
                        brute[i][j] += 1;
                    }
                }
            }
        }
        assert_eq!(m.0, brute);
        for i in 0..LABEL_COUNT {
            for j in 0..LABEL_COUNT {
                assert_eq!(m.0[i][j], m.0[j][i]);
                assert!(m.0[i][i] >= m.0[i][j]);
            }
        }
        assert_eq!(m.diagonal(), cumulative_counts(&p));
    }
}
