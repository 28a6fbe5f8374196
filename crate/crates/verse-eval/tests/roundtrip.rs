use proptest::prelude::*;
use verse_eval::formats::{
    load_corpus, read_embeddings, read_predictions, save_corpus, write_embeddings,
    write_predictions, FormatError,
};
use verse_eval::providers::{FileEmbeddingStore, FileSentimentStore};
use verse_eval_core::{
    CorpusMeta, EmbeddingProvider, EmbeddingSet, EmbeddingVector, SentimentPredictions,
    SentimentProbabilities, SentimentProvider, Threshold, TranslationCorpus, VerseRef,
};

fn probability() -> impl Strategy<Value = f64> {
    prop_oneof![
        0.0..=1.0f64,
        Just(0.0),
        Just(1.0),
        Just(0.5),
        Just(0.1 + 0.2 - 0.2)
    ]
}

fn component() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        Just(f64::MIN_POSITIVE),
        Just(-0.0),
        Just(1.0 / 3.0),
        Just(1e-300)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn predictions_round_trip(rows in prop::collection::vec(prop::array::uniform10(probability()), 1..20), t in 0.01..0.99f64) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let mut preds = SentimentPredictions::new("X", Threshold::new(t).unwrap());
        for (i, row) in rows.iter().enumerate() {
            preds.insert(VerseRef::new(1, i as u32 + 1).unwrap(), SentimentProbabilities::new(*row).unwrap());
        }
        write_predictions(&path, &preds).unwrap();
        let back = read_predictions(&path).unwrap();
        prop_assert_eq!(back.threshold().value().to_bits(), t.to_bits());
        let a: Vec<_> = preds.iter().collect();
        let b: Vec<_> = back.iter().collect();
        prop_assert_eq!(a, b);
        let bytes = std::fs::read(&path).unwrap();
        write_predictions(&path, &back).unwrap();
        prop_assert_eq!(bytes, std::fs::read(&path).unwrap());
    }

    #[test]
    fn embeddings_round_trip(vectors in prop::collection::vec(prop::collection::vec(component(), 4), 1..10)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        let mut set = EmbeddingSet::new("X", "m", 4);
        for (i, v) in vectors.iter().enumerate() {
            set.insert(VerseRef::new(2, i as u32 + 1).unwrap(), EmbeddingVector::new(v.clone()).unwrap()).unwrap();
        }
        write_embeddings(&path, &set).unwrap();
        prop_assert_eq!(read_embeddings(&path).unwrap(), set);
    }

    #[test]
    fn file_stores_round_trip(vectors in prop::collection::vec(prop::collection::vec(component(), 3), 1..8),
                              rows in prop::collection::vec(prop::array::uniform10(probability()), 1..8)) {
        let dir = tempfile::tempdir().unwrap();
        let texts: Vec<String> = (0..vectors.len().max(rows.len())).map(|i| format!("verse number {i}")).collect();

        let epath = dir.path().join("emb.jsonl");
        FileEmbeddingStore::save(&epath, "m", 3, texts.iter().map(String::as_str).zip(vectors.iter().map(Vec::as_slice))).unwrap();
        let store = FileEmbeddingStore::load(&epath).unwrap();
        let keys: Vec<&str> = texts.iter().take(vectors.len()).map(String::as_str).collect();
        prop_assert_eq!(store.embed(&keys).unwrap(), vectors);

        let spath = dir.path().join("sent.jsonl");
        FileSentimentStore::save(&spath, "s", texts.iter().map(String::as_str).zip(rows.iter().copied())).unwrap();
        let store = FileSentimentStore::load(&spath).unwrap();
        let keys: Vec<&str> = texts.iter().take(rows.len()).map(String::as_str).collect();
        prop_assert_eq!(store.predict(&keys).unwrap(), rows);
    }
}

#[test]
fn corpus_round_trip_keeps_line_breaks_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let meta = CorpusMeta {
        id: "T".into(),
        title: "Title".into(),
        translator: "Someone".into(),
        language: "en".into(),
        source: "test".into(),
    };
    let mut corpus = TranslationCorpus::new(meta).unwrap();
    corpus
        .insert(
            VerseRef::new(1, 1).unwrap(),
            "first line\nsecond line".into(),
        )
        .unwrap();
    corpus
        .insert(VerseRef::new(1, 2).unwrap(), "caf\u{65}\u{301}".into())
        .unwrap();
    save_corpus(&corpus, dir.path()).unwrap();
    let back = load_corpus(dir.path()).unwrap();
    assert_eq!(back, corpus);
    assert_eq!(
        back.get(&VerseRef::new(1, 1).unwrap()).unwrap().clean_text,
        "first line second line"
    );
}

#[test]
fn store_with_wrong_dimension_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.jsonl");
    std::fs::write(
        &path,
        "{\"model_id\":\"m\",\"dim\":3}\n{\"text\":\"a\",\"vector\":[1.0,2.0]}\n",
    )
    .unwrap();
    assert!(matches!(
        FileEmbeddingStore::load(&path),
        Err(FormatError::Malformed { line: 2, .. })
    ));
}

#[test]
fn store_miss_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.jsonl");
    FileEmbeddingStore::save(&path, "m", 2, [("known", [1.0, 0.0].as_slice())]).unwrap();
    let store = FileEmbeddingStore::load(&path).unwrap();
    let err = store.embed(&["unknown"]).unwrap_err();
    assert!(err.message.contains("unknown"));
}

#[test]
fn predictions_with_inconsistent_labels_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.jsonl");
    std::fs::write(
        &path,
        concat!(
            "{\"corpus_id\":\"X\",\"threshold\":0.5,\"label_order\":[\"optimistic\",\"thankful\",\"empathetic\",",
            "\"pessimistic\",\"anxious\",\"sad\",\"annoyed\",\"denial\",\"surprise\",\"joking\"]}\n",
            "{\"chapter\":1,\"verse\":1,\"probabilities\":[0.9,0,0,0,0,0,0,0,0,0],\"labels\":[\"sad\"]}\n"
        ),
    )
    .unwrap();
    assert!(read_predictions(&path).is_err());
}
