use std::path::PathBuf;

use hindpo_core::dataforge::{
    articles_to_jsonl, attach_actuality, bucketize, emit_forged, forge, load_articles, load_curriculum,
    parse_articles, score_and_rank, split_articles, ActualityProvider, ActualityTable, Bucket, ForgeError,
    ForgeOptions, SplitFractions, StageOrder,
};
use hindpo_core::textmetrics::{tokenize, CharNgramCosine, MetricBundle};

fn toy_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy_corpus.jsonl")
}

#[test]
fn toy_corpus_round_trips_byte_identically() {
    let raw = std::fs::read_to_string(toy_path()).unwrap();
    let records = load_articles(&toy_path()).unwrap();
    assert_eq!(records.len(), 60);
    assert_eq!(articles_to_jsonl(&records).unwrap(), raw);
}

#[test]
fn identical_candidate_gets_closed_form_score() {
    let records = load_articles(&toy_path()).unwrap();
    let toy1 = &records[0];
    assert_eq!(toy1.candidates[1].text, toy1.ground_truth_explanation);
    let scorer = CharNgramCosine::default();
    let ranked = score_and_rank(toy1, &MetricBundle::new(&scorer)).unwrap();
    let top = ranked.iter().find(|p| p.rank == 0).unwrap();
    assert_eq!(top.candidate, 1);
    // exact copy: one chunk over m matched tokens, so METEOR = 1 - 0.5 / m^3
    let m = tokenize(&toy1.ground_truth_explanation).len() as f64;
    let meteor_identity = 1.0 - 0.5 / m.powi(3);
    let want = (1.0 + 3.0 * (1.0 + meteor_identity)) / 4.0;
    assert!((top.scores.fs.value() - want).abs() < 1e-12);
}

#[test]
fn ranks_follow_final_score_in_every_article() {
    let records = load_articles(&toy_path()).unwrap();
    let scorer = CharNgramCosine::default();
    let metrics = MetricBundle::new(&scorer);
    for r in &records {
        let mut ranked = score_and_rank(r, &metrics).unwrap();
        ranked.sort_by_key(|p| p.rank);
        assert_eq!(ranked.iter().map(|p| p.rank).collect::<Vec<_>>(), [0, 1, 2]);
        for w in ranked.windows(2) {
            assert!(w[0].scores.fs.value() >= w[1].scores.fs.value(), "{}", r.id);
        }
        assert_eq!(ranked[0].bucket, Bucket::High);
        assert_eq!(ranked[2].bucket, Bucket::Low);
    }
}

fn forge_toy(order: StageOrder, seed: u64) -> hindpo_core::dataforge::Forged {
    let records = load_articles(&toy_path()).unwrap();
    let scorer = CharNgramCosine::default();
    let provider = ActualityProvider::RecordEmbedded(ActualityTable::from_records(&records));
    let options = ForgeOptions {
        order,
        seed,
        ..ForgeOptions::default()
    };
    forge(&records, &MetricBundle::new(&scorer), &provider, &options).unwrap()
}

#[test]
fn stages_partition_training_pairs() {
    let forged = forge_toy(StageOrder::Algorithm1, 3);
    assert_eq!(forged.split_ids.train.len(), 45);
    assert_eq!(forged.split_ids.val.len(), 3);
    assert_eq!(forged.split_ids.test.len(), 12);
    let buckets: Vec<Bucket> = forged.dataset.stages.iter().map(|s| s.bucket).collect();
    assert_eq!(buckets, [Bucket::Low, Bucket::Medium, Bucket::High]);
    let mut seen = std::collections::HashSet::new();
    for stage in &forged.dataset.stages {
        assert_eq!(stage.pairs.len(), 45);
        for p in &stage.pairs {
            assert_eq!(p.bucket, stage.bucket);
            assert!(forged.split_ids.train.contains(&p.id));
            assert!(seen.insert((p.id.clone(), p.candidate)), "pair repeated");
        }
    }
    assert_eq!(seen.len(), 135);

    let reversed = forge_toy(StageOrder::Section4, 3);
    let buckets: Vec<Bucket> = reversed.dataset.stages.iter().map(|s| s.bucket).collect();
    assert_eq!(buckets, [Bucket::High, Bucket::Medium, Bucket::Low]);
}

#[test]
fn split_is_seeded_and_disjoint() {
    let records = load_articles(&toy_path()).unwrap();
    let a = split_articles(&records, SplitFractions::default(), 11).unwrap();
    let b = split_articles(&records, SplitFractions::default(), 11).unwrap();
    let c = split_articles(&records, SplitFractions::default(), 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let mut all: Vec<&String> = a.train.iter().chain(&a.val).chain(&a.test).collect();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 60);
    let bad = SplitFractions {
        train: 0.8,
        val: 0.1,
        test: 0.2,
    };
    assert!(split_articles(&records, bad, 0).is_err());
}

#[test]
fn emission_is_reproducible_and_loadable() {
    let forged = forge_toy(StageOrder::Algorithm1, 5);
    let options = ForgeOptions {
        seed: 5,
        ..ForgeOptions::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = emit_forged(&forged, &options, a.path()).unwrap();
    emit_forged(&forge_toy(StageOrder::Algorithm1, 5), &options, b.path()).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in &names {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name:?}"
        );
    }
    let (manifest, dataset) = load_curriculum(&ma).unwrap();
    assert_eq!(dataset, forged.dataset);
    assert_eq!(manifest.counts.pairs, 135);
    assert_eq!(manifest.checksum.len(), 64);
    assert_eq!(manifest.stages[0].file, "stage0_B_L.jsonl");
}

#[test]
fn actuality_providers() {
    let records = load_articles(&toy_path()).unwrap();
    let scorer = CharNgramCosine::default();
    let metrics = MetricBundle::new(&scorer);
    let ranked = score_and_rank(&records[0], &metrics).unwrap();

    let stub = attach_actuality(ranked.clone(), &ActualityProvider::constant(0.5).unwrap()).unwrap();
    assert!(stub.iter().all(|p| p.s_w == 0.5 && p.s_l == 0.5));
    assert!(ActualityProvider::constant(1.5).is_err());

    let embedded = ActualityProvider::RecordEmbedded(ActualityTable::from_records(&records));
    let pairs = attach_actuality(ranked.clone(), &embedded).unwrap();
    let exact = pairs.iter().find(|p| p.candidate == 1).unwrap();
    assert_eq!(exact.s_l, 1.0);

    let table = ActualityTable::parse("toy-001 pref 0.75\ntoy-001 cand0 0.2\ntoy-001 cand1 0.9\n").unwrap();
    let err = attach_actuality(ranked.clone(), &ActualityProvider::FileLookup(table)).unwrap_err();
    assert!(matches!(err, ForgeError::ActualityMissing { ref role, .. } if role == "cand2"));

    let table =
        ActualityTable::parse("toy-001 pref 0.75\ntoy-001 cand0 0.2\ntoy-001 cand1 0.9\ntoy-001 cand2 0.1\n").unwrap();
    let pairs = attach_actuality(ranked, &ActualityProvider::FileLookup(table)).unwrap();
    assert!(pairs.iter().all(|p| p.s_w == 0.75));
    assert_eq!(pairs.iter().find(|p| p.candidate == 2).unwrap().s_l, 0.1);
}

#[test]
fn malformed_corpus_lines_are_reported() {
    let records = load_articles(&toy_path()).unwrap();
    let good = articles_to_jsonl(&records[..2]).unwrap();
    let mut lines: Vec<&str> = good.lines().collect();
    lines.push("{\"id\": 3");
    assert!(matches!(parse_articles(&lines.join("\n")), Err(ForgeError::Parse { line: 3, .. })));
    let dup = format!("{}{}", good, good.lines().next().unwrap());
    assert!(matches!(parse_articles(&dup), Err(ForgeError::DuplicateId { line: 3, .. })));
}

#[test]
fn bucketize_rejects_incomplete_articles() {
    let records = load_articles(&toy_path()).unwrap();
    let scorer = CharNgramCosine::default();
    let ranked = score_and_rank(&records[0], &MetricBundle::new(&scorer)).unwrap();
    let mut pairs = attach_actuality(ranked, &ActualityProvider::constant(0.5).unwrap()).unwrap();
    pairs.pop();
    assert!(matches!(
        bucketize(pairs.clone(), StageOrder::Algorithm1),
        Err(ForgeError::MissingRank { .. })
    ));
    pairs.push(pairs[0].clone());
    assert!(matches!(
        bucketize(pairs, StageOrder::Algorithm1),
        Err(ForgeError::DuplicateRank { .. })
    ));
}
