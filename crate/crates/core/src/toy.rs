//! Bundled data for demos and tests.

use crate::dataforge::{parse_articles, ArticleRecord, ForgeError};
use crate::hindpo::PreferenceExample;
use crate::policy::{PolicyError, Vocabulary};
use crate::trainer::TrainStage;

/// 60 Hindi fact-checking records with three candidate explanations each.
pub const TOY_CORPUS: &str = include_str!("../data/toy_corpus.jsonl");

pub fn toy_articles() -> Result<Vec<ArticleRecord>, ForgeError> {
    parse_articles(TOY_CORPUS)
}

pub const SEPARABLE_PROMPTS: usize = 5;

/// Tokens `a`, `b` and prompt tokens `p0..p4`.
pub fn separable_vocab() -> Result<Vocabulary, PolicyError> {
    let mut tokens = vec!["a".to_string(), "b".to_string()];
    tokens.extend((0..SEPARABLE_PROMPTS).map(|k| format!("p{k}")));
    Vocabulary::new(tokens)
}

/// `n` pairs whose preferred response is `a <eos>` and rejected response
/// `b <eos>`. Prompts cycle through `p0..p4` with lengths 1 to 3.
pub fn separable_pairs(vocab: &Vocabulary, n: usize, s_w: f64, s_l: f64) -> Vec<PreferenceExample> {
    let id = |t: &str| vocab.id(t).expect("separable token");
    let (a, b, eos) = (id("a"), id("b"), Vocabulary::EOS_ID);
    (0..n)
        .map(|i| {
            let len = 1 + (i / SEPARABLE_PROMPTS) % 3;
            let prompt = (0..len).map(|j| id(&format!("p{}", (i + j) % SEPARABLE_PROMPTS))).collect();
            PreferenceExample {
                prompt,
                chosen: vec![a, eos],
                rejected: vec![b, eos],
                s_w,
                s_l,
                v_effective: 1.0,
            }
        })
        .collect()
}

/// The separable pairs as a single training stage.
pub fn separable_stage(vocab: &Vocabulary, n: usize, s_w: f64, s_l: f64) -> TrainStage {
    TrainStage {
        bucket: "separable".into(),
        pairs: separable_pairs(vocab, n, s_w, s_l),
    }
}
