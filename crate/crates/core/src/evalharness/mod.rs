//! Decoding held-out prompts and scoring them against reference explanations.

mod report;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{greedy_response, sample_response, Policy, PolicyError};
use crate::textmetrics::{meteor, rouge_l, rouge_n, tokenize, MetricError, SemanticScorer};

pub use report::{parse_table, report_json, report_table, ReportTable, CONFIG_ORDER};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{generated} generated texts for {references} references")]
    LengthMismatch { generated: usize, references: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("malformed report table: {0}")]
    Parse(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decoding {
    #[default]
    Greedy,
    Sample { temperature: f64, seed: u64 },
}

/// Decodes a continuation for every prompt and returns it as space-joined
/// tokens, without BOS/EOS.
pub fn generate<P: Policy>(
    policy: &P,
    prompts: &[String],
    max_len: usize,
    decoding: Decoding,
) -> Result<Vec<String>, EvalError> {
    let vocab = policy.vocab();
    let mut rng = match decoding {
        Decoding::Sample { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Decoding::Greedy => None,
    };
    prompts
        .iter()
        .map(|prompt| {
            let ids = vocab.encode(&tokenize(prompt))?;
            let out = match (decoding, rng.as_mut()) {
                (Decoding::Sample { temperature, .. }, Some(rng)) => {
                    sample_response(policy, &ids, temperature, max_len, rng)?
                }
                _ => greedy_response(policy, &ids, max_len)?,
            };
            Ok(vocab.decode(&out).join())
        })
        .collect()
}

/// Corpus-level scores for one configuration; each is the mean of per-pair
/// F1 (ROUGE), METEOR or semantic similarity, in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config_name: String,
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
    pub meteor: f64,
    pub semantic: f64,
}

impl MetricReport {
    pub const COLUMNS: [&'static str; 5] = ["R-1", "R-2", "R-L", "METEOR", "Semantic"];

    pub fn values(&self) -> [f64; 5] {
        [self.r1, self.r2, self.rl, self.meteor, self.semantic]
    }

    pub fn from_values(config_name: impl Into<String>, v: [f64; 5]) -> Self {
        Self {
            config_name: config_name.into(),
            r1: v[0],
            r2: v[1],
            rl: v[2],
            meteor: v[3],
            semantic: v[4],
        }
    }
}

pub fn evaluate(
    config_name: &str,
    generated: &[String],
    references: &[String],
    semantic: &dyn SemanticScorer,
) -> Result<MetricReport, EvalError> {
    if generated.len() != references.len() {
        return Err(EvalError::LengthMismatch {
            generated: generated.len(),
            references: references.len(),
        });
    }
    if generated.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sums = [0.0; 5];
    for (g, r) in generated.iter().zip(references) {
        let (tg, tr) = (tokenize(g), tokenize(r));
        let pair = [
            rouge_n(&tg, &tr, 1).f1,
            rouge_n(&tg, &tr, 2).f1,
            rouge_l(&tg, &tr).f1,
            meteor(&tg, &tr),
            semantic.score(g, r)?,
        ];
        for (s, v) in sums.iter_mut().zip(pair) {
            *s += v;
        }
    }
    let n = generated.len() as f64;
    Ok(MetricReport::from_values(config_name, sums.map(|s| s / n)))
}
