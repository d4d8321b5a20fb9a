//! Tokenization and the lexical/semantic scores used to rank candidate
//! explanations and to evaluate generations.

mod meteor;
mod rouge;
mod semantic;
mod tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use meteor::meteor;
pub use rouge::{lcs_len, rouge_l, rouge_n};
pub use semantic::{CharNgramCosine, SemanticScorer};
pub use tokenize::{tokenize, TokenSequence};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("semantic scorer failed: {0}")]
    Provider(String),
    #[error("invalid metric configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrfScore {
    pub const ZERO: PrfScore = PrfScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Weighted blend `(bs + 3 * (rl + mt)) / 4`, in `[0, 1.75]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FinalScore(f64);

impl FinalScore {
    pub const MAX: f64 = 1.75;

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<f64, MetricError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(MetricError::OutOfRange { name, value })
    }
}

/// Combines semantic similarity, ROUGE-L F1 and METEOR into the ranking score.
///
/// ROUGE-L and METEOR carry weight 3 each to offset the much narrower
/// practical range of the semantic score.
pub fn final_score(bs: f64, rl: f64, mt: f64) -> Result<FinalScore, MetricError> {
    let bs = check_unit("semantic", bs)?;
    let rl = check_unit("rouge_l", rl)?;
    let mt = check_unit("meteor", mt)?;
    // 3x is split into its rounded product and exact residual so the whole
    // weighted sum is rounded once; division by 4 is exact.
    let (rl3, rl3_err) = scaled_exact(3.0, rl);
    let (mt3, mt3_err) = scaled_exact(3.0, mt);
    let sum = correctly_rounded_sum(&[bs, rl3, rl3_err, mt3, mt3_err]);
    Ok(FinalScore(sum / 4.0))
}

fn scaled_exact(a: f64, x: f64) -> (f64, f64) {
    let p = a * x;
    (p, a.mul_add(x, -p))
}

/// Shewchuk partials summation with a single final rounding.
fn correctly_rounded_sum(values: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::with_capacity(values.len());
    for &value in values {
        let mut x = value;
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    let Some(mut k) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[k];
    let mut lo = 0.0;
    while k > 0 {
        k -= 1;
        let x = hi;
        let y = partials[k];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // round-half-even correction when the remaining partials push past a tie
    if k > 0 && ((lo < 0.0 && partials[k - 1] < 0.0) || (lo > 0.0 && partials[k - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// The scores needed to rank one candidate against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateScores {
    pub semantic: f64,
    pub rouge_l: f64,
    pub meteor: f64,
    pub fs: FinalScore,
}

/// Bundles the tokenizer-based metrics with a semantic scorer.
#[derive(Clone, Copy)]
pub struct MetricBundle<'a> {
    semantic: &'a dyn SemanticScorer,
}

impl<'a> MetricBundle<'a> {
    pub fn new(semantic: &'a dyn SemanticScorer) -> Self {
        Self { semantic }
    }

    pub fn semantic(&self) -> &'a dyn SemanticScorer {
        self.semantic
    }

    pub fn score(&self, cand: &str, reference: &str) -> Result<CandidateScores, MetricError> {
        let cand_tokens = tokenize(cand);
        let ref_tokens = tokenize(reference);
        let semantic = self.semantic.score(cand, reference)?;
        let rouge_l = rouge_l(&cand_tokens, &ref_tokens).f1;
        let meteor = meteor(&cand_tokens, &ref_tokens);
        let fs = final_score(semantic, rouge_l, meteor)?;
        Ok(CandidateScores {
            semantic,
            rouge_l,
            meteor,
            fs,
        })
    }
}
