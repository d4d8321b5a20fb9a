use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::policy::{sample_response, tempered_log_probs, Policy, Vocabulary};
use crate::stats::RunningVariance;

use super::{LossConfig, LossError};

/// Variance of the policy's response probabilities under temperature sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinesseEstimate {
    /// Raw sample variance of the per-response probabilities.
    pub v: f64,
    /// `v` after optional normalization, clamped to `[0, 1]` when normalized.
    pub v_effective: f64,
}

impl FinesseEstimate {
    pub fn from_variance(v: f64, config: &LossConfig) -> Self {
        let v_effective = if config.normalize_variance {
            (v / 0.25).min(1.0)
        } else {
            v
        };
        Self { v, v_effective }
    }
}

/// Geometric-mean per-token probability of `response` under the
/// temperature-scaled policy.
pub fn mean_token_probability<P: Policy>(
    policy: &P,
    prompt: &[usize],
    response: &[usize],
    temperature: f64,
) -> f64 {
    let mut context: Vec<usize> = if prompt.is_empty() {
        vec![Vocabulary::BOS_ID]
    } else {
        prompt.to_vec()
    };
    let mut total = 0.0;
    for &next in response {
        total += tempered_log_probs(policy.next_token_logits(&context), temperature)[next];
        context.push(next);
    }
    (total / response.len() as f64).exp()
}

/// Draws `finesse_samples` responses at `finesse_temperature` and returns
/// the sample variance of their mean token probabilities.
pub fn compute_finesse<P: Policy, R: Rng + ?Sized>(
    policy: &P,
    prompt: &[usize],
    config: &LossConfig,
    rng: &mut R,
) -> Result<FinesseEstimate, LossError> {
    config.validate()?;
    let mut acc = RunningVariance::new();
    for _ in 0..config.finesse_samples {
        let response = sample_response(policy, prompt, config.finesse_temperature, config.finesse_max_len, rng)?;
        let p = mean_token_probability(policy, prompt, &response, config.finesse_temperature);
        if response.is_empty() || !p.is_finite() {
            return Err(LossError::Degenerate(format!(
                "no valid continuation for prompt {prompt:?}"
            )));
        }
        acc.push(p);
    }
    let v = acc.sample_variance()?;
    Ok(FinesseEstimate::from_variance(v, config))
}
