//! Trainable autoregressive policy with exact sequence log-probabilities,
//! analytic gradients and temperature sampling.

mod bigram;
mod checkpoint;
mod vocab;

use std::path::PathBuf;

use rand::Rng;
use thiserror::Error;

pub use bigram::{BigramPolicy, Init};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use vocab::{Vocabulary, BOS, EOS};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("vocabulary needs at least 3 tokens, got {0}")]
    VocabularyTooSmall(usize),
    #[error("token {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("token id {0} is out of range")]
    InvalidId(usize),
    #[error("response must be non-empty and end with EOS")]
    MissingEos,
    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),
    #[error("invalid noise scale {0}")]
    InvalidNoise(f64),
    #[error("checkpoint format error: {0}")]
    Format(String),
    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// An autoregressive next-token model over a fixed vocabulary with a flat
/// parameter vector.
///
/// `sequence_log_prob` and the gradient helpers are provided in terms of
/// `next_token_logits` and `accumulate_transition_grad`.
pub trait Policy: Clone {
    fn vocab(&self) -> &Vocabulary;

    /// Unnormalized next-token scores given the full token context
    /// (prompt followed by the response prefix; BOS when empty).
    fn next_token_logits(&self, context: &[usize]) -> &[f64];

    fn parameters(&self) -> &[f64];

    fn parameters_mut(&mut self) -> &mut [f64];

    /// Adds `scale * d/dθ log p(next | context)` into `grad`.
    fn accumulate_transition_grad(&self, context: &[usize], next: usize, scale: f64, grad: &mut [f64]);

    /// Flat parameter indices that `log p(next | context)` depends on.
    fn transition_parameters(&self, context: &[usize]) -> Vec<usize>;

    fn check_ids(&self, ids: &[usize]) -> Result<(), PolicyError> {
        match ids.iter().find(|&&id| id >= self.vocab().len()) {
            Some(&id) => Err(PolicyError::InvalidId(id)),
            None => Ok(()),
        }
    }

    /// `log π(response | prompt)`, summing next-token log-softmax terms.
    fn sequence_log_prob(&self, prompt: &[usize], response: &[usize]) -> Result<f64, PolicyError> {
        let mut total = 0.0;
        for_each_transition(self, prompt, response, |context, next| {
            total += log_softmax(self.next_token_logits(context))[next];
        })?;
        Ok(total)
    }

    /// Gradient of [`Policy::sequence_log_prob`] with respect to every parameter.
    fn grad_sequence_log_prob(&self, prompt: &[usize], response: &[usize]) -> Result<Vec<f64>, PolicyError> {
        let mut grad = vec![0.0; self.parameters().len()];
        self.accumulate_sequence_grad(prompt, response, 1.0, &mut grad)?;
        Ok(grad)
    }

    fn accumulate_sequence_grad(
        &self,
        prompt: &[usize],
        response: &[usize],
        scale: f64,
        grad: &mut [f64],
    ) -> Result<(), PolicyError> {
        for_each_transition(self, prompt, response, |context, next| {
            self.accumulate_transition_grad(context, next, scale, grad);
        })
    }

    /// Sorted, deduplicated parameter indices touched by a sequence.
    fn sequence_parameters(&self, prompt: &[usize], response: &[usize]) -> Result<Vec<usize>, PolicyError> {
        let mut touched = Vec::new();
        for_each_transition(self, prompt, response, |context, _| {
            touched.extend(self.transition_parameters(context));
        })?;
        touched.sort_unstable();
        touched.dedup();
        Ok(touched)
    }
}

fn for_each_transition<P: Policy>(
    policy: &P,
    prompt: &[usize],
    response: &[usize],
    mut f: impl FnMut(&[usize], usize),
) -> Result<(), PolicyError> {
    if response.last() != Some(&Vocabulary::EOS_ID) {
        return Err(PolicyError::MissingEos);
    }
    policy.check_ids(prompt)?;
    policy.check_ids(response)?;
    let mut context = Vec::with_capacity(prompt.len() + response.len() + 1);
    if prompt.is_empty() {
        context.push(Vocabulary::BOS_ID);
    } else {
        context.extend_from_slice(prompt);
    }
    for &next in response {
        f(&context, next);
        context.push(next);
    }
    Ok(())
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(logits);
    logits.iter().map(|x| x - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

/// Next-token log-probabilities of `softmax(logits / temperature)`.
pub fn tempered_log_probs(logits: &[f64], temperature: f64) -> Vec<f64> {
    let scaled: Vec<f64> = logits.iter().map(|x| x / temperature).collect();
    log_softmax(&scaled)
}

fn check_temperature(temperature: f64) -> Result<(), PolicyError> {
    if temperature > 0.0 && temperature.is_finite() {
        Ok(())
    } else {
        Err(PolicyError::InvalidTemperature(temperature))
    }
}

fn draw<R: Rng + ?Sized>(log_probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, lp) in log_probs.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            return i;
        }
    }
    // rounding left u above the accumulated mass: take the last positive entry
    log_probs
        .iter()
        .rposition(|lp| *lp > f64::NEG_INFINITY)
        .unwrap_or(log_probs.len() - 1)
}

/// Samples until EOS or `max_len` tokens from `softmax(logits / temperature)`.
///
/// The returned ids include the EOS token when one was drawn.
pub fn sample_response<P: Policy, R: Rng + ?Sized>(
    policy: &P,
    prompt: &[usize],
    temperature: f64,
    max_len: usize,
    rng: &mut R,
) -> Result<Vec<usize>, PolicyError> {
    check_temperature(temperature)?;
    policy.check_ids(prompt)?;
    let mut context: Vec<usize> = if prompt.is_empty() {
        vec![Vocabulary::BOS_ID]
    } else {
        prompt.to_vec()
    };
    let start = context.len();
    for _ in 0..max_len.max(1) {
        let lp = tempered_log_probs(policy.next_token_logits(&context), temperature);
        let next = draw(&lp, rng);
        context.push(next);
        if next == Vocabulary::EOS_ID {
            break;
        }
    }
    Ok(context.split_off(start))
}

/// Argmax decoding until EOS or `max_len` tokens; ties go to the lowest id.
pub fn greedy_response<P: Policy>(policy: &P, prompt: &[usize], max_len: usize) -> Result<Vec<usize>, PolicyError> {
    policy.check_ids(prompt)?;
    let mut context: Vec<usize> = if prompt.is_empty() {
        vec![Vocabulary::BOS_ID]
    } else {
        prompt.to_vec()
    };
    let start = context.len();
    for _ in 0..max_len.max(1) {
        let logits = policy.next_token_logits(&context);
        let mut best = 0;
        for (i, &x) in logits.iter().enumerate() {
            if x > logits[best] {
                best = i;
            }
        }
        context.push(best);
        if best == Vocabulary::EOS_ID {
            break;
        }
    }
    Ok(context.split_off(start))
}

/// Frozen copy of a policy used as the DPO reference.
#[derive(Debug, Clone)]
pub struct ReferenceSnapshot<P>(P);

impl<P: Policy> ReferenceSnapshot<P> {
    pub fn policy(&self) -> &P {
        &self.0
    }

    pub fn sequence_log_prob(&self, prompt: &[usize], response: &[usize]) -> Result<f64, PolicyError> {
        self.0.sequence_log_prob(prompt, response)
    }
}

pub fn snapshot_reference<P: Policy>(policy: &P) -> ReferenceSnapshot<P> {
    ReferenceSnapshot(policy.clone())
}
