use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{softmax, Policy, PolicyError, Vocabulary};

/// Logit initialization for a fresh policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Uniform next-token distribution in every row.
    Zeros,
    /// Independent `N(0, std^2)` entries from a seeded generator.
    Noise { std: f64, seed: u64 },
}

/// Previous-token conditioned softmax policy: a `|V| x |V|` logit table,
/// row = previous token, column = next token.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramPolicy {
    vocab: Vocabulary,
    logits: Vec<f64>,
}

impl BigramPolicy {
    pub fn new(vocab: Vocabulary, init: Init) -> Result<Self, PolicyError> {
        let n = vocab.len();
        if n < 3 {
            return Err(PolicyError::VocabularyTooSmall(n));
        }
        let logits = match init {
            Init::Zeros => vec![0.0; n * n],
            Init::Noise { std, seed } => {
                if !(std >= 0.0 && std.is_finite()) {
                    return Err(PolicyError::InvalidNoise(std));
                }
                let normal = Normal::new(0.0, std).map_err(|_| PolicyError::InvalidNoise(std))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n * n).map(|_| normal.sample(&mut rng)).collect()
            }
        };
        Ok(Self { vocab, logits })
    }

    /// Builds a policy from a row-major logit table.
    pub fn from_logits(vocab: Vocabulary, logits: Vec<f64>) -> Result<Self, PolicyError> {
        let n = vocab.len();
        if logits.len() != n * n {
            return Err(PolicyError::Format(format!(
                "logit table has {} entries, expected {}",
                logits.len(),
                n * n
            )));
        }
        if let Some(bad) = logits.iter().find(|x| !x.is_finite()) {
            return Err(PolicyError::Format(format!("non-finite logit {bad}")));
        }
        Ok(Self { vocab, logits })
    }

    /// Additively smoothed maximum-likelihood fit of transition counts.
    ///
    /// Each row becomes `ln((count + alpha) / (row_total + alpha * |V|))`.
    pub fn from_transition_counts<'a, I>(vocab: Vocabulary, sequences: I, alpha: f64) -> Result<Self, PolicyError>
    where
        I: IntoIterator<Item = (&'a [usize], &'a [usize])>,
    {
        let mut policy = Self::new(vocab, Init::Zeros)?;
        let n = policy.vocab.len();
        let mut counts = vec![0.0f64; n * n];
        for (prompt, response) in sequences {
            let mut prev = prompt.last().copied().unwrap_or(Vocabulary::BOS_ID);
            policy.check_ids(prompt)?;
            policy.check_ids(response)?;
            for &next in response {
                counts[prev * n + next] += 1.0;
                prev = next;
            }
        }
        for (row, out) in counts.chunks(n).zip(policy.logits.chunks_mut(n)) {
            let total: f64 = row.iter().sum::<f64>() + alpha * n as f64;
            for (logit, c) in out.iter_mut().zip(row) {
                *logit = ((c + alpha) / total).ln();
            }
        }
        Ok(policy)
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn row(&self, prev: usize) -> &[f64] {
        let n = self.vocab.len();
        &self.logits[prev * n..(prev + 1) * n]
    }

    pub fn row_mut(&mut self, prev: usize) -> &mut [f64] {
        let n = self.vocab.len();
        &mut self.logits[prev * n..(prev + 1) * n]
    }

    fn prev_token(context: &[usize]) -> usize {
        context.last().copied().unwrap_or(Vocabulary::BOS_ID)
    }
}

impl Policy for BigramPolicy {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_logits(&self, context: &[usize]) -> &[f64] {
        self.row(Self::prev_token(context))
    }

    fn parameters(&self) -> &[f64] {
        &self.logits
    }

    fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    fn accumulate_transition_grad(&self, context: &[usize], next: usize, scale: f64, grad: &mut [f64]) {
        let n = self.vocab.len();
        let prev = Self::prev_token(context);
        let probs = softmax(self.row(prev));
        let row = &mut grad[prev * n..(prev + 1) * n];
        for (j, (g, p)) in row.iter_mut().zip(probs).enumerate() {
            let onehot = if j == next { 1.0 } else { 0.0 };
            *g += scale * (onehot - p);
        }
    }

    fn transition_parameters(&self, context: &[usize]) -> Vec<usize> {
        let n = self.vocab.len();
        let prev = Self::prev_token(context);
        (prev * n..(prev + 1) * n).collect()
    }
}
