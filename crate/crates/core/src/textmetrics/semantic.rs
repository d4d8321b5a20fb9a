use std::collections::HashMap;

use unicode_normalization::UnicodeNormalization;

use super::MetricError;

/// Similarity in `[0, 1]` between a candidate and a reference text.
///
/// Implementations must return exactly 1.0 for identical non-empty inputs.
/// A scorer backed by an external service reports failures as errors rather
/// than a zero score.
pub trait SemanticScorer: Send + Sync {
    fn score(&self, cand: &str, reference: &str) -> Result<f64, MetricError>;
}

/// Cosine similarity of character n-gram count vectors.
///
/// Text is NFC-normalized, lowercased and whitespace-collapsed, then padded
/// with one space on each side before n-grams are taken.
#[derive(Debug, Clone, Copy)]
pub struct CharNgramCosine {
    n: usize,
}

impl Default for CharNgramCosine {
    fn default() -> Self {
        Self { n: 3 }
    }
}

impl CharNgramCosine {
    pub fn new(n: usize) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::InvalidConfig("character n-gram order must be >= 1".into()));
        }
        Ok(Self { n })
    }

    fn profile(&self, text: &str) -> HashMap<Vec<char>, u64> {
        let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
        let mut counts = HashMap::new();
        if collapsed.is_empty() {
            return counts;
        }
        let chars: Vec<char> = std::iter::once(' ')
            .chain(collapsed.nfc().flat_map(char::to_lowercase))
            .chain(std::iter::once(' '))
            .collect();
        for gram in chars.windows(self.n) {
            *counts.entry(gram.to_vec()).or_insert(0) += 1;
        }
        counts
    }
}

impl SemanticScorer for CharNgramCosine {
    fn score(&self, cand: &str, reference: &str) -> Result<f64, MetricError> {
        let a = self.profile(cand);
        let b = self.profile(reference);
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        // integer arithmetic keeps identical profiles at exactly 1.0
        let dot: u64 = a
            .iter()
            .map(|(gram, &x)| x * b.get(gram).copied().unwrap_or(0))
            .sum();
        let norm_a: u64 = a.values().map(|x| x * x).sum();
        let norm_b: u64 = b.values().map(|x| x * x).sum();
        let denom = ((norm_a as f64) * (norm_b as f64)).sqrt();
        Ok((dot as f64 / denom).clamp(0.0, 1.0))
    }
}
