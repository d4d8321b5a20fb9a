use std::collections::HashMap;
use std::hash::Hash;

use super::PrfScore;

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    for window in tokens.windows(n) {
        *counts.entry(window).or_insert(0) += 1;
    }
    counts
}

/// ROUGE-N with clipped n-gram multiset overlap.
///
/// Returns all-zero scores when either side has fewer than `n` tokens.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn rouge_n<T: Eq + Hash>(cand: &[T], reference: &[T], n: usize) -> PrfScore {
    assert!(n >= 1, "rouge_n requires n >= 1");
    if cand.len() < n || reference.len() < n {
        return PrfScore::ZERO;
    }
    let cand_counts = ngram_counts(cand, n);
    let ref_counts = ngram_counts(reference, n);
    let overlap: usize = cand_counts
        .iter()
        .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    let cand_total = cand.len() + 1 - n;
    let ref_total = reference.len() + 1 - n;
    PrfScore::from_pr(
        overlap as f64 / cand_total as f64,
        overlap as f64 / ref_total as f64,
    )
}

/// Length of the longest common subsequence; single-row dynamic programme
/// over the shorter sequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (outer, inner) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if inner.is_empty() {
        return 0;
    }
    let mut row = vec![0usize; inner.len() + 1];
    for x in outer {
        // `diag` holds the previous row's value at j before it is overwritten
        let mut diag = 0;
        for (j, y) in inner.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[inner.len()]
}

/// ROUGE-L: LCS-based precision, recall and balanced F1.
pub fn rouge_l<T: PartialEq>(cand: &[T], reference: &[T]) -> PrfScore {
    if cand.is_empty() || reference.is_empty() {
        return PrfScore::ZERO;
    }
    let lcs = lcs_len(cand, reference) as f64;
    PrfScore::from_pr(lcs / cand.len() as f64, lcs / reference.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bigram_overlap() {
        let s = rouge_n(&["a", "b", "c"], &["a", "b", "d"], 2);
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn unigram_identity() {
        let s = rouge_n(&["x", "y"], &["x", "y"], 1);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn no_bigrams_is_zero() {
        assert_eq!(rouge_n(&["a"], &["b"], 2), PrfScore::ZERO);
    }

    #[test]
    fn clipped_counts() {
        // candidate repeats "the" three times, reference has it twice
        let s = rouge_n(&["the", "the", "the"], &["the", "cat", "the"], 1);
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.recall - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn zero_n_panics() {
        rouge_n(&["a"], &["a"], 0);
    }

    #[test]
    fn lcs_example() {
        let s = rouge_l(&["a", "b", "c", "d"], &["a", "c", "d"]);
        assert_eq!(lcs_len(&["a", "b", "c", "d"], &["a", "c", "d"]), 3);
        assert_eq!(s.precision, 0.75);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 6.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn rouge_l_identity_and_empty() {
        assert_eq!(rouge_l(&["p", "q"], &["p", "q"]).f1, 1.0);
        let empty: [&str; 0] = [];
        assert_eq!(rouge_l(&["a"], &empty), PrfScore::ZERO);
        assert_eq!(rouge_l(&empty, &["a"]), PrfScore::ZERO);
    }
}
