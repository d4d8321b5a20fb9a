/// Exact-match METEOR (no stemming or synonym stages).
///
/// Alignment is greedy: each candidate token, left to right, takes the
/// first unused reference position holding the same token. The score is
/// `Fmean * (1 - 0.5 * (chunks / m)^3)` with `Fmean = 10PR / (R + 9P)`,
/// and 0 when nothing matches.
pub fn meteor<T: PartialEq>(cand: &[T], reference: &[T]) -> f64 {
    let mut used = vec![false; reference.len()];
    // (candidate index, reference index) in candidate order
    let mut alignment: Vec<(usize, usize)> = Vec::new();
    for (i, token) in cand.iter().enumerate() {
        if let Some(j) = (0..reference.len()).find(|&j| !used[j] && reference[j] == *token) {
            used[j] = true;
            alignment.push((i, j));
        }
    }
    if alignment.is_empty() {
        return 0.0;
    }
    let m = alignment.len() as f64;
    let precision = m / cand.len() as f64;
    let recall = m / reference.len() as f64;
    let fmean = 10.0 * precision * recall / (recall + 9.0 * precision);

    let chunks = 1 + alignment
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count();
    let penalty = 0.5 * (chunks as f64 / m).powi(3);
    fmean * (1.0 - penalty)
}
