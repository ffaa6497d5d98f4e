use std::collections::HashMap;

/// Multiset of the order-`n` n-grams of `tokens`.
pub fn ngram_counts<T: Eq + std::hash::Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Size of the multiset intersection of candidate and reference n-grams
/// (each candidate n-gram counted at most as often as it occurs in the reference).
pub fn clipped_matches<T: Eq + std::hash::Hash>(candidate: &[T], reference: &[T], n: usize) -> usize {
    let reference = ngram_counts(reference, n);
    ngram_counts(candidate, n)
        .into_iter()
        .map(|(gram, count)| count.min(reference.get(gram).copied().unwrap_or(0)))
        .sum()
}

/// [`clipped_matches`] for interned tokens and `n <= 4`: n-grams are packed
/// into `u128` keys, sorted, and intersected by a merge.
pub(crate) fn clipped_matches_ids(candidate: &[u32], reference: &[u32], n: usize) -> usize {
    assert!((1..=4).contains(&n), "packed n-grams support orders 1 to 4");
    let keys = |tokens: &[u32]| {
        let mut k: Vec<u128> = tokens
            .windows(n)
            .map(|g| g.iter().fold(0u128, |acc, &t| (acc << 32) | t as u128))
            .collect();
        k.sort_unstable();
        k
    };
    if candidate.len() < n || reference.len() < n {
        return 0;
    }
    let (a, b) = (keys(candidate), keys(reference));
    let (mut i, mut j, mut matches) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                matches += 1;
                i += 1;
                j += 1;
            }
        }
    }
    matches
}
