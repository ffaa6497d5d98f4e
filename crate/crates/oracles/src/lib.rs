//! Straight-from-the-definition reference implementations used by the test
//! suites. Nothing here shares code with `dexsel-core`; the point is to have
//! a second, slow, obviously-correct route to every expected value.

/// Counts of how many times `gram` occurs in `tokens` as a contiguous run.
fn occurrences(tokens: &[String], gram: &[String]) -> usize {
    if gram.is_empty() || tokens.len() < gram.len() {
        return 0;
    }
    (0..=tokens.len() - gram.len())
        .filter(|&i| tokens[i..i + gram.len()] == *gram)
        .count()
}

fn ngrams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].to_vec()).collect()
}

/// Clipped n-gram matches: for every distinct candidate n-gram, the smaller
/// of its candidate and reference occurrence counts.
pub fn clipped_matches(candidate: &[String], reference: &[String], n: usize) -> usize {
    let mut seen: Vec<Vec<String>> = Vec::new();
    let mut total = 0;
    for gram in ngrams(candidate, n) {
        if seen.contains(&gram) {
            continue;
        }
        total += occurrences(candidate, &gram).min(occurrences(reference, &gram));
        seen.push(gram);
    }
    total
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn rouge_n(candidate: &[String], reference: &[String], n: usize) -> f64 {
    let c = ngrams(candidate, n).len();
    let r = ngrams(reference, n).len();
    if c == 0 || r == 0 {
        return 0.0;
    }
    let m = clipped_matches(candidate, reference, n) as f64;
    f1(m / c as f64, m / r as f64)
}

fn is_subsequence(needle: &[&String], haystack: &[String]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|x| it.any(|y| y == *x))
}

/// LCS by enumerating every subsequence of `a` (exponential; keep `a` short).
pub fn lcs_exhaustive(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 20, "exhaustive LCS is exponential");
    let mut best = 0;
    for mask in 0u32..(1u32 << a.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
        if is_subsequence(&sub, b) {
            best = len;
        }
    }
    best
}

pub fn rouge_l(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let l = lcs_exhaustive(candidate, reference) as f64;
    f1(l / candidate.len() as f64, l / reference.len() as f64)
}

/// BLEU-4: geometric mean of clipped precisions (add-one smoothing for
/// zero-match orders 2..4) times the brevity penalty.
pub fn bleu4(candidate: &[String], reference: &[String]) -> f64 {
    let c = candidate.len();
    let r = reference.len();
    if c == 0 || r == 0 || clipped_matches(candidate, reference, 1) == 0 {
        return 0.0;
    }
    let mut product = 1.0f64;
    for n in 1..=4 {
        let m = clipped_matches(candidate, reference, n) as f64;
        let t = ngrams(candidate, n).len() as f64;
        let p = if n > 1 && m == 0.0 { 1.0 / (t + 1.0) } else { m / t };
        product *= p;
    }
    let bp = if c < r { (1.0 - r as f64 / c as f64).exp() } else { 1.0 };
    bp * product.powf(0.25)
}

/// METEOR with an exact stage and a stem stage. Each stage walks the
/// candidate left to right and pairs each unmatched word with the leftmost
/// unmatched reference word of equal form.
pub fn meteor(candidate: &[String], reference: &[String], stem: impl Fn(&str) -> String) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut ref_of: Vec<Option<usize>> = vec![None; candidate.len()];
    let mut ref_taken = vec![false; reference.len()];

    for stage in 0..2 {
        let form = |w: &String| if stage == 0 { w.clone() } else { stem(w) };
        for i in 0..candidate.len() {
            if ref_of[i].is_some() {
                continue;
            }
            for j in 0..reference.len() {
                if !ref_taken[j] && form(&candidate[i]) == form(&reference[j]) {
                    ref_of[i] = Some(j);
                    ref_taken[j] = true;
                    break;
                }
            }
        }
    }

    let aligned: Vec<(usize, usize)> = ref_of
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect();
    let m = aligned.len();
    if m == 0 {
        return 0.0;
    }
    let mut chunks = 0;
    for k in 0..m {
        let continues = k > 0 && aligned[k].0 == aligned[k - 1].0 + 1 && aligned[k].1 == aligned[k - 1].1 + 1;
        if !continues {
            chunks += 1;
        }
    }
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    fmean * (1.0 - 0.5 * (chunks as f64 / m as f64).powi(3))
}

/// Min-max rescaling of one column; constant columns map to all zeros.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| if hi == lo { 0.0 } else { (v - lo) / (hi - lo) })
        .collect()
}

/// Expert choice for one document: `raw[model][metric]`, one weight per
/// metric. Returns the index of the model with the highest mean of
/// normalized weighted scores; the earliest model wins ties.
pub fn weighted_argmax(raw: &[Vec<f64>], weights: &[f64]) -> usize {
    let n_models = raw.len();
    let mut totals = vec![0.0; n_models];
    for (k, w) in weights.iter().enumerate() {
        let column: Vec<f64> = raw.iter().map(|row| row[k]).collect();
        let normalized = min_max(&column);
        for m in 0..n_models {
            totals[m] += w * normalized[m];
        }
    }
    let mut best = 0;
    for m in 0..n_models {
        let avg_m = totals[m] / weights.len() as f64;
        let avg_best = totals[best] / weights.len() as f64;
        if avg_m > avg_best {
            best = m;
        }
    }
    best
}

/// The length-window rule: first ranked model inside `[lo, hi]`; otherwise
/// the shortest text of at least `floor` words (earliest on ties); otherwise
/// the top-ranked model. `counts` is in ranking order.
pub fn length_rule(counts: &[usize], lo: usize, hi: usize, floor: usize) -> usize {
    for (i, &c) in counts.iter().enumerate() {
        if c >= lo && c <= hi {
            return i;
        }
    }
    let mut pick: Option<usize> = None;
    for (i, &c) in counts.iter().enumerate() {
        if c >= floor && pick.is_none_or(|p| c < counts[p]) {
            pick = Some(i);
        }
    }
    pick.unwrap_or(0)
}

/// Textbook Pearson correlation (sums of products, no centering tricks).
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn lcs_small() {
        assert_eq!(lcs_exhaustive(&t("a b c d"), &t("a c b d")), 3);
        assert_eq!(lcs_exhaustive(&t(""), &t("a")), 0);
    }

    #[test]
    fn length_rule_cases() {
        assert_eq!(length_rule(&[250, 150, 120], 100, 180, 70), 1);
        assert_eq!(length_rule(&[250, 90, 85], 100, 180, 70), 2);
        assert_eq!(length_rule(&[250, 60, 50], 100, 180, 70), 0);
    }

    #[test]
    fn argmax_ties_go_first() {
        assert_eq!(weighted_argmax(&[vec![1.0], vec![1.0]], &[1.0]), 0);
    }
}
