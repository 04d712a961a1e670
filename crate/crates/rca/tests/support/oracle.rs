//! Brute-force metric oracles, deliberately written on different algorithmic
//! routes than the production implementations:
//!
//! - n-gram overlap by per-occurrence used-flag matching instead of count
//!   maps,
//! - LCS by exhaustive subsequence enumeration instead of dynamic
//!   programming,
//! - METEOR chunks by exhaustive search over all maximum alignments instead
//!   of the greedy contiguity heuristic.
//!
//! They only need to be correct and slow, and only on short curated texts.

use rca_core::metrics::porter;

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| c.is_ascii_punctuation())
                .to_string()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

fn ngrams(tokens: &[String], n: usize) -> Vec<&[String]> {
    if tokens.len() < n {
        Vec::new()
    } else {
        tokens.windows(n).collect()
    }
}

/// Clipped overlap by scanning reference occurrences with used flags.
fn used_flag_overlap(cand: &[&[String]], refr: &[&[String]]) -> usize {
    let mut used = vec![false; refr.len()];
    let mut overlap = 0;
    for gram in cand {
        if let Some(pos) = refr
            .iter()
            .enumerate()
            .position(|(i, r)| !used[i] && r == gram)
        {
            used[pos] = true;
            overlap += 1;
        }
    }
    overlap
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> f64 {
    let cand_tokens = tokenize(candidate);
    let ref_tokens = tokenize(reference);
    let cand = ngrams(&cand_tokens, n);
    let refr = ngrams(&ref_tokens, n);
    assert!(!refr.is_empty(), "oracle needs a non-empty reference");
    let overlap = used_flag_overlap(&cand, &refr) as f64;
    let p = if cand.is_empty() {
        0.0
    } else {
        overlap / cand.len() as f64
    };
    let r = overlap / refr.len() as f64;
    100.0 * f1(p, r)
}

/// LCS length by enumerating every subsequence of the shorter sequence and
/// checking it against the longer one. Exponential; inputs must stay small.
fn lcs_by_enumeration(a: &[String], b: &[String]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    assert!(short.len() <= 16, "oracle LCS needs a side of at most 16 tokens");
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let picked: Vec<&String> = (0..short.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &short[i])
            .collect();
        if picked.len() <= best {
            continue;
        }
        let mut it = long.iter();
        if picked.iter().all(|want| it.any(|have| have == *want)) {
            best = picked.len();
        }
    }
    best
}

pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    let cand = tokenize(candidate);
    let refr = tokenize(reference);
    assert!(!refr.is_empty(), "oracle needs a non-empty reference");
    if cand.is_empty() {
        return 0.0;
    }
    let lcs = lcs_by_enumeration(&cand, &refr) as f64;
    100.0 * f1(lcs / cand.len() as f64, lcs / refr.len() as f64)
}

pub fn gleu(candidate: &str, reference: &str, max_n: usize) -> f64 {
    let cand_tokens = tokenize(candidate);
    let ref_tokens = tokenize(reference);
    assert!(!ref_tokens.is_empty(), "oracle needs a non-empty reference");
    let mut matched = 0usize;
    let mut cand_total = 0usize;
    let mut ref_total = 0usize;
    for n in 1..=max_n {
        let cand = ngrams(&cand_tokens, n);
        let refr = ngrams(&ref_tokens, n);
        matched += used_flag_overlap(&cand, &refr);
        cand_total += cand.len();
        ref_total += refr.len();
    }
    let p = if cand_total == 0 {
        0.0
    } else {
        matched as f64 / cand_total as f64
    };
    let r = matched as f64 / ref_total as f64;
    100.0 * p.min(r)
}

/// Count chunks of an alignment sorted by candidate position.
fn chunk_count(pairs: &[(usize, usize)]) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    1 + sorted
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

/// Multiset-intersection size between two key slices over `eligible`
/// positions.
fn max_matches(
    cand_keys: &[String],
    ref_keys: &[String],
    cand_free: &[bool],
    ref_free: &[bool],
) -> usize {
    use std::collections::BTreeMap;
    let mut cand_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, key) in cand_keys.iter().enumerate() {
        if cand_free[i] {
            *cand_counts.entry(key).or_insert(0) += 1;
        }
    }
    let mut ref_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (j, key) in ref_keys.iter().enumerate() {
        if ref_free[j] {
            *ref_counts.entry(key).or_insert(0) += 1;
        }
    }
    cand_counts
        .iter()
        .map(|(key, c)| (*c).min(ref_counts.get(key).copied().unwrap_or(0)))
        .sum()
}

/// Enumerate every alignment that achieves the maximum number of matches in
/// a stage, invoking `done` with the stage's pairs appended.
#[allow(clippy::too_many_arguments)]
fn explore_stage(
    cand_keys: &[String],
    ref_keys: &[String],
    cand_free: &mut Vec<bool>,
    ref_free: &mut Vec<bool>,
    start: usize,
    remaining: usize,
    pairs: &mut Vec<(usize, usize)>,
    done: &mut dyn FnMut(&mut Vec<bool>, &mut Vec<bool>, &mut Vec<(usize, usize)>),
) {
    if remaining == 0 {
        done(cand_free, ref_free, pairs);
        return;
    }
    if start >= cand_keys.len() {
        return;
    }
    // Prune: not enough free candidate positions left to hit the target.
    let free_left = (start..cand_keys.len()).filter(|&i| cand_free[i]).count();
    if free_left < remaining {
        return;
    }
    let matchable = cand_free[start]
        && ref_keys
            .iter()
            .enumerate()
            .any(|(j, key)| ref_free[j] && *key == cand_keys[start]);
    // Option 1: leave cand position `start` unmatched.
    explore_stage(
        cand_keys,
        ref_keys,
        cand_free,
        ref_free,
        start + 1,
        remaining,
        pairs,
        done,
    );
    if !matchable {
        return;
    }
    // Option 2: match it to every available reference position.
    for j in 0..ref_keys.len() {
        if ref_free[j] && ref_keys[j] == cand_keys[start] {
            cand_free[start] = false;
            ref_free[j] = false;
            pairs.push((start, j));
            explore_stage(
                cand_keys,
                ref_keys,
                cand_free,
                ref_free,
                start + 1,
                remaining - 1,
                pairs,
                done,
            );
            pairs.pop();
            cand_free[start] = true;
            ref_free[j] = true;
        }
    }
}

/// METEOR by exhaustive alignment search: exact matches first, stemmed
/// matches over the residual, both at their maximum counts, minimizing the
/// chunk count over every qualifying alignment.
pub fn meteor(candidate: &str, reference: &str) -> f64 {
    let cand = tokenize(candidate);
    let refr = tokenize(reference);
    assert!(!refr.is_empty(), "oracle needs a non-empty reference");
    if cand.is_empty() {
        return 0.0;
    }
    let cand_stems: Vec<String> = cand.iter().map(|t| porter::stem(t)).collect();
    let ref_stems: Vec<String> = refr.iter().map(|t| porter::stem(t)).collect();

    let mut cand_free = vec![true; cand.len()];
    let mut ref_free = vec![true; refr.len()];
    let exact_target = max_matches(&cand, &refr, &cand_free, &ref_free);

    let mut best_chunks: Option<usize> = None;
    let mut total_matches = 0usize;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    explore_stage(
        &cand,
        &refr,
        &mut cand_free,
        &mut ref_free,
        0,
        exact_target,
        &mut pairs,
        &mut |cand_free, ref_free, pairs| {
            let stem_target = max_matches(&cand_stems, &ref_stems, cand_free, ref_free);
            total_matches = exact_target + stem_target;
            explore_stage(
                &cand_stems,
                &ref_stems,
                cand_free,
                ref_free,
                0,
                stem_target,
                pairs,
                &mut |_, _, pairs| {
                    let chunks = chunk_count(pairs);
                    best_chunks = Some(best_chunks.map_or(chunks, |b| b.min(chunks)));
                },
            );
        },
    );

    let m = total_matches as f64;
    if total_matches == 0 {
        return 0.0;
    }
    let chunks = best_chunks.expect("at least one maximal alignment") as f64;
    let p = m / cand.len() as f64;
    let r = m / refr.len() as f64;
    let f_mean = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * (chunks / m).powi(3);
    100.0 * f_mean * (1.0 - penalty)
}
