//! Lexical generation metrics: ROUGE-1, ROUGE-L, METEOR, and GLEU.
//!
//! All scores are reported on a 0–100 scale. Tokenization is shared across
//! the four metrics ([`normalize_tokens`]): lowercase, split on Unicode
//! whitespace, strip leading/trailing ASCII punctuation, drop empties.
//! Semantic scorers (BERTScore-class models) are not implemented natively;
//! they plug in through [`SemanticScorer`].

pub mod porter;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Canonical metric column names, in report order.
pub const ROUGE_L: &str = "ROUGE-L";
pub const ROUGE_1: &str = "ROUGE-1";
pub const METEOR: &str = "METEOR";
pub const GLEU: &str = "GLEU";
/// Report order for the four native metrics.
pub const NATIVE_METRICS: [&str; 4] = [ROUGE_L, ROUGE_1, METEOR, GLEU];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("reference yields no {0}-grams")]
    EmptyReference(usize),
    #[error("n-gram order must be at least 1")]
    ZeroOrderNgram,
    #[error("no candidate/reference pairs to evaluate")]
    NoPairs,
    #[error("external scorer {name}: {reason}")]
    External { name: String, reason: String },
}

/// Lowercase, split on Unicode whitespace, trim ASCII punctuation from both
/// ends of each token, and drop tokens that end up empty.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|raw| raw.trim_matches(|c: char| c.is_ascii_punctuation()).to_string())
        .filter(|token| !token.is_empty())
        .collect()
}

/// Longest common subsequence length by dynamic programming.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = alloc::vec![0usize; b.len() + 1];
    let mut curr = alloc::vec![0usize; b.len() + 1];
    for item_a in a {
        for (j, item_b) in b.iter().enumerate() {
            curr[j + 1] = if item_a == item_b {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        core::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut counts: BTreeMap<&[String], usize> = BTreeMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

fn clipped_overlap(cand: &BTreeMap<&[String], usize>, refr: &BTreeMap<&[String], usize>) -> usize {
    cand.iter()
        .map(|(gram, count)| (*count).min(refr.get(gram).copied().unwrap_or(0)))
        .sum()
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// ROUGE-N F1 with clipped n-gram overlap, scaled to 0–100.
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> Result<f64, MetricsError> {
    if n == 0 {
        return Err(MetricsError::ZeroOrderNgram);
    }
    let cand_tokens = normalize_tokens(candidate);
    let ref_tokens = normalize_tokens(reference);
    let cand_grams = ngram_counts(&cand_tokens, n);
    let ref_grams = ngram_counts(&ref_tokens, n);
    let ref_total: usize = ref_grams.values().sum();
    if ref_total == 0 {
        return Err(MetricsError::EmptyReference(n));
    }
    let cand_total: usize = cand_grams.values().sum();
    let overlap = clipped_overlap(&cand_grams, &ref_grams) as f64;
    let precision = if cand_total == 0 { 0.0 } else { overlap / cand_total as f64 };
    let recall = overlap / ref_total as f64;
    Ok(100.0 * f1(precision, recall))
}

/// ROUGE-L F1 from the longest common token subsequence, scaled to 0–100.
pub fn rouge_l(candidate: &str, reference: &str) -> Result<f64, MetricsError> {
    let cand_tokens = normalize_tokens(candidate);
    let ref_tokens = normalize_tokens(reference);
    if ref_tokens.is_empty() {
        return Err(MetricsError::EmptyReference(1));
    }
    if cand_tokens.is_empty() {
        return Ok(0.0);
    }
    let lcs = lcs_length(&cand_tokens, &ref_tokens) as f64;
    let precision = lcs / cand_tokens.len() as f64;
    let recall = lcs / ref_tokens.len() as f64;
    Ok(100.0 * f1(precision, recall))
}

/// Unigram alignment for METEOR: exact matches first, then Porter-stemmed
/// matches over the residuals. Within a stage, candidates are scanned left to
/// right; a reference position continuing the previous match is preferred,
/// otherwise the leftmost unused match is taken.
fn align(cand: &[String], refr: &[String]) -> Vec<(usize, usize)> {
    let cand_stems: Vec<String> = cand.iter().map(|t| porter::stem(t)).collect();
    let ref_stems: Vec<String> = refr.iter().map(|t| porter::stem(t)).collect();
    let mut ref_used = alloc::vec![false; refr.len()];
    let mut assigned: Vec<Option<usize>> = alloc::vec![None; cand.len()];
    for stage in 0..2 {
        for i in 0..cand.len() {
            if assigned[i].is_some() {
                continue;
            }
            let matches = |j: usize| {
                if stage == 0 {
                    cand[i] == refr[j]
                } else {
                    cand_stems[i] == ref_stems[j]
                }
            };
            let preferred = (i > 0)
                .then(|| assigned[i - 1].map(|j| j + 1))
                .flatten()
                .filter(|&p| p < refr.len() && !ref_used[p] && matches(p));
            let chosen =
                preferred.or_else(|| (0..refr.len()).find(|&j| !ref_used[j] && matches(j)));
            if let Some(j) = chosen {
                ref_used[j] = true;
                assigned[i] = Some(j);
            }
        }
    }
    assigned
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect()
}

/// Contiguous chunks of an alignment: a chunk breaks whenever the matched
/// positions stop advancing by one on either side.
fn chunk_count(pairs: &[(usize, usize)]) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    1 + pairs
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

/// METEOR with exact + Porter-stemmed matching, Fmean = 10PR/(R+9P), and
/// fragmentation penalty 0.5·(chunks/matches)³, scaled to 0–100.
pub fn meteor(candidate: &str, reference: &str) -> Result<f64, MetricsError> {
    let cand_tokens = normalize_tokens(candidate);
    let ref_tokens = normalize_tokens(reference);
    if ref_tokens.is_empty() {
        return Err(MetricsError::EmptyReference(1));
    }
    if cand_tokens.is_empty() {
        return Ok(0.0);
    }
    let pairs = align(&cand_tokens, &ref_tokens);
    let matches = pairs.len() as f64;
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let precision = matches / cand_tokens.len() as f64;
    let recall = matches / ref_tokens.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let fragmentation = chunk_count(&pairs) as f64 / matches;
    let penalty = 0.5 * fragmentation * fragmentation * fragmentation;
    Ok(100.0 * f_mean * (1.0 - penalty))
}

/// GLEU over pooled 1..=`max_n` grams: min(precision, recall) of the clipped
/// match count, scaled to 0–100.
pub fn gleu(candidate: &str, reference: &str, max_n: usize) -> Result<f64, MetricsError> {
    if max_n == 0 {
        return Err(MetricsError::ZeroOrderNgram);
    }
    let cand_tokens = normalize_tokens(candidate);
    let ref_tokens = normalize_tokens(reference);
    if ref_tokens.is_empty() {
        return Err(MetricsError::EmptyReference(1));
    }
    let mut matched = 0usize;
    let mut cand_total = 0usize;
    let mut ref_total = 0usize;
    for n in 1..=max_n {
        let cand_grams = ngram_counts(&cand_tokens, n);
        let ref_grams = ngram_counts(&ref_tokens, n);
        matched += clipped_overlap(&cand_grams, &ref_grams);
        cand_total += cand_grams.values().sum::<usize>();
        ref_total += ref_grams.values().sum::<usize>();
    }
    let precision = if cand_total == 0 { 0.0 } else { matched as f64 / cand_total as f64 };
    let recall = matched as f64 / ref_total as f64;
    Ok(100.0 * precision.min(recall))
}

/// Scores for one (candidate, reference) pair, keyed by metric name.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairScores {
    pub scores: BTreeMap<String, f64>,
}

/// Per-pair scores plus arithmetic means over the corpus.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricReport {
    pub per_pair: Vec<PairScores>,
    pub means: BTreeMap<String, f64>,
    pub n: usize,
}

/// Pluggable semantic scorer (BERTScore / NUBIA class). Implementations live
/// outside this crate; scores must land in [0, 100].
pub trait SemanticScorer {
    fn name(&self) -> &str;
    fn score_pairs(&self, pairs: &[(String, String)]) -> Result<Vec<f64>, MetricsError>;
}

fn score_pair(candidate: &str, reference: &str) -> Result<BTreeMap<String, f64>, MetricsError> {
    let mut scores = BTreeMap::new();
    scores.insert(ROUGE_L.to_string(), rouge_l(candidate, reference)?);
    scores.insert(ROUGE_1.to_string(), rouge_n(candidate, reference, 1)?);
    scores.insert(METEOR.to_string(), meteor(candidate, reference)?);
    scores.insert(GLEU.to_string(), gleu(candidate, reference, 4)?);
    Ok(scores)
}

fn mean_of(per_pair: &[PairScores]) -> BTreeMap<String, f64> {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for pair in per_pair {
        for (metric, value) in &pair.scores {
            let entry = sums.entry(metric.clone()).or_insert((0.0, 0));
            entry.0 += value;
            entry.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(metric, (sum, count))| (metric, sum / count as f64))
        .collect()
}

/// Score every pair with the four native metrics and average per metric.
pub fn evaluate_corpus(pairs: &[(String, String)]) -> Result<MetricReport, MetricsError> {
    evaluate_corpus_with_external(pairs, &[])
}

/// As [`evaluate_corpus`], merging columns from any configured external
/// semantic scorers.
pub fn evaluate_corpus_with_external(
    pairs: &[(String, String)],
    scorers: &[&dyn SemanticScorer],
) -> Result<MetricReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::NoPairs);
    }
    let mut per_pair: Vec<PairScores> = pairs
        .iter()
        .map(|(candidate, reference)| {
            score_pair(candidate, reference).map(|scores| PairScores { scores })
        })
        .collect::<Result<_, _>>()?;
    for scorer in scorers {
        let values = scorer.score_pairs(pairs)?;
        if values.len() != pairs.len() {
            return Err(MetricsError::External {
                name: scorer.name().to_string(),
                reason: alloc::format!(
                    "returned {} scores for {} pairs",
                    values.len(),
                    pairs.len()
                ),
            });
        }
        for (pair, value) in per_pair.iter_mut().zip(values) {
            if !(0.0..=100.0).contains(&value) {
                return Err(MetricsError::External {
                    name: scorer.name().to_string(),
                    reason: alloc::format!("score {value} outside [0, 100]"),
                });
            }
            pair.scores.insert(scorer.name().to_string(), value);
        }
    }
    let means = mean_of(&per_pair);
    Ok(MetricReport {
        n: per_pair.len(),
        means,
        per_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAND: &str = "service timeout caused outage";
    const REF: &str = "network timeout caused the outage";

    fn assert_close(actual: f64, expected: f64) {
        assert!(
            (actual - expected).abs() < 1e-9,
            "expected {expected}, got {actual}"
        );
    }

    #[test]
    fn normalize_strips_punctuation_and_case() {
        assert_eq!(normalize_tokens("The cat, sat."), ["the", "cat", "sat"]);
        assert_eq!(normalize_tokens(""), Vec::<String>::new());
        assert_eq!(normalize_tokens("A  B"), ["a", "b"]);
    }

    #[test]
    fn lcs_textbook_cases() {
        let a = ["a", "b", "c", "d", "e"];
        let b = ["a", "c", "e"];
        assert_eq!(lcs_length(&a, &b), 3);
        assert_eq!(lcs_length(&a, &a), 5);
        assert_eq!(lcs_length(&a, &["x", "y"]), 0);
        assert_eq!(lcs_length::<&str>(&[], &b), 0);
    }

    #[test]
    fn rouge_1_hand_derived_pair() {
        // P = 3/4, R = 3/5, F1 = 2/3.
        assert_close(rouge_n(CAND, REF, 1).unwrap(), 200.0 / 3.0);
    }

    #[test]
    fn rouge_1_identity_and_disjoint() {
        assert_close(rouge_n("x y z", "x y z", 1).unwrap(), 100.0);
        assert_close(rouge_n("a b", "c d", 1).unwrap(), 0.0);
    }

    #[test]
    fn rouge_rejects_empty_reference() {
        assert_eq!(rouge_n("a", "", 1), Err(MetricsError::EmptyReference(1)));
        assert_eq!(rouge_l("a", "..."), Err(MetricsError::EmptyReference(1)));
        // Reference shorter than n has no n-grams either.
        assert_eq!(rouge_n("a b", "a", 2), Err(MetricsError::EmptyReference(2)));
    }

    #[test]
    fn rouge_l_hand_derived_pair() {
        // LCS = [timeout, caused, outage].
        assert_close(rouge_l(CAND, REF).unwrap(), 200.0 / 3.0);
    }

    #[test]
    fn rouge_l_identity_and_disjoint() {
        assert_close(rouge_l("x y z", "x y z").unwrap(), 100.0);
        assert_close(rouge_l("a b", "c d").unwrap(), 0.0);
    }

    #[test]
    fn rouge_1_clipping_counts_repeats_once_per_reference_occurrence() {
        // candidate has three "cat", reference only one: overlap clipped to 1.
        // P = 1/3, R = 1/2 → F1 = 0.4.
        assert_close(rouge_n("cat cat cat", "cat dog", 1).unwrap(), 40.0);
    }

    #[test]
    fn meteor_identity_has_chunk_penalty_only() {
        // m = 3, F = 1, ch = 1 → 100·(1 − 0.5/27).
        assert_close(meteor("the cat sat", "the cat sat").unwrap(), 5300.0 / 54.0);
    }

    #[test]
    fn meteor_swapped_tokens_halve_the_score() {
        // m = 2, F = 1, ch = 2 → penalty 0.5.
        assert_close(meteor("cat the", "the cat").unwrap(), 50.0);
    }

    #[test]
    fn meteor_no_matches_scores_zero() {
        assert_close(meteor("alpha beta", "gamma delta").unwrap(), 0.0);
    }

    #[test]
    fn meteor_stemming_rescues_inflected_matches() {
        let with_stem = meteor("service failing", "service failed").unwrap();
        let without = meteor("service crashed", "service failed").unwrap();
        assert!(with_stem > without);
        assert!(with_stem > 50.0);
    }

    #[test]
    fn gleu_hand_derived_pair() {
        // matched = 6, cand total = 6, ref total = 10 → min(1, 0.6).
        assert_close(gleu("the cat sat", "the cat sat down", 4).unwrap(), 60.0);
    }

    #[test]
    fn gleu_identity_and_disjoint() {
        assert_close(gleu("a b c", "a b c", 4).unwrap(), 100.0);
        assert_close(gleu("a b", "c d", 4).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_corpus_means_are_arithmetic() {
        let pairs = alloc::vec![
            ("same text".to_string(), "same text".to_string()),
            ("aaa bbb".to_string(), "ccc ddd".to_string()),
        ];
        let report = evaluate_corpus(&pairs).unwrap();
        assert_eq!(report.n, 2);
        assert_close(report.per_pair[0].scores[ROUGE_L], 100.0);
        assert_close(report.per_pair[1].scores[ROUGE_L], 0.0);
        assert_close(report.means[ROUGE_L], 50.0);
        assert_close(report.means[GLEU], 50.0);
    }

    #[test]
    fn evaluate_corpus_rejects_empty_input() {
        assert_eq!(evaluate_corpus(&[]), Err(MetricsError::NoPairs));
    }

    struct FixedScorer(f64);
    impl SemanticScorer for FixedScorer {
        fn name(&self) -> &str {
            "BERTScore"
        }
        fn score_pairs(&self, pairs: &[(String, String)]) -> Result<Vec<f64>, MetricsError> {
            Ok(alloc::vec![self.0; pairs.len()])
        }
    }

    #[test]
    fn external_scores_merge_into_report() {
        let pairs = alloc::vec![("a".to_string(), "a".to_string())];
        let scorer = FixedScorer(87.5);
        let report = evaluate_corpus_with_external(&pairs, &[&scorer]).unwrap();
        assert_close(report.means["BERTScore"], 87.5);
    }

    #[test]
    fn external_scores_outside_range_are_rejected() {
        let pairs = alloc::vec![("a".to_string(), "a".to_string())];
        let scorer = FixedScorer(140.0);
        assert!(matches!(
            evaluate_corpus_with_external(&pairs, &[&scorer]),
            Err(MetricsError::External { .. })
        ));
    }
}
