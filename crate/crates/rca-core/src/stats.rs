//! Paired significance testing and percent-gain arithmetic for experiment
//! comparisons.
//!
//! The primary test is the two-sided Wilcoxon signed-rank over paired
//! per-incident scores: exact null distribution up to 25 non-zero pairs,
//! normal approximation with continuity and tie corrections above that.
//! A seeded paired bootstrap is available as an alternative.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::randutil::uniform_index;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("paired samples differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },
    #[error("percent gain needs a positive baseline, got {0}")]
    NonPositiveBaseline(f64),
    #[error("bootstrap needs at least one iteration")]
    ZeroIterations,
}

/// Relative improvement of `treatment` over `baseline` in percent, rounded
/// to two decimals for display.
pub fn percent_gain(baseline: f64, treatment: f64) -> Result<f64, StatsError> {
    if baseline <= 0.0 {
        return Err(StatsError::NonPositiveBaseline(baseline));
    }
    let gain = 100.0 * (treatment - baseline) / baseline;
    Ok(libm::round(gain * 100.0) / 100.0)
}

/// Two-sided Wilcoxon signed-rank p-value for paired samples.
///
/// Zero differences are dropped; tied |differences| share average ranks.
/// Identical samples return exactly 1.0. Requires at least 5 pairs before
/// and after the zero-drop (except the all-zero case).
pub fn wilcoxon_signed_rank(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 5 {
        return Err(StatsError::TooFewSamples {
            required: 5,
            actual: xs.len(),
        });
    }
    let diffs: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        // No evidence either way.
        return Ok(1.0);
    }
    let n = diffs.len();
    if n < 5 {
        return Err(StatsError::TooFewSamples {
            required: 5,
            actual: n,
        });
    }

    // Rank |differences| ascending, averaging ranks over ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| libm::fabs(diffs[a]).total_cmp(&libm::fabs(diffs[b])));
    let mut ranks = alloc::vec![0.0f64; n];
    let mut tie_groups: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && libm::fabs(diffs[order[j + 1]]) == libm::fabs(diffs[order[i]]) {
            j += 1;
        }
        let average_rank = (i + j + 2) as f64 / 2.0;
        for &slot in &order[i..=j] {
            ranks[slot] = average_rank;
        }
        tie_groups.push(j - i + 1);
        i = j + 1;
    }
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();

    let p = if n <= 25 {
        exact_two_sided(&ranks, w_plus)
    } else {
        normal_two_sided(n, &tie_groups, w_plus)
    };
    Ok(p.min(1.0))
}

/// Exact two-sided p by enumerating the null distribution of W+ over all
/// sign assignments of the observed ranks (subset-sum counting over doubled
/// ranks, which are integers even with .5 average ranks).
fn exact_two_sided(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| libm::round(r * 2.0) as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut ways = alloc::vec![0u64; total + 1];
    ways[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            ways[s] += ways[s - r];
        }
    }
    let assignments = (1u64 << ranks.len()) as f64;
    let w2 = libm::round(w_plus * 2.0) as usize;
    let below: u64 = ways[..=w2].iter().sum();
    let above: u64 = ways[w2..].iter().sum();
    let tail = (below.min(above)) as f64 / assignments;
    2.0 * tail
}

/// Large-sample normal approximation with continuity correction and the
/// standard tie correction on the variance.
fn normal_two_sided(n: usize, tie_groups: &[usize], w_plus: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_groups
        .iter()
        .map(|&t| {
            let tf = t as f64;
            tf * tf * tf - tf
        })
        .sum();
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let sd = libm::sqrt(variance);
    let centered = w_plus - mean;
    let correction = 0.5 * sign(centered);
    let z = (centered - correction) / sd;
    // Two-sided tail of the standard normal.
    libm::erfc(libm::fabs(z) / core::f64::consts::SQRT_2)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Seeded two-sided paired bootstrap over the difference vector: resample
/// differences with replacement and count how often the resampled mean falls
/// on each side of zero (add-one smoothed).
pub fn paired_bootstrap(
    xs: &[f64],
    ys: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(StatsError::TooFewSamples {
            required: 1,
            actual: 0,
        });
    }
    if iterations == 0 {
        return Err(StatsError::ZeroIterations);
    }
    let diffs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut non_positive = 0usize;
    let mut non_negative = 0usize;
    for _ in 0..iterations {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += diffs[uniform_index(&mut rng, n)];
        }
        let mean = sum / n as f64;
        if mean <= 0.0 {
            non_positive += 1;
        }
        if mean >= 0.0 {
            non_negative += 1;
        }
    }
    let b = (iterations + 1) as f64;
    let lo = (non_positive + 1) as f64 / b;
    let hi = (non_negative + 1) as f64 / b;
    Ok((2.0 * lo.min(hi)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_gain_matches_reported_ratios() {
        assert_eq!(percent_gain(10.27, 19.89).unwrap(), 93.67);
        assert_eq!(percent_gain(14.39, 19.89).unwrap(), 38.22);
        assert_eq!(percent_gain(7.5, 7.5).unwrap(), 0.0);
    }

    #[test]
    fn percent_gain_rejects_non_positive_baseline() {
        assert!(matches!(
            percent_gain(0.0, 5.0),
            Err(StatsError::NonPositiveBaseline(_))
        ));
        assert!(percent_gain(-1.0, 5.0).is_err());
    }

    #[test]
    fn percent_gain_sign_follows_direction() {
        assert!(percent_gain(10.0, 12.0).unwrap() > 0.0);
        assert!(percent_gain(10.0, 8.0).unwrap() < 0.0);
    }

    #[test]
    fn wilcoxon_identical_samples_p_is_one() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(wilcoxon_signed_rank(&xs, &xs).unwrap(), 1.0);
    }

    #[test]
    fn wilcoxon_exact_five_positive_differences() {
        let xs = [2.0, 3.0, 4.0, 5.0, 6.0];
        let ys = [1.0, 1.0, 1.0, 1.0, 1.0];
        let p = wilcoxon_signed_rank(&xs, &ys).unwrap();
        assert!((p - 0.0625).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn wilcoxon_rejects_mismatched_or_short_input() {
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0; 5], &[1.0; 4]),
            Err(StatsError::LengthMismatch { .. })
        ));
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewSamples { .. })
        ));
        // Six pairs but only three non-zero differences.
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ys = [1.0, 2.0, 3.0, 5.0, 7.0, 9.0];
        assert!(matches!(
            wilcoxon_signed_rank(&xs, &ys),
            Err(StatsError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn wilcoxon_large_shift_is_overwhelming() {
        let xs: Vec<f64> = (0..100).map(|i| 10.0 + (i % 7) as f64 * 0.1).collect();
        let ys: Vec<f64> = (0..100).map(|i| (i % 5) as f64 * 0.1).collect();
        let p = wilcoxon_signed_rank(&xs, &ys).unwrap();
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn wilcoxon_p_shrinks_with_effect_size() {
        // Fixed symmetric noise: small shifts leave the signs near balance,
        // larger shifts flip ever more differences positive.
        let base: Vec<f64> = (0..40).map(|i| (i % 11) as f64).collect();
        let ps: Vec<f64> = [0.2, 1.0, 2.0, 4.0]
            .iter()
            .map(|shift| {
                let shifted: Vec<f64> = base
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v + shift + ((i % 7) as f64 - 3.0))
                    .collect();
                wilcoxon_signed_rank(&shifted, &base).unwrap()
            })
            .collect();
        for pair in ps.windows(2) {
            assert!(pair[1] <= pair[0], "ps = {ps:?}");
        }
        assert!(ps[3] < ps[0] / 100.0, "ps = {ps:?}");
    }

    #[test]
    fn bootstrap_is_seed_deterministic_and_detects_shift() {
        let xs: Vec<f64> = (0..50).map(|i| 5.0 + (i % 3) as f64).collect();
        let ys: Vec<f64> = (0..50).map(|i| (i % 3) as f64).collect();
        let p1 = paired_bootstrap(&xs, &ys, 2000, 42).unwrap();
        let p2 = paired_bootstrap(&xs, &ys, 2000, 42).unwrap();
        assert_eq!(p1, p2);
        assert!(p1 < 0.01);
        let p_same = paired_bootstrap(&xs, &xs, 2000, 42).unwrap();
        assert!(p_same > 0.9, "p = {p_same}");
    }
}
