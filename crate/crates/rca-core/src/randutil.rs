//! Crate-internal RNG helpers. All randomness in this crate flows through
//! seeded ChaCha streams plus these primitives, so results are bit-stable
//! across platforms and releases.

use rand_core::RngCore;

/// Unbiased uniform draw from `0..n` by rejection sampling on `u64`.
pub(crate) fn uniform_index(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    let n64 = n as u64;
    let zone = (u64::MAX / n64) * n64;
    loop {
        let value = rng.next_u64();
        if value < zone {
            return (value % n64) as usize;
        }
    }
}

/// In-place Fisher-Yates shuffle.
pub(crate) fn shuffle<T>(rng: &mut impl RngCore, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}
