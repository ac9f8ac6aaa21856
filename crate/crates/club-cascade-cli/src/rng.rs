//! Substream derivation for paired experiments.
//!
//! All environment randomness in a run is keyed, not drawn sequentially: a
//! SplitMix64 hash of `(seed, purpose tag, round, …)` yields the user draw
//! of round `t` and the click noise of item `i` at round `t` directly.
//! Every algorithm sharing a seed therefore faces byte-identical users and
//! Bernoulli outcomes regardless of what it recommends, and results do not
//! depend on scheduling or thread count.

/// Purpose tags, fixed forever for reproducibility.
pub const TAG_ENV: u64 = 1;
pub const TAG_POOL: u64 = 2;
pub const TAG_USER: u64 = 3;
pub const TAG_CLICK: u64 = 5;
pub const TAG_SPLIT: u64 = 7;
pub const TAG_MATRIX: u64 = 9;
pub const TAG_USER_CHOICE: u64 = 11;
pub const TAG_ITEM_CHOICE: u64 = 13;
pub const TAG_SUBSAMPLE: u64 = 15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Collapse `(seed, tags…)` into one well-mixed word.
pub fn mix(parts: &[u64]) -> u64 {
    let mut state = 0x243f6a8885a308d3;
    let mut out = 0;
    for &p in parts {
        state ^= p.wrapping_mul(0xff51afd7ed558ccd);
        out = splitmix64(&mut state);
    }
    out
}

/// Map a mixed word to `[0, 1)` with 53 bits of precision.
pub fn unit(word: u64) -> f64 {
    (word >> 11) as f64 / (1u64 << 53) as f64
}

/// Map a mixed word to `0..n` without modulo bias (widening multiply).
pub fn index(word: u64, n: usize) -> usize {
    ((word as u128 * n as u128) >> 64) as usize
}
