//! Online clustering of contextual cascading bandits.
//!
//! A simulation library for cascade-click recommendation: the CLUB-cascade
//! learner maintains per-user ridge statistics and a dynamic user graph whose
//! connected components pool observations; degenerate baselines treat all
//! users as one cluster or every user as its own. Synthetic environments,
//! offline replay against binary rating matrices, and executable
//! confidence/regret bound formulas round out the toolkit.

pub mod baselines;
pub mod bounds;
pub mod club;
pub mod env;
pub mod linalg;
pub mod replay;

use rand_chacha::rand_core::SeedableRng;

/// The one stream cipher RNG used for every seeded draw in this crate, so a
/// `u64` seed means the same thing on every platform.
pub type SeededRng = rand_chacha::ChaCha12Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}
