//! Executable closed-form bounds: confidence widths, deletion scales,
//! determinant / self-normalized-sum / eigenvalue-concentration inequalities,
//! exploration-round counts, and the cumulative regret bound.
//!
//! Natural logarithms throughout. The [`empirical`] submodule runs each
//! inequality against simulated data and reports violations.

pub mod empirical;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("confidence delta {0} exceeds 1/8")]
    DeltaTooLarge(f64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

/// Every parameter the closed-form bounds consume.
#[derive(Clone, Debug)]
pub struct BoundsConfig {
    pub d: usize,
    pub lambda: f64,
    pub delta: f64,
    pub gamma: f64,
    pub lambda_x: f64,
    pub k: usize,
    /// Feature norm cap, 1 unless stated otherwise.
    pub l_norm: f64,
    pub u: usize,
    pub m: usize,
    pub horizon: u64,
    pub c_mu: f64,
    pub kappa_mu: f64,
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.d == 0 || self.k == 0 || self.u == 0 || self.m == 0 || self.horizon == 0 {
            return Err("counts must be positive".into());
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("lambda_x", self.lambda_x),
            ("l_norm", self.l_norm),
            ("c_mu", self.c_mu),
            ("kappa_mu", self.kappa_mu),
        ] {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.delta >= 1.0 {
            return Err(format!("delta must be below 1, got {}", self.delta));
        }
        if self.gamma > 2.0 {
            return Err(format!("gamma must be at most 2, got {}", self.gamma));
        }
        if self.lambda_x > 1.0 {
            return Err(format!("lambda_x must be at most 1, got {}", self.lambda_x));
        }
        Ok(())
    }
}

/// Ridge confidence width `√(d ln(1 + t/(λd)) + 2 ln(1/δ)) + √λ`.
///
/// `delta = 1` is permitted (the log term vanishes), which is handy for
/// pinning the width's shape in tests.
pub fn beta_linear(t: f64, delta: f64, d: usize, lambda: f64) -> f64 {
    assert!(t >= 0.0 && delta > 0.0 && delta <= 1.0 && lambda > 0.0);
    let d = d as f64;
    (d * (1.0 + t / (lambda * d)).ln() + 2.0 * (1.0 / delta).ln()).sqrt() + lambda.sqrt()
}

/// Generalized-linear confidence width
/// `(1/c_μ) √(8/λ_x + d ln(T/d) + 2 ln(1/δ))`, with the middle logarithm
/// clamped at zero for `T < d` where the bound is vacuous anyway.
pub fn beta_glm(t: f64, delta: f64, d: usize, lambda_x: f64, c_mu: f64) -> f64 {
    assert!(t >= 0.0 && delta > 0.0 && delta <= 1.0 && lambda_x > 0.0 && c_mu > 0.0);
    let d = d as f64;
    let log_term = if t > d { (t / d).ln() } else { 0.0 };
    (8.0 / lambda_x + d * log_term + 2.0 * (1.0 / delta).ln()).sqrt() / c_mu
}

/// Which reward model an edge-deletion scale is for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaVariant {
    Linear,
    Glm { c_mu: f64 },
}

/// Default deletion scale: `√(32d/λ_x)` for linear rewards and
/// `√(32d/(λ_x c_μ²))` for generalized-linear ones.
pub fn alpha_default(d: usize, lambda_x: f64, variant: AlphaVariant) -> f64 {
    assert!(d >= 1 && lambda_x > 0.0);
    let base = 32.0 * d as f64 / lambda_x;
    match variant {
        AlphaVariant::Linear => base.sqrt(),
        AlphaVariant::Glm { c_mu } => {
            assert!(c_mu > 0.0);
            (base / (c_mu * c_mu)).sqrt()
        }
    }
}

/// Determinant cap for a positive-definite matrix grown by rank-one terms:
/// `det(M_n) ≤ ((trace(M₀) + Σ‖x_t‖²)/d)^d`.
pub fn det_upper_bound(trace_m0: f64, sum_sq_norms: f64, d: usize) -> f64 {
    assert!(trace_m0 >= 0.0 && sum_sq_norms >= 0.0 && d >= 1);
    ((trace_m0 + sum_sq_norms) / d as f64).powi(d as i32)
}

/// Ridge specialization of [`det_upper_bound`]: `(λ + nL²/d)^d`.
pub fn det_upper_bound_ridge(lambda: f64, n: usize, l: f64, d: usize) -> f64 {
    assert!(lambda >= 0.0 && l >= 0.0 && d >= 1);
    (lambda + n as f64 * l * l / d as f64).powi(d as i32)
}

/// Cap on the summed self-normalized norms of examined features over `n`
/// rounds of at most `K` items: `√(2dnK ln(1 + nKL²/(λd)))`.
///
/// The inequality's hypothesis is `λ ≥ KL²`; see
/// [`self_norm_hypothesis_holds`].
pub fn self_norm_sum_bound(n: usize, k: usize, d: usize, lambda: f64, l: f64) -> f64 {
    assert!(lambda > 0.0 && l >= 0.0 && d >= 1 && k >= 1);
    let (nf, kf, df) = (n as f64, k as f64, d as f64);
    (2.0 * df * nf * kf * (1.0 + nf * kf * l * l / (lambda * df)).ln()).sqrt()
}

pub fn self_norm_hypothesis_holds(k: usize, lambda: f64, l: f64) -> bool {
    lambda >= k as f64 * l * l
}

/// High-probability lower bound on the minimum eigenvalue of a random-design
/// Gramian after `t` draws, clamped at zero:
/// `(tλ_x − (L²/3)√(18tA + A²) − (L²/3)A)₊` with
/// `A = ln((tL⁴+1)(tL⁴+3)d/δ)`.
pub fn lambda_min_lower(t: u64, lambda_x: f64, l: f64, delta: f64, d: usize) -> f64 {
    assert!(lambda_x > 0.0 && l > 0.0 && delta > 0.0 && d >= 1);
    let t = t as f64;
    let l2 = l * l;
    let tl4 = t * l2 * l2;
    let a = ((tl4 + 1.0) * (tl4 + 3.0) * d as f64 / delta).ln();
    (t * lambda_x - l2 / 3.0 * (18.0 * t * a + a * a).sqrt() - l2 / 3.0 * a).max(0.0)
}

/// Number of unit-norm draws after which the Gramian's minimum eigenvalue
/// keeps pace with `t·λ_x/2`: `256/λ_x² · ln(128d/(λ_x²δ))`.
pub fn lambda_min_threshold(lambda_x: f64, d: usize, delta: f64) -> Result<f64, BoundsError> {
    assert!(lambda_x > 0.0 && lambda_x <= 1.0 && d >= 1 && delta > 0.0);
    if delta > 0.125 {
        return Err(BoundsError::DeltaTooLarge(delta));
    }
    Ok(256.0 / (lambda_x * lambda_x) * (128.0 * d as f64 / (lambda_x * lambda_x * delta)).ln())
}

/// Rounds after which a Bernoulli(p) sum stays at or above `B` with
/// probability `1 − δ` against `n` union-bounded time steps:
/// `(16/p) ln(n/δ) + 4B/p`.
pub fn bernstein_rounds(p: f64, b: f64, n: f64, delta: f64) -> f64 {
    assert!(p > 0.0 && p <= 0.5, "p must lie in (0, 1/2]");
    assert!(b > 0.0 && n > 0.0 && delta > 0.0);
    16.0 / p * (n / delta).ln() + 4.0 * b / p
}

/// Smallest `t` (namely `2a ln(ab)`) from which `t ≥ a ln(bt)` holds;
/// requires `ab ≥ e`.
pub fn log_dominance_threshold(a: f64, b: f64) -> Result<f64, BoundsError> {
    assert!(a > 0.0 && b > 0.0);
    if a * b < std::f64::consts::E {
        return Err(BoundsError::HypothesisViolated(format!(
            "need a·b ≥ e, got {}",
            a * b
        )));
    }
    Ok(2.0 * a * (a * b).ln())
}

/// Exploration rounds needed before the user graph's components settle on
/// the true clusters:
/// `16u ln(4uT/δ) + 4u max{512d/(γ²λ_x) ln(4u/δ), 256/λ_x² ln(128d/(λ_x²δ))}`.
pub fn t0_exploration(
    u: usize,
    d: usize,
    gamma: f64,
    lambda_x: f64,
    delta: f64,
    horizon: f64,
) -> f64 {
    assert!(gamma > 0.0 && lambda_x > 0.0 && delta > 0.0 && delta < 1.0 && horizon > 0.0);
    let (uf, df) = (u as f64, d as f64);
    let per_user = (512.0 * df / (gamma * gamma * lambda_x) * (4.0 * uf / delta).ln()).max(
        256.0 / (lambda_x * lambda_x) * (128.0 * df / (lambda_x * lambda_x * delta)).ln(),
    );
    16.0 * uf * (4.0 * uf * horizon / delta).ln() + 4.0 * uf * per_user
}

/// Per-user feedback count from which the `‖·‖₂` confidence radius drops
/// below `γ/2`: `512d/(γ²λ_x) · ln(4u/δ)`.
pub fn gamma_confidence_threshold(
    d: usize,
    gamma: f64,
    lambda_x: f64,
    u: usize,
    delta: f64,
) -> f64 {
    assert!(gamma > 0.0 && lambda_x > 0.0 && delta > 0.0);
    512.0 * d as f64 / (gamma * gamma * lambda_x) * (4.0 * u as f64 / delta).ln()
}

/// The quotient that [`gamma_confidence_threshold`] controls:
/// `(√(d ln(1+T/(λd)) + 2 ln(4u/δ)) + √λ) / √(λ + Tλ_x/8)`.
pub fn confidence_gap_quotient(
    t: f64,
    d: usize,
    lambda: f64,
    u: usize,
    delta: f64,
    lambda_x: f64,
) -> f64 {
    let df = d as f64;
    let numerator =
        (df * (1.0 + t / (lambda * df)).ln() + 2.0 * (4.0 * u as f64 / delta).ln()).sqrt()
            + lambda.sqrt();
    numerator / (lambda + t * lambda_x / 8.0).sqrt()
}

/// Cumulative regret cap over the full horizon, at confidence `1/T`:
/// the clustered self-normalized main term plus (for more than one cluster)
/// the exploration rounds.
pub fn regret_upper_bound(cfg: &BoundsConfig) -> f64 {
    let t = cfg.horizon as f64;
    let (d, m, k) = (cfg.d as f64, cfg.m as f64, cfg.k as f64);
    let width = (d * (1.0 + t / (cfg.lambda * d)).ln() + 2.0 * (4.0 * m * t).ln()).sqrt()
        + cfg.lambda.sqrt();
    let main =
        2.0 * width * (2.0 * d * m * k * t * (1.0 + t * k / (cfg.lambda * d)).ln()).sqrt();
    if cfg.m == 1 {
        // A complete initial graph is already the correct single cluster, so
        // no exploration rounds are charged.
        main
    } else {
        main + t0_exploration(cfg.u, cfg.d, cfg.gamma, cfg.lambda_x, 1.0 / t, t)
    }
}
