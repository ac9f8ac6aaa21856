//! Generalized-linear estimation for the learner: link functions, their
//! slope constants, and the penalized maximum-likelihood solve by Newton's
//! method with step halving.

use crate::linalg::{cholesky, SymMatrix, Vector};

use super::ClubError;

/// Residual norm at which the score equation counts as solved.
pub const GLM_SCORE_TOL: f64 = 1e-8;

/// Default ridge term keeping the estimator unique on separable data.
pub const GLM_DEFAULT_REG: f64 = 1e-6;

const NEWTON_ITERATION_CAP: usize = 100;

/// Strictly increasing, continuously differentiable link from linear score
/// to click probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkFunction {
    /// `μ(z) = 1/(1 + e^{−z})`.
    Logistic,
    /// `μ(z) = z`; recovers the linear model and is handy for cross-checks.
    Linear,
}

impl LinkFunction {
    pub fn mu(self, z: f64) -> f64 {
        match self {
            LinkFunction::Logistic => 1.0 / (1.0 + (-z).exp()),
            LinkFunction::Linear => z,
        }
    }

    pub fn mu_prime(self, z: f64) -> f64 {
        match self {
            LinkFunction::Logistic => {
                let m = self.mu(z);
                m * (1.0 - m)
            }
            LinkFunction::Linear => 1.0,
        }
    }
}

/// `(c_μ, κ_μ)`: the minimum slope of the link over `[−2, 2]` and its global
/// Lipschitz constant.
pub fn glm_link_constants(link: LinkFunction) -> (f64, f64) {
    match link {
        LinkFunction::Logistic => {
            // μ' is symmetric and decreasing in |z|, so the infimum over
            // [−2, 2] sits at the endpoints; the Lipschitz constant is the
            // peak slope μ'(0) = 1/4.
            (link.mu_prime(2.0), 0.25)
        }
        LinkFunction::Linear => (1.0, 1.0),
    }
}

/// Score of the penalized likelihood: `Σ (y − μ(θᵀx)) x − reg·θ`.
fn score(samples: &[(Vector, bool)], link: LinkFunction, reg: f64, theta: &Vector) -> Vector {
    let mut g = theta.scaled(-reg);
    for (x, y) in samples {
        let residual = (*y as u8 as f64) - link.mu(theta.dot(x));
        g.add_scaled(x, residual);
    }
    g
}

/// Solve `Σ (y − μ(θᵀx)) x = reg·θ` by Newton's method with step halving.
///
/// The Newton system matrix `Σ μ'(θᵀx) x xᵀ + reg·I` is positive definite
/// for any strictly increasing link, so every step is well defined.
pub fn glm_mle(
    samples: &[(Vector, bool)],
    link: LinkFunction,
    reg: f64,
    d: usize,
) -> Result<Vector, ClubError> {
    assert!(reg > 0.0, "regularizer must be positive");
    let mut theta = Vector::zeros(d);
    let mut g = score(samples, link, reg, &theta);
    let mut g_norm = g.norm();
    for _ in 0..NEWTON_ITERATION_CAP {
        if g_norm <= GLM_SCORE_TOL {
            return Ok(theta);
        }
        let mut hessian = SymMatrix::zeros(d);
        for (x, _) in samples {
            let w = link.mu_prime(theta.dot(x));
            if w > 0.0 {
                let mut scaled = x.clone();
                scaled = scaled.scaled(w.sqrt());
                hessian.add_outer(&scaled);
            }
        }
        hessian.add_scaled_identity(reg);
        let direction = cholesky(&hessian)?.solve(&g)?;

        let mut step = 1.0;
        loop {
            let mut candidate = theta.clone();
            candidate.add_scaled(&direction, step);
            let g_new = score(samples, link, reg, &candidate);
            let g_new_norm = g_new.norm();
            if g_new_norm < g_norm || step < 1e-10 {
                theta = candidate;
                g = g_new;
                g_norm = g_new_norm;
                break;
            }
            step *= 0.5;
        }
    }
    if g_norm <= GLM_SCORE_TOL {
        Ok(theta)
    } else {
        Err(ClubError::NoConvergence {
            iterations: NEWTON_ITERATION_CAP,
            residual: g_norm,
        })
    }
}

/// Newton system matrix at `theta` (the negated score Jacobian); exposed so
/// tests can difference the score against it.
pub fn score_jacobian_neg(
    samples: &[(Vector, bool)],
    link: LinkFunction,
    reg: f64,
    theta: &Vector,
) -> SymMatrix {
    let d = theta.dim();
    let mut hessian = SymMatrix::zeros(d);
    for (x, _) in samples {
        let w = link.mu_prime(theta.dot(x));
        if w > 0.0 {
            let scaled = x.scaled(w.sqrt());
            hessian.add_outer(&scaled);
        }
    }
    hessian.add_scaled_identity(reg);
    hessian
}
