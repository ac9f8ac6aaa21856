//! The CLUB-cascade learner: per-user ridge statistics, a dynamic user graph
//! whose connected components pool observations, component-level UCB
//! recommendation over a cascade list, prefix updates from the click
//! feedback, and threshold-based edge deletion — plus the generalized-linear
//! variant that re-estimates weights from stored samples.

pub mod glm;
mod graph;
mod snapshot;

pub use glm::{glm_link_constants, glm_mle, LinkFunction, GLM_DEFAULT_REG};
pub use graph::UserGraph;
pub use snapshot::SnapshotError;

use thiserror::Error;

use crate::bounds;
use crate::env::{top_k_by_score, CascadeOutcome, EnvError, ItemFeature};
use crate::linalg::{cholesky, quad_form_inv, ridge_estimate, LinalgError, SymMatrix, Vector};

#[derive(Debug, Error, PartialEq)]
pub enum ClubError {
    #[error("pool has {got} items, need at least {need}")]
    PoolTooSmall { need: usize, got: usize },
    #[error("cascade outcome is inconsistent with a list of length {list_len}")]
    InconsistentOutcome { list_len: usize },
    #[error("estimator did not converge in {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl From<EnvError> for ClubError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::PoolTooSmall { need, got } => ClubError::PoolTooSmall { need, got },
            other => panic!("unexpected environment error in learner: {other}"),
        }
    }
}

/// Edge-deletion scale. `Disabled` treats the scale as infinite, which is
/// how the degenerate baselines freeze their graphs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    Value(f64),
    Disabled,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::Value(v) => v,
            Alpha::Disabled => f64::INFINITY,
        }
    }

    pub fn is_disabled(self) -> bool {
        matches!(self, Alpha::Disabled) || self.value().is_infinite()
    }
}

/// Confidence-width schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaMode {
    Fixed(f64),
    /// The horizon form: evaluated once from the configured horizon and a
    /// cluster-count guess.
    Auto { m_guess: usize },
    /// Anytime form: re-evaluated each round from the component's effective
    /// feedback count.
    Anytime { delta: f64 },
}

/// Initial user graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphInit {
    Complete,
    Empty,
    ErdosRenyi { p: f64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct ClubConfig {
    /// Ridge regularizer.
    pub lambda: f64,
    pub alpha: Alpha,
    pub beta: BetaMode,
    /// Recommended list length.
    pub k: usize,
    /// Feature dimension.
    pub d: usize,
    /// Round horizon; feeds the `Auto` width.
    pub horizon: u64,
    pub init: GraphInit,
}

impl ClubConfig {
    /// Non-fatal deviations from the analyzed parameter regime.
    pub fn theorem_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.lambda < self.k as f64 {
            warnings.push(format!(
                "lambda {} is below the list length {}; the analyzed regime wants lambda >= K",
                self.lambda, self.k
            ));
        }
        warnings
    }
}

/// Parameters of the generalized-linear variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlmParams {
    pub link: LinkFunction,
    /// Ridge term in the score equation.
    pub reg: f64,
    /// Item-regularity eigenvalue used by the `Auto`/`Anytime` widths.
    pub lambda_x: f64,
}

#[derive(Clone, Debug)]
pub enum RewardModel {
    Linear,
    Glm(GlmParams),
}

/// Per-user sufficient statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct UserStats {
    /// Gramian of examined item features.
    pub gramian: SymMatrix,
    /// Moment vector of clicked features.
    pub moment: Vector,
    /// Effective feedback count: total examined positions.
    pub feedback_count: u64,
    /// Current per-user estimate; ridge for the linear model, penalized MLE
    /// for the generalized-linear one.
    pub theta_hat: Vector,
}

impl UserStats {
    fn zeroed(d: usize) -> Self {
        Self {
            gramian: SymMatrix::zeros(d),
            moment: Vector::zeros(d),
            feedback_count: 0,
            theta_hat: Vector::zeros(d),
        }
    }
}

/// Everything the recommendation step needs about the active component.
#[derive(Clone, Debug)]
pub struct ComponentAggregate {
    /// Regularized Gramian `λI + Σ_{i∈V} S_i`.
    pub m: SymMatrix,
    /// `Σ_{i∈V} b_i`.
    pub b: Vector,
    pub theta_hat: Vector,
    /// `T_V`: summed effective feedback of the component.
    pub feedback_count: u64,
    /// Component members, ascending.
    pub members: Vec<usize>,
}

/// Edge-deletion threshold
/// `α (√((1+ln(1+T_i))/(1+T_i)) + √((1+ln(1+T_ℓ))/(1+T_ℓ)))`.
pub fn deletion_threshold(t_i: u64, t_l: u64, alpha: f64) -> f64 {
    let radius = |t: u64| {
        let t = t as f64;
        ((1.0 + (1.0 + t).ln()) / (1.0 + t)).sqrt()
    };
    alpha * (radius(t_i) + radius(t_l))
}

/// Horizon-form confidence width
/// `√(d ln(1+T/(λd)) + 2 ln(4 m T)) + √λ`.
pub fn auto_beta(cfg: &ClubConfig, m_guess: usize, horizon: f64) -> f64 {
    assert!(m_guess >= 1 && horizon >= 1.0);
    let d = cfg.d as f64;
    (d * (1.0 + horizon / (cfg.lambda * d)).ln() + 2.0 * (4.0 * m_guess as f64 * horizon).ln())
        .sqrt()
        + cfg.lambda.sqrt()
}

/// Optimistic scores `min{θ̂ᵀx + β ‖x‖_{M⁻¹}, 1}` for every pool item.
pub fn ucb_scores(
    theta_hat: &Vector,
    m: &SymMatrix,
    beta: f64,
    pool: &[ItemFeature],
) -> Result<Vec<f64>, ClubError> {
    let chol = cholesky(m)?;
    pool.iter()
        .map(|item| {
            let bonus = beta * quad_form_inv(&chol, &item.x)?.sqrt();
            Ok((theta_hat.dot(&item.x) + bonus).min(1.0))
        })
        .collect()
}

/// Generalized-linear scores `min{μ(θ̂ᵀx) + κ_μ β ‖x‖_{M⁻¹}, 1}`.
pub fn glm_ucb_scores(
    theta_hat: &Vector,
    m: &SymMatrix,
    beta: f64,
    kappa_mu: f64,
    link: LinkFunction,
    pool: &[ItemFeature],
) -> Result<Vec<f64>, ClubError> {
    let chol = cholesky(m)?;
    pool.iter()
        .map(|item| {
            let bonus = kappa_mu * beta * quad_form_inv(&chol, &item.x)?.sqrt();
            Ok((link.mu(theta_hat.dot(&item.x)) + bonus).min(1.0))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ClubCascade {
    cfg: ClubConfig,
    model: RewardModel,
    stats: Vec<UserStats>,
    graph: UserGraph,
    /// Raw `(x, y)` pairs per user; populated only by the GLM variant, which
    /// re-estimates from originals instead of the aggregates.
    samples: Vec<Vec<(Vector, bool)>>,
}

impl ClubCascade {
    /// Linear-reward learner over `u` users with zeroed statistics and the
    /// configured initial graph.
    pub fn new(cfg: ClubConfig, u: usize) -> Self {
        Self::with_model(cfg, u, RewardModel::Linear)
    }

    /// Generalized-linear learner; stores raw samples next to the aggregates.
    pub fn new_glm(cfg: ClubConfig, u: usize, params: GlmParams) -> Self {
        Self::with_model(cfg, u, RewardModel::Glm(params))
    }

    pub fn with_model(cfg: ClubConfig, u: usize, model: RewardModel) -> Self {
        assert!(u >= 1 && cfg.d >= 1 && cfg.k >= 1 && cfg.lambda > 0.0);
        let graph = match cfg.init {
            GraphInit::Complete => UserGraph::complete(u),
            GraphInit::Empty => UserGraph::empty(u),
            GraphInit::ErdosRenyi { p, seed } => {
                UserGraph::erdos_renyi(u, p, &mut crate::seeded_rng(seed))
            }
        };
        let d = cfg.d;
        Self {
            cfg,
            model,
            stats: (0..u).map(|_| UserStats::zeroed(d)).collect(),
            graph,
            samples: vec![Vec::new(); u],
        }
    }

    pub fn config(&self) -> &ClubConfig {
        &self.cfg
    }

    pub fn model(&self) -> &RewardModel {
        &self.model
    }

    pub fn user_count(&self) -> usize {
        self.stats.len()
    }

    pub fn stats(&self, user: usize) -> &UserStats {
        &self.stats[user]
    }

    pub fn graph(&self) -> &UserGraph {
        &self.graph
    }

    /// The partition currently hypothesized by the graph.
    pub fn components(&mut self) -> Vec<Vec<usize>> {
        self.graph.components()
    }

    /// Pool the statistics of `user`'s connected component.
    pub fn component_aggregate(&mut self, user: usize) -> Result<ComponentAggregate, ClubError> {
        let members = self.graph.component_members(user);
        let d = self.cfg.d;
        let mut m = SymMatrix::scaled_identity(d, self.cfg.lambda);
        let mut b = Vector::zeros(d);
        let mut feedback_count = 0u64;
        for &i in &members {
            m.add_assign(&self.stats[i].gramian);
            b.add_assign(&self.stats[i].moment);
            feedback_count += self.stats[i].feedback_count;
        }
        let theta_hat = match &self.model {
            RewardModel::Linear => cholesky(&m)?.solve(&b)?,
            RewardModel::Glm(params) => {
                let pooled: Vec<(Vector, bool)> = members
                    .iter()
                    .flat_map(|&i| self.samples[i].iter().cloned())
                    .collect();
                glm_mle(&pooled, params.link, params.reg, d)?
            }
        };
        Ok(ComponentAggregate {
            m,
            b,
            theta_hat,
            feedback_count,
            members,
        })
    }

    /// Width for a component with effective feedback `t_v`.
    pub fn current_beta(&self, t_v: u64) -> f64 {
        match (self.cfg.beta, &self.model) {
            (BetaMode::Fixed(beta), _) => beta,
            (BetaMode::Auto { m_guess }, RewardModel::Linear) => {
                auto_beta(&self.cfg, m_guess, self.cfg.horizon as f64)
            }
            (BetaMode::Auto { m_guess }, RewardModel::Glm(params)) => {
                let horizon = self.cfg.horizon as f64;
                let delta = 1.0 / (4.0 * m_guess as f64 * horizon);
                let (c_mu, _) = glm_link_constants(params.link);
                bounds::beta_glm(horizon, delta, self.cfg.d, params.lambda_x, c_mu)
            }
            (BetaMode::Anytime { delta }, RewardModel::Linear) => {
                bounds::beta_linear(t_v as f64, delta, self.cfg.d, self.cfg.lambda)
            }
            (BetaMode::Anytime { delta }, RewardModel::Glm(params)) => {
                let (c_mu, _) = glm_link_constants(params.link);
                bounds::beta_glm(t_v as f64, delta, self.cfg.d, params.lambda_x, c_mu)
            }
        }
    }

    fn scores_for(
        &self,
        aggregate: &ComponentAggregate,
        pool: &[ItemFeature],
    ) -> Result<Vec<f64>, ClubError> {
        let beta = self.current_beta(aggregate.feedback_count);
        match &self.model {
            RewardModel::Linear => ucb_scores(&aggregate.theta_hat, &aggregate.m, beta, pool),
            RewardModel::Glm(params) => {
                let (_, kappa_mu) = glm_link_constants(params.link);
                glm_ucb_scores(
                    &aggregate.theta_hat,
                    &aggregate.m,
                    beta,
                    kappa_mu,
                    params.link,
                    pool,
                )
            }
        }
    }

    /// The `K` distinct items with the largest optimistic scores, ties by
    /// smaller id.
    pub fn recommend(
        &mut self,
        user: usize,
        pool: &[ItemFeature],
    ) -> Result<Vec<ItemFeature>, ClubError> {
        if pool.len() < self.cfg.k {
            return Err(ClubError::PoolTooSmall {
                need: self.cfg.k,
                got: pool.len(),
            });
        }
        let aggregate = self.component_aggregate(user)?;
        let scores = self.scores_for(&aggregate, pool)?;
        Ok(top_k_by_score(pool, self.cfg.k, |item| {
            scores[pool.iter().position(|p| p.id == item.id).unwrap()]
        })?)
    }

    /// Fold one round of cascade feedback into `user`'s statistics; all
    /// other users are untouched.
    pub fn update(
        &mut self,
        user: usize,
        list: &[ItemFeature],
        outcome: &CascadeOutcome,
    ) -> Result<(), ClubError> {
        if !outcome.is_consistent_with(list.len()) {
            return Err(ClubError::InconsistentOutcome {
                list_len: list.len(),
            });
        }
        let examined = outcome.examined();
        let stats = &mut self.stats[user];
        for item in &list[..examined] {
            stats.gramian.add_outer(&item.x);
        }
        if let crate::env::Click::At(pos) = outcome.click {
            stats.moment.add_assign(&list[pos - 1].x);
        }
        stats.feedback_count += examined as u64;
        match &self.model {
            RewardModel::Linear => {
                stats.theta_hat =
                    ridge_estimate(&stats.gramian, &stats.moment, self.cfg.lambda)?;
            }
            RewardModel::Glm(params) => {
                let store = &mut self.samples[user];
                for (item, &y) in list[..examined].iter().zip(&outcome.observed) {
                    store.push((item.x.clone(), y));
                }
                self.stats[user].theta_hat =
                    glm_mle(&self.samples[user], params.link, params.reg, self.cfg.d)?;
            }
        }
        Ok(())
    }

    /// Delete every edge incident to `user` whose endpoint estimates are at
    /// least the deletion threshold apart.
    pub fn prune_edges(&mut self, user: usize) {
        if self.cfg.alpha.is_disabled() {
            return;
        }
        let alpha = self.cfg.alpha.value();
        let t_user = self.stats[user].feedback_count;
        let neighbors: Vec<usize> = self.graph.neighbors(user).collect();
        for other in neighbors {
            let threshold = deletion_threshold(t_user, self.stats[other].feedback_count, alpha);
            let distance = self.stats[user]
                .theta_hat
                .distance(&self.stats[other].theta_hat);
            if distance >= threshold {
                self.graph.delete_edge(user, other);
            }
        }
    }

    /// One full round: aggregate the component, score, recommend, obtain
    /// feedback from the caller, update, prune.
    pub fn step(
        &mut self,
        user: usize,
        pool: &[ItemFeature],
        feedback: impl FnOnce(&[ItemFeature]) -> CascadeOutcome,
    ) -> Result<(Vec<ItemFeature>, CascadeOutcome), ClubError> {
        let list = self.recommend(user, pool)?;
        let outcome = feedback(&list);
        self.update(user, &list, &outcome)?;
        self.prune_edges(user);
        Ok((list, outcome))
    }
}
