//! Seeded experiment execution: one independent cell per (algorithm, seed),
//! merged in deterministic order regardless of thread count.

use rayon::prelude::*;
use thiserror::Error;

use club_cascade::baselines::{make_baseline, BaselineKind};
use club_cascade::bounds::empirical::{negative_control_check, run_all, CheckReport};
use club_cascade::bounds::{alpha_default, AlphaVariant};
use club_cascade::club::{
    glm_link_constants, Alpha, BetaMode, ClubCascade, ClubConfig, ClubError, GlmParams, GraphInit,
    LinkFunction, GLM_DEFAULT_REG,
};
use club_cascade::env::{
    cascade_feedback_by, gen_clusters, gen_item_pool, instant_regret, EnvError, ItemFeature,
    ThetaMode,
};
use club_cascade::linalg::{min_eigenvalue, SymMatrix};
use club_cascade::replay::{
    extract_features, gen_clustered_matrix, load_ratings, replay_feedback, split_users,
    RatingsMatrix, ReplayError,
};

use crate::config::{
    AlgorithmKind, AlphaSpec, BetaSpec, ExperimentConfig, InitSpec, ThetaModeSpec,
};
use crate::rng::{
    index, mix, unit, TAG_CLICK, TAG_ENV, TAG_ITEM_CHOICE, TAG_MATRIX, TAG_POOL, TAG_SPLIT,
    TAG_SUBSAMPLE, TAG_USER, TAG_USER_CHOICE,
};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("environment: {0}")]
    Env(#[from] EnvError),
    #[error("learner: {0}")]
    Learner(#[from] ClubError),
    #[error("replay: {0}")]
    Replay(#[from] ReplayError),
    #[error("{0}")]
    Setup(String),
}

/// One logged metric point.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub t: u64,
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    /// Cumulative expected regret (synth) or cumulative clicks (replay).
    pub metric: f64,
}

fn resolve_beta(cfg: &ExperimentConfig) -> BetaMode {
    match cfg.beta {
        BetaSpec::Value(v) => BetaMode::Fixed(v),
        BetaSpec::Auto => BetaMode::Auto {
            m_guess: cfg.m_guess,
        },
        BetaSpec::Anytime(delta) => BetaMode::Anytime { delta },
    }
}

fn resolve_alpha(cfg: &ExperimentConfig, lambda_x: f64, glm: bool) -> Alpha {
    match cfg.alpha {
        AlphaSpec::Value(v) => Alpha::Value(v),
        AlphaSpec::Inf => Alpha::Value(f64::INFINITY),
        AlphaSpec::Auto => {
            let variant = if glm {
                let (c_mu, _) = glm_link_constants(LinkFunction::Logistic);
                AlphaVariant::Glm { c_mu }
            } else {
                AlphaVariant::Linear
            };
            Alpha::Value(alpha_default(cfg.d, lambda_x.max(1e-9), variant))
        }
    }
}

/// Build the learner for one cell. `lambda_x` is the realized item
/// regularity of the environment, feeding `auto` parameter choices.
fn build_learner(
    algorithm: AlgorithmKind,
    cfg: &ExperimentConfig,
    lambda_x: f64,
) -> ClubCascade {
    let club_cfg = ClubConfig {
        lambda: cfg.lambda,
        alpha: resolve_alpha(cfg, lambda_x, algorithm == AlgorithmKind::ClubGlm),
        beta: resolve_beta(cfg),
        k: cfg.k,
        d: cfg.d,
        horizon: cfg.t,
        init: match cfg.init {
            InitSpec::Complete => GraphInit::Complete,
            InitSpec::ErdosRenyi { p, seed } => GraphInit::ErdosRenyi { p, seed },
        },
    };
    match algorithm {
        AlgorithmKind::Club => ClubCascade::new(club_cfg, cfg.u),
        AlgorithmKind::ClubGlm => ClubCascade::new_glm(
            club_cfg,
            cfg.u,
            GlmParams {
                link: LinkFunction::Logistic,
                reg: GLM_DEFAULT_REG,
                lambda_x: lambda_x.max(1e-9),
            },
        ),
        AlgorithmKind::SingleCluster => make_baseline(BaselineKind::SingleCluster, &club_cfg, cfg.u),
        AlgorithmKind::PerUser => make_baseline(BaselineKind::PerUser, &club_cfg, cfg.u),
    }
}

/// Draw `count` distinct indices from `0..n` by seeded partial shuffle,
/// returned ascending.
fn choose_distinct(n: usize, count: usize, seed: u64) -> Vec<usize> {
    assert!(count <= n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = i + index(mix(&[seed, i as u64]), n - i);
        order.swap(i, j);
    }
    let mut chosen = order[..count].to_vec();
    chosen.sort_unstable();
    chosen
}

fn run_cells<F>(cfg: &ExperimentConfig, cell: F) -> Result<Vec<RunRecord>, RunnerError>
where
    F: Fn(AlgorithmKind, u64) -> Result<Vec<RunRecord>, RunnerError> + Sync,
{
    let cells: Vec<(AlgorithmKind, u64)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let results: Vec<Result<Vec<RunRecord>, RunnerError>> = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| RunnerError::Setup(e.to_string()))?;
        pool.install(|| {
            cells
                .par_iter()
                .map(|&(a, s)| cell(a, s))
                .collect()
        })
    } else {
        cells.iter().map(|&(a, s)| cell(a, s)).collect()
    };
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    Ok(records)
}

/// Synthetic scenario: seeded clustered users and item pool, uniform user
/// arrivals, Bernoulli cascade feedback keyed on (seed, round, item) so all
/// algorithms face identical randomness, cumulative expected regret logged
/// every `stride` rounds.
pub fn run_synth(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, RunnerError> {
    run_cells(cfg, |algorithm, seed| {
        synth_cell(cfg, algorithm, seed).map(|cell| cell.records)
    })
}

/// Everything one synthetic cell produces; the plain record stream plus the
/// final learner and the ground truth, for posterior inspection.
pub struct SynthCell {
    pub records: Vec<RunRecord>,
    pub learner: ClubCascade,
    pub clusters: club_cascade::env::ClusterModel,
}

pub fn synth_cell(
    cfg: &ExperimentConfig,
    algorithm: AlgorithmKind,
    seed: u64,
) -> Result<SynthCell, RunnerError> {
    let mode = match cfg.theta_mode {
        ThetaModeSpec::Orthogonal => ThetaMode::Orthogonal,
        ThetaModeSpec::Gap(g) => ThetaMode::Gap(g),
    };
    let clusters = gen_clusters(cfg.u, cfg.m, cfg.d, mode, mix(&[seed, TAG_ENV]))?;
    let pool = gen_item_pool(cfg.l, cfg.d, mix(&[seed, TAG_POOL]))?;
    let mut learner = build_learner(algorithm, cfg, pool.lambda_x_hat);

    let mut records = Vec::new();
    let mut cum_regret = 0.0;
    let mut subsample_buf: Vec<ItemFeature> = Vec::new();
    for t in 1..=cfg.t {
        let user = index(mix(&[seed, TAG_USER, t]), cfg.u);
        let theta = clusters.theta_of(user);
        let items: &[ItemFeature] = match cfg.subsample {
            None => &pool.items,
            Some(count) => {
                let chosen = choose_distinct(pool.items.len(), count, mix(&[seed, TAG_SUBSAMPLE, t]));
                subsample_buf.clear();
                subsample_buf.extend(chosen.into_iter().map(|i| pool.items[i].clone()));
                &subsample_buf
            }
        };
        let (list, _outcome) = learner.step(user, items, |list| {
            cascade_feedback_by(list, theta, |item| {
                unit(mix(&[seed, TAG_CLICK, t, item.id as u64]))
            })
            .expect("recommended list has distinct ids")
        })?;
        cum_regret += instant_regret(&list, items, theta);
        if t % cfg.stride == 0 || t == cfg.t {
            records.push(RunRecord {
                t,
                algorithm,
                seed,
                metric: cum_regret,
            });
        }
    }
    Ok(SynthCell {
        records,
        learner,
        clusters,
    })
}

/// Replay scenario: load (or synthesize) a binary ratings matrix, split off
/// the feature users, build item features once, then per seed replay the
/// held-out rows against each algorithm; the metric is cumulative clicks.
pub fn run_replay(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, RunnerError> {
    let matrix: RatingsMatrix = match &cfg.ratings {
        Some(path) => load_ratings(path, cfg.threshold)?.0,
        None => gen_clustered_matrix(
            cfg.matrix_users,
            cfg.matrix_items,
            cfg.matrix_clusters,
            cfg.matrix_pattern,
            cfg.matrix_like,
            cfg.matrix_noise,
            mix(&[cfg.split_seed, TAG_MATRIX]),
        ),
    };
    if cfg.feature_users >= matrix.n_users {
        return Err(RunnerError::Setup(format!(
            "feature_users {} must leave replay users out of {}",
            cfg.feature_users, matrix.n_users
        )));
    }
    let split = split_users(&matrix, cfg.feature_users, mix(&[cfg.split_seed, TAG_SPLIT]))?;
    let features = extract_features(&split.history, cfg.d)?;
    if cfg.u > split.future.n_users {
        return Err(RunnerError::Setup(format!(
            "u {} exceeds the {} held-out users",
            cfg.u,
            split.future.n_users
        )));
    }
    if cfg.l > features.items.len() {
        return Err(RunnerError::Setup(format!(
            "l {} exceeds the {} item features",
            cfg.l,
            features.items.len()
        )));
    }
    // Realized item regularity of the extracted features, for `auto` knobs.
    let mut second_moment = SymMatrix::zeros(cfg.d);
    for item in &features.items {
        second_moment.add_outer(&item.x);
    }
    second_moment.scale(1.0 / features.items.len() as f64);
    let lambda_x = min_eigenvalue(&second_moment, 1e-9)
        .map_err(|e| RunnerError::Setup(format!("feature second moment: {e}")))?
        .max(0.0);

    let future = &split.future;
    let items = &features.items;
    run_cells(cfg, move |algorithm, seed| {
        replay_cell(cfg, algorithm, seed, future, items, lambda_x)
    })
}

fn replay_cell(
    cfg: &ExperimentConfig,
    algorithm: AlgorithmKind,
    seed: u64,
    future: &RatingsMatrix,
    all_items: &[ItemFeature],
    lambda_x: f64,
) -> Result<Vec<RunRecord>, RunnerError> {
    let users = choose_distinct(future.n_users, cfg.u, mix(&[seed, TAG_USER_CHOICE]));
    let item_pick = choose_distinct(all_items.len(), cfg.l, mix(&[seed, TAG_ITEM_CHOICE]));
    let pool: Vec<ItemFeature> = item_pick.into_iter().map(|i| all_items[i].clone()).collect();
    let mut learner = build_learner(algorithm, cfg, lambda_x);

    let mut records = Vec::new();
    let mut clicks = 0u64;
    let mut subsample_buf: Vec<ItemFeature> = Vec::new();
    for t in 1..=cfg.t {
        let local = index(mix(&[seed, TAG_USER, t]), users.len());
        let row = users[local];
        let items: &[ItemFeature] = match cfg.subsample {
            None => &pool,
            Some(count) => {
                let chosen = choose_distinct(pool.len(), count, mix(&[seed, TAG_SUBSAMPLE, t]));
                subsample_buf.clear();
                subsample_buf.extend(chosen.into_iter().map(|i| pool[i].clone()));
                &subsample_buf
            }
        };
        let (_list, outcome) =
            learner.step(local, items, |list| replay_feedback(future, row, list))?;
        if outcome.clicked() {
            clicks += 1;
        }
        if t % cfg.stride == 0 || t == cfg.t {
            records.push(RunRecord {
                t,
                algorithm,
                seed,
                metric: clicks as f64,
            });
        }
    }
    Ok(records)
}

/// Run the empirical bound suites; `negative_control` appends the
/// deliberately inverted bound whose verdict must fail.
pub fn run_bounds_check(cfg: &ExperimentConfig, negative_control: bool) -> Vec<CheckReport> {
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let mut reports = run_all(cfg.trials, seed);
    if negative_control {
        reports.push(negative_control_check(cfg.trials.unwrap_or(100).max(1), seed));
    }
    reports
}
