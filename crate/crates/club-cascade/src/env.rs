//! Synthetic cascade-click environments: clustered users, unit-ball item
//! pools with a positive second-moment floor, Bernoulli cascade feedback,
//! and exact expected rewards / per-round regret.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::{min_eigenvalue, SymMatrix, Vector};

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("cluster construction infeasible: {0}")]
    InfeasibleMode(String),
    #[error("item pool is degenerate (empirical minimum eigenvalue {0:.3e})")]
    DegeneratePool(f64),
    #[error("recommended list contains duplicate item ids")]
    DuplicateItems,
    #[error("pool has {got} items, need at least {need}")]
    PoolTooSmall { need: usize, got: usize },
}

/// One recommendable item: an id plus a feature vector inside the unit ball.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemFeature {
    pub id: usize,
    pub x: Vector,
}

impl ItemFeature {
    pub fn new(id: usize, x: Vector) -> Self {
        debug_assert!(x.norm() <= 1.0 + 1e-12, "item feature outside unit ball");
        Self { id, x }
    }
}

/// Position of the first click in a recommended list, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Click {
    /// 1-based position of the click.
    At(usize),
    /// The user examined the whole list without clicking.
    None,
}

/// Cascade feedback: the click position plus exactly the examined prefix of
/// Bernoulli outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeOutcome {
    pub click: Click,
    pub observed: Vec<bool>,
}

impl CascadeOutcome {
    /// Number of examined positions, `min(click, K)`.
    pub fn examined(&self) -> usize {
        self.observed.len()
    }

    pub fn clicked(&self) -> bool {
        matches!(self.click, Click::At(_))
    }

    /// Check the prefix-shape invariants against a list length.
    pub fn is_consistent_with(&self, list_len: usize) -> bool {
        match self.click {
            Click::At(pos) => {
                pos >= 1
                    && pos <= list_len
                    && self.observed.len() == pos
                    && self.observed[..pos - 1].iter().all(|&y| !y)
                    && self.observed[pos - 1]
            }
            Click::None => self.observed.len() == list_len && self.observed.iter().all(|&y| !y),
        }
    }
}

/// Ground-truth user clustering: unit weight vectors per cluster and a
/// user-to-cluster assignment with every cluster nonempty.
#[derive(Clone, Debug)]
pub struct ClusterModel {
    pub theta: Vec<Vector>,
    pub assignment: Vec<usize>,
    /// Realized minimum pairwise distance between cluster weights
    /// (infinite for a single cluster).
    pub gamma: f64,
}

impl ClusterModel {
    pub fn user_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.theta.len()
    }

    pub fn theta_of(&self, user: usize) -> &Vector {
        &self.theta[self.assignment[user]]
    }
}

/// How the cluster weight vectors are laid out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaMode {
    /// Pairwise-orthogonal unit vectors (gap √2).
    Orthogonal,
    /// Unit vectors with pairwise distance at least the given gap.
    Gap(f64),
}

fn standard_normal_vector(dim: usize, rng: &mut impl Rng) -> Vector {
    let mut v = Vector::zeros(dim);
    for i in 0..dim {
        v[i] = StandardNormal.sample(rng);
    }
    v
}

fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> Vector {
    loop {
        if let Some(u) = standard_normal_vector(dim, rng).normalized() {
            return u;
        }
    }
}

/// Gram–Schmidt a fresh random unit vector against `basis`.
fn random_orthonormal_to(basis: &[Vector], dim: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let mut v = standard_normal_vector(dim, rng);
        for b in basis {
            let c = v.dot(b);
            v.add_scaled(b, -c);
        }
        if let Some(u) = v.normalized() {
            if u.norm() > 0.5 {
                return u;
            }
        }
    }
}

fn min_pairwise_distance(theta: &[Vector]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..theta.len() {
        for j in i + 1..theta.len() {
            min = min.min(theta[i].distance(&theta[j]));
        }
    }
    min
}

/// Assign `u` users to `m` clusters uniformly at random, forcing every
/// cluster nonempty by seeding one shuffled user per cluster.
fn assign_users(u: usize, m: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..u).collect();
    for i in (1..u).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut assignment = vec![0usize; u];
    for (cluster, &user) in order.iter().take(m).enumerate() {
        assignment[user] = cluster;
    }
    for &user in order.iter().skip(m) {
        assignment[user] = rng.random_range(0..m);
    }
    assignment
}

/// Generate a clustered user population.
///
/// Orthogonal mode draws `m ≤ d` random orthonormal unit vectors. Gap mode
/// perturbs a random base unit vector along `m` orthogonal directions and
/// rescales so all pairwise distances land just above the requested gap,
/// then verifies by a pairwise scan.
pub fn gen_clusters(
    u: usize,
    m: usize,
    d: usize,
    mode: ThetaMode,
    rng_seed: u64,
) -> Result<ClusterModel, EnvError> {
    assert!(u >= 1 && m >= 1 && d >= 1);
    if m > u {
        return Err(EnvError::InfeasibleMode(format!(
            "{m} clusters cannot all be nonempty with {u} users"
        )));
    }
    let mut rng = crate::seeded_rng(rng_seed);

    let theta: Vec<Vector> = if m == 1 {
        vec![random_unit_vector(d, &mut rng)]
    } else {
        match mode {
            ThetaMode::Orthogonal => {
                if m > d {
                    return Err(EnvError::InfeasibleMode(format!(
                        "{m} orthogonal vectors do not fit in dimension {d}"
                    )));
                }
                let mut basis: Vec<Vector> = Vec::with_capacity(m);
                for _ in 0..m {
                    let v = random_orthonormal_to(&basis, d, &mut rng);
                    basis.push(v);
                }
                basis
            }
            ThetaMode::Gap(gamma) => {
                assert!(gamma > 0.0 && gamma <= 2.0, "gap must lie in (0, 2]");
                if m + 1 > d {
                    return Err(EnvError::InfeasibleMode(format!(
                        "gap construction needs {m} directions orthogonal to a base vector in dimension {d}"
                    )));
                }
                let sqrt2 = std::f64::consts::SQRT_2;
                // Pairwise distance of the construction is ε√2/√(1+ε²) < √2.
                if gamma >= sqrt2 {
                    return Err(EnvError::InfeasibleMode(format!(
                        "gap {gamma} is not reachable by the perturbation construction (< √2)"
                    )));
                }
                let target = (1.1 * gamma).clamp(gamma, sqrt2 * (1.0 - 1e-9));
                let eps = (target * target / (2.0 - target * target)).sqrt();
                let mut attempts = 0;
                loop {
                    let base = random_unit_vector(d, &mut rng);
                    let mut directions: Vec<Vector> = vec![base.clone()];
                    for _ in 0..m {
                        let w = random_orthonormal_to(&directions, d, &mut rng);
                        directions.push(w);
                    }
                    let scale = 1.0 / (1.0 + eps * eps).sqrt();
                    let theta: Vec<Vector> = directions[1..]
                        .iter()
                        .map(|w| {
                            let mut t = base.clone();
                            t.add_scaled(w, eps);
                            t.scaled(scale)
                        })
                        .collect();
                    if min_pairwise_distance(&theta) >= gamma - 1e-9 {
                        break theta;
                    }
                    attempts += 1;
                    if attempts >= 32 {
                        return Err(EnvError::InfeasibleMode(format!(
                            "gap {gamma} construction kept failing the pairwise check"
                        )));
                    }
                }
            }
        }
    };

    let assignment = assign_users(u, m, &mut rng);
    let gamma = min_pairwise_distance(&theta);
    Ok(ClusterModel {
        theta,
        assignment,
        gamma,
    })
}

/// A fixed content set plus the empirical second-moment floor of its
/// features.
#[derive(Clone, Debug)]
pub struct ItemPool {
    pub items: Vec<ItemFeature>,
    /// Minimum eigenvalue of `(1/L) Σ x xᵀ`.
    pub lambda_x_hat: f64,
}

impl ItemPool {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// One draw from the item-feature distribution `x = (e_j + g/‖g‖)/2` with
/// `j` uniform and `g` standard Gaussian: `‖x‖ ≤ 1` always, and the
/// population second moment is exactly `I/(2d)`.
pub fn sample_item_feature(d: usize, rng: &mut impl Rng) -> Vector {
    let axis = rng.random_range(0..d);
    let mut x = random_unit_vector(d, rng);
    x[axis] += 1.0;
    x.scaled(0.5)
}

/// Draw `L ≥ d` items i.i.d. from [`sample_item_feature`].
pub fn gen_item_pool(l: usize, d: usize, rng_seed: u64) -> Result<ItemPool, EnvError> {
    assert!(d >= 1);
    if l < d {
        return Err(EnvError::PoolTooSmall { need: d, got: l });
    }
    let mut rng = crate::seeded_rng(rng_seed);
    let mut items = Vec::with_capacity(l);
    let mut second_moment = SymMatrix::zeros(d);
    for id in 0..l {
        let x = sample_item_feature(d, &mut rng);
        second_moment.add_outer(&x);
        items.push(ItemFeature::new(id, x));
    }
    second_moment.scale(1.0 / l as f64);
    let lambda_x_hat =
        min_eigenvalue(&second_moment, 1e-10).map_err(|_| EnvError::DegeneratePool(0.0))?;
    if lambda_x_hat <= 1e-6 {
        return Err(EnvError::DegeneratePool(lambda_x_hat));
    }
    Ok(ItemPool {
        items,
        lambda_x_hat,
    })
}

/// Probability that a user with weights `theta` clicks `item`, clamped into
/// `[0, 1]`.
pub fn click_probability(theta: &Vector, item: &ItemFeature) -> f64 {
    theta.dot(&item.x).clamp(0.0, 1.0)
}

fn check_distinct(list: &[ItemFeature]) -> Result<(), EnvError> {
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            if list[i].id == list[j].id {
                return Err(EnvError::DuplicateItems);
            }
        }
    }
    Ok(())
}

/// Cascade feedback with caller-supplied uniform draws, one per examined
/// item: a click happens when the draw falls below the click probability.
/// This form lets harnesses pair environments across algorithms by keying
/// the draw on the item identity.
pub fn cascade_feedback_by(
    list: &[ItemFeature],
    theta: &Vector,
    mut draw: impl FnMut(&ItemFeature) -> f64,
) -> Result<CascadeOutcome, EnvError> {
    assert!(!list.is_empty(), "cascade list must be nonempty");
    check_distinct(list)?;
    let mut observed = Vec::with_capacity(list.len());
    for (k, item) in list.iter().enumerate() {
        let clicked = draw(item) < click_probability(theta, item);
        observed.push(clicked);
        if clicked {
            return Ok(CascadeOutcome {
                click: Click::At(k + 1),
                observed,
            });
        }
    }
    Ok(CascadeOutcome {
        click: Click::None,
        observed,
    })
}

/// Sample cascade feedback: independent Bernoulli clicks down the list,
/// stopping at the first success.
pub fn cascade_feedback(
    list: &[ItemFeature],
    theta: &Vector,
    rng: &mut impl Rng,
) -> Result<CascadeOutcome, EnvError> {
    cascade_feedback_by(list, theta, |_| rng.random::<f64>())
}

/// Expected reward `1 − Π_k (1 − p_k)` of showing `list` to a user with
/// weights `theta`.
pub fn expected_reward(list: &[ItemFeature], theta: &Vector) -> f64 {
    assert!(!list.is_empty(), "reward of an empty list is undefined");
    let mut no_click = 1.0;
    for item in list {
        no_click *= 1.0 - click_probability(theta, item);
    }
    1.0 - no_click
}

/// The `K` items with the largest `θᵀx`, descending, ties broken by smaller
/// id. Because the reward is symmetric and monotone in each click
/// probability, this maximizes the expected reward over ordered K-subsets.
pub fn optimal_list(
    pool: &[ItemFeature],
    theta: &Vector,
    k: usize,
) -> Result<Vec<ItemFeature>, EnvError> {
    top_k_by_score(pool, k, |item| theta.dot(&item.x))
}

/// Shared top-K selection: score descending, id ascending on ties.
pub fn top_k_by_score(
    pool: &[ItemFeature],
    k: usize,
    mut score: impl FnMut(&ItemFeature) -> f64,
) -> Result<Vec<ItemFeature>, EnvError> {
    assert!(k >= 1);
    if pool.len() < k {
        return Err(EnvError::PoolTooSmall {
            need: k,
            got: pool.len(),
        });
    }
    let mut scored: Vec<(f64, &ItemFeature)> = pool.iter().map(|it| (score(it), it)).collect();
    scored.sort_by(|(sa, ia), (sb, ib)| {
        sb.partial_cmp(sa)
            .expect("scores must not be NaN")
            .then_with(|| ia.id.cmp(&ib.id))
    });
    Ok(scored.into_iter().take(k).map(|(_, it)| it.clone()).collect())
}

/// Expected instantaneous regret of recommending `chosen` instead of the
/// optimal list from `pool`.
pub fn instant_regret(chosen: &[ItemFeature], pool: &[ItemFeature], theta: &Vector) -> f64 {
    let best = optimal_list(pool, theta, chosen.len()).expect("chosen must come from pool");
    expected_reward(&best, theta) - expected_reward(chosen, theta)
}

/// Discrepancy between the direct product-difference form of the per-round
/// regret and its telescoped sum; should vanish to rounding error.
pub fn regret_decomposition_check(
    list_opt: &[ItemFeature],
    list_alg: &[ItemFeature],
    theta: &Vector,
) -> f64 {
    assert_eq!(list_opt.len(), list_alg.len(), "lists must share a length");
    let k = list_opt.len();
    let p_opt: Vec<f64> = list_opt
        .iter()
        .map(|it| click_probability(theta, it))
        .collect();
    let p_alg: Vec<f64> = list_alg
        .iter()
        .map(|it| click_probability(theta, it))
        .collect();

    let direct = p_alg.iter().map(|p| 1.0 - p).product::<f64>()
        - p_opt.iter().map(|p| 1.0 - p).product::<f64>();

    let mut telescoped = 0.0;
    for pos in 0..k {
        let before: f64 = p_alg[..pos].iter().map(|p| 1.0 - p).product();
        let after: f64 = p_opt[pos + 1..].iter().map(|p| 1.0 - p).product();
        telescoped += before * (p_opt[pos] - p_alg[pos]) * after;
    }
    (direct - telescoped).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_item(id: usize, coords: &[f64]) -> ItemFeature {
        ItemFeature::new(id, Vector::from_slice(coords))
    }

    /// Pool of items with `p = θᵀx` equal to the given probabilities for
    /// `theta = e_1`.
    fn pool_with_probs(probs: &[f64]) -> (Vec<ItemFeature>, Vector) {
        let items = probs
            .iter()
            .enumerate()
            .map(|(id, &p)| unit_item(id, &[p, 0.0]))
            .collect();
        (items, Vector::from_slice(&[1.0, 0.0]))
    }

    #[test]
    fn gen_clusters_single_cluster() {
        let model = gen_clusters(7, 1, 5, ThetaMode::Gap(0.5), 3).unwrap();
        assert_eq!(model.cluster_count(), 1);
        assert!((model.theta[0].norm() - 1.0).abs() < 1e-9);
        assert!(model.assignment.iter().all(|&c| c == 0));
        assert!(model.gamma.is_infinite());
    }

    #[test]
    fn gen_clusters_orthogonal_pair() {
        let model = gen_clusters(10, 2, 2, ThetaMode::Orthogonal, 11).unwrap();
        let dist = model.theta[0].distance(&model.theta[1]);
        assert!((dist - std::f64::consts::SQRT_2).abs() < 1e-9);
        for t in &model.theta {
            assert!((t.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gen_clusters_gap_mode_realized_distance() {
        let model = gen_clusters(40, 5, 20, ThetaMode::Gap(0.2), 17).unwrap();
        // Brute-force pairwise scan.
        let mut min = f64::INFINITY;
        for i in 0..5 {
            for j in i + 1..5 {
                min = min.min(model.theta[i].distance(&model.theta[j]));
            }
        }
        assert!(min >= 0.2 && min < 0.3, "realized gap {min}");
        assert!((model.gamma - min).abs() < 1e-12);
        for t in &model.theta {
            assert!((t.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gen_clusters_every_cluster_nonempty() {
        for seed in 0..20 {
            let model = gen_clusters(6, 5, 10, ThetaMode::Orthogonal, seed).unwrap();
            let mut counts = vec![0usize; 5];
            for &c in &model.assignment {
                counts[c] += 1;
            }
            assert!(counts.iter().all(|&n| n > 0), "seed {seed}: {counts:?}");
        }
    }

    #[test]
    fn gen_clusters_orthogonal_infeasible() {
        assert!(matches!(
            gen_clusters(10, 5, 3, ThetaMode::Orthogonal, 0),
            Err(EnvError::InfeasibleMode(_))
        ));
    }

    #[test]
    fn gen_item_pool_single_item() {
        // In d = 1 the construction lands on x ∈ {0, 1}; pick a seed whose
        // draw is the nonzero one (zero draws are the DegeneratePool case).
        let seed = (0..)
            .find(|&s| gen_item_pool(1, 1, s).is_ok())
            .unwrap();
        let pool = gen_item_pool(1, 1, seed).unwrap();
        assert_eq!(pool.len(), 1);
        let x = &pool.items[0].x;
        assert!(x.norm() <= 1.0 + 1e-12);
        assert!((pool.lambda_x_hat - x[0] * x[0]).abs() < 1e-9);
        assert!(pool.lambda_x_hat > 0.0);
    }

    #[test]
    fn gen_item_pool_degenerate_single_zero_item() {
        let seed = (0..)
            .find(|&s| gen_item_pool(1, 1, s).is_err())
            .unwrap();
        assert!(matches!(
            gen_item_pool(1, 1, seed),
            Err(EnvError::DegeneratePool(_))
        ));
    }

    #[test]
    fn gen_item_pool_unit_ball() {
        let pool = gen_item_pool(200, 20, 42).unwrap();
        assert_eq!(pool.len(), 200);
        for item in &pool.items {
            assert!(item.x.norm() <= 1.0 + 1e-12);
        }
        assert!(pool.lambda_x_hat > 1e-6);
    }

    #[test]
    fn gen_item_pool_second_moment_near_analytic() {
        // Population second moment of the construction is I/(2d).
        let d = 5;
        let pool = gen_item_pool(5000, d, 7).unwrap();
        let analytic = 1.0 / (2.0 * d as f64);
        assert!(
            (pool.lambda_x_hat - analytic).abs() <= 0.2 * analytic,
            "lambda_x_hat {} vs analytic {}",
            pool.lambda_x_hat,
            analytic
        );
    }

    #[test]
    fn click_probability_cases() {
        let theta = Vector::from_slice(&[0.5, -0.5]);
        assert!(
            (click_probability(&theta, &unit_item(0, &[0.74, 0.0])) - 0.37).abs() < 1e-12
        );
        assert_eq!(click_probability(&theta, &unit_item(0, &[0.0, 0.2])), 0.0);
        let aligned = Vector::from_slice(&[1.0, 0.0]);
        assert_eq!(
            click_probability(&aligned, &unit_item(0, &[1.0, 0.0])),
            1.0
        );
    }

    #[test]
    fn cascade_feedback_all_zero_probs() {
        let (items, _) = pool_with_probs(&[0.0, 0.0, 0.0, 0.0]);
        let theta = Vector::from_slice(&[1.0, 0.0]);
        let mut rng = crate::seeded_rng(0);
        let out = cascade_feedback(&items, &theta, &mut rng).unwrap();
        assert_eq!(out.click, Click::None);
        assert_eq!(out.observed, vec![false; 4]);
        assert!(out.is_consistent_with(4));
    }

    #[test]
    fn cascade_feedback_certain_first_click() {
        let (items, theta) = pool_with_probs(&[1.0, 0.3]);
        let mut rng = crate::seeded_rng(0);
        let out = cascade_feedback(&items, &theta, &mut rng).unwrap();
        assert_eq!(out.click, Click::At(1));
        assert_eq!(out.observed, vec![true]);
        assert!(out.is_consistent_with(2));
    }

    #[test]
    fn cascade_feedback_rejects_duplicates() {
        let items = vec![unit_item(3, &[0.1, 0.0]), unit_item(3, &[0.2, 0.0])];
        let theta = Vector::from_slice(&[1.0, 0.0]);
        let mut rng = crate::seeded_rng(0);
        assert_eq!(
            cascade_feedback(&items, &theta, &mut rng).unwrap_err(),
            EnvError::DuplicateItems
        );
    }

    #[test]
    fn cascade_feedback_no_click_rate_matches_product() {
        // P(no click) = (1-p)^4 = 0.0625 at p = 0.5.
        let (items, theta) = pool_with_probs(&[0.5, 0.5, 0.5, 0.5]);
        let mut rng = crate::seeded_rng(12345);
        let trials = 1_000_000u32;
        let mut no_click = 0u32;
        for _ in 0..trials {
            let out = cascade_feedback(&items, &theta, &mut rng).unwrap();
            if out.click == Click::None {
                no_click += 1;
            }
        }
        let rate = no_click as f64 / trials as f64;
        assert!((rate - 0.0625).abs() < 0.002, "rate {rate}");
    }

    #[test]
    fn expected_reward_cases() {
        let (zero, theta) = pool_with_probs(&[0.0, 0.0]);
        assert_eq!(expected_reward(&zero, &theta), 0.0);
        let (single, theta) = pool_with_probs(&[0.42]);
        assert!((expected_reward(&single, &theta) - 0.42).abs() < 1e-12);
        let (half, theta) = pool_with_probs(&[0.5, 0.5]);
        assert!((expected_reward(&half, &theta) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn optimal_list_whole_pool_when_sizes_match() {
        let (pool, theta) = pool_with_probs(&[0.2, 0.9, 0.5]);
        let best = optimal_list(&pool, &theta, 3).unwrap();
        let ids: Vec<usize> = best.iter().map(|it| it.id).collect();
        assert_eq!(ids, vec![1, 2, 0]);
    }

    #[test]
    fn optimal_list_includes_certain_item() {
        let (pool, theta) = pool_with_probs(&[0.1, 1.0, 0.3, 0.2]);
        let best = optimal_list(&pool, &theta, 2).unwrap();
        assert!(best.iter().any(|it| it.id == 1));
    }

    #[test]
    fn optimal_list_pool_too_small() {
        let (pool, theta) = pool_with_probs(&[0.1]);
        assert_eq!(
            optimal_list(&pool, &theta, 2).unwrap_err(),
            EnvError::PoolTooSmall { need: 2, got: 1 }
        );
    }

    /// Enumerate all K-subsets and return the best expected reward.
    fn brute_force_best(pool: &[ItemFeature], theta: &Vector, k: usize) -> f64 {
        fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut out = combos(n - 1, k);
            for mut c in combos(n - 1, k - 1) {
                c.push(n - 1);
                out.push(c);
            }
            out
        }
        combos(pool.len(), k)
            .into_iter()
            .map(|idx| {
                let items: Vec<ItemFeature> = idx.iter().map(|&i| pool[i].clone()).collect();
                expected_reward(&items, theta)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn optimal_list_matches_exhaustive_enumeration() {
        let mut rng = crate::seeded_rng(99);
        for _ in 0..50 {
            let probs: Vec<f64> = (0..7).map(|_| rng.random::<f64>()).collect();
            let (pool, theta) = pool_with_probs(&probs);
            let best = optimal_list(&pool, &theta, 3).unwrap();
            let ours = expected_reward(&best, &theta);
            let brute = brute_force_best(&pool, &theta, 3);
            assert!((ours - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn instant_regret_cases() {
        let (pool, theta) = pool_with_probs(&[0.9, 0.7, 0.4, 0.1]);
        let best = optimal_list(&pool, &theta, 2).unwrap();
        assert!(instant_regret(&best, &pool, &theta).abs() < 1e-15);

        let worst = vec![pool[2].clone(), pool[3].clone()];
        let gap = instant_regret(&worst, &pool, &theta);
        let manual = brute_force_best(&pool, &theta, 2) - expected_reward(&worst, &theta);
        assert!((gap - manual).abs() < 1e-12);
        assert!(gap > 0.0);

        let (single, theta1) = pool_with_probs(&[0.33]);
        assert!(instant_regret(&single, &single, &theta1).abs() < 1e-15);
    }

    #[test]
    fn regret_decomposition_identical_lists() {
        let (pool, theta) = pool_with_probs(&[0.3, 0.6, 0.1]);
        assert_eq!(regret_decomposition_check(&pool, &pool, &theta), 0.0);
    }

    #[test]
    fn regret_decomposition_k1() {
        let (a, theta) = pool_with_probs(&[0.8]);
        let (b, _) = pool_with_probs(&[0.25]);
        assert!(regret_decomposition_check(&a, &b, &theta) < 1e-15);
    }

    #[test]
    fn regret_decomposition_random_sweep() {
        let mut rng = crate::seeded_rng(2024);
        for _ in 0..1000 {
            let p_opt: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let p_alg: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let (opt, theta) = pool_with_probs(&p_opt);
            let (alg, _) = pool_with_probs(&p_alg);
            let disc = regret_decomposition_check(&opt, &alg, &theta);
            assert!(disc <= 1e-12, "discrepancy {disc}");
        }
    }

    proptest! {
        #[test]
        fn cascade_outcome_shape_invariants(
            probs in proptest::collection::vec(0.0f64..1.0, 1..6),
            seed in 0u64..500,
        ) {
            let (items, theta) = pool_with_probs(&probs);
            let mut rng = crate::seeded_rng(seed);
            let out = cascade_feedback(&items, &theta, &mut rng).unwrap();
            prop_assert!(out.is_consistent_with(items.len()));
        }

        #[test]
        fn expected_reward_monotone_in_each_probability(
            probs in proptest::collection::vec(0.0f64..0.95, 1..6),
            which in 0usize..6,
            bump in 0.001f64..0.05,
        ) {
            let which = which % probs.len();
            let (items, theta) = pool_with_probs(&probs);
            let mut bumped = probs.clone();
            bumped[which] = (bumped[which] + bump).min(1.0);
            let (items_b, _) = pool_with_probs(&bumped);
            prop_assert!(expected_reward(&items_b, &theta) >= expected_reward(&items, &theta) - 1e-12);
        }

        #[test]
        fn instant_regret_nonnegative_zero_iff_top_multiset(
            probs in proptest::collection::vec(0.0f64..1.0, 3..8),
            picks in proptest::collection::vec(0usize..8, 2..4),
        ) {
            let (pool, theta) = pool_with_probs(&probs);
            let k = picks.len().min(pool.len());
            let mut idx: Vec<usize> = picks.iter().map(|p| p % pool.len()).collect();
            idx.sort_unstable();
            idx.dedup();
            idx.truncate(k);
            if idx.len() < 2 { return Ok(()); }
            let chosen: Vec<ItemFeature> = idx.iter().map(|&i| pool[i].clone()).collect();
            let regret = instant_regret(&chosen, &pool, &theta);
            prop_assert!(regret >= -1e-12);

            let mut chosen_probs: Vec<f64> = idx.iter().map(|&i| probs[i]).collect();
            let mut sorted = probs.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            chosen_probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let is_top = chosen_probs
                .iter()
                .zip(sorted.iter().take(chosen_probs.len()))
                .all(|(a, b)| (a - b).abs() < 1e-15);
            if is_top {
                prop_assert!(regret.abs() < 1e-12);
            } else {
                prop_assert!(regret > -1e-12);
            }
        }
    }
}
