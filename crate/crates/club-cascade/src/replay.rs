//! Offline replay pipeline: ingest binary user–item ratings, split users
//! into a feature-extraction population and a replay population, build
//! item features by truncated SVD, and replay recommendations against the
//! held-out rows.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::env::{CascadeOutcome, Click, ItemFeature};
use crate::linalg::{truncated_svd, Matrix, Vector};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("cannot reserve {requested} feature users out of {available}")]
    TooFewUsers { requested: usize, available: usize },
    #[error("cannot extract {requested} factors from a {rows}x{cols} matrix")]
    BadRank {
        requested: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix has no positive entries to factor")]
    NothingToFactor,
}

/// A binary preference matrix over densely indexed users and items.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingsMatrix {
    pub n_users: usize,
    pub n_items: usize,
    positives: BTreeSet<(u32, u32)>,
}

impl RatingsMatrix {
    pub fn new(n_users: usize, n_items: usize) -> Self {
        Self {
            n_users,
            n_items,
            positives: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, user: usize, item: usize) -> bool {
        assert!(user < self.n_users && item < self.n_items, "index out of range");
        self.positives.insert((user as u32, item as u32))
    }

    pub fn is_positive(&self, user: usize, item: usize) -> bool {
        self.positives.contains(&(user as u32, item as u32))
    }

    pub fn positive_count(&self) -> usize {
        self.positives.len()
    }

    /// Items the user rated positively, ascending.
    pub fn user_row(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        let user = user as u32;
        self.positives
            .range((user, 0)..=(user, u32::MAX))
            .map(|&(_, item)| item as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.positives.iter().map(|&(u, i)| (u as usize, i as usize))
    }
}

/// Original-id labels for the dense indices, in dense order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdMapping {
    pub users: Vec<String>,
    pub items: Vec<String>,
}

/// Parse `user_id,item_id[,rating]` rows; a rating at or above `threshold`
/// (or an absent rating) counts as positive. Ids become dense 0-based
/// indices in first-appearance order.
pub fn load_ratings(
    path: &Path,
    threshold: f64,
) -> Result<(RatingsMatrix, IdMapping), ReplayError> {
    let file = std::fs::File::open(path)?;
    load_ratings_from(std::io::BufReader::new(file), threshold)
}

pub fn load_ratings_from(
    input: impl BufRead,
    threshold: f64,
) -> Result<(RatingsMatrix, IdMapping), ReplayError> {
    let mut user_index: std::collections::HashMap<String, u32> = Default::default();
    let mut item_index: std::collections::HashMap<String, u32> = Default::default();
    let mut mapping = IdMapping::default();
    let mut rows: Vec<(u32, u32, bool)> = Vec::new();
    let mut saw_data = false;

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        // Optional header, e.g. `user_id,item_id,rating`.
        if idx == 0 && trimmed.starts_with("user") {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(ReplayError::Parse {
                line: line_no,
                message: format!("expected 2 or 3 comma-separated fields, got {}", fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(ReplayError::Parse {
                line: line_no,
                message: "empty id field".into(),
            });
        }
        let positive = match fields.get(2) {
            None => true,
            Some(raw) => {
                let rating: f64 = raw.parse().map_err(|e| ReplayError::Parse {
                    line: line_no,
                    message: format!("bad rating {raw:?}: {e}"),
                })?;
                rating >= threshold
            }
        };
        saw_data = true;
        let next_user = user_index.len() as u32;
        let user = *user_index
            .entry(fields[0].to_string())
            .or_insert_with(|| {
                mapping.users.push(fields[0].to_string());
                next_user
            });
        let next_item = item_index.len() as u32;
        let item = *item_index
            .entry(fields[1].to_string())
            .or_insert_with(|| {
                mapping.items.push(fields[1].to_string());
                next_item
            });
        rows.push((user, item, positive));
    }
    if !saw_data {
        return Err(ReplayError::EmptyInput);
    }
    let mut matrix = RatingsMatrix::new(mapping.users.len(), mapping.items.len());
    for (user, item, positive) in rows {
        if positive {
            matrix.positives.insert((user, item));
        }
    }
    Ok((matrix, mapping))
}

/// The feature/replay cut of one ratings matrix. Both sides are re-indexed
/// over users but share the original item index space.
#[derive(Clone, Debug)]
pub struct ReplaySplit {
    /// Rows of the users reserved for feature extraction.
    pub history: RatingsMatrix,
    /// Rows of the remaining users, replayed against online runs.
    pub future: RatingsMatrix,
    pub feature_user_count: usize,
    /// Original user indices backing each side, ascending.
    pub history_users: Vec<usize>,
    pub future_users: Vec<usize>,
}

/// Reserve `n_feature_users` users uniformly at random for feature
/// extraction; the rest become the replay population.
pub fn split_users(
    matrix: &RatingsMatrix,
    n_feature_users: usize,
    rng_seed: u64,
) -> Result<ReplaySplit, ReplayError> {
    if n_feature_users == 0 || n_feature_users >= matrix.n_users {
        return Err(ReplayError::TooFewUsers {
            requested: n_feature_users,
            available: matrix.n_users,
        });
    }
    let mut rng = crate::seeded_rng(rng_seed);
    let mut order: Vec<usize> = (0..matrix.n_users).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut history_users: Vec<usize> = order[..n_feature_users].to_vec();
    let mut future_users: Vec<usize> = order[n_feature_users..].to_vec();
    history_users.sort_unstable();
    future_users.sort_unstable();

    let project = |users: &[usize]| {
        let rank: std::collections::HashMap<usize, u32> = users
            .iter()
            .enumerate()
            .map(|(dense, &orig)| (orig, dense as u32))
            .collect();
        let mut side = RatingsMatrix::new(users.len(), matrix.n_items);
        for &(user, item) in &matrix.positives {
            if let Some(&dense) = rank.get(&(user as usize)) {
                side.positives.insert((dense, item));
            }
        }
        side
    };

    Ok(ReplaySplit {
        history: project(&history_users),
        future: project(&future_users),
        feature_user_count: n_feature_users,
        history_users,
        future_users,
    })
}

/// Item features extracted from the history matrix.
#[derive(Clone, Debug)]
pub struct FeatureExtraction {
    /// One feature per item, ids matching the shared item index space; all
    /// norms at most 1 with equality for the largest.
    pub items: Vec<ItemFeature>,
    /// Set when the requested factor count exceeds the matrix's numerical
    /// rank; trailing feature coordinates are then essentially zero padding.
    pub rank_deficient: bool,
}

/// Factor the history matrix and read item `j`'s raw feature off row `j` of
/// `V·diag(σ)`, then rescale the whole set by the maximum raw norm so every
/// feature sits in the unit ball and at least one touches the boundary.
pub fn extract_features(history: &RatingsMatrix, d: usize) -> Result<FeatureExtraction, ReplayError> {
    if d == 0 || d > history.n_users.min(history.n_items) {
        return Err(ReplayError::BadRank {
            requested: d,
            rows: history.n_users,
            cols: history.n_items,
        });
    }
    if history.positives.is_empty() {
        return Err(ReplayError::NothingToFactor);
    }
    let mut dense = Matrix::zeros(history.n_users, history.n_items);
    for &(user, item) in &history.positives {
        dense.set(user as usize, item as usize, 1.0);
    }
    let svd = truncated_svd(&dense, d, 1e-11).map_err(|e| ReplayError::Parse {
        line: 0,
        message: format!("factorization failed: {e}"),
    })?;
    let rank_deficient = svd.singulars[d - 1] < 1e-10 * svd.singulars[0];

    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(history.n_items);
    let mut max_norm = 0.0f64;
    for item in 0..history.n_items {
        let row: Vec<f64> = (0..d)
            .map(|c| svd.right.get(item, c) * svd.singulars[c])
            .collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        max_norm = max_norm.max(norm);
        raw.push(row);
    }
    if max_norm <= 0.0 {
        return Err(ReplayError::NothingToFactor);
    }
    let items = raw
        .into_iter()
        .enumerate()
        .map(|(id, mut row)| {
            for v in &mut row {
                *v /= max_norm;
            }
            ItemFeature::new(id, Vector::from_slice(&row))
        })
        .collect();
    Ok(FeatureExtraction {
        items,
        rank_deficient,
    })
}

/// Cascade feedback out of logged preferences: the click lands on the first
/// listed item the user rated positively, and only the examined prefix is
/// revealed.
pub fn replay_feedback(
    future: &RatingsMatrix,
    user: usize,
    list: &[ItemFeature],
) -> CascadeOutcome {
    let mut observed = Vec::with_capacity(list.len());
    for (k, item) in list.iter().enumerate() {
        let clicked = future.is_positive(user, item.id);
        observed.push(clicked);
        if clicked {
            return CascadeOutcome {
                click: Click::At(k + 1),
                observed,
            };
        }
    }
    CascadeOutcome {
        click: Click::None,
        observed,
    }
}

/// Prefix sums of rounds that produced a click.
pub fn cumulative_clicks(outcomes: &[CascadeOutcome]) -> Vec<u64> {
    let mut total = 0u64;
    outcomes
        .iter()
        .map(|o| {
            if o.clicked() {
                total += 1;
            }
            total
        })
        .collect()
}

/// Synthetic clustered binary matrix for exercising the pipeline without a
/// real dataset. Each cluster owns a disjoint block of items and, inside
/// it, a small shared pattern of `pattern_size` items; a user rates each of
/// their cluster's pattern items with probability `p_like` and every other
/// item with probability `p_noise`. Rare-but-shared positives make
/// collaborative discovery informative while solo scanning stays slow.
pub fn gen_clustered_matrix(
    n_users: usize,
    n_items: usize,
    n_clusters: usize,
    pattern_size: usize,
    p_like: f64,
    p_noise: f64,
    rng_seed: u64,
) -> RatingsMatrix {
    assert!(n_clusters >= 1 && n_clusters <= n_users && n_clusters <= n_items);
    assert!(pattern_size >= 1 && pattern_size * n_clusters <= n_items);
    assert!((0.0..=1.0).contains(&p_like) && (0.0..=1.0).contains(&p_noise));
    let mut rng = crate::seeded_rng(rng_seed);
    let block = n_items / n_clusters;
    // A fixed random pattern inside each cluster's block.
    let patterns: Vec<Vec<usize>> = (0..n_clusters)
        .map(|cluster| {
            let block_start = cluster * block;
            let block_len = if cluster + 1 == n_clusters {
                n_items - block_start
            } else {
                block
            };
            let mut ids: Vec<usize> = (0..block_len).map(|i| block_start + i).collect();
            for i in (1..ids.len()).rev() {
                let j = rng.random_range(0..=i);
                ids.swap(i, j);
            }
            let mut pattern = ids[..pattern_size.min(block_len)].to_vec();
            pattern.sort_unstable();
            pattern
        })
        .collect();

    let mut matrix = RatingsMatrix::new(n_users, n_items);
    for user in 0..n_users {
        // Round-robin keeps every cluster populated.
        let cluster = if user < n_clusters {
            user
        } else {
            rng.random_range(0..n_clusters)
        };
        for item in 0..n_items {
            let p = if patterns[cluster].binary_search(&item).is_ok() {
                p_like
            } else {
                p_noise
            };
            if rng.random::<f64>() < p {
                matrix.insert(user, item);
            }
        }
    }
    matrix
}
