//! Degenerate comparators built on the same learner machinery: one treats
//! the whole population as a single cluster, the other gives every user an
//! isolated model. Both keep their partition frozen by disabling edge
//! deletion, so the single-cluster baseline coincides with the learner run
//! at an infinite deletion scale by construction.

use crate::club::{Alpha, ClubCascade, ClubConfig, GlmParams, GraphInit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    /// All users share one model forever (complete graph, no deletion).
    SingleCluster,
    /// Every user is its own cluster forever (empty graph, no deletion).
    PerUser,
}

fn baseline_config(kind: BaselineKind, cfg: &ClubConfig) -> ClubConfig {
    ClubConfig {
        alpha: Alpha::Disabled,
        init: match kind {
            BaselineKind::SingleCluster => GraphInit::Complete,
            BaselineKind::PerUser => GraphInit::Empty,
        },
        ..cfg.clone()
    }
}

/// A frozen-partition learner of the given kind, sharing every other
/// configuration knob with `cfg`.
pub fn make_baseline(kind: BaselineKind, cfg: &ClubConfig, u: usize) -> ClubCascade {
    ClubCascade::new(baseline_config(kind, cfg), u)
}

/// Generalized-linear flavor of [`make_baseline`].
pub fn make_baseline_glm(
    kind: BaselineKind,
    cfg: &ClubConfig,
    u: usize,
    params: GlmParams,
) -> ClubCascade {
    ClubCascade::new_glm(baseline_config(kind, cfg), u, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::club::BetaMode;
    use crate::env::{cascade_feedback, gen_item_pool};
    use crate::linalg::Vector;

    fn cfg() -> ClubConfig {
        ClubConfig {
            lambda: 2.0,
            alpha: Alpha::Value(0.5),
            beta: BetaMode::Fixed(1.0),
            k: 2,
            d: 3,
            horizon: 1000,
            init: GraphInit::ErdosRenyi { p: 0.5, seed: 1 },
        }
    }

    #[test]
    fn single_cluster_is_one_component_forever() {
        let mut learner = make_baseline(BaselineKind::SingleCluster, &cfg(), 3);
        let pool = gen_item_pool(8, 3, 3).unwrap();
        let theta = Vector::from_slice(&[0.7, 0.2, 0.4]);
        let mut rng = crate::seeded_rng(8);
        for round in 0..50 {
            learner
                .step(round % 3, &pool.items, |list| {
                    cascade_feedback(list, &theta, &mut rng).unwrap()
                })
                .unwrap();
            assert_eq!(learner.components().len(), 1);
            assert_eq!(learner.graph().edge_count(), 3);
        }
    }

    #[test]
    fn per_user_stays_singletons_forever() {
        let mut learner = make_baseline(BaselineKind::PerUser, &cfg(), 3);
        let pool = gen_item_pool(8, 3, 3).unwrap();
        let theta = Vector::from_slice(&[0.7, 0.2, 0.4]);
        let mut rng = crate::seeded_rng(8);
        for round in 0..50 {
            learner
                .step(round % 3, &pool.items, |list| {
                    cascade_feedback(list, &theta, &mut rng).unwrap()
                })
                .unwrap();
            assert_eq!(learner.components().len(), 3);
            assert_eq!(learner.graph().edge_count(), 0);
        }
    }

    #[test]
    fn single_cluster_matches_learner_with_infinite_alpha() {
        let pool = gen_item_pool(10, 3, 5).unwrap();
        let theta = Vector::from_slice(&[0.5, 0.5, 0.5]);
        let base_cfg = ClubConfig {
            init: GraphInit::Complete,
            ..cfg()
        };
        let club_cfg = ClubConfig {
            alpha: Alpha::Value(f64::INFINITY),
            ..base_cfg.clone()
        };
        let mut club = ClubCascade::new(club_cfg, 4);
        let mut baseline = make_baseline(BaselineKind::SingleCluster, &base_cfg, 4);
        for round in 0..80u64 {
            let user = (round % 4) as usize;
            let draw = |it: &crate::env::ItemFeature| {
                ((it.id as f64) * 0.61 + round as f64 * 0.173) % 1.0
            };
            let (list_a, out_a) = club
                .step(user, &pool.items, |list| {
                    crate::env::cascade_feedback_by(list, &theta, draw).unwrap()
                })
                .unwrap();
            let (list_b, out_b) = baseline
                .step(user, &pool.items, |list| {
                    crate::env::cascade_feedback_by(list, &theta, draw).unwrap()
                })
                .unwrap();
            assert_eq!(list_a, list_b);
            assert_eq!(out_a, out_b);
        }
        for user in 0..4 {
            assert_eq!(club.stats(user), baseline.stats(user));
        }
    }

    #[test]
    fn both_kinds_coincide_for_one_user() {
        let pool = gen_item_pool(6, 3, 9).unwrap();
        let theta = Vector::from_slice(&[0.4, 0.6, 0.2]);
        let mut single = make_baseline(BaselineKind::SingleCluster, &cfg(), 1);
        let mut per_user = make_baseline(BaselineKind::PerUser, &cfg(), 1);
        for round in 0..40u64 {
            let draw = |it: &crate::env::ItemFeature| {
                ((it.id as f64) * 0.39 + round as f64 * 0.251) % 1.0
            };
            let (list_a, out_a) = single
                .step(0, &pool.items, |list| {
                    crate::env::cascade_feedback_by(list, &theta, draw).unwrap()
                })
                .unwrap();
            let (list_b, out_b) = per_user
                .step(0, &pool.items, |list| {
                    crate::env::cascade_feedback_by(list, &theta, draw).unwrap()
                })
                .unwrap();
            assert_eq!(list_a, list_b);
            assert_eq!(out_a, out_b);
        }
        assert_eq!(single.stats(0), per_user.stats(0));
    }
}
