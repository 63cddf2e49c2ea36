//! Quality measures over test predictions, plus the printable results grid.
//!
//! Every measure is macro-averaged: a per-user score is computed for each
//! contributing test user and the reported value is the plain mean over
//! contributors. Measures run as engine passes; per-user partials go into
//! each test user's store and a sequential fold in `teardown` aggregates
//! them in ascending test-user order, so results do not depend on the
//! worker count.

mod grid;

pub use grid::ResultsGrid;

use crate::datamodel::{RatingsModel, TestProfile};
use crate::engine::{run_pass, ElementPass, PassTarget};
use crate::error::{CfError, Result};
use crate::knn::{Orientation, PredictionVector, KEY_PREDICTIONS};

const KEY_MAE_PARTIAL: &str = "MAE_PARTIAL";
const KEY_COVERAGE_PARTIAL: &str = "COVERAGE_PARTIAL";
const KEY_PR_PARTIAL: &str = "PRECISION_RECALL_PARTIAL";

/// One measure's aggregate result.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureScore {
    pub name: String,
    /// `None` when no test user contributed.
    pub value: Option<f64>,
    /// Number of test users that contributed to the average.
    pub users_counted: usize,
}

/// Precision, recall and the F1 derived from their aggregate averages.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionRecall {
    pub precision: MeasureScore,
    pub recall: MeasureScore,
    pub f1: MeasureScore,
}

/// Looks up the prediction for `(test user, test item)` from whichever
/// store the pipeline orientation filled.
fn prediction_for(
    model: &RatingsModel,
    orientation: Orientation,
    test_user: &TestProfile,
    test_item_pos: usize,
) -> Result<Option<f64>> {
    let (profile, position) = match orientation {
        Orientation::UserToUser => (test_user, test_item_pos),
        Orientation::ItemToItem => (&model.test_items[test_item_pos], test_user.test_index),
    };
    let vector = profile
        .store
        .get::<PredictionVector>(KEY_PREDICTIONS)
        .ok_or(CfError::MissingStep {
            required: KEY_PREDICTIONS,
            producer: "an aggregation or factorization prediction pass",
        })?;
    Ok(vector.entries[position])
}

fn require_test_users(model: &RatingsModel) -> Result<()> {
    if model.test_users.is_empty() {
        Err(CfError::EmptyTestSet)
    } else {
        Ok(())
    }
}

/// Mean absolute error between predictions and held-out ratings,
/// macro-averaged over test users with at least one defined prediction.
pub fn measure_mae(
    model: &RatingsModel,
    orientation: Orientation,
    workers: usize,
) -> Result<MeasureScore> {
    require_test_users(model)?;
    let mut pass = MaePass {
        orientation,
        score: None,
    };
    run_pass(model, PassTarget::TestUsers, &mut pass, workers)?;
    Ok(pass.score.expect("teardown ran"))
}

struct MaePass {
    orientation: Orientation,
    score: Option<MeasureScore>,
}

#[derive(Debug, Clone, Copy)]
struct MaePartial {
    absolute_error: f64,
    defined: usize,
}

impl ElementPass for MaePass {
    fn per_element(&self, model: &RatingsModel, index: usize) -> Result<()> {
        let user = &model.test_users[index];
        let mut partial = MaePartial {
            absolute_error: 0.0,
            defined: 0,
        };
        for &(item_pos, rating) in &user.test_ratings {
            if let Some(predicted) = prediction_for(model, self.orientation, user, item_pos)? {
                partial.absolute_error += (predicted - rating).abs();
                partial.defined += 1;
            }
        }
        user.store.put(KEY_MAE_PARTIAL, partial);
        Ok(())
    }

    fn teardown(&mut self, model: &RatingsModel) -> Result<()> {
        let mut sum = 0.0;
        let mut contributors = 0_usize;
        for user in &model.test_users {
            let partial = user
                .store
                .get::<MaePartial>(KEY_MAE_PARTIAL)
                .expect("per_element stored a partial");
            if partial.defined > 0 {
                sum += partial.absolute_error / partial.defined as f64;
                contributors += 1;
            }
        }
        self.score = Some(MeasureScore {
            name: "MAE".into(),
            value: (contributors > 0).then(|| sum / contributors as f64),
            users_counted: contributors,
        });
        Ok(())
    }
}

/// Fraction of held-out ratings that received a defined prediction,
/// macro-averaged over test users with at least one held-out rating.
pub fn measure_coverage(
    model: &RatingsModel,
    orientation: Orientation,
    workers: usize,
) -> Result<MeasureScore> {
    require_test_users(model)?;
    let mut pass = CoveragePass {
        orientation,
        score: None,
    };
    run_pass(model, PassTarget::TestUsers, &mut pass, workers)?;
    Ok(pass.score.expect("teardown ran"))
}

struct CoveragePass {
    orientation: Orientation,
    score: Option<MeasureScore>,
}

#[derive(Debug, Clone, Copy)]
struct CoveragePartial {
    defined: usize,
    total: usize,
}

impl ElementPass for CoveragePass {
    fn per_element(&self, model: &RatingsModel, index: usize) -> Result<()> {
        let user = &model.test_users[index];
        let mut partial = CoveragePartial {
            defined: 0,
            total: user.test_ratings.len(),
        };
        for &(item_pos, _) in &user.test_ratings {
            if prediction_for(model, self.orientation, user, item_pos)?.is_some() {
                partial.defined += 1;
            }
        }
        user.store.put(KEY_COVERAGE_PARTIAL, partial);
        Ok(())
    }

    fn teardown(&mut self, model: &RatingsModel) -> Result<()> {
        let mut sum = 0.0;
        let mut contributors = 0_usize;
        for user in &model.test_users {
            let partial = user
                .store
                .get::<CoveragePartial>(KEY_COVERAGE_PARTIAL)
                .expect("per_element stored a partial");
            if partial.total > 0 {
                sum += partial.defined as f64 / partial.total as f64;
                contributors += 1;
            }
        }
        self.score = Some(MeasureScore {
            name: "COVERAGE".into(),
            value: (contributors > 0).then(|| sum / contributors as f64),
            users_counted: contributors,
        });
        Ok(())
    }
}

/// Top-N recommendation quality against a relevance threshold.
///
/// Per test user, the recommended set is its top-`n` held-out items by
/// defined predicted rating (ties by ascending item index) and the relevant
/// set is its held-out items rated at or above `theta`. Users without
/// recommendations are excluded from precision, users without relevant
/// items from recall; F1 combines the two aggregate averages.
pub fn measure_precision_recall(
    model: &RatingsModel,
    orientation: Orientation,
    n: usize,
    theta: f64,
    workers: usize,
) -> Result<PrecisionRecall> {
    require_test_users(model)?;
    if n < 1 {
        return Err(CfError::InvalidArgument(
            "recommendation list size must be >= 1".into(),
        ));
    }
    if theta < model.min_rating || theta > model.max_rating {
        return Err(CfError::InvalidArgument(format!(
            "relevance threshold {theta} outside rating bounds [{}, {}]",
            model.min_rating, model.max_rating
        )));
    }
    let mut pass = PrecisionRecallPass {
        orientation,
        n,
        theta,
        result: None,
    };
    run_pass(model, PassTarget::TestUsers, &mut pass, workers)?;
    Ok(pass.result.expect("teardown ran"))
}

struct PrecisionRecallPass {
    orientation: Orientation,
    n: usize,
    theta: f64,
    result: Option<PrecisionRecall>,
}

#[derive(Debug, Clone, Copy)]
struct PrPartial {
    precision: Option<f64>,
    recall: Option<f64>,
}

impl ElementPass for PrecisionRecallPass {
    fn per_element(&self, model: &RatingsModel, index: usize) -> Result<()> {
        let user = &model.test_users[index];

        // Candidates are the user's held-out items with a defined
        // prediction, ranked by predicted rating.
        let mut predicted: Vec<(usize, f64)> = Vec::with_capacity(user.test_ratings.len());
        for &(item_pos, _) in &user.test_ratings {
            if let Some(score) = prediction_for(model, self.orientation, user, item_pos)? {
                predicted.push((item_pos, score));
            }
        }
        predicted.sort_unstable_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(model.test_items[a.0].index.cmp(&model.test_items[b.0].index))
        });
        predicted.truncate(self.n);

        let recommended: Vec<usize> = predicted.into_iter().map(|(pos, _)| pos).collect();
        let hits = recommended
            .iter()
            .filter(|&&pos| user.test_rating_for(pos).is_some_and(|r| r >= self.theta))
            .count();
        let relevant = user
            .test_ratings
            .iter()
            .filter(|&&(_, rating)| rating >= self.theta)
            .count();

        let partial = PrPartial {
            precision: (!recommended.is_empty()).then(|| hits as f64 / recommended.len() as f64),
            recall: (relevant > 0).then(|| hits as f64 / relevant as f64),
        };
        user.store.put(KEY_PR_PARTIAL, partial);
        Ok(())
    }

    fn teardown(&mut self, model: &RatingsModel) -> Result<()> {
        let mut precision_sum = 0.0;
        let mut precision_users = 0_usize;
        let mut recall_sum = 0.0;
        let mut recall_users = 0_usize;
        let mut both_users = 0_usize;
        for user in &model.test_users {
            let partial = user
                .store
                .get::<PrPartial>(KEY_PR_PARTIAL)
                .expect("per_element stored a partial");
            if let Some(p) = partial.precision {
                precision_sum += p;
                precision_users += 1;
            }
            if let Some(r) = partial.recall {
                recall_sum += r;
                recall_users += 1;
            }
            if partial.precision.is_some() && partial.recall.is_some() {
                both_users += 1;
            }
        }

        let precision = (precision_users > 0).then(|| precision_sum / precision_users as f64);
        let recall = (recall_users > 0).then(|| recall_sum / recall_users as f64);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        self.result = Some(PrecisionRecall {
            precision: MeasureScore {
                name: "PRECISION".into(),
                value: precision,
                users_counted: precision_users,
            },
            recall: MeasureScore {
                name: "RECALL".into(),
                value: recall,
                users_counted: recall_users,
            },
            f1: MeasureScore {
                name: "F1".into(),
                value: f1,
                users_counted: both_users,
            },
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{build_model, RatingTriple, SplitConfig};
    use crate::knn::{PredictionVector, KEY_PREDICTIONS};

    fn base_triples() -> Vec<RatingTriple> {
        vec![
            // Training ballast so bounds cover [1, 5] and nobody has an
            // empty training profile.
            RatingTriple::new("u0", "i9", 1.0),
            RatingTriple::new("u1", "i9", 5.0),
            RatingTriple::new("u2", "i9", 3.0),
            // Held-out cells (test users u0, u1 × test items i0..i2).
            RatingTriple::new("u0", "i0", 5.0),
            RatingTriple::new("u0", "i1", 4.0),
            RatingTriple::new("u0", "i2", 2.0),
            RatingTriple::new("u1", "i0", 3.0),
            RatingTriple::new("u1", "i1", 2.0),
            RatingTriple::new("u1", "i2", 3.5),
            RatingTriple::new("u2", "i0", 2.0),
        ]
    }

    /// 2 test users × 3 test items with hand-set predictions.
    fn fixture(predictions: &[Vec<Option<f64>>]) -> RatingsModel {
        let model = build_model(
            &base_triples(),
            &SplitConfig {
                test_user_fraction: 2.0 / 3.0,
                test_item_fraction: 0.75,
                seed: pick_seed(),
                ..SplitConfig::default()
            },
        )
        .unwrap();
        for (user, entries) in model.test_users.iter().zip(predictions) {
            user.store.put(
                KEY_PREDICTIONS,
                PredictionVector {
                    owner: user.test_index,
                    entries: entries.clone(),
                },
            );
        }
        model
    }

    /// Finds a seed whose draw marks u0/u1 as test users and i0/i1/i2 as
    /// test items, keeping the fixture readable.
    fn pick_seed() -> u64 {
        for seed in 0..200 {
            let model = build_model(
                &base_triples(),
                &SplitConfig {
                    test_user_fraction: 2.0 / 3.0,
                    test_item_fraction: 0.75,
                    seed,
                    ..SplitConfig::default()
                },
            )
            .unwrap();
            let users: Vec<&str> = model.test_users.iter().map(|u| u.code.as_str()).collect();
            let items: Vec<&str> = model.test_items.iter().map(|i| i.code.as_str()).collect();
            if users == ["u0", "u1"] && items == ["i0", "i1", "i2"] {
                return seed;
            }
        }
        panic!("no seed draws the intended split");
    }

    #[test]
    fn perfect_predictions_score_zero_mae() {
        let model = fixture(&[
            vec![Some(5.0), Some(4.0), Some(2.0)],
            vec![Some(3.0), Some(2.0), Some(3.5)],
        ]);
        let score = measure_mae(&model, Orientation::UserToUser, 1).unwrap();
        assert_eq!(score.value, Some(0.0));
        assert_eq!(score.users_counted, 2);
    }

    #[test]
    fn mae_macro_averages_per_user_errors() {
        // u0 mean error 0.5, u1 mean error 1.5 → 1.0.
        let model = fixture(&[
            vec![Some(4.5), Some(4.5), Some(2.5)],
            vec![Some(4.5), Some(0.5), Some(5.0)],
        ]);
        let score = measure_mae(&model, Orientation::UserToUser, 1).unwrap();
        assert_eq!(score.value, Some(1.0));
    }

    #[test]
    fn all_undefined_predictions_give_an_undefined_mae() {
        let model = fixture(&[vec![None, None, None], vec![None, None, None]]);
        let score = measure_mae(&model, Orientation::UserToUser, 1).unwrap();
        assert_eq!(score.value, None);
        assert_eq!(score.users_counted, 0);
    }

    #[test]
    fn coverage_counts_defined_fractions() {
        let model = fixture(&[
            vec![Some(1.0), Some(1.0), Some(1.0)],
            vec![Some(1.0), None, None],
        ]);
        let score = measure_coverage(&model, Orientation::UserToUser, 1).unwrap();
        // (3/3 + 1/3) / 2.
        assert!((score.value.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(score.users_counted, 2);
    }

    #[test]
    fn full_coverage_scores_one() {
        let model = fixture(&[
            vec![Some(3.0), Some(3.0), Some(3.0)],
            vec![Some(3.0), Some(3.0), Some(3.0)],
        ]);
        let score = measure_coverage(&model, Orientation::UserToUser, 1).unwrap();
        assert_eq!(score.value, Some(1.0));
    }

    #[test]
    fn precision_recall_matches_hand_enumeration() {
        // u0: predictions i0:4.5, i1:3.8, i2:4.2 with ratings i0:5, i1:4,
        // i2:2 and θ=4 → recommended {i0, i2}, relevant {i0, i1}.
        // u1 has no defined predictions and no rating ≥ 4, so it is
        // excluded from both sides.
        let model = fixture(&[
            vec![Some(4.5), Some(3.8), Some(4.2)],
            vec![None, None, None],
        ]);
        let pr = measure_precision_recall(&model, Orientation::UserToUser, 2, 4.0, 1).unwrap();
        assert_eq!(pr.precision.value, Some(0.5));
        assert_eq!(pr.recall.value, Some(0.5));
        assert_eq!(pr.precision.users_counted, 1);
        assert_eq!(pr.recall.users_counted, 1);
        assert_eq!(pr.f1.value, Some(0.5));
    }

    #[test]
    fn all_recommended_relevant_gives_full_precision() {
        let model = fixture(&[
            vec![Some(5.0), Some(4.9), Some(1.0)],
            vec![Some(4.8), Some(1.0), Some(4.9)],
        ]);
        // θ = 3.5: u0 relevant i0 (5), i1 (4); u1 relevant i2 (3.5). Top-1
        // picks a relevant item for both users.
        let pr = measure_precision_recall(&model, Orientation::UserToUser, 1, 3.5, 1).unwrap();
        assert_eq!(pr.precision.value, Some(1.0));
    }

    #[test]
    fn user_without_relevant_items_is_excluded_from_recall() {
        let model = fixture(&[
            vec![Some(5.0), Some(4.0), Some(2.0)],
            vec![Some(3.0), Some(2.0), Some(4.0)],
        ]);
        // θ = 5: u0 has one relevant item, u1 none.
        let pr = measure_precision_recall(&model, Orientation::UserToUser, 2, 5.0, 1).unwrap();
        assert_eq!(pr.recall.users_counted, 1);
        // u1 still counts for precision (it has recommendations).
        assert_eq!(pr.precision.users_counted, 2);
    }

    #[test]
    fn generous_list_and_minimal_threshold_give_full_recall() {
        let model = fixture(&[
            vec![Some(2.0), Some(3.0), Some(4.0)],
            vec![Some(1.0), Some(2.0), Some(3.0)],
        ]);
        let (min, _) = model.rating_bounds();
        let pr = measure_precision_recall(&model, Orientation::UserToUser, 10, min, 1).unwrap();
        assert_eq!(pr.recall.value, Some(1.0));
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        let model = fixture(&[vec![None, None, None], vec![None, None, None]]);
        assert!(matches!(
            measure_precision_recall(&model, Orientation::UserToUser, 0, 3.0, 1),
            Err(CfError::InvalidArgument(_))
        ));
        assert!(matches!(
            measure_precision_recall(&model, Orientation::UserToUser, 2, 99.0, 1),
            Err(CfError::InvalidArgument(_))
        ));
    }

    #[test]
    fn measures_require_test_users() {
        let model = build_model(
            &[RatingTriple::new("u", "i", 3.0)],
            &SplitConfig {
                test_user_fraction: 0.0,
                test_item_fraction: 0.0,
                ..SplitConfig::default()
            },
        )
        .unwrap();
        assert!(matches!(
            measure_mae(&model, Orientation::UserToUser, 1),
            Err(CfError::EmptyTestSet)
        ));
    }

    #[test]
    fn measures_error_before_any_prediction_pass() {
        let model = fixture(&[vec![Some(1.0)]; 0]);
        let err = measure_mae(&model, Orientation::UserToUser, 1).unwrap_err();
        match err {
            CfError::ElementFailed { source, .. } => assert!(matches!(
                *source,
                CfError::MissingStep {
                    required: KEY_PREDICTIONS,
                    ..
                }
            )),
            other => panic!("expected ElementFailed, got {other:?}"),
        }
    }
}
