//! In-memory rating model: loading, train/test splitting and navigation.
//!
//! The model duplicates every training rating on both sides: each user
//! profile holds its `(item, value)` pairs and each item profile holds the
//! mirrored `(user, value)` pairs, trading memory for O(log n) lookup from
//! either direction. Rating vectors are kept sorted by counterpart index,
//! which similarity computation relies on for linear merge-intersection.

mod build;
mod load;
mod store;

pub use build::{build_model, SplitConfig};
pub use load::{load_dataset, parse_ratings, LoadReport};
pub use store::Store;

use std::collections::HashMap;

use crate::error::{CfError, Result};

/// One rating observation as read from a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTriple {
    pub user_code: String,
    pub item_code: String,
    pub value: f64,
}

impl RatingTriple {
    pub fn new(user_code: impl Into<String>, item_code: impl Into<String>, value: f64) -> Self {
        Self {
            user_code: user_code.into(),
            item_code: item_code.into(),
            value,
        }
    }
}

/// Training-side profile of one user or one item.
///
/// For a user, `ratings` pairs are `(item index, value)`; for an item they
/// are `(user index, value)`. Pairs are sorted ascending by counterpart
/// index with no duplicates.
#[derive(Debug)]
pub struct Profile {
    /// External identifier from the dataset file.
    pub code: String,
    /// Position in the owning array (`users` or `items`).
    pub index: usize,
    /// Training ratings, sorted ascending by counterpart index.
    pub ratings: Vec<(usize, f64)>,
    /// Mean of training rating values; NaN when the profile is empty.
    pub rating_average: f64,
    /// Population standard deviation; NaN when the profile is empty.
    pub rating_std_dev: f64,
    /// Position in the test array when this entity was drawn as a test
    /// entity.
    pub test_index: Option<usize>,
    /// Intermediate pipeline outputs keyed by step name.
    pub store: Store,
}

impl Profile {
    /// Training rating given to (or received from) `counterpart`, by binary
    /// search over the sorted rating vector.
    pub fn rating_for(&self, counterpart: usize) -> Option<f64> {
        self.ratings
            .binary_search_by_key(&counterpart, |&(idx, _)| idx)
            .ok()
            .map(|pos| self.ratings[pos].1)
    }

    pub fn num_ratings(&self) -> usize {
        self.ratings.len()
    }
}

/// Test-side profile: the training profile of a test entity plus its
/// held-out ratings.
///
/// For a test user, `test_ratings` pairs are `(test-item position, value)`;
/// for a test item they are `(test-user position, value)`. Similarities,
/// neighbors and predictions computed for this entity land in `store`.
#[derive(Debug)]
pub struct TestProfile {
    pub code: String,
    /// Position in the full entity array (`users` or `items`).
    pub index: usize,
    /// Position in the test array (`test_users` or `test_items`).
    pub test_index: usize,
    /// Training ratings, duplicated from the base profile.
    pub ratings: Vec<(usize, f64)>,
    /// Held-out ratings, sorted ascending by test counterpart position.
    pub test_ratings: Vec<(usize, f64)>,
    pub rating_average: f64,
    pub rating_std_dev: f64,
    pub store: Store,
}

impl TestProfile {
    pub fn rating_for(&self, counterpart: usize) -> Option<f64> {
        self.ratings
            .binary_search_by_key(&counterpart, |&(idx, _)| idx)
            .ok()
            .map(|pos| self.ratings[pos].1)
    }

    /// Held-out rating for the test counterpart at `test_position`.
    pub fn test_rating_for(&self, test_position: usize) -> Option<f64> {
        self.test_ratings
            .binary_search_by_key(&test_position, |&(idx, _)| idx)
            .ok()
            .map(|pos| self.test_ratings[pos].1)
    }

    pub fn num_test_ratings(&self) -> usize {
        self.test_ratings.len()
    }
}

/// The loaded dataset: every profile, the train/test split and lookup maps.
///
/// After construction the model is immutable except for the per-profile
/// stores, which pipeline passes fill in. All navigation methods are safe
/// under concurrent access.
#[derive(Debug)]
pub struct RatingsModel {
    pub users: Vec<Profile>,
    pub items: Vec<Profile>,
    pub test_users: Vec<TestProfile>,
    pub test_items: Vec<TestProfile>,
    pub min_rating: f64,
    pub max_rating: f64,
    /// Count of training ratings.
    pub num_ratings: usize,
    /// Count of held-out ratings.
    pub num_test_ratings: usize,
    /// Seed used for the train/test split.
    pub split_seed: u64,
    pub user_code_to_index: HashMap<String, usize>,
    pub item_code_to_index: HashMap<String, usize>,
}

impl RatingsModel {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_test_users(&self) -> usize {
        self.test_users.len()
    }

    pub fn num_test_items(&self) -> usize {
        self.test_items.len()
    }

    pub fn user_index_of(&self, code: &str) -> Option<usize> {
        self.user_code_to_index.get(code).copied()
    }

    pub fn item_index_of(&self, code: &str) -> Option<usize> {
        self.item_code_to_index.get(code).copied()
    }

    /// Training rating of `user_index` for `item_index`, if present.
    pub fn training_rating(&self, user_index: usize, item_index: usize) -> Result<Option<f64>> {
        let user = self.users.get(user_index).ok_or(CfError::OutOfBounds {
            kind: "user",
            index: user_index,
            len: self.users.len(),
        })?;
        if item_index >= self.items.len() {
            return Err(CfError::OutOfBounds {
                kind: "item",
                index: item_index,
                len: self.items.len(),
            });
        }
        Ok(user.rating_for(item_index))
    }

    pub fn rating_bounds(&self) -> (f64, f64) {
        (self.min_rating, self.max_rating)
    }

    /// Clamps a raw prediction into the dataset's rating bounds.
    pub fn clamp_rating(&self, value: f64) -> f64 {
        value.clamp(self.min_rating, self.max_rating)
    }

    /// Fraction of the user × item grid that carries a rating (training or
    /// test).
    pub fn density(&self) -> f64 {
        let cells = (self.users.len() * self.items.len()) as f64;
        (self.num_ratings + self.num_test_ratings) as f64 / cells
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_model() -> RatingsModel {
        // 4 users x 3 items, users "2" and "3" are test users, item "B" is a
        // test item.
        let triples = vec![
            RatingTriple::new("1", "A", 1.0),
            RatingTriple::new("1", "B", 2.0),
            RatingTriple::new("2", "A", 3.0),
            RatingTriple::new("2", "B", 4.0),
            RatingTriple::new("2", "C", 5.0),
            RatingTriple::new("3", "B", 2.5),
            RatingTriple::new("4", "C", 1.5),
        ];
        let config = SplitConfig {
            test_user_fraction: 0.5,
            test_item_fraction: 1.0 / 3.0,
            seed: 7,
            ..SplitConfig::default()
        };
        build_model(&triples, &config).unwrap()
    }

    #[test]
    fn rating_lookup_matches_both_sides() {
        let model = toy_model();
        for user in &model.users {
            for &(item_idx, value) in &user.ratings {
                assert_eq!(model.items[item_idx].rating_for(user.index), Some(value));
                assert_eq!(
                    model.training_rating(user.index, item_idx).unwrap(),
                    Some(value)
                );
            }
        }
    }

    #[test]
    fn absent_rating_is_none() {
        let model = toy_model();
        let u = model.user_index_of("4").unwrap();
        let i = model.item_index_of("A").unwrap();
        assert_eq!(model.training_rating(u, i).unwrap(), None);
    }

    #[test]
    fn out_of_range_lookup_errors() {
        let model = toy_model();
        let err = model.training_rating(99, 0).unwrap_err();
        assert!(matches!(err, CfError::OutOfBounds { kind: "user", .. }));
        let err = model.training_rating(0, 99).unwrap_err();
        assert!(matches!(err, CfError::OutOfBounds { kind: "item", .. }));
    }

    #[test]
    fn exhaustive_user_item_cross_check() {
        let model = toy_model();
        for u in 0..model.num_users() {
            for i in 0..model.num_items() {
                let user_side = model.users[u].rating_for(i);
                let item_side = model.items[i].rating_for(u);
                assert_eq!(user_side, item_side, "mismatch at ({u}, {i})");
            }
        }
    }
}
