//! Memory-based CF: similarities, neighborhoods and rating aggregation.
//!
//! The pipeline runs three passes per test entity, each an engine
//! [`ElementPass`](crate::engine::ElementPass) writing its result into the
//! entity's store:
//!
//! 1. [`similarity_pass`] → [`SimilarityVector`] under `"SIMILARITIES"`
//! 2. [`neighbors_pass`] → [`NeighborSet`] under `"NEIGHBORS"`
//! 3. [`aggregation_pass`] → [`PredictionVector`] under `"PREDICTIONS"`
//!
//! Both orientations share the same code: user-to-user passes run over test
//! users against the users array, item-to-item passes over test items
//! against the items array. Only training ratings feed the similarity
//! computation.

mod aggregation;
mod metrics;
mod neighbors;
mod similarity;

pub use aggregation::{aggregation_pass, Aggregation};
pub use metrics::{common_ratings, cosine, jmsd, msd, pearson, Metric};
pub use neighbors::{neighbors_pass, select_neighbors};
pub use similarity::similarity_pass;

use std::str::FromStr;
use std::sync::Arc;

use crate::datamodel::{Profile, RatingsModel, TestProfile};
use crate::engine::PassTarget;
use crate::error::{CfError, Result};

/// Store key for [`SimilarityVector`] payloads.
pub const KEY_SIMILARITIES: &str = "SIMILARITIES";
/// Store key for [`NeighborSet`] payloads.
pub const KEY_NEIGHBORS: &str = "NEIGHBORS";
/// Store key for [`PredictionVector`] payloads.
pub const KEY_PREDICTIONS: &str = "PREDICTIONS";

/// Which axis a memory-based pipeline works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Test users against the users array; predictions per test item.
    UserToUser,
    /// Test items against the items array; predictions per test user.
    ItemToItem,
}

impl Orientation {
    /// Entities on the compared axis.
    pub fn entities(self, model: &RatingsModel) -> &[Profile] {
        match self {
            Orientation::UserToUser => &model.users,
            Orientation::ItemToItem => &model.items,
        }
    }

    /// Test entities the pipeline iterates over.
    pub fn test_entities(self, model: &RatingsModel) -> &[TestProfile] {
        match self {
            Orientation::UserToUser => &model.test_users,
            Orientation::ItemToItem => &model.test_items,
        }
    }

    /// Test entities on the opposite axis (the prediction targets).
    pub fn counterpart_test_entities(self, model: &RatingsModel) -> &[TestProfile] {
        match self {
            Orientation::UserToUser => &model.test_items,
            Orientation::ItemToItem => &model.test_users,
        }
    }

    /// Engine target for passes over the test entities of this axis.
    pub fn test_target(self) -> PassTarget {
        match self {
            Orientation::UserToUser => PassTarget::TestUsers,
            Orientation::ItemToItem => PassTarget::TestItems,
        }
    }
}

impl FromStr for Orientation {
    type Err = CfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user" => Ok(Orientation::UserToUser),
            "item" => Ok(Orientation::ItemToItem),
            other => Err(CfError::InvalidArgument(format!(
                "unknown orientation `{other}` (expected `user` or `item`)"
            ))),
        }
    }
}

/// Similarity of one test entity against every entity on its axis.
/// `values[i]` is `None` where the metric is undefined; the owner's own
/// slot is always `None` (an entity is never its own neighbor).
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityVector {
    /// Position of the owning entity in the test array.
    pub owner: usize,
    pub values: Vec<Option<f64>>,
}

/// Up to `k` entity indices ordered by descending similarity, ties broken
/// by ascending index. Shorter than `k` only when fewer candidates have a
/// defined similarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSet {
    pub owner: usize,
    pub neighbors: Vec<usize>,
}

/// Predicted ratings of one test entity for each test counterpart
/// (`entries[p]` indexes the counterpart test array).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionVector {
    pub owner: usize,
    pub entries: Vec<Option<f64>>,
}

/// Read access to the pipeline outputs stored on a test entity.
///
/// These accessors are part of the public research surface: any
/// intermediate value computed for a test user or test item stays
/// retrievable after the pass that produced it.
pub trait TestEntityAccess {
    /// Stored similarity with the entity at `other` on the compared axis.
    fn similarity_to(&self, other: usize) -> Result<Option<f64>>;

    /// The full stored similarity vector.
    fn similarity_vector(&self) -> Result<Arc<SimilarityVector>>;

    /// The stored neighbor set.
    fn neighbor_set(&self) -> Result<Arc<NeighborSet>>;

    /// The stored prediction vector.
    fn predictions(&self) -> Result<Arc<PredictionVector>>;

    /// Stored prediction for the counterpart test entity at
    /// `test_position`.
    fn prediction_for(&self, test_position: usize) -> Result<Option<f64>>;
}

impl TestEntityAccess for TestProfile {
    fn similarity_to(&self, other: usize) -> Result<Option<f64>> {
        let vector = self.similarity_vector()?;
        vector
            .values
            .get(other)
            .copied()
            .ok_or(CfError::OutOfBounds {
                kind: "similarity",
                index: other,
                len: vector.values.len(),
            })
    }

    fn similarity_vector(&self) -> Result<Arc<SimilarityVector>> {
        self.store
            .get::<SimilarityVector>(KEY_SIMILARITIES)
            .ok_or(CfError::MissingStep {
                required: KEY_SIMILARITIES,
                producer: "the similarity pass",
            })
    }

    fn neighbor_set(&self) -> Result<Arc<NeighborSet>> {
        self.store
            .get::<NeighborSet>(KEY_NEIGHBORS)
            .ok_or(CfError::MissingStep {
                required: KEY_NEIGHBORS,
                producer: "the neighbors pass",
            })
    }

    fn predictions(&self) -> Result<Arc<PredictionVector>> {
        self.store
            .get::<PredictionVector>(KEY_PREDICTIONS)
            .ok_or(CfError::MissingStep {
                required: KEY_PREDICTIONS,
                producer: "an aggregation or factorization prediction pass",
            })
    }

    fn prediction_for(&self, test_position: usize) -> Result<Option<f64>> {
        let vector = self.predictions()?;
        vector
            .entries
            .get(test_position)
            .copied()
            .ok_or(CfError::OutOfBounds {
                kind: "prediction",
                index: test_position,
                len: vector.entries.len(),
            })
    }
}
