use std::str::FromStr;

use crate::datamodel::{Profile, RatingsModel};
use crate::engine::{run_pass, ElementPass};
use crate::error::{CfError, Result};
use crate::knn::{
    NeighborSet, Orientation, PredictionVector, SimilarityVector, KEY_NEIGHBORS, KEY_PREDICTIONS,
    KEY_SIMILARITIES,
};

/// Rule for turning neighbor ratings into a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Unweighted mean of the neighbors that rated the target.
    Mean,
    /// Similarity-weighted mean over neighbors with positive similarity.
    WeightedMean,
    /// Own mean plus the similarity-weighted average of neighbor
    /// deviations from their means; clamped into the rating bounds.
    DeviationFromMean,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::WeightedMean => "wmean",
            Aggregation::DeviationFromMean => "dfm",
        }
    }
}

impl FromStr for Aggregation {
    type Err = CfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "wmean" => Ok(Aggregation::WeightedMean),
            "dfm" => Ok(Aggregation::DeviationFromMean),
            other => Err(CfError::InvalidArgument(format!(
                "unknown aggregation `{other}` (expected mean, wmean or dfm)"
            ))),
        }
    }
}

/// Fills each test entity's `"PREDICTIONS"` vector over the counterpart
/// test entities, aggregating its stored neighbors' training ratings.
pub fn aggregation_pass(
    model: &RatingsModel,
    orientation: Orientation,
    approach: Aggregation,
    workers: usize,
) -> Result<()> {
    let mut pass = AggregationPass {
        orientation,
        approach,
    };
    run_pass(model, orientation.test_target(), &mut pass, workers)
}

struct AggregationPass {
    orientation: Orientation,
    approach: Aggregation,
}

impl ElementPass for AggregationPass {
    fn per_element(&self, model: &RatingsModel, index: usize) -> Result<()> {
        let entity = &self.orientation.test_entities(model)[index];
        let neighbor_set =
            entity
                .store
                .get::<NeighborSet>(KEY_NEIGHBORS)
                .ok_or(CfError::MissingStep {
                    required: KEY_NEIGHBORS,
                    producer: "the neighbors pass",
                })?;
        // MEAN ignores similarity values; the weighted approaches need them.
        let similarities = match self.approach {
            Aggregation::Mean => None,
            _ => Some(entity.store.get::<SimilarityVector>(KEY_SIMILARITIES).ok_or(
                CfError::MissingStep {
                    required: KEY_SIMILARITIES,
                    producer: "the similarity pass",
                },
            )?),
        };

        let candidates = self.orientation.entities(model);
        let targets = self.orientation.counterpart_test_entities(model);
        let bounds = model.rating_bounds();
        let entries: Vec<Option<f64>> = targets
            .iter()
            .map(|target| {
                predict_from_neighbors(
                    self.approach,
                    entity.rating_average,
                    &neighbor_set.neighbors,
                    similarities.as_deref().map(|s| s.values.as_slice()),
                    candidates,
                    target.index,
                    bounds,
                )
            })
            .collect();
        entity.store.put(
            KEY_PREDICTIONS,
            PredictionVector {
                owner: index,
                entries,
            },
        );
        Ok(())
    }
}

/// Aggregates the neighbors' training ratings of the entity at
/// `target_index`. Returns `None` when no neighbor qualifies.
fn predict_from_neighbors(
    approach: Aggregation,
    own_average: f64,
    neighbors: &[usize],
    similarities: Option<&[Option<f64>]>,
    candidates: &[Profile],
    target_index: usize,
    (min, max): (f64, f64),
) -> Option<f64> {
    // Means of in-range ratings are in range mathematically, but the
    // rounded quotient can overshoot a bound by an ulp; the clamp keeps the
    // range invariant exact for every approach.
    match approach {
        Aggregation::Mean => {
            let mut sum = 0.0;
            let mut count = 0_usize;
            for &v in neighbors {
                if let Some(rating) = candidates[v].rating_for(target_index) {
                    sum += rating;
                    count += 1;
                }
            }
            (count > 0).then(|| (sum / count as f64).clamp(min, max))
        }
        Aggregation::WeightedMean => {
            let similarities = similarities.expect("weighted aggregation carries similarities");
            let mut weighted = 0.0;
            let mut weight = 0.0;
            let mut any = false;
            for &v in neighbors {
                let sim = similarities[v].expect("neighbors have defined similarity");
                if sim <= 0.0 {
                    continue;
                }
                if let Some(rating) = candidates[v].rating_for(target_index) {
                    weighted += sim * rating;
                    weight += sim;
                    any = true;
                }
            }
            any.then(|| (weighted / weight).clamp(min, max))
        }
        Aggregation::DeviationFromMean => {
            let similarities = similarities.expect("weighted aggregation carries similarities");
            let mut weighted = 0.0;
            let mut weight = 0.0;
            let mut any = false;
            for &v in neighbors {
                let sim = similarities[v].expect("neighbors have defined similarity");
                if sim <= 0.0 {
                    continue;
                }
                if let Some(rating) = candidates[v].rating_for(target_index) {
                    weighted += sim * (rating - candidates[v].rating_average);
                    weight += sim;
                    any = true;
                }
            }
            if !any {
                return None;
            }
            let raw = own_average + weighted / weight;
            // A test entity without training ratings has a NaN average; no
            // meaningful deviation-based prediction exists for it.
            raw.is_finite().then(|| raw.clamp(min, max))
        }
    }
}
