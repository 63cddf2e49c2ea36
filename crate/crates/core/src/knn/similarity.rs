use crate::datamodel::RatingsModel;
use crate::engine::{run_pass, ElementPass};
use crate::error::Result;
use crate::knn::{Metric, Orientation, SimilarityVector, KEY_SIMILARITIES};

/// Computes, for every test entity, its similarity against all entities on
/// the same axis (training ratings only) and stores the vector under
/// `"SIMILARITIES"`.
///
/// Entities with no computable similarity end up with an all-`None` vector
/// rather than an error.
pub fn similarity_pass(
    model: &RatingsModel,
    orientation: Orientation,
    metric: Metric,
    workers: usize,
) -> Result<()> {
    let mut pass = SimilarityPass {
        orientation,
        metric,
    };
    run_pass(model, orientation.test_target(), &mut pass, workers)
}

struct SimilarityPass {
    orientation: Orientation,
    metric: Metric,
}

impl ElementPass for SimilarityPass {
    fn per_element(&self, model: &RatingsModel, index: usize) -> Result<()> {
        let entity = &self.orientation.test_entities(model)[index];
        let candidates = self.orientation.entities(model);
        let bounds = model.rating_bounds();
        let values: Vec<Option<f64>> = candidates
            .iter()
            .map(|candidate| {
                if candidate.index == entity.index {
                    None
                } else {
                    self.metric
                        .evaluate(&entity.ratings, &candidate.ratings, bounds)
                }
            })
            .collect();
        entity.store.put(
            KEY_SIMILARITIES,
            SimilarityVector {
                owner: index,
                values,
            },
        );
        Ok(())
    }
}
