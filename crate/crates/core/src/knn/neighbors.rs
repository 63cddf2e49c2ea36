use crate::datamodel::RatingsModel;
use crate::engine::{run_pass, ElementPass};
use crate::error::{CfError, Result};
use crate::knn::{NeighborSet, Orientation, SimilarityVector, KEY_NEIGHBORS, KEY_SIMILARITIES};

/// Picks the k nearest candidates from a similarity vector: highest
/// similarity first, ties broken by ascending index, undefined entries
/// excluded entirely.
pub fn select_neighbors(similarities: &[Option<f64>], k: usize) -> Vec<usize> {
    let mut candidates: Vec<(usize, f64)> = similarities
        .iter()
        .enumerate()
        .filter_map(|(index, sim)| sim.map(|value| (index, value)))
        .collect();
    candidates.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    candidates.truncate(k);
    candidates.into_iter().map(|(index, _)| index).collect()
}

/// Builds each test entity's `"NEIGHBORS"` set from its stored similarity
/// vector. Fails with a pipeline-order error when the similarity pass has
/// not run.
pub fn neighbors_pass(
    model: &RatingsModel,
    orientation: Orientation,
    k: usize,
    workers: usize,
) -> Result<()> {
    if k == 0 {
        return Err(CfError::InvalidArgument("k must be >= 1".into()));
    }
    let mut pass = NeighborsPass { orientation, k };
    run_pass(model, orientation.test_target(), &mut pass, workers)
}

struct NeighborsPass {
    orientation: Orientation,
    k: usize,
}

impl ElementPass for NeighborsPass {
    fn per_element(&self, model: &RatingsModel, index: usize) -> Result<()> {
        let entity = &self.orientation.test_entities(model)[index];
        let similarities = entity
            .store
            .get::<SimilarityVector>(KEY_SIMILARITIES)
            .ok_or(CfError::MissingStep {
                required: KEY_SIMILARITIES,
                producer: "the similarity pass",
            })?;
        let neighbors = select_neighbors(&similarities.values, self.k);
        entity.store.put(
            KEY_NEIGHBORS,
            NeighborSet {
                owner: index,
                neighbors,
            },
        );
        Ok(())
    }
}
