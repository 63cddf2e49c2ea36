//! Model-based CF: regularized matrix factorization trained with SGD.
//!
//! Training minimizes the squared reconstruction error of the training
//! ratings plus an L2 penalty on all factor vectors. Updates follow the
//! classic per-rating rule with the pre-update user vector feeding the item
//! update. Training is single-threaded and fully determined by its
//! arguments; only the read-only prediction pass parallelizes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datamodel::RatingsModel;
use crate::engine::{run_pass, ElementPass, PassTarget};
use crate::error::{CfError, Result};
use crate::knn::{PredictionVector, KEY_PREDICTIONS};

/// Hyperparameters for [`train_pmf`].
#[derive(Debug, Clone, PartialEq)]
pub struct PmfConfig {
    /// Number of latent factors per entity.
    pub factors: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    /// Seed for factor initialization and the per-epoch rating shuffle.
    pub init_seed: u64,
}

impl Default for PmfConfig {
    fn default() -> Self {
        Self {
            factors: 10,
            learning_rate: 0.01,
            regularization: 0.05,
            epochs: 50,
            init_seed: 42,
        }
    }
}

/// Learned latent factors for every user and item.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub user_factors: Vec<Vec<f64>>,
    pub item_factors: Vec<Vec<f64>>,
    pub config: PmfConfig,
    /// Regularized training objective evaluated at the end of each epoch.
    pub epoch_objectives: Vec<f64>,
}

impl FactorModel {
    pub fn num_factors(&self) -> usize {
        self.config.factors
    }

    /// Trained factor vector of a user; part of the public research
    /// surface.
    pub fn user_factors(&self, user_index: usize) -> Result<&[f64]> {
        self.user_factors
            .get(user_index)
            .map(Vec::as_slice)
            .ok_or(CfError::OutOfBounds {
                kind: "user",
                index: user_index,
                len: self.user_factors.len(),
            })
    }

    /// Trained factor vector of an item.
    pub fn item_factors(&self, item_index: usize) -> Result<&[f64]> {
        self.item_factors
            .get(item_index)
            .map(Vec::as_slice)
            .ok_or(CfError::OutOfBounds {
                kind: "item",
                index: item_index,
                len: self.item_factors.len(),
            })
    }

    /// Raw predicted score: the user/item factor dot product, unclamped.
    pub fn predict(&self, user_index: usize, item_index: usize) -> Result<f64> {
        Ok(dot(
            self.user_factors(user_index)?,
            self.item_factors(item_index)?,
        ))
    }

    /// Prediction clamped into `bounds`, as consumed by quality measures.
    pub fn predict_clamped(
        &self,
        user_index: usize,
        item_index: usize,
        bounds: (f64, f64),
    ) -> Result<f64> {
        Ok(self.predict(user_index, item_index)?.clamp(bounds.0, bounds.1))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws initial factor matrices with every entry uniform in (0, 0.1].
pub fn init_factors(
    num_users: usize,
    num_items: usize,
    factors: usize,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = draw_factors(&mut rng, num_users, factors);
    let items = draw_factors(&mut rng, num_items, factors);
    (users, items)
}

fn draw_factors(rng: &mut ChaCha8Rng, count: usize, factors: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            (0..factors)
                .map(|_| 0.1 * (1.0 - rand::Rng::random::<f64>(rng)))
                .collect()
        })
        .collect()
}

/// One SGD update for a single rating. The item update uses the pre-update
/// user vector.
pub fn sgd_step(
    user: &mut [f64],
    item: &mut [f64],
    rating: f64,
    learning_rate: f64,
    regularization: f64,
) {
    let error = rating - dot(user, item);
    for (p, q) in user.iter_mut().zip(item.iter_mut()) {
        let p_before = *p;
        *p += learning_rate * (error * *q - regularization * *p);
        *q += learning_rate * (error * p_before - regularization * *q);
    }
}

/// Analytic gradient of the single-rating loss
/// `(r − p·q)² + λ(‖p‖² + ‖q‖²)` with respect to `p` and `q`.
pub fn single_rating_gradient(
    user: &[f64],
    item: &[f64],
    rating: f64,
    regularization: f64,
) -> (Vec<f64>, Vec<f64>) {
    let error = rating - dot(user, item);
    let grad_user = user
        .iter()
        .zip(item)
        .map(|(p, q)| -2.0 * error * q + 2.0 * regularization * p)
        .collect();
    let grad_item = user
        .iter()
        .zip(item)
        .map(|(p, q)| -2.0 * error * p + 2.0 * regularization * q)
        .collect();
    (grad_user, grad_item)
}

/// Regularized training objective
/// `Σ (r − p·q)² + λ(Σ‖p‖² + Σ‖q‖²)`, folded in a fixed order (users
/// ascending, each profile's ratings ascending).
pub fn objective(
    model: &RatingsModel,
    user_factors: &[Vec<f64>],
    item_factors: &[Vec<f64>],
    regularization: f64,
) -> f64 {
    let mut total = 0.0;
    for user in &model.users {
        for &(item_index, rating) in &user.ratings {
            let error = rating - dot(&user_factors[user.index], &item_factors[item_index]);
            total += error * error;
        }
    }
    let mut penalty = 0.0;
    for vector in user_factors.iter().chain(item_factors) {
        penalty += vector.iter().map(|x| x * x).sum::<f64>();
    }
    total + regularization * penalty
}

/// Trains latent factors on the model's training ratings.
///
/// Each epoch visits every training rating once, in a freshly shuffled
/// order drawn from the seeded stream, and applies [`sgd_step`]. Identical
/// arguments produce identical factor matrices.
pub fn train_pmf(model: &RatingsModel, config: &PmfConfig) -> Result<FactorModel> {
    if config.factors == 0 {
        return Err(CfError::InvalidArgument("factors must be >= 1".into()));
    }
    if !(config.learning_rate > 0.0) {
        return Err(CfError::InvalidArgument(
            "learning rate must be positive".into(),
        ));
    }
    if config.regularization < 0.0 {
        return Err(CfError::InvalidArgument(
            "regularization must be non-negative".into(),
        ));
    }
    if config.epochs == 0 {
        return Err(CfError::InvalidArgument("epochs must be >= 1".into()));
    }

    // One seeded stream drives both initialization and the epoch shuffles.
    let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
    let mut user_factors = draw_factors(&mut rng, model.num_users(), config.factors);
    let mut item_factors = draw_factors(&mut rng, model.num_items(), config.factors);

    let mut training: Vec<(usize, usize, f64)> = model
        .users
        .iter()
        .flat_map(|user| {
            user.ratings
                .iter()
                .map(move |&(item, value)| (user.index, item, value))
        })
        .collect();

    let mut epoch_objectives = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        training.shuffle(&mut rng);
        for &(u, i, rating) in &training {
            sgd_step(
                &mut user_factors[u],
                &mut item_factors[i],
                rating,
                config.learning_rate,
                config.regularization,
            );
        }
        let finite = user_factors
            .iter()
            .chain(&item_factors)
            .all(|v| v.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(CfError::Diverged {
                epoch,
                learning_rate: config.learning_rate,
            });
        }
        let score = objective(model, &user_factors, &item_factors, config.regularization);
        if !score.is_finite() {
            return Err(CfError::Diverged {
                epoch,
                learning_rate: config.learning_rate,
            });
        }
        epoch_objectives.push(score);
    }

    Ok(FactorModel {
        user_factors,
        item_factors,
        config: config.clone(),
        epoch_objectives,
    })
}

/// Fills each test user's `"PREDICTIONS"` vector with clamped factor-model
/// scores for every test item, making the output interchangeable with the
/// memory-based pipeline's.
pub fn predictions_pass(model: &RatingsModel, factors: &FactorModel, workers: usize) -> Result<()> {
    let mut pass = FactorPredictionsPass { factors };
    run_pass(model, PassTarget::TestUsers, &mut pass, workers)
}

struct FactorPredictionsPass<'a> {
    factors: &'a FactorModel,
}

impl ElementPass for FactorPredictionsPass<'_> {
    fn per_element(&self, model: &RatingsModel, index: usize) -> Result<()> {
        let test_user = &model.test_users[index];
        let bounds = model.rating_bounds();
        let entries: Vec<Option<f64>> = model
            .test_items
            .iter()
            .map(|item| {
                self.factors
                    .predict_clamped(test_user.index, item.index, bounds)
                    .map(Some)
            })
            .collect::<Result<_>>()?;
        test_user.store.put(
            KEY_PREDICTIONS,
            PredictionVector {
                owner: index,
                entries,
            },
        );
        Ok(())
    }
}
