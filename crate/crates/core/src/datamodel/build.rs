use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datamodel::{Profile, RatingTriple, RatingsModel, Store, TestProfile};
use crate::error::{CfError, Result};

/// Train/test split parameters for [`build_model`].
#[derive(Debug, Clone)]
pub struct SplitConfig {
    /// Fraction of users drawn (uniformly, without replacement) as test
    /// users.
    pub test_user_fraction: f64,
    /// Fraction of items drawn as test items.
    pub test_item_fraction: f64,
    pub seed: u64,
    /// Override for the lower rating bound; observed minimum when `None`.
    pub min_rating: Option<f64>,
    /// Override for the upper rating bound; observed maximum when `None`.
    pub max_rating: Option<f64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_user_fraction: 0.2,
            test_item_fraction: 0.2,
            seed: 42,
            min_rating: None,
            max_rating: None,
        }
    }
}

/// Builds the in-memory model from rating triples.
///
/// Distinct user and item codes are sorted lexicographically to assign
/// indices, so the model is independent of file order. `⌊fraction × count⌋`
/// users (then items) are sampled as test entities from a ChaCha stream
/// seeded with `config.seed`. A rating is held out as a test rating iff its
/// user is a test user AND its item is a test item; everything else stays in
/// the training profiles. Duplicate `(user, item)` pairs collapse to the
/// last occurrence.
pub fn build_model(triples: &[RatingTriple], config: &SplitConfig) -> Result<RatingsModel> {
    if triples.is_empty() {
        return Err(CfError::EmptyDataset);
    }
    for fraction in [config.test_user_fraction, config.test_item_fraction] {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(CfError::InvalidArgument(format!(
                "test fraction {fraction} outside [0, 1]"
            )));
        }
    }
    if let Some(t) = triples.iter().find(|t| !t.value.is_finite()) {
        return Err(CfError::InvalidArgument(format!(
            "rating ({}, {}) is not finite",
            t.user_code, t.item_code
        )));
    }

    // Index assignment: lexicographic by code.
    let mut user_codes: Vec<&str> = triples.iter().map(|t| t.user_code.as_str()).collect();
    user_codes.sort_unstable();
    user_codes.dedup();
    let mut item_codes: Vec<&str> = triples.iter().map(|t| t.item_code.as_str()).collect();
    item_codes.sort_unstable();
    item_codes.dedup();

    let user_code_to_index: std::collections::HashMap<String, usize> = user_codes
        .iter()
        .enumerate()
        .map(|(idx, code)| (code.to_string(), idx))
        .collect();
    let item_code_to_index: std::collections::HashMap<String, usize> = item_codes
        .iter()
        .enumerate()
        .map(|(idx, code)| (code.to_string(), idx))
        .collect();

    // Test entity selection. Users are drawn first, items second, from one
    // seeded stream.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let user_test_index = pick_test_positions(&mut rng, user_codes.len(), config.test_user_fraction);
    let item_test_index = pick_test_positions(&mut rng, item_codes.len(), config.test_item_fraction);

    // Partition ratings. BTreeMaps keep counterpart order sorted and make
    // duplicate pairs collapse to the last inserted value.
    let mut user_training: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); user_codes.len()];
    let mut item_training: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); item_codes.len()];
    let mut user_test: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); user_codes.len()];
    let mut item_test: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); item_codes.len()];

    for t in triples {
        let u = user_code_to_index[&t.user_code];
        let i = item_code_to_index[&t.item_code];
        let held_out = user_test_index[u].is_some() && item_test_index[i].is_some();
        if held_out {
            user_test[u].insert(i, t.value);
            item_test[i].insert(u, t.value);
            // A duplicate line may have previously landed on the training
            // side only if the pair itself moved, which cannot happen within
            // one build; clearing is unnecessary.
        } else {
            user_training[u].insert(i, t.value);
            item_training[i].insert(u, t.value);
        }
    }

    let users: Vec<Profile> = user_codes
        .iter()
        .enumerate()
        .map(|(idx, code)| make_profile(code, idx, &user_training[idx], user_test_index[idx]))
        .collect();
    let items: Vec<Profile> = item_codes
        .iter()
        .enumerate()
        .map(|(idx, code)| make_profile(code, idx, &item_training[idx], item_test_index[idx]))
        .collect();

    let test_users: Vec<TestProfile> = users
        .iter()
        .filter(|p| p.test_index.is_some())
        .map(|p| make_test_profile(p, &user_test[p.index], &item_test_index))
        .collect();
    let test_items: Vec<TestProfile> = items
        .iter()
        .filter(|p| p.test_index.is_some())
        .map(|p| make_test_profile(p, &item_test[p.index], &user_test_index))
        .collect();

    let num_ratings: usize = users.iter().map(|p| p.ratings.len()).sum();
    let num_test_ratings: usize = test_users.iter().map(|p| p.test_ratings.len()).sum();
    debug_assert_eq!(num_ratings, items.iter().map(|p| p.ratings.len()).sum());
    debug_assert_eq!(
        num_test_ratings,
        test_items.iter().map(|p| p.test_ratings.len()).sum()
    );

    let mut observed_min = f64::INFINITY;
    let mut observed_max = f64::NEG_INFINITY;
    for t in triples {
        observed_min = observed_min.min(t.value);
        observed_max = observed_max.max(t.value);
    }
    let min_rating = config.min_rating.unwrap_or(observed_min);
    let max_rating = config.max_rating.unwrap_or(observed_max);
    if min_rating > observed_min || max_rating < observed_max {
        return Err(CfError::InvalidArgument(format!(
            "rating bounds [{min_rating}, {max_rating}] exclude observed values \
             [{observed_min}, {observed_max}]"
        )));
    }

    Ok(RatingsModel {
        users,
        items,
        test_users,
        test_items,
        min_rating,
        max_rating,
        num_ratings,
        num_test_ratings,
        split_seed: config.seed,
        user_code_to_index,
        item_code_to_index,
    })
}

/// Draws `⌊fraction × count⌋` positions uniformly without replacement and
/// returns, per position, its rank in the ascending test array.
fn pick_test_positions(
    rng: &mut ChaCha8Rng,
    count: usize,
    fraction: f64,
) -> Vec<Option<usize>> {
    let amount = (fraction * count as f64).floor() as usize;
    let mut chosen: Vec<usize> = rand::seq::index::sample(rng, count, amount).into_vec();
    chosen.sort_unstable();
    let mut marks = vec![None; count];
    for (rank, position) in chosen.into_iter().enumerate() {
        marks[position] = Some(rank);
    }
    marks
}

fn make_profile(
    code: &str,
    index: usize,
    training: &BTreeMap<usize, f64>,
    test_index: Option<usize>,
) -> Profile {
    let ratings: Vec<(usize, f64)> = training.iter().map(|(&i, &v)| (i, v)).collect();
    let (rating_average, rating_std_dev) = mean_and_std(&ratings);
    Profile {
        code: code.to_owned(),
        index,
        ratings,
        rating_average,
        rating_std_dev,
        test_index,
        store: Store::new(),
    }
}

fn make_test_profile(
    base: &Profile,
    held_out: &BTreeMap<usize, f64>,
    counterpart_test_index: &[Option<usize>],
) -> TestProfile {
    // Counterparts of held-out ratings are test entities by construction,
    // so the position lookup cannot miss.
    let test_ratings: Vec<(usize, f64)> = held_out
        .iter()
        .map(|(&counterpart, &value)| (counterpart_test_index[counterpart].unwrap(), value))
        .collect();
    TestProfile {
        code: base.code.clone(),
        index: base.index,
        test_index: base.test_index.unwrap(),
        ratings: base.ratings.clone(),
        test_ratings,
        rating_average: base.rating_average,
        rating_std_dev: base.rating_std_dev,
        store: Store::new(),
    }
}

/// Mean and population standard deviation of the rating values; NaN for an
/// empty profile.
fn mean_and_std(ratings: &[(usize, f64)]) -> (f64, f64) {
    if ratings.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = ratings.len() as f64;
    let mean = ratings.iter().map(|&(_, v)| v).sum::<f64>() / n;
    let var = ratings.iter().map(|&(_, v)| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
