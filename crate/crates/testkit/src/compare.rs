//! Deep-equality helpers for built models and pipeline outputs.

use cfkit::datamodel::{Profile, RatingsModel, TestProfile};

fn bits(value: f64) -> u64 {
    value.to_bits()
}

fn ratings_equal(a: &[(usize, f64)], b: &[(usize, f64)]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&(ia, va), &(ib, vb))| ia == ib && bits(va) == bits(vb))
}

fn profiles_equal(a: &Profile, b: &Profile) -> bool {
    a.code == b.code
        && a.index == b.index
        && a.test_index == b.test_index
        && ratings_equal(&a.ratings, &b.ratings)
        && bits(a.rating_average) == bits(b.rating_average)
        && bits(a.rating_std_dev) == bits(b.rating_std_dev)
}

fn test_profiles_equal(a: &TestProfile, b: &TestProfile) -> bool {
    a.code == b.code
        && a.index == b.index
        && a.test_index == b.test_index
        && ratings_equal(&a.ratings, &b.ratings)
        && ratings_equal(&a.test_ratings, &b.test_ratings)
        && bits(a.rating_average) == bits(b.rating_average)
        && bits(a.rating_std_dev) == bits(b.rating_std_dev)
}

/// Bitwise deep comparison of two built models (stores excluded: they hold
/// pipeline outputs, not model data).
pub fn models_deeply_equal(a: &RatingsModel, b: &RatingsModel) -> bool {
    a.users.len() == b.users.len()
        && a.items.len() == b.items.len()
        && a.test_users.len() == b.test_users.len()
        && a.test_items.len() == b.test_items.len()
        && bits(a.min_rating) == bits(b.min_rating)
        && bits(a.max_rating) == bits(b.max_rating)
        && a.num_ratings == b.num_ratings
        && a.num_test_ratings == b.num_test_ratings
        && a.split_seed == b.split_seed
        && a.user_code_to_index == b.user_code_to_index
        && a.item_code_to_index == b.item_code_to_index
        && a.users.iter().zip(&b.users).all(|(x, y)| profiles_equal(x, y))
        && a.items.iter().zip(&b.items).all(|(x, y)| profiles_equal(x, y))
        && a
            .test_users
            .iter()
            .zip(&b.test_users)
            .all(|(x, y)| test_profiles_equal(x, y))
        && a
            .test_items
            .iter()
            .zip(&b.test_items)
            .all(|(x, y)| test_profiles_equal(x, y))
}

/// Bitwise equality of optional floats (`None` equals `None`).
pub fn opt_f64_equal(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => bits(x) == bits(y),
        _ => false,
    }
}

/// The multiset of `(user, item, value)` seen from the user side equals the
/// one seen from the item side, exactly.
pub fn duplication_consistent(model: &RatingsModel) -> bool {
    let mut from_users: Vec<(usize, usize, u64)> = model
        .users
        .iter()
        .flat_map(|u| u.ratings.iter().map(move |&(i, v)| (u.index, i, bits(v))))
        .collect();
    let mut from_items: Vec<(usize, usize, u64)> = model
        .items
        .iter()
        .flat_map(|i| i.ratings.iter().map(move |&(u, v)| (u, i.index, bits(v))))
        .collect();
    from_users.sort_unstable();
    from_items.sort_unstable();
    from_users == from_items
}
