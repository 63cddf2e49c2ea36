//! Reusable verification routines comparing the production pipeline
//! against the naive reference. They return `Err(description)` instead of
//! panicking so callers can aggregate results.

use cfkit::datamodel::{RatingTriple, RatingsModel};
use cfkit::knn::{
    aggregation_pass, neighbors_pass, similarity_pass, Aggregation, Metric, Orientation,
    TestEntityAccess,
};
use cfkit::quality::{measure_coverage, measure_mae, measure_precision_recall};

use crate::compare::opt_f64_equal;
use crate::reference::{PredictionMatrix, RefData};

fn fail(message: String) -> Result<(), String> {
    Err(message)
}

/// Runs similarity → neighbors → aggregation on `model` and compares every
/// stage against the reference built from `triples`: similarities,
/// neighbors and predictions bitwise, measures within 1e-12.
#[allow(clippy::too_many_arguments)]
pub fn pipeline_matches_reference(
    triples: &[RatingTriple],
    model: &RatingsModel,
    orientation: Orientation,
    metric: Metric,
    k: usize,
    approach: Aggregation,
    n: usize,
    theta: f64,
    workers: usize,
) -> Result<(), String> {
    let context = format!("{orientation:?}/{metric:?}/k={k}/{approach:?}/workers={workers}");
    let reference = RefData::from_model(triples, model);

    similarity_pass(model, orientation, metric, workers).map_err(|e| e.to_string())?;
    neighbors_pass(model, orientation, k, workers).map_err(|e| e.to_string())?;
    aggregation_pass(model, orientation, approach, workers).map_err(|e| e.to_string())?;

    let ref_similarities = reference.similarity_vectors(orientation, metric);
    let ref_neighbors = reference.neighbor_sets(&ref_similarities, k);
    let ref_predictions: PredictionMatrix =
        reference.predictions(orientation, &ref_similarities, &ref_neighbors, approach);

    let test_entities = orientation.test_entities(model);
    for (tpos, entity) in test_entities.iter().enumerate() {
        let sims = entity.similarity_vector().map_err(|e| e.to_string())?;
        if sims.values.len() != ref_similarities[tpos].len() {
            return fail(format!("{context}: similarity vector length at {tpos}"));
        }
        for (other, (&got, &want)) in sims
            .values
            .iter()
            .zip(&ref_similarities[tpos])
            .enumerate()
        {
            if !opt_f64_equal(got, want) {
                return fail(format!(
                    "{context}: similarity[{tpos}][{other}] = {got:?}, reference {want:?}"
                ));
            }
        }

        let neighbors = entity.neighbor_set().map_err(|e| e.to_string())?;
        if neighbors.neighbors != ref_neighbors[tpos] {
            return fail(format!(
                "{context}: neighbors[{tpos}] = {:?}, reference {:?}",
                neighbors.neighbors, ref_neighbors[tpos]
            ));
        }

        let predictions = entity.predictions().map_err(|e| e.to_string())?;
        for (cpos, (&got, &want)) in predictions
            .entries
            .iter()
            .zip(&ref_predictions[tpos])
            .enumerate()
        {
            if !opt_f64_equal(got, want) {
                return fail(format!(
                    "{context}: prediction[{tpos}][{cpos}] = {got:?}, reference {want:?}"
                ));
            }
        }
    }

    measures_match_reference(&reference, model, orientation, &ref_predictions, n, theta, workers)
        .map_err(|e| format!("{context}: {e}"))
}

fn close(a: Option<f64>, b: Option<f64>, tolerance: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= tolerance,
        _ => false,
    }
}

/// Compares MAE, coverage and precision/recall against the reference
/// (tolerance 1e-12, identical contributor counts).
pub fn measures_match_reference(
    reference: &RefData,
    model: &RatingsModel,
    orientation: Orientation,
    ref_predictions: &PredictionMatrix,
    n: usize,
    theta: f64,
    workers: usize,
) -> Result<(), String> {
    if model.test_users.is_empty() {
        return Ok(());
    }
    let mae = measure_mae(model, orientation, workers).map_err(|e| e.to_string())?;
    let ref_mae = reference.mae(orientation, ref_predictions);
    if !close(mae.value, ref_mae.value, 1e-12) || mae.users_counted != ref_mae.users_counted {
        return fail(format!("mae {mae:?} vs reference {ref_mae:?}"));
    }

    let coverage = measure_coverage(model, orientation, workers).map_err(|e| e.to_string())?;
    let ref_coverage = reference.coverage(orientation, ref_predictions);
    if !close(coverage.value, ref_coverage.value, 1e-12)
        || coverage.users_counted != ref_coverage.users_counted
    {
        return fail(format!("coverage {coverage:?} vs reference {ref_coverage:?}"));
    }

    let pr = measure_precision_recall(model, orientation, n, theta, workers)
        .map_err(|e| e.to_string())?;
    let ref_pr = reference.precision_recall(orientation, ref_predictions, n, theta);
    if !close(pr.precision.value, ref_pr.precision.value, 1e-12)
        || pr.precision.users_counted != ref_pr.precision.users_counted
    {
        return fail(format!(
            "precision {:?} vs reference {:?}",
            pr.precision, ref_pr.precision
        ));
    }
    if !close(pr.recall.value, ref_pr.recall.value, 1e-12)
        || pr.recall.users_counted != ref_pr.recall.users_counted
    {
        return fail(format!(
            "recall {:?} vs reference {:?}",
            pr.recall, ref_pr.recall
        ));
    }
    if !close(pr.f1.value, ref_pr.f1, 1e-12) {
        return fail(format!("f1 {:?} vs reference {:?}", pr.f1, ref_pr.f1));
    }
    Ok(())
}

/// Scalar metric properties on seeded random profile pairs: exact symmetry,
/// range bounds, JMSD bounded by its MSD part, and Pearson shift
/// invariance within 1e-12.
pub fn metric_properties_hold(seed: u64, pairs: usize) -> Result<(), String> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bounds = (1.0, 5.0);

    for case in 0..pairs {
        // Random sorted profiles over a small index universe so overlap is
        // common but not guaranteed.
        let mut draw = |max_len: usize| -> Vec<(usize, f64)> {
            let len = rng.random_range(0..=max_len);
            let mut indices = rand::seq::index::sample(&mut rng, 30, len).into_vec();
            indices.sort_unstable();
            indices
                .into_iter()
                .map(|i| (i, 1.0 + 4.0 * rng.random::<f64>()))
                .collect()
        };
        let a = draw(12);
        let b = draw(12);

        for metric in Metric::ALL {
            let ab = metric.evaluate(&a, &b, bounds);
            let ba = metric.evaluate(&b, &a, bounds);
            if !opt_f64_equal(ab, ba) {
                return fail(format!("case {case}: {metric:?} not symmetric: {ab:?} vs {ba:?}"));
            }
            if let Some(value) = ab {
                let (lo, hi) = match metric {
                    Metric::Correlation => (-1.0, 1.0),
                    _ => (0.0, 1.0),
                };
                if !(lo..=hi).contains(&value) {
                    return fail(format!("case {case}: {metric:?} = {value} out of range"));
                }
            }
        }

        // JMSD never exceeds its MSD part.
        if let (Some(j), Some(m)) = (
            cfkit::knn::jmsd(&a, &b, bounds),
            cfkit::knn::msd(&a, &b, bounds),
        ) {
            if j > m {
                return fail(format!("case {case}: jmsd {j} > msd {m}"));
            }
        }

        // Pearson is invariant to adding a constant to every rating of
        // both profiles.
        let shift = 1.5;
        let shifted = |p: &[(usize, f64)]| -> Vec<(usize, f64)> {
            p.iter().map(|&(i, v)| (i, v + shift)).collect()
        };
        let before = cfkit::knn::pearson(&a, &b);
        let after = cfkit::knn::pearson(&shifted(&a), &shifted(&b));
        match (before, after) {
            (None, None) => {}
            (Some(x), Some(y)) if (x - y).abs() <= 1e-12 => {}
            other => {
                return fail(format!("case {case}: pearson shift changed {other:?}"));
            }
        }
    }
    Ok(())
}

/// Smallest gap between adjacent defined Pearson similarity values across
/// all test users of a model built from `triples`.
///
/// Order-stability checks need fixtures whose similarities are separated by
/// much more than the rounding perturbation a rating shift introduces;
/// profile pairs with only two common items land within an ulp of ±1 and
/// make top-k order genuinely unstable.
pub fn pearson_similarity_separation(
    triples: &[RatingTriple],
    split: &cfkit::datamodel::SplitConfig,
) -> Result<f64, String> {
    let model = cfkit::datamodel::build_model(triples, split).map_err(|e| e.to_string())?;
    similarity_pass(&model, Orientation::UserToUser, Metric::Correlation, 1)
        .map_err(|e| e.to_string())?;
    let mut min_gap = f64::INFINITY;
    for tu in &model.test_users {
        let vector = tu.similarity_vector().map_err(|e| e.to_string())?;
        let mut defined: Vec<f64> = vector.values.iter().flatten().copied().collect();
        defined.sort_by(f64::total_cmp);
        for pair in defined.windows(2) {
            min_gap = min_gap.min(pair[1] - pair[0]);
        }
    }
    Ok(min_gap)
}

/// First seed in `0..limit` whose continuous toy dataset keeps Pearson
/// similarities separated by at least `min_gap` under `split`.
pub fn find_shift_stable_seed(
    users: usize,
    items: usize,
    density: f64,
    split: &cfkit::datamodel::SplitConfig,
    min_gap: f64,
    limit: u64,
) -> Result<u64, String> {
    for seed in 0..limit {
        let triples = crate::gen::toy_triples_continuous(users, items, density, seed);
        if triples.is_empty() {
            continue;
        }
        match pearson_similarity_separation(&triples, split) {
            Ok(gap) if gap > min_gap => return Ok(seed),
            _ => continue,
        }
    }
    Err(format!(
        "no seed below {limit} yields similarity separation above {min_gap}"
    ))
}

/// On a model with continuous ratings, shifting every rating by a constant
/// leaves each test user's Pearson neighbor ORDER unchanged.
pub fn pearson_shift_preserves_neighbor_order(
    triples: &[RatingTriple],
    shift: f64,
    split: &cfkit::datamodel::SplitConfig,
    k: usize,
) -> Result<(), String> {
    use cfkit::datamodel::build_model;

    let shifted: Vec<RatingTriple> = triples
        .iter()
        .map(|t| RatingTriple::new(t.user_code.clone(), t.item_code.clone(), t.value + shift))
        .collect();
    let base = build_model(triples, split).map_err(|e| e.to_string())?;
    let moved = build_model(&shifted, split).map_err(|e| e.to_string())?;

    for model in [&base, &moved] {
        similarity_pass(model, Orientation::UserToUser, Metric::Correlation, 1)
            .map_err(|e| e.to_string())?;
        neighbors_pass(model, Orientation::UserToUser, k, 1).map_err(|e| e.to_string())?;
    }
    for (a, b) in base.test_users.iter().zip(&moved.test_users) {
        let na = a.neighbor_set().map_err(|e| e.to_string())?;
        let nb = b.neighbor_set().map_err(|e| e.to_string())?;
        if na.neighbors != nb.neighbors {
            return fail(format!(
                "neighbor order of {} changed under shift: {:?} vs {:?}",
                a.code, na.neighbors, nb.neighbors
            ));
        }
        let sa = a.similarity_vector().map_err(|e| e.to_string())?;
        let sb = b.similarity_vector().map_err(|e| e.to_string())?;
        for (other, (x, y)) in sa.values.iter().zip(&sb.values).enumerate() {
            match (x, y) {
                (None, None) => {}
                (Some(p), Some(q)) if (p - q).abs() <= 1e-12 => {}
                other_pair => {
                    return fail(format!(
                        "similarity of {} to {other} changed under shift: {other_pair:?}",
                        a.code
                    ));
                }
            }
        }
    }
    Ok(())
}
