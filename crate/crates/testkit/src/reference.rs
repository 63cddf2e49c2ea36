//! Naive reference implementations of the memory-based pipeline and the
//! quality measures, used as oracles.
//!
//! Everything here is built from the raw triples with tree maps keyed by
//! entity code and straightforward nested loops. Arithmetic follows the
//! documented formula evaluation order (co-rated pairs ascending, neighbor
//! order for weighted sums, ascending test order for folds), so pipeline
//! comparisons can assert bitwise equality.

use std::collections::BTreeMap;

use cfkit::datamodel::{RatingTriple, RatingsModel};
use cfkit::knn::{Aggregation, Metric, Orientation};

type CodeProfile = BTreeMap<String, f64>;

/// Raw-data mirror of a built model: training/test partition and profiles
/// reconstructed independently from the triples.
pub struct RefData {
    pub user_codes: Vec<String>,
    pub item_codes: Vec<String>,
    pub test_user_codes: Vec<String>,
    pub test_item_codes: Vec<String>,
    user_profiles: BTreeMap<String, CodeProfile>,
    item_profiles: BTreeMap<String, CodeProfile>,
    /// Held-out ratings keyed by user code, then item code.
    test_by_user: BTreeMap<String, CodeProfile>,
    pub min_rating: f64,
    pub max_rating: f64,
}

/// `matrix[test_position][counterpart_test_position]`.
pub type PredictionMatrix = Vec<Vec<Option<f64>>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefScore {
    pub value: Option<f64>,
    pub users_counted: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPrecisionRecall {
    pub precision: RefScore,
    pub recall: RefScore,
    pub f1: Option<f64>,
}

impl RefData {
    /// Builds the mirror from the raw triples, copying only the test-set
    /// membership and rating bounds from the model.
    pub fn from_model(triples: &[RatingTriple], model: &RatingsModel) -> Self {
        let mut sorted_users: Vec<String> = triples.iter().map(|t| t.user_code.clone()).collect();
        sorted_users.sort();
        sorted_users.dedup();
        let mut sorted_items: Vec<String> = triples.iter().map(|t| t.item_code.clone()).collect();
        sorted_items.sort();
        sorted_items.dedup();

        let test_user_codes: Vec<String> =
            model.test_users.iter().map(|p| p.code.clone()).collect();
        let test_item_codes: Vec<String> =
            model.test_items.iter().map(|p| p.code.clone()).collect();
        let is_test_user =
            |code: &str| test_user_codes.iter().any(|c| c == code);
        let is_test_item =
            |code: &str| test_item_codes.iter().any(|c| c == code);

        // Last occurrence of a duplicated pair wins.
        let mut deduped: BTreeMap<(String, String), f64> = BTreeMap::new();
        for t in triples {
            deduped.insert((t.user_code.clone(), t.item_code.clone()), t.value);
        }

        let mut user_profiles: BTreeMap<String, CodeProfile> = sorted_users
            .iter()
            .map(|c| (c.clone(), CodeProfile::new()))
            .collect();
        let mut item_profiles: BTreeMap<String, CodeProfile> = sorted_items
            .iter()
            .map(|c| (c.clone(), CodeProfile::new()))
            .collect();
        let mut test_by_user: BTreeMap<String, CodeProfile> = BTreeMap::new();

        for ((user, item), value) in &deduped {
            if is_test_user(user) && is_test_item(item) {
                test_by_user
                    .entry(user.clone())
                    .or_default()
                    .insert(item.clone(), *value);
            } else {
                user_profiles
                    .get_mut(user)
                    .unwrap()
                    .insert(item.clone(), *value);
                item_profiles
                    .get_mut(item)
                    .unwrap()
                    .insert(user.clone(), *value);
            }
        }

        Self {
            user_codes: sorted_users,
            item_codes: sorted_items,
            test_user_codes,
            test_item_codes,
            user_profiles,
            item_profiles,
            test_by_user,
            min_rating: model.min_rating,
            max_rating: model.max_rating,
        }
    }

    fn entity_codes(&self, orientation: Orientation) -> &[String] {
        match orientation {
            Orientation::UserToUser => &self.user_codes,
            Orientation::ItemToItem => &self.item_codes,
        }
    }

    fn test_codes(&self, orientation: Orientation) -> &[String] {
        match orientation {
            Orientation::UserToUser => &self.test_user_codes,
            Orientation::ItemToItem => &self.test_item_codes,
        }
    }

    fn counterpart_test_codes(&self, orientation: Orientation) -> &[String] {
        match orientation {
            Orientation::UserToUser => &self.test_item_codes,
            Orientation::ItemToItem => &self.test_user_codes,
        }
    }

    fn profile(&self, orientation: Orientation, code: &str) -> &CodeProfile {
        match orientation {
            Orientation::UserToUser => &self.user_profiles[code],
            Orientation::ItemToItem => &self.item_profiles[code],
        }
    }

    pub fn training_value(&self, user: &str, item: &str) -> Option<f64> {
        self.user_profiles.get(user)?.get(item).copied()
    }

    pub fn test_value(&self, user: &str, item: &str) -> Option<f64> {
        self.test_by_user.get(user)?.get(item).copied()
    }

    fn mean(profile: &CodeProfile) -> f64 {
        if profile.is_empty() {
            return f64::NAN;
        }
        profile.values().sum::<f64>() / profile.len() as f64
    }

    /// Scalar metric between two entities on the same axis; `None` on the
    /// owner's own slot.
    pub fn similarity(
        &self,
        orientation: Orientation,
        metric: Metric,
        own: &str,
        other: &str,
    ) -> Option<f64> {
        if own == other {
            return None;
        }
        let a = self.profile(orientation, own);
        let b = self.profile(orientation, other);
        let pairs: Vec<(f64, f64)> = a
            .iter()
            .filter_map(|(code, &x)| b.get(code).map(|&y| (x, y)))
            .collect();
        match metric {
            Metric::Correlation => ref_pearson(&pairs),
            Metric::Cosine => ref_cosine(&pairs),
            Metric::Msd => ref_msd(&pairs, self.min_rating, self.max_rating),
            Metric::Jmsd => {
                let msd = ref_msd(&pairs, self.min_rating, self.max_rating)?;
                let union = (a.len() + b.len() - pairs.len()) as f64;
                Some(pairs.len() as f64 / union * msd)
            }
        }
    }

    /// Full similarity matrix: `[test_position][entity_position]`.
    pub fn similarity_vectors(
        &self,
        orientation: Orientation,
        metric: Metric,
    ) -> Vec<Vec<Option<f64>>> {
        self.test_codes(orientation)
            .iter()
            .map(|own| {
                self.entity_codes(orientation)
                    .iter()
                    .map(|other| self.similarity(orientation, metric, own, other))
                    .collect()
            })
            .collect()
    }

    /// Top-k selection per test entity: descending similarity, ties by
    /// ascending entity position.
    pub fn neighbor_sets(&self, similarities: &[Vec<Option<f64>>], k: usize) -> Vec<Vec<usize>> {
        similarities
            .iter()
            .map(|values| {
                let mut defined: Vec<(usize, f64)> = values
                    .iter()
                    .enumerate()
                    .filter_map(|(pos, sim)| sim.map(|s| (pos, s)))
                    .collect();
                defined.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                defined.into_iter().take(k).map(|(pos, _)| pos).collect()
            })
            .collect()
    }

    /// Aggregated predictions for every (test entity, counterpart test
    /// entity) pair.
    pub fn predictions(
        &self,
        orientation: Orientation,
        similarities: &[Vec<Option<f64>>],
        neighbors: &[Vec<usize>],
        approach: Aggregation,
    ) -> PredictionMatrix {
        let entity_codes = self.entity_codes(orientation);
        self.test_codes(orientation)
            .iter()
            .enumerate()
            .map(|(tpos, own)| {
                let own_mean = Self::mean(self.profile(orientation, own));
                self.counterpart_test_codes(orientation)
                    .iter()
                    .map(|target| {
                        self.predict_one(
                            orientation,
                            own_mean,
                            &neighbors[tpos],
                            &similarities[tpos],
                            entity_codes,
                            target,
                            approach,
                        )
                    })
                    .collect()
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn predict_one(
        &self,
        orientation: Orientation,
        own_mean: f64,
        neighbors: &[usize],
        similarities: &[Option<f64>],
        entity_codes: &[String],
        target: &str,
        approach: Aggregation,
    ) -> Option<f64> {
        let rating_of = |neighbor: usize| -> Option<f64> {
            let code = &entity_codes[neighbor];
            match orientation {
                Orientation::UserToUser => self.training_value(code, target),
                Orientation::ItemToItem => self.training_value(target, code),
            }
        };
        match approach {
            Aggregation::Mean => {
                let mut sum = 0.0;
                let mut count = 0_usize;
                for &v in neighbors {
                    if let Some(r) = rating_of(v) {
                        sum += r;
                        count += 1;
                    }
                }
                (count > 0).then(|| (sum / count as f64).clamp(self.min_rating, self.max_rating))
            }
            Aggregation::WeightedMean => {
                let mut weighted = 0.0;
                let mut weight = 0.0;
                let mut any = false;
                for &v in neighbors {
                    let sim = similarities[v].unwrap();
                    if sim <= 0.0 {
                        continue;
                    }
                    if let Some(r) = rating_of(v) {
                        weighted += sim * r;
                        weight += sim;
                        any = true;
                    }
                }
                any.then(|| (weighted / weight).clamp(self.min_rating, self.max_rating))
            }
            Aggregation::DeviationFromMean => {
                let mut weighted = 0.0;
                let mut weight = 0.0;
                let mut any = false;
                for &v in neighbors {
                    let sim = similarities[v].unwrap();
                    if sim <= 0.0 {
                        continue;
                    }
                    if let Some(r) = rating_of(v) {
                        let neighbor_mean =
                            Self::mean(self.profile(orientation, &entity_codes[v]));
                        weighted += sim * (r - neighbor_mean);
                        weight += sim;
                        any = true;
                    }
                }
                if !any {
                    return None;
                }
                let raw = own_mean + weighted / weight;
                raw.is_finite()
                    .then(|| raw.clamp(self.min_rating, self.max_rating))
            }
        }
    }

    fn prediction_of(
        &self,
        orientation: Orientation,
        predictions: &PredictionMatrix,
        tu_pos: usize,
        ti_pos: usize,
    ) -> Option<f64> {
        match orientation {
            Orientation::UserToUser => predictions[tu_pos][ti_pos],
            Orientation::ItemToItem => predictions[ti_pos][tu_pos],
        }
    }

    /// Macro-averaged MAE over test users with at least one defined
    /// prediction.
    pub fn mae(&self, orientation: Orientation, predictions: &PredictionMatrix) -> RefScore {
        let mut sum = 0.0;
        let mut contributors = 0_usize;
        for (tu_pos, user) in self.test_user_codes.iter().enumerate() {
            let mut error = 0.0;
            let mut defined = 0_usize;
            for (ti_pos, item) in self.test_item_codes.iter().enumerate() {
                let Some(rating) = self.test_value(user, item) else {
                    continue;
                };
                if let Some(pred) = self.prediction_of(orientation, predictions, tu_pos, ti_pos) {
                    error += (pred - rating).abs();
                    defined += 1;
                }
            }
            if defined > 0 {
                sum += error / defined as f64;
                contributors += 1;
            }
        }
        RefScore {
            value: (contributors > 0).then(|| sum / contributors as f64),
            users_counted: contributors,
        }
    }

    /// Macro-averaged coverage over test users with held-out ratings.
    pub fn coverage(&self, orientation: Orientation, predictions: &PredictionMatrix) -> RefScore {
        let mut sum = 0.0;
        let mut contributors = 0_usize;
        for (tu_pos, user) in self.test_user_codes.iter().enumerate() {
            let mut defined = 0_usize;
            let mut total = 0_usize;
            for (ti_pos, item) in self.test_item_codes.iter().enumerate() {
                if self.test_value(user, item).is_none() {
                    continue;
                }
                total += 1;
                if self
                    .prediction_of(orientation, predictions, tu_pos, ti_pos)
                    .is_some()
                {
                    defined += 1;
                }
            }
            if total > 0 {
                sum += defined as f64 / total as f64;
                contributors += 1;
            }
        }
        RefScore {
            value: (contributors > 0).then(|| sum / contributors as f64),
            users_counted: contributors,
        }
    }

    /// Top-`n` precision/recall at relevance threshold `theta`.
    pub fn precision_recall(
        &self,
        orientation: Orientation,
        predictions: &PredictionMatrix,
        n: usize,
        theta: f64,
    ) -> RefPrecisionRecall {
        let mut precision_sum = 0.0;
        let mut precision_users = 0_usize;
        let mut recall_sum = 0.0;
        let mut recall_users = 0_usize;
        for (tu_pos, user) in self.test_user_codes.iter().enumerate() {
            let mut scored: Vec<(usize, f64)> = Vec::new();
            let mut relevant = 0_usize;
            for (ti_pos, item) in self.test_item_codes.iter().enumerate() {
                let Some(rating) = self.test_value(user, item) else {
                    continue;
                };
                if rating >= theta {
                    relevant += 1;
                }
                if let Some(pred) = self.prediction_of(orientation, predictions, tu_pos, ti_pos) {
                    scored.push((ti_pos, pred));
                }
            }
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            scored.truncate(n);
            let hits = scored
                .iter()
                .filter(|&&(ti_pos, _)| {
                    self.test_value(user, &self.test_item_codes[ti_pos])
                        .is_some_and(|r| r >= theta)
                })
                .count();
            if !scored.is_empty() {
                precision_sum += hits as f64 / scored.len() as f64;
                precision_users += 1;
            }
            if relevant > 0 {
                recall_sum += hits as f64 / relevant as f64;
                recall_users += 1;
            }
        }
        let precision = (precision_users > 0).then(|| precision_sum / precision_users as f64);
        let recall = (recall_users > 0).then(|| recall_sum / recall_users as f64);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        RefPrecisionRecall {
            precision: RefScore {
                value: precision,
                users_counted: precision_users,
            },
            recall: RefScore {
                value: recall,
                users_counted: recall_users,
            },
            f1,
        }
    }
}

fn ref_pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mean_a = pairs.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_b = pairs.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for &(x, y) in pairs {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return None;
    }
    Some((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0))
}

fn ref_cosine(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for &(x, y) in pairs {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return None;
    }
    Some((dot / (norm_a * norm_b).sqrt()).clamp(-1.0, 1.0))
}

fn ref_msd(pairs: &[(f64, f64)], min: f64, max: f64) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let range = max - min;
    let mut sum = 0.0;
    for &(x, y) in pairs {
        let d = if range > 0.0 {
            (x - min) / range - (y - min) / range
        } else {
            0.0
        };
        sum += d * d;
    }
    Some((1.0 - sum / pairs.len() as f64).clamp(0.0, 1.0))
}
