//! Scalar similarity metrics over two sorted rating profiles.
//!
//! All metrics operate on the co-rated subset found by a linear
//! merge-intersection of the two sorted rating vectors. They return `None`
//! when the metric is undefined for the pair (too little overlap, zero
//! variance, zero norm); `None` means "no evidence", which downstream
//! neighbor selection treats differently from a low score.

use std::cmp::Ordering;
use std::str::FromStr;

use crate::error::CfError;

/// Similarity metric selector; names follow the CLI spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Pearson correlation over co-rated items (`COR`).
    Correlation,
    /// Cosine of the co-rated value vectors (`COSINE`).
    Cosine,
    /// One minus normalized mean squared difference (`MSD`).
    Msd,
    /// Jaccard overlap times the MSD score (`JMSD`).
    Jmsd,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Correlation, Metric::Cosine, Metric::Msd, Metric::Jmsd];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Correlation => "COR",
            Metric::Cosine => "COSINE",
            Metric::Msd => "MSD",
            Metric::Jmsd => "JMSD",
        }
    }

    /// Applies the metric to two sorted `(counterpart, value)` profiles.
    /// `bounds` are the dataset rating bounds used for MSD normalization.
    pub fn evaluate(
        self,
        a: &[(usize, f64)],
        b: &[(usize, f64)],
        bounds: (f64, f64),
    ) -> Option<f64> {
        match self {
            Metric::Correlation => pearson(a, b),
            Metric::Cosine => cosine(a, b),
            Metric::Msd => msd(a, b, bounds),
            Metric::Jmsd => jmsd(a, b, bounds),
        }
    }
}

impl FromStr for Metric {
    type Err = CfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "COR" => Ok(Metric::Correlation),
            "COSINE" => Ok(Metric::Cosine),
            "MSD" => Ok(Metric::Msd),
            "JMSD" => Ok(Metric::Jmsd),
            other => Err(CfError::InvalidArgument(format!(
                "unknown metric `{other}` (expected COR, COSINE, MSD or JMSD)"
            ))),
        }
    }
}

/// Values co-rated by both profiles, ascending by counterpart index.
pub fn common_ratings(a: &[(usize, f64)], b: &[(usize, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push((a[i].1, b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Pearson correlation with means taken over the co-rated subset.
/// Undefined below 2 common ratings or when either side has zero variance
/// over that subset.
pub fn pearson(a: &[(usize, f64)], b: &[(usize, f64)]) -> Option<f64> {
    let common = common_ratings(a, b);
    if common.len() < 2 {
        return None;
    }
    let n = common.len() as f64;
    let mean_a = common.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_b = common.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for &(x, y) in &common {
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

/// Cosine of the co-rated value vectors. Undefined without common ratings
/// or when either vector has zero norm.
pub fn cosine(a: &[(usize, f64)], b: &[(usize, f64)]) -> Option<f64> {
    let common = common_ratings(a, b);
    if common.is_empty() {
        return None;
    }
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for &(x, y) in &common {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return None;
    }
    Some((dot / (norm_a * norm_b).sqrt()).clamp(-1.0, 1.0))
}

/// `1 − mean((a′ − b′)²)` over common ratings, with values normalized into
/// [0, 1] by the dataset bounds. Undefined without common ratings.
pub fn msd(a: &[(usize, f64)], b: &[(usize, f64)], bounds: (f64, f64)) -> Option<f64> {
    msd_of_common(&common_ratings(a, b), bounds)
}

fn msd_of_common(common: &[(f64, f64)], (min, max): (f64, f64)) -> Option<f64> {
    if common.is_empty() {
        return None;
    }
    let range = max - min;
    let mut sum = 0.0;
    for &(x, y) in common {
        // A degenerate dataset where every rating equals the bounds has no
        // spread to normalize; all differences are zero.
        let d = if range > 0.0 {
            (x - min) / range - (y - min) / range
        } else {
            0.0
        };
        sum += d * d;
    }
    Some((1.0 - sum / common.len() as f64).clamp(0.0, 1.0))
}

/// Jaccard overlap of the rated sets multiplied by the MSD score.
pub fn jmsd(a: &[(usize, f64)], b: &[(usize, f64)], bounds: (f64, f64)) -> Option<f64> {
    let common = common_ratings(a, b);
    let msd_part = msd_of_common(&common, bounds)?;
    let union = (a.len() + b.len() - common.len()) as f64;
    Some(common.len() as f64 / union * msd_part)
}
