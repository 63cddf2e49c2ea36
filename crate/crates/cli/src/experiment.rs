use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cfkit::datamodel::{build_model, load_dataset, LoadReport, RatingsModel, SplitConfig};
use cfkit::knn::{aggregation_pass, neighbors_pass, similarity_pass, Orientation};
use cfkit::mf::{predictions_pass, train_pmf};
use cfkit::quality::{
    measure_coverage, measure_mae, measure_precision_recall, MeasureScore, ResultsGrid,
};
use cfkit::Result;

use crate::config::{DataConfig, KnnConfig, Measure, MfConfig};

/// Loads the ratings file and builds the split model.
pub fn load_and_build(data: &DataConfig) -> Result<(RatingsModel, LoadReport)> {
    let report = load_dataset(&data.dataset, &data.separator)?;
    let model = build_model(
        &report.triples,
        &SplitConfig {
            test_user_fraction: data.test_user_fraction,
            test_item_fraction: data.test_item_fraction,
            seed: data.seed,
            min_rating: data.min_rating,
            max_rating: data.max_rating,
        },
    )?;
    Ok((model, report))
}

/// One measure evaluation round shared by both pipelines: runs the selected
/// measures on whatever predictions are in the stores and records the
/// scores under `(row, column)` in the per-measure grids.
struct MeasureRound<'a> {
    orientation: Orientation,
    measures: &'a [Measure],
    list_size: Option<usize>,
    threshold: Option<f64>,
    normalize_mae: bool,
    workers: usize,
}

impl MeasureRound<'_> {
    fn record(
        &self,
        model: &RatingsModel,
        grids: &mut [ResultsGrid],
        row: &str,
        column: &str,
    ) -> Result<()> {
        let mut precision_recall = None;
        for (measure, grid) in self.measures.iter().zip(grids.iter_mut()) {
            let score: MeasureScore = match measure {
                Measure::Mae => {
                    let mut score = measure_mae(model, self.orientation, self.workers)?;
                    if self.normalize_mae {
                        let range = model.max_rating - model.min_rating;
                        score.value = score.value.map(|v| v / range);
                    }
                    score
                }
                Measure::Coverage => measure_coverage(model, self.orientation, self.workers)?,
                Measure::Precision | Measure::Recall | Measure::F1 => {
                    if precision_recall.is_none() {
                        precision_recall = Some(measure_precision_recall(
                            model,
                            self.orientation,
                            self.list_size.expect("validated"),
                            self.threshold.expect("validated"),
                            self.workers,
                        )?);
                    }
                    let pr = precision_recall.as_ref().unwrap();
                    match measure {
                        Measure::Precision => pr.precision.clone(),
                        Measure::Recall => pr.recall.clone(),
                        _ => pr.f1.clone(),
                    }
                }
            };
            if let Some(value) = score.value {
                grid.put(row, column, value)?;
            }
        }
        Ok(())
    }
}

/// Runs the full memory-based experiment: per metric one similarity pass,
/// then per k (ascending) neighbor selection, aggregation and every
/// selected measure. Returns one grid per measure, rows keyed by k and
/// columns by metric name.
pub fn run_knn_experiment(config: &KnnConfig) -> Result<Vec<ResultsGrid>> {
    let (model, _) = load_and_build(&config.data)?;
    knn_grids(&model, config)
}

/// The measurement core of [`run_knn_experiment`], reusing an already
/// built model.
pub fn knn_grids(model: &RatingsModel, config: &KnnConfig) -> Result<Vec<ResultsGrid>> {
    let columns: Vec<&str> = config.metrics.iter().map(|m| m.name()).collect();
    let mut grids: Vec<ResultsGrid> = config
        .measures
        .iter()
        .map(|m| ResultsGrid::new(m.name(), "k", config.k_values.iter(), columns.iter()))
        .collect();
    let round = MeasureRound {
        orientation: config.orientation,
        measures: &config.measures,
        list_size: config.list_size,
        threshold: config.threshold,
        normalize_mae: config.normalize_mae,
        workers: config.data.workers,
    };

    for &metric in &config.metrics {
        similarity_pass(model, config.orientation, metric, config.data.workers)?;
        for &k in &config.k_values {
            neighbors_pass(model, config.orientation, k, config.data.workers)?;
            aggregation_pass(model, config.orientation, config.aggregation, config.data.workers)?;
            round.record(model, &mut grids, &k.to_string(), metric.name())?;
        }
    }
    Ok(grids)
}

/// Runs the factorization experiment: training, the prediction pass, then
/// every selected measure. The grid has a single row keyed by the epoch
/// count and one `PMF` column.
pub fn run_mf_experiment(config: &MfConfig) -> Result<Vec<ResultsGrid>> {
    let (model, _) = load_and_build(&config.data)?;
    mf_grids(&model, config)
}

/// The measurement core of [`run_mf_experiment`].
pub fn mf_grids(model: &RatingsModel, config: &MfConfig) -> Result<Vec<ResultsGrid>> {
    let row = config.pmf.epochs.to_string();
    let mut grids: Vec<ResultsGrid> = config
        .measures
        .iter()
        .map(|m| ResultsGrid::new(m.name(), "epochs", [row.as_str()], ["PMF"]))
        .collect();
    let factors = train_pmf(model, &config.pmf)?;
    predictions_pass(model, &factors, config.data.workers)?;
    let round = MeasureRound {
        orientation: Orientation::UserToUser,
        measures: &config.measures,
        list_size: config.list_size,
        threshold: config.threshold,
        normalize_mae: config.normalize_mae,
        workers: config.data.workers,
    };
    round.record(model, &mut grids, &row, "PMF")?;
    Ok(grids)
}

/// Dataset summary for the `stats` subcommand.
pub fn stats_text(model: &RatingsModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "users: {} (test: {})",
        model.num_users(),
        model.num_test_users()
    );
    let _ = writeln!(
        out,
        "items: {} (test: {})",
        model.num_items(),
        model.num_test_items()
    );
    let _ = writeln!(out, "ratings: {}", model.num_ratings);
    let _ = writeln!(out, "test ratings: {}", model.num_test_ratings);
    let _ = writeln!(
        out,
        "rating bounds: [{}, {}]",
        model.min_rating, model.max_rating
    );
    let _ = writeln!(out, "density: {:.4}", model.density());
    let _ = writeln!(out, "split seed: {}", model.split_seed);
    out
}

/// CSV destination for one measure's grid: the configured path as-is for a
/// single measure, `<stem>_<MEASURE>.<ext>` when several were selected.
pub fn csv_path_for(base: &Path, measure: &str, multiple: bool) -> PathBuf {
    if !multiple {
        return base.to_owned();
    }
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{measure}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{measure}"),
    };
    base.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_paths_gain_measure_suffix_only_for_multiple_measures() {
        let base = Path::new("/tmp/out/results.csv");
        assert_eq!(csv_path_for(base, "MAE", false), base);
        assert_eq!(
            csv_path_for(base, "MAE", true),
            Path::new("/tmp/out/results_MAE.csv")
        );
        assert_eq!(
            csv_path_for(Path::new("results"), "F1", true),
            Path::new("results_F1")
        );
    }
}
