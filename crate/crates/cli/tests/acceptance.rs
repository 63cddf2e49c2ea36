//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! 1. Reference experiment reproduction on a 500×800 synthetic dataset
//! 2. Oracle equivalence of every pipeline stage on seeded toy models
//! 3. Byte-identical CSV output across worker counts
//! 4. Factorization numerics (gradients, objective descent, convergence)
//! 5. Data-model invariants across 20 random seeds
//! 6. Metric properties on 1000 randomized profile pairs
//! 7. Coverage monotonicity in k on the reference-experiment fixture

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use cfkit::datamodel::{build_model, RatingsModel, SplitConfig};
use cfkit::knn::{
    aggregation_pass, neighbors_pass, similarity_pass, Aggregation, Metric, Orientation,
};
use cfkit::mf::{single_rating_gradient, train_pmf, PmfConfig};
use cfkit::quality::measure_coverage;
use cfkit_testkit::checks::{
    find_shift_stable_seed, metric_properties_hold, pearson_shift_preserves_neighbor_order,
    pipeline_matches_reference,
};
use cfkit_testkit::compare::{duplication_consistent, models_deeply_equal};
use cfkit_testkit::gen::{
    grid_triples, synthetic_ratings, toy_triples, toy_triples_continuous, write_ratings_file,
};
use tempfile::TempDir;

const FIXTURE_USERS: usize = 500;
const FIXTURE_ITEMS: usize = 800;
const FIXTURE_RATINGS_PER_USER: usize = 100;
const FIXTURE_SEED: u64 = 1234;
const SWEEP_K: [usize; 8] = [50, 100, 150, 200, 250, 300, 350, 400];

/// Writes the MovieLens-100K-shaped synthetic fixture (tab separated, with
/// a timestamp column) into `dir`.
fn write_fixture(dir: &Path) -> PathBuf {
    let triples = synthetic_ratings(
        FIXTURE_USERS,
        FIXTURE_ITEMS,
        FIXTURE_RATINGS_PER_USER,
        FIXTURE_SEED,
    );
    assert_eq!(triples.len(), FIXTURE_USERS * FIXTURE_RATINGS_PER_USER);
    let path = dir.join("synthetic_100k.data");
    write_ratings_file(&path, &triples, "\t", true).unwrap();
    path
}

fn fixture_model() -> RatingsModel {
    let triples = synthetic_ratings(
        FIXTURE_USERS,
        FIXTURE_ITEMS,
        FIXTURE_RATINGS_PER_USER,
        FIXTURE_SEED,
    );
    build_model(
        &triples,
        &SplitConfig {
            test_user_fraction: 0.2,
            test_item_fraction: 0.2,
            seed: 42,
            ..SplitConfig::default()
        },
    )
    .unwrap()
}

fn run_reference_experiment(dataset: &Path, csv: &Path, workers: &str) -> Output {
    let k_list = SWEEP_K
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",");
    Command::new(env!("CARGO_BIN_EXE_cfkit"))
        .args([
            "knn",
            "--dataset",
            dataset.to_str().unwrap(),
            "--separator",
            "\t",
            "--test-users",
            "0.2",
            "--test-items",
            "0.2",
            "--seed",
            "42",
            "--metric",
            "COR,JMSD",
            "--k",
            &k_list,
            "--aggregation",
            "dfm",
            "--measure",
            "MAE",
            "--workers",
            workers,
            "--csv",
            csv.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs")
}

fn parse_grid_csv(path: &Path) -> Vec<(String, Vec<Option<f64>>)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    lines.next().expect("header");
    lines
        .map(|line| {
            let mut fields = line.split(',');
            let key = fields.next().unwrap().to_owned();
            let cells = fields
                .map(|f| (!f.is_empty()).then(|| f.parse::<f64>().unwrap()))
                .collect();
            (key, cells)
        })
        .collect()
}

#[test]
fn criterion_1_reference_experiment_reproduction() {
    let dir = TempDir::new().unwrap();
    let dataset = write_fixture(dir.path());
    let csv = dir.path().join("mae.csv");

    let started = Instant::now();
    let output = run_reference_experiment(&dataset, &csv, "0");
    let elapsed = started.elapsed();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );

    let rows = parse_grid_csv(&csv);
    assert_eq!(rows.len(), 8, "one row per k");
    for (row, (key, cells)) in SWEEP_K.iter().zip(&rows) {
        assert_eq!(&row.to_string(), key);
        assert_eq!(cells.len(), 2, "COR and JMSD columns");
        for cell in cells {
            let value = cell.expect("complete grid");
            assert!(value.is_finite() && (0.0..=4.0).contains(&value), "{value}");
        }
    }
    assert!(
        elapsed.as_secs() < 300,
        "experiment took {elapsed:?}, budget is 5 minutes"
    );
    println!(
        "criterion 1: PASS: complete 8×2 MAE grid, all cells in [0, 4], runtime {:.1?}",
        elapsed
    );
}

#[test]
fn criterion_2_oracle_equivalence_on_toy_models() {
    let shapes = [(8, 9), (14, 11), (20, 20)];
    let mut combos = 0_usize;
    for (seed, &(users, items)) in (5_u64..).zip(&shapes) {
        let triples = toy_triples(users, items, 0.35, seed);
        let model = build_model(
            &triples,
            &SplitConfig {
                test_user_fraction: 0.3,
                test_item_fraction: 0.4,
                seed,
                ..SplitConfig::default()
            },
        )
        .unwrap();
        for orientation in [Orientation::UserToUser, Orientation::ItemToItem] {
            for metric in Metric::ALL {
                for approach in [
                    Aggregation::Mean,
                    Aggregation::WeightedMean,
                    Aggregation::DeviationFromMean,
                ] {
                    for k in [2, 5] {
                        pipeline_matches_reference(
                            &triples, &model, orientation, metric, k, approach, 3, 4.0, 1,
                        )
                        .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
                        combos += 1;
                    }
                }
            }
        }
    }
    println!(
        "criterion 2: PASS: {combos} pipeline configurations match the brute-force reference \
         (similarities/neighbors/predictions bitwise, measures ≤ 1e-12)"
    );
}

#[test]
fn criterion_3_parallel_csv_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let dataset = write_fixture(dir.path());
    let serial_csv = dir.path().join("w1.csv");
    let parallel_csv = dir.path().join("w8.csv");

    let serial = run_reference_experiment(&dataset, &serial_csv, "1");
    assert!(serial.status.success());
    let parallel = run_reference_experiment(&dataset, &parallel_csv, "8");
    assert!(parallel.status.success());

    let serial_bytes = std::fs::read(&serial_csv).unwrap();
    let parallel_bytes = std::fs::read(&parallel_csv).unwrap();
    assert_eq!(serial_bytes, parallel_bytes, "CSV differs across workers");
    assert_eq!(serial.stdout, parallel.stdout, "stdout differs across workers");
    println!(
        "criterion 3: PASS: --workers 8 CSV ({} bytes) byte-identical to --workers 1",
        serial_bytes.len()
    );
}

#[test]
fn criterion_4_pmf_numerics() {
    // Analytic gradient of the single-rating loss vs central differences.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let loss = |p: &[f64], q: &[f64], r: f64, reg: f64| -> f64 {
        let e = r - p.iter().zip(q).map(|(x, y)| x * y).sum::<f64>();
        e * e
            + reg
                * (p.iter().map(|x| x * x).sum::<f64>() + q.iter().map(|x| x * x).sum::<f64>())
    };
    let h = 1e-6;
    for sample in 0..100 {
        let f = rng.random_range(1..=10);
        let p: Vec<f64> = (0..f).map(|_| rng.random_range(0.1..0.9)).collect();
        let q: Vec<f64> = (0..f).map(|_| rng.random_range(0.1..0.9)).collect();
        let r = rng.random_range(1.0..5.0);
        let reg = [0.0, 0.05, 0.5][sample % 3];
        let (grad_p, grad_q) = single_rating_gradient(&p, &q, r, reg);

        // Error measured relative to the sample's gradient scale; the loss
        // is quadratic per coordinate, so central differences are exact up
        // to rounding.
        let scale = grad_p
            .iter()
            .chain(&grad_q)
            .fold(1e-9_f64, |m, g| m.max(g.abs()));
        for k in 0..f {
            let mut p_hi = p.clone();
            let mut p_lo = p.clone();
            p_hi[k] += h;
            p_lo[k] -= h;
            let numeric = (loss(&p_hi, &q, r, reg) - loss(&p_lo, &q, r, reg)) / (2.0 * h);
            assert!(
                (grad_p[k] - numeric).abs() / scale <= 1e-5,
                "sample {sample}, ∂p[{k}]: analytic {} vs numeric {numeric}",
                grad_p[k]
            );
            let mut q_hi = q.clone();
            let mut q_lo = q.clone();
            q_hi[k] += h;
            q_lo[k] -= h;
            let numeric = (loss(&p, &q_hi, r, reg) - loss(&p, &q_lo, r, reg)) / (2.0 * h);
            assert!(
                (grad_q[k] - numeric).abs() / scale <= 1e-5,
                "sample {sample}, ∂q[{k}]: analytic {} vs numeric {numeric}",
                grad_q[k]
            );
        }
    }

    // Training objective non-increasing over the final 50% of 50 epochs on
    // the desk-scale fixture.
    let triples = grid_triples(16, 12);
    let model = build_model(
        &triples,
        &SplitConfig {
            test_user_fraction: 0.25,
            test_item_fraction: 0.25,
            seed: 5,
            ..SplitConfig::default()
        },
    )
    .unwrap();
    let trained = train_pmf(
        &model,
        &PmfConfig {
            factors: 10,
            learning_rate: 0.01,
            regularization: 0.05,
            epochs: 50,
            init_seed: 11,
        },
    )
    .unwrap();
    assert_eq!(trained.epoch_objectives.len(), 50);
    for window in trained.epoch_objectives[25..].windows(2) {
        assert!(
            window[1] <= window[0] + 1e-9,
            "objective rose in the final half: {} -> {}",
            window[0],
            window[1]
        );
    }

    // A 1×1 dataset converges to its single rating.
    let single = build_model(
        &[cfkit::datamodel::RatingTriple::new("u", "i", 2.0)],
        &SplitConfig {
            test_user_fraction: 0.0,
            test_item_fraction: 0.0,
            ..SplitConfig::default()
        },
    )
    .unwrap();
    let fm = train_pmf(
        &single,
        &PmfConfig {
            factors: 1,
            learning_rate: 0.05,
            regularization: 0.0,
            epochs: 400,
            init_seed: 7,
        },
    )
    .unwrap();
    let fitted = fm.predict(0, 0).unwrap();
    assert!((fitted - 2.0).abs() < 1e-3, "fixed point: {fitted}");

    println!(
        "criterion 4: PASS: 100 gradient samples within 1e-5, objective non-increasing over \
         epochs 25..50, 1×1 convergence |p·q − r| = {:.2e}",
        (fitted - 2.0).abs()
    );
}

#[test]
fn criterion_5_data_model_invariants_across_seeds() {
    for seed in 0..20 {
        let triples = toy_triples(15, 12, 0.3, 9000 + seed);
        let split = SplitConfig {
            test_user_fraction: 0.3,
            test_item_fraction: 0.35,
            seed,
            ..SplitConfig::default()
        };
        let model = build_model(&triples, &split).unwrap();

        assert!(duplication_consistent(&model), "seed {seed}");

        // Partition: every de-duplicated triple lands exactly once.
        let unique: std::collections::BTreeMap<(String, String), f64> = triples
            .iter()
            .map(|t| ((t.user_code.clone(), t.item_code.clone()), t.value))
            .collect();
        assert_eq!(
            model.num_ratings + model.num_test_ratings,
            unique.len(),
            "seed {seed}"
        );
        for ((user, item), value) in &unique {
            let u = model.user_index_of(user).unwrap();
            let i = model.item_index_of(item).unwrap();
            let training = model.training_rating(u, i).unwrap();
            let held_out = model.users[u]
                .test_index
                .zip(model.items[i].test_index)
                .and_then(|(tu, ti)| model.test_users[tu].test_rating_for(ti));
            match (training, held_out) {
                (Some(v), None) | (None, Some(v)) => assert_eq!(v, *value, "seed {seed}"),
                other => panic!("seed {seed}: triple ({user}, {item}) stored as {other:?}"),
            }
        }

        let rebuilt = build_model(&triples, &split).unwrap();
        assert!(models_deeply_equal(&model, &rebuilt), "seed {seed}");
    }
    println!(
        "criterion 5: PASS: duplication, partition and rebuild determinism on 20 random seeds"
    );
}

#[test]
fn criterion_6_metric_properties_on_randomized_pairs() {
    metric_properties_hold(31_337, 1000).unwrap();

    let split = SplitConfig {
        test_user_fraction: 0.4,
        test_item_fraction: 0.3,
        seed: 4,
        ..SplitConfig::default()
    };
    let seed = find_shift_stable_seed(18, 14, 0.85, &split, 1e-9, 64).unwrap();
    let triples = toy_triples_continuous(18, 14, 0.85, seed);
    pearson_shift_preserves_neighbor_order(&triples, 1.5, &split, 6).unwrap();

    println!(
        "criterion 6: PASS: symmetry, range bounds, JMSD ≤ MSD and Pearson shift invariance \
         on 1000 randomized pairs; neighbor order stable under shift"
    );
}

#[test]
fn criterion_7_coverage_is_monotone_in_k() {
    let model = fixture_model();
    for metric in [Metric::Correlation, Metric::Jmsd] {
        similarity_pass(&model, Orientation::UserToUser, metric, 8).unwrap();
        let mut previous = -1.0_f64;
        for k in SWEEP_K {
            neighbors_pass(&model, Orientation::UserToUser, k, 8).unwrap();
            aggregation_pass(
                &model,
                Orientation::UserToUser,
                Aggregation::DeviationFromMean,
                8,
            )
            .unwrap();
            let coverage = measure_coverage(&model, Orientation::UserToUser, 8)
                .unwrap()
                .value
                .expect("fixture has predictable users");
            assert!(
                coverage >= previous,
                "{metric:?}: coverage dropped from {previous} to {coverage} at k={k}"
            );
            previous = coverage;
        }
    }
    println!("criterion 7: PASS: coverage non-decreasing across k ∈ 50..400 for COR and JMSD");
}
