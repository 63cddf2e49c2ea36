use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use cfkit::engine::resolve_workers;
use cfkit::knn::{Aggregation, Metric, Orientation};
use cfkit::mf::PmfConfig;
use cfkit::CfError;

use cfkit_cli::config::{
    validate_k_values, validate_measures, ConfigFile, DataConfig, KnnConfig, Measure, MfConfig,
};
use cfkit_cli::experiment::{
    csv_path_for, knn_grids, load_and_build, mf_grids, stats_text,
};

#[derive(Parser)]
#[command(
    name = "cfkit",
    version,
    about = "Collaborative-filtering experiments: dataset stats, KNN and matrix-factorization pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a dataset summary after loading and splitting
    Stats(StatsArgs),
    /// Run a memory-based (k-nearest-neighbors) experiment
    Knn(KnnArgs),
    /// Run a matrix-factorization experiment
    Mf(MfArgs),
}

#[derive(Args)]
struct SharedArgs {
    /// Optional key=value config file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ratings file (lines of user<sep>item<sep>rating)
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Field separator used in the ratings file [default: ::]
    #[arg(long)]
    separator: Option<String>,
    /// Fraction of users held out as test users [default: 0.2]
    #[arg(long = "test-users")]
    test_users: Option<f64>,
    /// Fraction of items held out as test items [default: 0.2]
    #[arg(long = "test-items")]
    test_items: Option<f64>,
    /// Train/test split seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 auto-detects the processor count [default: 0]
    #[arg(long)]
    workers: Option<usize>,
    /// Lower rating bound override (observed minimum when omitted)
    #[arg(long = "min-rating")]
    min_rating: Option<f64>,
    /// Upper rating bound override (observed maximum when omitted)
    #[arg(long = "max-rating")]
    max_rating: Option<f64>,
}

impl SharedArgs {
    fn resolve(&self) -> anyhow::Result<(DataConfig, ConfigFile)> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::empty(),
        };
        let data = DataConfig {
            dataset: file.resolve("dataset", self.dataset.clone(), None)?,
            separator: file.resolve("separator", self.separator.clone(), Some("::".into()))?,
            test_user_fraction: file.resolve("test-users", self.test_users, Some(0.2))?,
            test_item_fraction: file.resolve("test-items", self.test_items, Some(0.2))?,
            seed: file.resolve("seed", self.seed, Some(42))?,
            workers: resolve_workers(file.resolve("workers", self.workers, Some(0))?),
            min_rating: match file.resolve("min-rating", self.min_rating, Some(f64::NAN))? {
                v if v.is_nan() => None,
                v => Some(v),
            },
            max_rating: match file.resolve("max-rating", self.max_rating, Some(f64::NAN))? {
                v if v.is_nan() => None,
                v => Some(v),
            },
        };
        Ok((data, file))
    }
}

#[derive(Args)]
struct MeasureArgs {
    /// Quality measure to report (repeatable): MAE, COVERAGE, PRECISION,
    /// RECALL or F1
    #[arg(long = "measure", value_delimiter = ',')]
    measures: Vec<String>,
    /// Recommendation list size for PRECISION/RECALL/F1
    #[arg(long)]
    n: Option<usize>,
    /// Relevance threshold for PRECISION/RECALL/F1
    #[arg(long)]
    theta: Option<f64>,
    /// Report MAE divided by the rating range
    #[arg(long = "normalize-mae")]
    normalize_mae: bool,
    /// Write each measure's grid as CSV to this path
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl MeasureArgs {
    fn resolve(
        &self,
        file: &ConfigFile,
    ) -> anyhow::Result<(Vec<Measure>, Option<usize>, Option<f64>, bool, Option<PathBuf>)> {
        let measures: Vec<Measure> = file
            .resolve_list("measure", &parse_all::<Measure>(&self.measures)?, None)?;
        let list_size = match file.resolve("n", self.n, Some(0))? {
            0 => None,
            n => Some(n),
        };
        let threshold = match file.resolve("theta", self.theta, Some(f64::NAN))? {
            t if t.is_nan() => None,
            t => Some(t),
        };
        let normalize = file.resolve_switch("normalize-mae", self.normalize_mae)?;
        let csv = match &self.csv {
            Some(path) => Some(path.clone()),
            None => file
                .resolve("csv", None::<String>, Some(String::new()))
                .map(|s| (!s.is_empty()).then(|| PathBuf::from(s)))?,
        };
        validate_measures(&measures, list_size, threshold)?;
        Ok((measures, list_size, threshold, normalize, csv))
    }
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args)]
struct KnnArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Pipeline orientation: user (user-to-user) or item (item-to-item)
    #[arg(long)]
    orientation: Option<String>,
    /// Similarity metric (repeatable): COR, COSINE, MSD or JMSD
    #[arg(long = "metric", value_delimiter = ',')]
    metrics: Vec<String>,
    /// Neighbor counts to sweep, strictly increasing (e.g. 50,100,150)
    #[arg(long = "k", value_delimiter = ',')]
    k_values: Vec<usize>,
    /// Aggregation approach: mean, wmean or dfm
    #[arg(long)]
    aggregation: Option<String>,
    #[command(flatten)]
    measure: MeasureArgs,
}

#[derive(Args)]
struct MfArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Number of latent factors [default: 10]
    #[arg(long)]
    factors: Option<usize>,
    /// SGD learning rate [default: 0.01]
    #[arg(long = "learning-rate")]
    learning_rate: Option<f64>,
    /// L2 regularization weight [default: 0.05]
    #[arg(long)]
    regularization: Option<f64>,
    /// Training epochs [default: 50]
    #[arg(long)]
    epochs: Option<usize>,
    /// Factor initialization / shuffle seed [default: 42]
    #[arg(long = "init-seed")]
    init_seed: Option<u64>,
    #[command(flatten)]
    measure: MeasureArgs,
}

fn parse_all<T>(raw: &[String]) -> anyhow::Result<Vec<T>>
where
    T: std::str::FromStr<Err = CfError>,
{
    raw.iter().map(|s| Ok(s.parse::<T>()?)).collect()
}

fn run_stats(args: StatsArgs) -> anyhow::Result<()> {
    let (data, _) = args.shared.resolve()?;
    let (model, report) = load_and_build(&data)?;
    warn_about(&report);
    print!("{}", stats_text(&model));
    Ok(())
}

fn run_knn(args: KnnArgs) -> anyhow::Result<()> {
    let (data, file) = args.shared.resolve()?;
    let (measures, list_size, threshold, normalize_mae, csv) = args.measure.resolve(&file)?;
    let orientation: Orientation =
        file.resolve("orientation", parse_opt(&args.orientation)?, Some(Orientation::UserToUser))?;
    let metrics: Vec<Metric> = file.resolve_list("metric", &parse_all(&args.metrics)?, None)?;
    let k_values: Vec<usize> = file.resolve_list("k", &args.k_values, None)?;
    validate_k_values(&k_values)?;
    let aggregation: Aggregation = file.resolve(
        "aggregation",
        parse_opt(&args.aggregation)?,
        Some(Aggregation::DeviationFromMean),
    )?;
    if metrics.is_empty() {
        return Err(CfError::InvalidArgument("select at least one metric".into()).into());
    }

    let config = KnnConfig {
        data,
        orientation,
        metrics,
        k_values,
        aggregation,
        measures,
        list_size,
        threshold,
        normalize_mae,
        csv,
    };
    let (model, report) = load_and_build(&config.data)?;
    warn_about(&report);
    let grids = knn_grids(&model, &config)?;
    emit_grids(&grids, config.csv.as_deref())
}

fn run_mf(args: MfArgs) -> anyhow::Result<()> {
    let (data, file) = args.shared.resolve()?;
    let (measures, list_size, threshold, normalize_mae, csv) = args.measure.resolve(&file)?;
    let pmf = PmfConfig {
        factors: file.resolve("factors", args.factors, Some(10))?,
        learning_rate: file.resolve("learning-rate", args.learning_rate, Some(0.01))?,
        regularization: file.resolve("regularization", args.regularization, Some(0.05))?,
        epochs: file.resolve("epochs", args.epochs, Some(50))?,
        init_seed: file.resolve("init-seed", args.init_seed, Some(42))?,
    };
    let config = MfConfig {
        data,
        pmf,
        measures,
        list_size,
        threshold,
        normalize_mae,
        csv,
    };
    let (model, report) = load_and_build(&config.data)?;
    warn_about(&report);
    let grids = mf_grids(&model, &config)?;
    emit_grids(&grids, config.csv.as_deref())
}

fn parse_opt<T>(raw: &Option<String>) -> anyhow::Result<Option<T>>
where
    T: std::str::FromStr<Err = CfError>,
{
    raw.as_deref().map(|s| Ok(s.parse::<T>()?)).transpose()
}

fn warn_about(report: &cfkit::datamodel::LoadReport) {
    if report.duplicates > 0 {
        eprintln!(
            "warning: {} duplicated (user, item) lines; kept the last value of each",
            report.duplicates
        );
    }
    if report.extra_field_lines > 0 {
        eprintln!(
            "warning: ignored a 4th field on {} lines",
            report.extra_field_lines
        );
    }
}

fn emit_grids(grids: &[cfkit::quality::ResultsGrid], csv: Option<&std::path::Path>) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (i, grid) in grids.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        grid.print(&mut out)?;
    }
    if let Some(base) = csv {
        for grid in grids {
            let path = csv_path_for(base, &grid.measure_name, grids.len() > 1);
            grid.export_csv(&path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

/// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 runtime
/// error.
fn exit_code_for(error: &anyhow::Error) -> u8 {
    match error.downcast_ref::<CfError>() {
        Some(CfError::InvalidArgument(_)) | Some(CfError::UnknownGridKey { .. }) => 1,
        Some(CfError::Io { .. })
        | Some(CfError::Parse { .. })
        | Some(CfError::EmptyDataset)
        | Some(CfError::EmptyTestSet)
        | Some(CfError::OutOfBounds { .. }) => 2,
        Some(CfError::Diverged { .. })
        | Some(CfError::ElementFailed { .. })
        | Some(CfError::MissingStep { .. })
        | Some(CfError::WorkerPool(_)) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not failures.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Stats(args) => run_stats(args),
        Command::Knn(args) => run_knn(args),
        Command::Mf(args) => run_mf(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
