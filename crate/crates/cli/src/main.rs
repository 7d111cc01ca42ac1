use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use trackfda::experiment::geojson::{feature_collection, StormExport};
use trackfda::experiment::{
    length_study, repeated_simulation, window_storms, ExperimentConfig, GeoPoint, KRange, ModelSet,
};
use trackfda::ingest::{
    build_matrices, filter_min_length, parse, train_test_split, windows_from_matrices, write_csv, DatasetMatrix,
    InputFormat, StormRecordSet, TrajectoryWindow,
};
use trackfda::regression::DEFAULT_RIDGE;

mod manifest;

use manifest::RunManifest;

const LAT_FILE: &str = "lat.csv";
const LON_FILE: &str = "lon.csv";
const MODELS_FILE: &str = "models.json";

#[derive(Parser, Debug)]
#[command(
    name = "trackfda",
    version,
    about = "Functional regression forecasts of tropical-cyclone tracks"
)]
struct Cli {
    /// Worker threads (default: number of processors). Affects wall time only.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a best-track file and write latitude/longitude data matrices.
    Ingest(IngestArgs),
    /// Fit global or cluster-pair models and save them as JSON.
    Fit(FitArgs),
    /// Forecast storms with saved models and write GeoJSON.
    Predict(PredictArgs),
    /// Repeated cluster-grid experiment: CSV table, JSON report.
    Grid(GridArgs),
    /// Error by trajectory length and data size.
    LengthStudy(LengthStudyArgs),
    /// Convert a best-track file to the CSV trajectory format.
    Export(ExportArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Rsmc,
    Csv,
}

impl From<Format> for InputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Rsmc => InputFormat::Rsmc,
            Format::Csv => InputFormat::Csv,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Best-track file (RSMC) or CSV trajectory file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Rsmc)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
struct WindowArgs {
    /// Window length L (observations per trajectory).
    #[arg(long, default_value_t = 32)]
    total_len: usize,
    /// Predictor length P; the last L - P points are forecast.
    #[arg(long, default_value_t = 24)]
    predictor_len: usize,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Predictor basis dimension.
    #[arg(long, default_value_t = 12)]
    k_t: usize,
    /// Response basis dimension.
    #[arg(long, default_value_t = 6)]
    k_s: usize,
    /// B-spline order (4 = cubic).
    #[arg(long, default_value_t = 4)]
    basis_order: usize,
    /// Ridge penalty on the coefficient surface.
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
    /// Ridge used when representing predictor segments.
    #[arg(long, default_value_t = 0.0)]
    fit_ridge: f64,
}

#[derive(Args, Debug, Clone)]
struct SplitArgs {
    /// Fraction of storms used for training.
    #[arg(long, default_value_t = 0.8)]
    train_ratio: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct ClusterArgs {
    /// Minimum training storms for a pair or cluster model.
    #[arg(long, default_value_t = 15)]
    min_cluster_size: usize,
    #[arg(long, default_value_t = 100)]
    kmeans_max_iter: usize,
    #[arg(long, default_value_t = 10)]
    kmeans_restarts: usize,
}

#[derive(Args, Debug, Clone)]
struct GridRangeArgs {
    /// Latitude cluster counts, `N` or `MIN..MAX`.
    #[arg(long, default_value = "1..10", value_parser = parse_k_range)]
    k_lat: KRange,
    /// Longitude cluster counts, `N` or `MIN..MAX`.
    #[arg(long, default_value = "1..10", value_parser = parse_k_range)]
    k_lon: KRange,
    #[arg(long, visible_alias = "reps", default_value_t = 10)]
    n_repetitions: usize,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Keep storms with at least this many records (never fewer than L).
    #[arg(long, default_value_t = 32)]
    min_len: usize,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Directory written by `ingest`.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    cluster: ClusterArgs,
    /// Latitude clusters (1 with --k-lon 1 fits the global model only).
    #[arg(long, default_value_t = 1)]
    k_lat: usize,
    #[arg(long, default_value_t = 1)]
    k_lon: usize,
    /// Train on every storm instead of the seeded training split.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// `models.json` written by `fit`.
    #[arg(long)]
    models: PathBuf,
    /// Directory written by `ingest` (every storm has a truth segment).
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    data: Option<PathBuf>,
    /// Best-track or CSV file; storms shorter than L are forecast without truth.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Rsmc)]
    format: Format,
    /// Storm ids to forecast (repeatable; default: all).
    #[arg(long = "storm")]
    storms: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Directory written by `ingest`.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    cluster: ClusterArgs,
    #[command(flatten)]
    grid: GridRangeArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LengthStudyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Window lengths; the response length L - P stays fixed.
    #[arg(long, value_delimiter = ',', default_value = "32,40,48")]
    lengths: Vec<usize>,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    cluster: ClusterArgs,
    #[command(flatten)]
    grid: GridRangeArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Keep storms with at least this many records.
    #[arg(long, default_value_t = 1)]
    min_len: usize,
    #[arg(long)]
    out: PathBuf,
}

fn parse_k_range(s: &str) -> Result<KRange, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("'{t}' is not a cluster count"))
    };
    let range = match s.split_once("..") {
        Some((a, b)) => KRange::new(num(a)?, num(b.trim_start_matches('='))?),
        None => KRange::single(num(s)?),
    };
    if range.min == 0 || range.is_empty() {
        return Err(format!("'{s}' must be a non-empty range of counts >= 1"));
    }
    Ok(range)
}

fn build_config(
    window: &WindowArgs,
    model: &ModelArgs,
    split: &SplitArgs,
    cluster: &ClusterArgs,
    grid: Option<&GridRangeArgs>,
) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig {
        total_len: window.total_len,
        predictor_len: window.predictor_len,
        train_ratio: split.train_ratio,
        seed: split.seed,
        k_t: model.k_t,
        k_s: model.k_s,
        basis_order: model.basis_order,
        ridge: model.ridge,
        fit_ridge: model.fit_ridge,
        min_cluster_size: cluster.min_cluster_size,
        kmeans_max_iter: cluster.kmeans_max_iter,
        kmeans_restarts: cluster.kmeans_restarts,
        ..ExperimentConfig::default()
    };
    if let Some(g) = grid {
        c.k_lat = g.k_lat;
        c.k_lon = g.k_lon;
        c.n_repetitions = g.n_repetitions;
    }
    c.validate()?;
    Ok(c)
}

/// Lookup failure: exit code 4.
#[derive(Debug)]
struct UnknownStorm {
    id: String,
    available: Vec<String>,
}

impl std::fmt::Display for UnknownStorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "unknown storm id '{}'; available: {}",
            self.id,
            self.available.join(", ")
        )
    }
}

impl std::error::Error for UnknownStorm {}

fn read_storms(input: &Path, format: Format) -> Result<Vec<StormRecordSet>> {
    let file = File::open(input).map_err(|e| trackfda::Error::io(input, e))?;
    let storms = parse(BufReader::new(file), format.into()).with_context(|| format!("parsing {}", input.display()))?;
    info!("{}: {} storms", input.display(), storms.len());
    Ok(storms)
}

fn create_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| trackfda::Error::io(out, e).into())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| trackfda::Error::io(path, e).into())
}

fn read_matrix(path: &Path) -> Result<DatasetMatrix> {
    let file = File::open(path).map_err(|e| trackfda::Error::io(path, e))?;
    DatasetMatrix::read_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn load_windows(data: &Path, total_len: usize, predictor_len: usize) -> Result<Vec<TrajectoryWindow>> {
    let lat = read_matrix(&data.join(LAT_FILE))?;
    let lon = read_matrix(&data.join(LON_FILE))?;
    if lat.n_points() != total_len {
        return Err(trackfda::Error::InvalidArgument(format!(
            "{} holds windows of length {}, but --total-len is {total_len}",
            data.display(),
            lat.n_points()
        ))
        .into());
    }
    Ok(windows_from_matrices(&lat, &lon, predictor_len)?)
}

fn data_inputs(data: &Path) -> Vec<String> {
    [LAT_FILE, LON_FILE]
        .iter()
        .map(|f| data.join(f).display().to_string())
        .collect()
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let config = ExperimentConfig {
        total_len: args.window.total_len,
        predictor_len: args.window.predictor_len,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let mut manifest = RunManifest::new(
        "ingest",
        config.clone(),
        vec![args.input.input.display().to_string()],
        &args.out,
    );
    let storms = manifest.time("parse", || read_storms(&args.input.input, args.input.format))?;
    let n_records: usize = storms.iter().map(StormRecordSet::len).sum();
    let min_len = args.min_len.max(config.total_len);
    let windows = manifest.time("window", || {
        let kept = filter_min_length(&storms, min_len);
        window_storms(&kept, config.total_len, config.predictor_len)
    })?;
    let (lat, lon) = build_matrices(&windows)?;
    create_dir(&args.out)?;
    manifest.time("write", || -> Result<()> {
        for (name, m) in [(LAT_FILE, &lat), (LON_FILE, &lon)] {
            let path = args.out.join(name);
            let file = File::create(&path).map_err(|e| trackfda::Error::io(&path, e))?;
            m.write_csv(BufWriter::new(file))?;
        }
        Ok(())
    })?;
    manifest.write()?;
    println!(
        "parsed {} storms ({} records); {} storms with >= {} records written to {}",
        storms.len(),
        n_records,
        windows.len(),
        min_len,
        args.out.display()
    );
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let config = build_config(&args.window, &args.model, &args.split, &args.cluster, None)?;
    let mut manifest = RunManifest::new("fit", config.clone(), data_inputs(&args.data), &args.out);
    let windows = manifest.time("load", || {
        load_windows(&args.data, config.total_len, config.predictor_len)
    })?;
    let (train_idx, test_idx) = if args.all {
        ((0..windows.len()).collect(), Vec::new())
    } else {
        train_test_split(windows.len(), config.train_ratio, config.seed)?
    };
    let train: Vec<&TrajectoryWindow> = train_idx.iter().map(|&i| &windows[i]).collect();
    let training = config.training()?;
    let models = manifest.time("fit", || {
        if args.k_lat == 1 && args.k_lon == 1 {
            ModelSet::fit_global(&train, &training, config.ridge)
        } else {
            ModelSet::fit_clustered(
                &train,
                &training,
                config.ridge,
                args.k_lat,
                args.k_lon,
                config.kmeans_options(config.seed),
                config.min_cluster_size,
            )
        }
    })?;
    create_dir(&args.out)?;
    write_file(&args.out.join(MODELS_FILE), serde_json::to_string_pretty(&models)?)?;
    let ids = |idx: &[usize]| idx.iter().map(|&i| windows[i].storm_id.clone()).collect::<Vec<_>>();
    let split = serde_json::json!({ "train": ids(&train_idx), "test": ids(&test_idx) });
    write_file(&args.out.join("split.json"), serde_json::to_string_pretty(&split)?)?;
    manifest.write()?;
    println!(
        "fitted on {} storms ({} held out); models written to {}",
        train.len(),
        test_idx.len(),
        args.out.join(MODELS_FILE).display()
    );
    Ok(())
}

/// A storm to forecast: its predictor segment and, when known, the truth.
struct Target {
    storm_id: String,
    lat_x: Vec<f64>,
    lon_x: Vec<f64>,
    truth: Option<Vec<GeoPoint>>,
}

fn points(lat: &[f64], lon: &[f64]) -> Vec<GeoPoint> {
    lat.iter().zip(lon).map(|(&a, &b)| GeoPoint::new(a, b)).collect()
}

fn targets_from_storms(storms: &[StormRecordSet], total_len: usize, predictor_len: usize) -> Result<Vec<Target>> {
    storms
        .iter()
        .map(|s| {
            if s.len() >= total_len {
                let w = trackfda::ingest::extract_tail(s, total_len, predictor_len)?;
                return Ok(Target {
                    storm_id: w.storm_id.clone(),
                    lat_x: w.predictor_lat().to_vec(),
                    lon_x: w.predictor_lon().to_vec(),
                    truth: Some(points(w.response_lat(), w.response_lon())),
                });
            }
            if s.len() < predictor_len {
                return Err(trackfda::Error::TooShort {
                    storm_id: s.storm_id.clone(),
                    available: s.len(),
                    required: predictor_len,
                }
                .into());
            }
            let tail = &s.records[s.len() - predictor_len..];
            Ok(Target {
                storm_id: s.storm_id.clone(),
                lat_x: tail.iter().map(|r| r.lat).collect(),
                lon_x: tail.iter().map(|r| r.lon).collect(),
                truth: None,
            })
        })
        .collect()
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let models_file = File::open(&args.models).map_err(|e| trackfda::Error::io(&args.models, e))?;
    let models: ModelSet = serde_json::from_reader(BufReader::new(models_file))
        .map_err(trackfda::Error::from)
        .with_context(|| format!("reading {}", args.models.display()))?;
    let (total_len, predictor_len) = (models.training.total_len, models.training.predictor_len);
    let mut inputs = vec![args.models.display().to_string()];
    let config = ExperimentConfig {
        total_len,
        predictor_len,
        ridge: models.ridge,
        min_cluster_size: models.min_cluster_size,
        ..ExperimentConfig::default()
    };

    // Select storms before windowing so unknown ids fail fast.
    let select = |ids: Vec<String>| -> Result<Vec<usize>> {
        if args.storms.is_empty() {
            return Ok((0..ids.len()).collect());
        }
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        args.storms
            .iter()
            .map(|id| {
                index.get(id.as_str()).copied().ok_or_else(|| {
                    UnknownStorm {
                        id: id.clone(),
                        available: ids.clone(),
                    }
                    .into()
                })
            })
            .collect()
    };

    let targets = if let Some(data) = &args.data {
        inputs.extend(data_inputs(data));
        let windows = load_windows(data, total_len, predictor_len)?;
        let chosen = select(windows.iter().map(|w| w.storm_id.clone()).collect())?;
        chosen
            .into_iter()
            .map(|i| {
                let w = &windows[i];
                Target {
                    storm_id: w.storm_id.clone(),
                    lat_x: w.predictor_lat().to_vec(),
                    lon_x: w.predictor_lon().to_vec(),
                    truth: Some(points(w.response_lat(), w.response_lon())),
                }
            })
            .collect()
    } else {
        let input = args.input.as_ref().expect("clap requires --data or --input");
        inputs.push(input.display().to_string());
        let storms = read_storms(input, args.format)?;
        let chosen = select(storms.iter().map(|s| s.storm_id.clone()).collect())?;
        let picked: Vec<StormRecordSet> = if args.storms.is_empty() {
            filter_min_length(&storms, predictor_len)
        } else {
            chosen.into_iter().map(|i| storms[i].clone()).collect()
        };
        targets_from_storms(&picked, total_len, predictor_len)?
    };

    let mut manifest = RunManifest::new("predict", config, inputs, &args.out);
    let engine = models.engine()?;
    let exports = manifest.time("forecast", || -> Result<Vec<StormExport>> {
        targets
            .iter()
            .map(|t| {
                let f = models.forecast_segments(&engine, &t.storm_id, &t.lat_x, &t.lon_x)?;
                Ok(StormExport {
                    storm_id: t.storm_id.clone(),
                    observed_x: points(&t.lat_x, &t.lon_x),
                    observed_y: t.truth.clone(),
                    predicted_y: f.forecast.points,
                })
            })
            .collect()
    })?;
    let collection = feature_collection(&exports)?;
    create_dir(&args.out)?;
    write_file(
        &args.out.join("forecasts.geojson"),
        serde_json::to_string_pretty(&collection)?,
    )?;
    manifest.write()?;
    for e in &exports {
        match e.avg_dist_km()? {
            Some(d) => println!("{}\t{d:.2} km", e.storm_id),
            None => println!("{}\t-", e.storm_id),
        }
    }
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<()> {
    let config = build_config(&args.window, &args.model, &args.split, &args.cluster, Some(&args.grid))?;
    let mut manifest = RunManifest::new("grid", config.clone(), data_inputs(&args.data), &args.out);
    let windows = manifest.time("load", || {
        load_windows(&args.data, config.total_len, config.predictor_len)
    })?;
    let report = manifest.time("simulate", || repeated_simulation(&windows, &config))?;
    create_dir(&args.out)?;
    write_file(&args.out.join("grid.csv"), report.mean.to_csv())?;
    write_file(&args.out.join("grid_std.csv"), report.std.to_csv())?;
    write_file(&args.out.join("report.json"), report.to_json()?)?;
    manifest.write()?;
    println!("{}", report.summary_line());
    Ok(())
}

fn cmd_length_study(args: LengthStudyArgs) -> Result<()> {
    let config = build_config(&args.window, &args.model, &args.split, &args.cluster, Some(&args.grid))?;
    let mut manifest = RunManifest::new(
        "length-study",
        config.clone(),
        vec![args.input.input.display().to_string()],
        &args.out,
    );
    let storms = manifest.time("parse", || read_storms(&args.input.input, args.input.format))?;
    let report = manifest.time("simulate", || length_study(&storms, &args.lengths, &config))?;
    create_dir(&args.out)?;
    write_file(&args.out.join("length_study.csv"), report.to_csv())?;
    write_file(
        &args.out.join("length_study.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    manifest.write()?;
    for e in &report.entries {
        println!(
            "size={} L={} best k_lat={} k_lon={} mean_km={:.2} global_km={:.2}",
            e.data_size,
            e.total_len,
            e.report.best.k_lat,
            e.report.best.k_lon,
            e.report.best.km,
            e.report.global_mean_km
        );
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let mut manifest = RunManifest::new(
        "export",
        ExperimentConfig::default(),
        vec![args.input.input.display().to_string()],
        &args.out,
    );
    let storms = manifest.time("parse", || read_storms(&args.input.input, args.input.format))?;
    let kept = filter_min_length(&storms, args.min_len);
    create_dir(&args.out)?;
    let path = args.out.join("trajectories.csv");
    let file = File::create(&path).map_err(|e| trackfda::Error::io(&path, e))?;
    write_csv(&kept, BufWriter::new(file))?;
    manifest.write()?;
    println!("{} storms written to {}", kept.len(), path.display());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UnknownStorm>() {
            return 4;
        }
        if let Some(e) = cause.downcast_ref::<trackfda::Error>() {
            return if e.is_numerical() { 3 } else { 2 };
        }
    }
    2
}

/// Context messages down to the first library error, whose message
/// already includes its own causes.
fn describe(err: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for cause in err.chain() {
        parts.push(cause.to_string());
        if cause.is::<trackfda::Error>() || cause.is::<UnknownStorm>() {
            break;
        }
    }
    parts.join(": ")
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!(trackfda::Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Grid(a) => cmd_grid(a),
        Command::LengthStudy(a) => cmd_length_study(a),
        Command::Export(a) => cmd_export(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flag_defaults_match_library_defaults() {
        let cli = Cli::try_parse_from(["trackfda", "grid", "--data", "d", "--out", "o"]).unwrap();
        let Command::Grid(g) = cli.command else { panic!() };
        let c = build_config(&g.window, &g.model, &g.split, &g.cluster, Some(&g.grid)).unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("3").unwrap(), KRange::single(3));
        assert_eq!(parse_k_range("2..7").unwrap(), KRange::new(2, 7));
        assert_eq!(parse_k_range("2..=7").unwrap(), KRange::new(2, 7));
        assert!(parse_k_range("0").is_err());
        assert!(parse_k_range("5..2").is_err());
        assert!(parse_k_range("x").is_err());
    }

    #[test]
    fn exit_codes() {
        let lookup = anyhow::Error::new(UnknownStorm {
            id: "X".into(),
            available: vec!["A".into()],
        });
        assert_eq!(exit_code(&lookup), 4);
        let numerical = anyhow::Error::new(trackfda::Error::Singular("s".into())).context("fitting");
        assert_eq!(exit_code(&numerical), 3);
        assert_eq!(describe(&numerical), "fitting: singular system: s");
        let input = anyhow::Error::new(trackfda::Error::Validation("v".into()));
        assert_eq!(exit_code(&input), 2);
    }
}
