//! The `gamechurn` command line: gen, label, features, gaf, train, predict
//! and score, each writing a run manifest next to its outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gamechurn_core::event::EventCatalog;
use gamechurn_core::features::{apply_time_weights, daily_series, parse_families, Quantile, QuantileTransform};
use gamechurn_core::gaf::{gaf_encode, highest_variance_channels, stack_image};
use gamechurn_core::labeling::{
    assign_grades, label_churn, label_survival, make_layout, select_loyal, GradeTable, SurvivalLabel, WindowLayout,
};
use gamechurn_core::models::{classify, fit_logistic, fit_ridge, Model, Target, TrainConfig};
use gamechurn_core::scoring::{final_score, score_submission, Labels, ScoreReport, Submission, Subset};
use gamechurn_core::seed::derive_seed;
use gamechurn_core::synth::{GenConfig, SignalPreset};
use gamechurn_core::time::DEFAULT_EPOCH;
use gamechurn_core::timeline::{PlayerTimeline, DEFAULT_SESSION_GAP_MINUTES};
use gamechurn_core::{Event, Timestamp, WeekGrid};
use serde::Serialize;

use crate::catalog::{load_catalog, write_catalog};
use crate::error::{Error, Result};
use crate::gaf_io::{write_grid_file, DumpFormat};
use crate::labels::{create, read_labels_file, read_loyalty, write_churn_labels, write_survival_labels, write_truth};
use crate::logfile::{format_timestamp, parse_timestamp, read_log_file, write_log_file, ParseMode};
use crate::manifest::RunManifest;
use crate::matrix_io::{read_matrix_file, write_matrix_file};
use crate::model_io::{read_model_file, write_model_file, ModelFile, TargetKind};
use crate::parallel;
use crate::submission::{read_submission_file, write_submission_file};

/// Weeks between the training window start and the two test windows.
pub const TEST1_OFFSET_WEEKS: i64 = 16;
pub const TEST2_OFFSET_WEEKS: i64 = 36;

#[derive(Debug, Parser)]
#[command(name = "gamechurn", version, about = "Churn and survival prediction toolkit for game event logs")]
pub struct Cli {
    /// Worker thread cap; outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat `key = value` file of default flags; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Manifest path, overriding the default next to the outputs.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate train, test1 and test2 synthetic datasets with ground truth.
    Gen(GenArgs),
    /// Compute churn and survival labels for an observation cohort.
    Label(LabelArgs),
    /// Extract the feature matrix of an observation window.
    Features(FeaturesArgs),
    /// Dump a GAF matrix or a stacked activity image for one account.
    Gaf(GafArgs),
    /// Fit a baseline model.
    Train(TrainArgs),
    /// Write a submission from a model and a feature matrix.
    Predict(PredictArgs),
    /// Score submissions against labels.
    Score(ScoreArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Label(_) => "label",
            Command::Features(_) => "features",
            Command::Gaf(_) => "gaf",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Score(_) => "score",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ParseArgs {
    /// Event catalog CSV; the built-in 20-kind catalog when absent.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Fail on any malformed or unknown row (default).
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    /// Skip malformed rows and keep unknown log ids.
    #[arg(long)]
    pub lenient: bool,
    /// Inactivity gap that splits sessions, in minutes.
    #[arg(long, default_value_t = DEFAULT_SESSION_GAP_MINUTES)]
    pub gap_minutes: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WindowArgs {
    /// Observation start, a Wednesday 00:00 UTC.
    #[arg(long, default_value = "2016-04-06T00:00:00Z")]
    pub obs_start: String,
    #[arg(long, default_value_t = 6)]
    pub obs_weeks: u32,
    #[arg(long, default_value_t = 3)]
    pub gap_weeks: u32,
    #[arg(long, default_value_t = 5)]
    pub churn_weeks: u32,
}

impl WindowArgs {
    pub fn layout(&self) -> Result<WindowLayout> {
        let start = parse_timestamp(&self.obs_start)
            .ok_or_else(|| Error::config(format!("obs-start {:?} is not an ISO-8601 UTC instant", self.obs_start)))?;
        let weeks = i64::from(self.obs_weeks + self.gap_weeks + self.churn_weeks);
        let grid = WeekGrid::new(DEFAULT_EPOCH, start, start.plus_weeks(weeks + 1))?;
        Ok(make_layout(grid, start, self.obs_weeks, self.gap_weeks, self.churn_weeks)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Accounts in the training window.
    #[arg(long, default_value_t = 4000)]
    pub players: usize,
    /// Accounts in each test window; defaults to --players.
    #[arg(long)]
    pub test_players: Option<usize>,
    #[arg(long, default_value_t = 0.30)]
    pub churn_rate: f64,
    #[arg(long, default_value_t = 6)]
    pub obs_weeks: u32,
    #[arg(long, default_value_t = 8)]
    pub test_obs_weeks: u32,
    #[arg(long, default_value_t = 3)]
    pub gap_weeks: u32,
    #[arg(long, default_value_t = 5)]
    pub churn_weeks: u32,
    /// Signal preset: none, weak or strong.
    #[arg(long, default_value = "strong")]
    pub signal: String,
    /// Explicit signal strength in [0, 1], overriding --signal.
    #[arg(long)]
    pub signal_strength: Option<f64>,
    #[arg(long, default_value_t = 1.5)]
    pub weekend_boost: f64,
    #[arg(long, default_value_t = 6.0)]
    pub events_per_day: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct LabelArgs {
    /// Observation log.
    #[arg(long)]
    pub log: PathBuf,
    /// Full history used for the churn window and survival; --log when absent.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Evaluation instant; defaults to the churn window end.
    #[arg(long)]
    pub eval: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub censor_margin_days: i64,
    /// Monthly loyalty inputs `account_id,month,payment,playtime,usage_rate`.
    #[arg(long)]
    pub loyalty: Option<PathBuf>,
    #[arg(long, default_value_t = 14)]
    pub grades: usize,
    #[arg(long, default_value_t = 9)]
    pub loyal_threshold: u8,
    #[arg(long, default_value_t = 3)]
    pub trailing_months: usize,
    #[arg(long, default_value_t = 1)]
    pub min_occurrences: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_churn: PathBuf,
    #[arg(long)]
    pub out_survival: Option<PathBuf>,
    #[command(flatten)]
    pub parse: ParseArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Comma-separated families: daily-stats, overall, weekly, time-weighted, frequency.
    #[arg(long, default_value = "daily-stats,overall,weekly,time-weighted,frequency")]
    pub families: String,
    /// Quantile mapping: off, fit (writes --quantile-map) or apply (reads it).
    #[arg(long, default_value = "off")]
    pub quantile: String,
    #[arg(long)]
    pub quantile_map: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub parse: ParseArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct GafArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long)]
    pub account: String,
    /// Daily channel to encode as an N x N GAF matrix.
    #[arg(long, conflicts_with = "image", required_unless_present = "image")]
    pub channel: Option<String>,
    /// Dump the 13-channel activity image instead.
    #[arg(long)]
    pub image: bool,
    #[arg(long, default_value_t = gamechurn_core::gaf::IMAGE_DAYS)]
    pub days: usize,
    /// Apply 1/(n - i) day weights before encoding.
    #[arg(long)]
    pub time_weighted: bool,
    /// csv or binary.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub parse: ParseArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Churn labels or survival labels.
    #[arg(long)]
    pub labels: PathBuf,
    /// logistic, ridge or extra-trees.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 0.0)]
    pub l1: f64,
    #[arg(long, default_value_t = 0.01)]
    pub l2: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub trees: usize,
    #[arg(long, default_value_t = 50)]
    pub min_split: usize,
    #[arg(long)]
    pub k_features: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Class threshold; the model's own when absent.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct ScoreArgs {
    /// 1 (churn, F1) or 2 (survival, RMSLE).
    #[arg(long)]
    pub track: u8,
    #[arg(long, requires = "labels")]
    pub submission: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, requires_all = ["labels1", "test2", "labels2"], conflicts_with = "submission")]
    pub test1: Option<PathBuf>,
    #[arg(long)]
    pub labels1: Option<PathBuf>,
    #[arg(long)]
    pub test2: Option<PathBuf>,
    #[arg(long)]
    pub labels2: Option<PathBuf>,
    /// public, private or all.
    #[arg(long, default_value = "all")]
    pub subset: String,
    /// Seed of the public/private split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const SUBCOMMANDS: [&str; 7] = ["gen", "label", "features", "gaf", "train", "predict", "score"];

/// Inserts flags from the `--config` file after the subcommand name,
/// skipping keys already given on the command line.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(Path::new(&path), e))?;
    let given: BTreeSet<&str> =
        strs.iter().filter_map(|a| a.strip_prefix("--")).map(|a| a.split('=').next().unwrap_or(a)).collect();
    let mut extra = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| Error::config(format!("{path}:{}: expected key = value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if given.contains(key.as_str()) {
            continue;
        }
        match value {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            _ => {
                extra.push(format!("--{key}"));
                extra.push(value.to_string());
            }
        }
    }
    let at = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())).map_or(strs.len(), |i| i + 1);
    let mut out = args;
    for (k, e) in extra.into_iter().enumerate() {
        out.insert(at + k, OsString::from(e));
    }
    Ok(out)
}

/// Parses and runs; errors carry their exit-code class.
pub fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let threads = cli.threads;
    let name = cli.command.name();
    let manifest_override = cli.manifest.clone();
    let outcome = parallel::with_threads(threads, move || -> Result<Outcome> {
        match &cli.command {
            Command::Gen(a) => cmd_gen(a),
            Command::Label(a) => cmd_label(a),
            Command::Features(a) => cmd_features(a),
            Command::Gaf(a) => cmd_gaf(a),
            Command::Train(a) => cmd_train(a),
            Command::Predict(a) => cmd_predict(a),
            Command::Score(a) => cmd_score(a),
        }
    })??;
    if outcome.outputs.is_empty() {
        return Ok(());
    }
    let path = manifest_override.unwrap_or_else(|| outcome.default_manifest.clone());
    RunManifest::build(name, outcome.config, &outcome.inputs, &outcome.outputs, started.elapsed())?.write(&path)
}

struct Outcome {
    config: serde_json::Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    default_manifest: PathBuf,
}

impl Outcome {
    fn new(config: &impl Serialize, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>) -> Result<Self> {
        let default_manifest = outputs.first().map_or_else(
            || PathBuf::from("manifest.json"),
            |p| {
                let mut s = p.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            },
        );
        Ok(Outcome { config: serde_json::to_value(config)?, inputs, outputs, default_manifest })
    }
}

fn parse_mode(p: &ParseArgs) -> ParseMode {
    if p.lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    }
}

/// Reads a log; strict mode turns any diagnostic into a format error.
fn load_events(path: &Path, catalog: &EventCatalog, parse: &ParseArgs) -> Result<Vec<Event>> {
    let (events, report) = read_log_file(path, catalog, parse_mode(parse), None)?;
    if !report.is_clean() {
        if parse.lenient {
            eprintln!("warning: {}: {} rows reported: {}", path.display(), report.diagnostics.len(), report.summary());
        } else {
            return Err(Error::format(format!("{}: {}", path.display(), report.summary())));
        }
    }
    Ok(events)
}

fn timelines_of(events: Vec<Event>, layout: &WindowLayout, gap_minutes: u32) -> Vec<PlayerTimeline> {
    parallel::build_timelines(events, layout.grid, gap_minutes)
}

fn gen_config(a: &GenArgs, window: usize) -> Result<GenConfig> {
    let strength = match a.signal_strength {
        Some(s) => s,
        None => a.signal.parse::<SignalPreset>()?.strength(),
    };
    let (name, offset, players, obs_weeks) = match window {
        0 => ("train_", 0, a.players, a.obs_weeks),
        1 => ("test1_", TEST1_OFFSET_WEEKS, a.test_players.unwrap_or(a.players), a.test_obs_weeks),
        _ => ("test2_", TEST2_OFFSET_WEEKS, a.test_players.unwrap_or(a.players), a.test_obs_weeks),
    };
    let cfg = GenConfig {
        seed: derive_seed(a.seed, "window", window as u64),
        n_players: players,
        churn_rate: a.churn_rate,
        observation_weeks: obs_weeks,
        gap_weeks: a.gap_weeks,
        churn_window_weeks: a.churn_weeks,
        signal_strength: strength,
        weekend_boost: a.weekend_boost,
        events_per_active_day_mean: a.events_per_day,
        start: DEFAULT_EPOCH.plus_weeks(offset),
        account_prefix: name.to_string(),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct WindowInfo {
    obs_start: String,
    obs_weeks: u32,
    gap_weeks: u32,
    churn_weeks: u32,
    evaluation: String,
    players: usize,
}

fn cmd_gen(a: &GenArgs) -> Result<Outcome> {
    let configs = (0..3).map(|w| gen_config(a, w)).collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut outputs = Vec::new();
    let mut truth = Vec::new();
    let mut windows = BTreeMap::new();
    for (cfg, name) in configs.iter().zip(["train", "test1", "test2"]) {
        let data = parallel::generate(cfg)?;
        let obs = a.out.join(format!("{name}.csv"));
        let hist = a.out.join(format!("{name}_history.csv"));
        write_log_file(&obs, &data.observation_events())?;
        write_log_file(&hist, &data.events)?;
        outputs.extend([obs, hist]);
        windows.insert(
            name,
            WindowInfo {
                obs_start: format_timestamp(cfg.start),
                obs_weeks: cfg.observation_weeks,
                gap_weeks: cfg.gap_weeks,
                churn_weeks: cfg.churn_window_weeks,
                evaluation: format_timestamp(data.layout.churn_window.end),
                players: cfg.n_players,
            },
        );
        truth.extend(data.truth);
    }
    let truth_path = a.out.join("truth.csv");
    write_truth(std::io::BufWriter::new(create(&truth_path)?), &truth)?;
    let catalog_path = a.out.join("catalog.csv");
    write_catalog(create(&catalog_path)?, &EventCatalog::standard())?;
    let windows_path = a.out.join("windows.json");
    fs::write(&windows_path, serde_json::to_string_pretty(&windows)? + "\n")
        .map_err(|e| Error::io(&windows_path, e))?;
    outputs.extend([truth_path, catalog_path, windows_path]);
    let mut outcome = Outcome::new(&(a, &configs), Vec::new(), outputs)?;
    outcome.default_manifest = a.out.join("manifest.json");
    Ok(outcome)
}

fn cmd_label(a: &LabelArgs) -> Result<Outcome> {
    let layout = a.window.layout()?;
    let catalog = load_catalog(a.parse.catalog.as_deref())?;
    let evaluation = match &a.eval {
        Some(s) => {
            parse_timestamp(s).ok_or_else(|| Error::config(format!("eval {s:?} is not an ISO-8601 UTC instant")))?
        }
        None => layout.churn_window.end,
    };
    let observed = timelines_of(load_events(&a.log, &catalog, &a.parse)?, &layout, a.parse.gap_minutes);
    let history: BTreeMap<String, PlayerTimeline> = match &a.history {
        Some(p) => timelines_of(load_events(p, &catalog, &a.parse)?, &layout, a.parse.gap_minutes)
            .into_iter()
            .map(|t| (t.account_id().to_string(), t))
            .collect(),
        None => BTreeMap::new(),
    };
    let loyal = match &a.loyalty {
        Some(p) => {
            let mut table = GradeTable::default();
            for (month, rows) in read_loyalty(crate::labels::open(p)?)? {
                let graded = assign_grades(&rows, a.grades, derive_seed(a.seed, "grades", u64::from(month)))?;
                for d in &graded.diagnostics {
                    eprintln!("warning: month {month}: {d}");
                }
                table.insert_month(month, &graded);
            }
            Some(select_loyal(&table, a.trailing_months, a.loyal_threshold, a.min_occurrences))
        }
        None => None,
    };
    let margin = a.censor_margin_days * gamechurn_core::SECONDS_PER_DAY;
    let mut churn = BTreeMap::new();
    let mut survival: BTreeMap<String, SurvivalLabel> = BTreeMap::new();
    for t in &observed {
        let account = t.account_id();
        if loyal.as_ref().is_some_and(|l| !l.contains(account)) {
            continue;
        }
        let obs = t.restricted(layout.observation.start, layout.observation.end);
        if obs.events().is_empty() {
            continue;
        }
        let full = history.get(account).unwrap_or(t);
        churn.insert(account.to_string(), label_churn(full, &layout)?.churned);
        survival.insert(account.to_string(), label_survival(&obs, &layout, evaluation, Some(full), margin)?);
    }
    write_churn_labels(std::io::BufWriter::new(create(&a.out_churn)?), &churn)?;
    let mut outputs = vec![a.out_churn.clone()];
    if let Some(p) = &a.out_survival {
        write_survival_labels(std::io::BufWriter::new(create(p)?), &survival)?;
        outputs.push(p.clone());
    }
    let inputs = [Some(a.log.clone()), a.history.clone(), a.loyalty.clone(), a.parse.catalog.clone()];
    Outcome::new(a, inputs.into_iter().flatten().collect(), outputs)
}

fn cmd_features(a: &FeaturesArgs) -> Result<Outcome> {
    let layout = a.window.layout()?;
    let families = parse_families(&a.families)?;
    if families.is_empty() {
        return Err(Error::config("families list is empty"));
    }
    let catalog = load_catalog(a.parse.catalog.as_deref())?;
    let events: Vec<Event> = load_events(&a.log, &catalog, &a.parse)?
        .into_iter()
        .filter(|e| layout.observation.contains(e.timestamp))
        .collect();
    let timelines = timelines_of(events, &layout, a.parse.gap_minutes);
    let mut inputs = vec![a.log.clone()];
    let mut outputs = vec![a.out.clone()];
    let map_path =
        || a.quantile_map.clone().ok_or_else(|| Error::config("--quantile-map is required with --quantile fit|apply"));
    let matrix = match a.quantile.as_str() {
        "off" => parallel::build_matrix(&timelines, &layout, &catalog, &families, Quantile::Off)?.0,
        "fit" => {
            let path = map_path()?;
            let (m, q) = parallel::build_matrix(&timelines, &layout, &catalog, &families, Quantile::Fit)?;
            let q = q.expect("fit returns the transform");
            fs::write(&path, serde_json::to_string(&q)? + "\n").map_err(|e| Error::io(&path, e))?;
            outputs.push(path);
            m
        }
        "apply" => {
            let path = map_path()?;
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let q: QuantileTransform = serde_json::from_str(&text)?;
            inputs.push(path);
            parallel::build_matrix(&timelines, &layout, &catalog, &families, Quantile::Apply(&q))?.0
        }
        other => return Err(Error::config(format!("unknown quantile mode {other:?} (off, fit, apply)"))),
    };
    write_matrix_file(&a.out, &matrix)?;
    inputs.extend(a.parse.catalog.clone());
    Outcome::new(a, inputs, outputs)
}

fn cmd_gaf(a: &GafArgs) -> Result<Outcome> {
    let layout = a.window.layout()?;
    let format: DumpFormat = a.format.parse()?;
    let catalog = load_catalog(a.parse.catalog.as_deref())?;
    let events: Vec<Event> = load_events(&a.log, &catalog, &a.parse)?
        .into_iter()
        .filter(|e| layout.observation.contains(e.timestamp))
        .collect();
    let timelines = timelines_of(events, &layout, a.parse.gap_minutes);
    let series: Vec<_> = timelines.iter().map(|t| daily_series(t, &layout, &catalog)).collect();
    let own = series.iter().find(|s| s.account_id == a.account).ok_or_else(|| {
        gamechurn_core::Error::NotCohortMember(format!("account {} has no observation events", a.account))
    })?;
    let weigh = |v: &[f64]| if a.time_weighted { apply_time_weights(v) } else { v.to_vec() };
    let (rows, cols, data) = if a.image {
        let channels = highest_variance_channels(&series);
        let mut weighted = own.clone();
        weighted.values = weighted.values.iter().map(|v| weigh(v)).collect();
        let img = stack_image(&weighted, &channels, a.days)?;
        for d in &img.diagnostics {
            eprintln!("warning: {d}");
        }
        (img.rows, img.cols, img.data)
    } else {
        let name = a.channel.as_deref().unwrap_or_default();
        let values = own
            .channel(name)
            .ok_or_else(|| Error::config(format!("unknown channel {name:?}; known: {}", own.channels.join(", "))))?;
        let g = gaf_encode(&weigh(values))?;
        (g.n, g.n, g.data)
    };
    write_grid_file(&a.out, rows, cols, &data, format)?;
    Outcome::new(a, [Some(a.log.clone()), a.parse.catalog.clone()].into_iter().flatten().collect(), vec![a.out.clone()])
}

fn train_config(a: &TrainArgs) -> TrainConfig {
    TrainConfig {
        l1: a.l1,
        l2: a.l2,
        max_iters: a.max_iters,
        tol: a.tol,
        n_trees: a.trees,
        min_samples_split: a.min_split,
        k_features: a.k_features,
        seed: a.seed,
        standardize: true,
        fit_intercept: true,
    }
}

fn aligned<T: Clone>(accounts: &[String], labels: &BTreeMap<String, T>) -> Result<Vec<T>> {
    let missing: Vec<&str> =
        accounts.iter().filter(|a| !labels.contains_key(*a)).map(String::as_str).take(10).collect();
    if !missing.is_empty() {
        return Err(gamechurn_core::Error::Coverage(format!("no label for accounts: {}", missing.join(", "))).into());
    }
    Ok(accounts.iter().map(|a| labels[a].clone()).collect())
}

fn cmd_train(a: &TrainArgs) -> Result<Outcome> {
    let cfg = train_config(a);
    cfg.validate()?;
    let x = read_matrix_file(&a.features)?;
    let labels = read_labels_file(&a.labels)?;
    let file = match (a.model.as_str(), &labels) {
        ("logistic", Labels::Churn(l)) => {
            let y = aligned(x.accounts(), l)?;
            ModelFile::new(TargetKind::Churn, a.threshold, Model::Logistic(fit_logistic(&x, &y, &cfg)?))
        }
        ("ridge", Labels::Survival(l)) => {
            let y: Vec<f64> = aligned(x.accounts(), l)?.iter().map(|s| f64::from(s.survival_days).ln_1p()).collect();
            ModelFile::new(TargetKind::SurvivalLog1p, a.threshold, Model::Ridge(fit_ridge(&x, &y, &cfg)?))
        }
        ("extra-trees", Labels::Churn(l)) => {
            let y = aligned(x.accounts(), l)?;
            let m = parallel::fit_extra_trees(&x, Target::Binary(&y), &cfg)?;
            ModelFile::new(TargetKind::Churn, a.threshold, Model::ExtraTrees(m))
        }
        ("extra-trees", Labels::Survival(l)) => {
            let y: Vec<f64> = aligned(x.accounts(), l)?.iter().map(|s| f64::from(s.survival_days).ln_1p()).collect();
            let m = parallel::fit_extra_trees(&x, Target::Real(&y), &cfg)?;
            ModelFile::new(TargetKind::SurvivalLog1p, a.threshold, Model::ExtraTrees(m))
        }
        ("logistic", _) => return Err(Error::config("logistic needs churn labels (account_id,churned)")),
        ("ridge", _) => return Err(Error::config("ridge needs survival labels (account_id,survival)")),
        (other, _) => return Err(Error::config(format!("unknown model {other:?} (logistic, ridge, extra-trees)"))),
    };
    write_model_file(&a.out, &file)?;
    Outcome::new(a, vec![a.features.clone(), a.labels.clone()], vec![a.out.clone()])
}

fn cmd_predict(a: &PredictArgs) -> Result<Outcome> {
    let file = read_model_file(&a.model)?;
    let x = read_matrix_file(&a.features)?;
    let scores = parallel::predict(&file.model, &x)?;
    let accounts = x.accounts().iter().cloned();
    let submission = match file.target {
        TargetKind::Churn => {
            let threshold = a.threshold.unwrap_or(file.threshold);
            Submission::Churn(accounts.zip(classify(&scores, threshold)).collect())
        }
        TargetKind::SurvivalLog1p => {
            Submission::Survival(accounts.zip(scores.iter().map(|s| s.exp_m1().max(0.0))).collect())
        }
    };
    write_submission_file(&a.out, &submission)?;
    Outcome::new(a, vec![a.model.clone(), a.features.clone()], vec![a.out.clone()])
}

#[derive(Serialize)]
struct CombinedReport {
    track: u8,
    subset: Subset,
    test1: ScoreReport,
    test2: ScoreReport,
    #[serde(rename = "final")]
    final_: f64,
}

fn score_one(track: u8, submission: &Path, labels: &Path, subset: Subset, seed: u64) -> Result<ScoreReport> {
    let sub = read_submission_file(submission, track)?;
    let labels = read_labels_file(labels)?;
    Ok(score_submission(&sub, &labels, subset, seed)?)
}

fn cmd_score(a: &ScoreArgs) -> Result<Outcome> {
    if a.track != 1 && a.track != 2 {
        return Err(Error::config(format!("track must be 1 or 2, got {}", a.track)));
    }
    let subset: Subset = a.subset.parse()?;
    let (json, inputs) = match (&a.submission, &a.labels, &a.test1, &a.labels1, &a.test2, &a.labels2) {
        (Some(s), Some(l), None, _, _, _) => {
            let report = score_one(a.track, s, l, subset, a.seed)?;
            (serde_json::to_string_pretty(&report)?, vec![s.clone(), l.clone()])
        }
        (None, _, Some(s1), Some(l1), Some(s2), Some(l2)) => {
            let r1 = score_one(a.track, s1, l1, subset, a.seed)?;
            let r2 = score_one(a.track, s2, l2, subset, a.seed)?;
            let combined = final_score(r1.headline(), r2.headline())?;
            let report = CombinedReport { track: a.track, subset, test1: r1, test2: r2, final_: combined.final_ };
            (serde_json::to_string_pretty(&report)?, vec![s1.clone(), l1.clone(), s2.clone(), l2.clone()])
        }
        _ => return Err(Error::config("give --submission with --labels, or --test1/--labels1/--test2/--labels2")),
    };
    match &a.out {
        Some(p) => {
            fs::write(p, json + "\n").map_err(|e| Error::io(p, e))?;
            Outcome::new(a, inputs, vec![p.clone()])
        }
        None => {
            println!("{json}");
            Outcome::new(a, inputs, Vec::new())
        }
    }
}

/// Timestamp helper shared with tests: the start of test window `k` (0 = train).
pub fn window_start(k: usize) -> Timestamp {
    DEFAULT_EPOCH.plus_weeks([0, TEST1_OFFSET_WEEKS, TEST2_OFFSET_WEEKS][k.min(2)])
}

/// Entry point used by the binary. Returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{}: {e}", e.kind());
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}: {e}", e.kind());
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
