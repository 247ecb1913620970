//! Command-line front end and the report-producing drivers behind it.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::data::{self, DataError, Dataset, FoldPlan};
use crate::evolution::config::{format_mutation_set, parse_mutation_set};
use crate::evolution::{derive_seed, evolve, ConfigError, EvolutionConfig, GenerationStats, MutationOp};
use crate::explain::{self, ExplainError, PartialDerivative};
use crate::expr::{predict, Individual, ModelError, ModelJson};
use crate::fitting::rmse;
use crate::metrics::expression_disentanglement;
use crate::symtree::{symtree_search, SymTreeConfig, SymTreeError};
use crate::transforms::TransformSet;

/// Evaluation budget from which the default generation count is derived.
pub const EVALUATION_BUDGET: usize = 100_000;

const SEED_FOLDS: u64 = 10;
const SEED_RUN: u64 = 11;

/// The seven mutation subsets of the operator ablation.
pub const ABLATION_SUBSETS: [&str; 7] = [
    "add,drop",
    "replace_interaction",
    "positive_interaction,negative_interaction",
    "replace_transformation",
    "add,drop,replace_interaction",
    "add,drop,replace_interaction,positive_interaction,negative_interaction",
    "add,drop,replace_interaction,positive_interaction,negative_interaction,replace_transformation",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    SymTree(#[from] SymTreeError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for invalid configuration or arguments, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::InvalidArgument(_) => 2,
            CliError::SymTree(SymTreeError::InvalidThreshold(_)) => 2,
            CliError::Data(DataError::InvalidK { .. }) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Parser)]
#[command(name = "itea", version, about = "Symbolic regression with Interaction-Transformation expressions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Training data: CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Target column name (default: last column).
    #[arg(long)]
    pub target: Option<String>,
    /// Config file with key=value lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "itea-out")]
    pub out: PathBuf,
    /// Upper bound on the number of generations.
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
    /// Failing terms contribute 0 to a prediction instead of failing it.
    #[arg(long)]
    pub protected: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a model on the whole dataset.
    Fit(Common),
    /// Predict with a saved model.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Repeated k-fold cross-validation.
    Cv {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// Also write per-run test predictions as CSV.
        #[arg(long)]
        dump_predictions: bool,
    },
    /// Gradients and marginal-effect curves of a saved model.
    Explain {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Points per marginal-effect curve.
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
    /// Rank mutation subsets by cross-validated test error.
    Ablate {
        #[command(flatten)]
        common: Common,
        /// More datasets to include alongside --data.
        #[arg(long = "extra-data")]
        extra_data: Vec<PathBuf>,
        /// Subsets separated by ';', operators by ','. Default: the seven ablation rows.
        #[arg(long)]
        subsets: Option<String>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        repeats: usize,
    },
    /// Greedy tree search baseline.
    Symtree {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-4)]
        threshold: f64,
        #[arg(long, default_value_t = 3)]
        max_iter: usize,
        /// Seconds.
        #[arg(long, default_value_t = 3600.0)]
        time_budget: f64,
        #[arg(long)]
        funcs: Option<String>,
    },
}

/// Reads the config file over the defaults.
///
/// Without an explicit `generations` key the generation count is
/// `EVALUATION_BUDGET / pop`; either way it is capped at `budget`.
pub fn load_config(path: Option<&Path>, seed: Option<u64>, budget: usize) -> Result<EvolutionConfig, CliError> {
    let mut cfg = EvolutionConfig::default();
    let keys = match path {
        Some(p) => cfg.apply_kv(&std::fs::read_to_string(p).map_err(io_err(p))?)?,
        None => Vec::new(),
    };
    if !keys.iter().any(|k| k == "generations") {
        cfg.generations = EVALUATION_BUDGET / cfg.pop.max(1);
    }
    cfg.generations = cfg.generations.min(budget);
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

impl Summary {
    /// Sample statistics; `std` is 0 for a single value.
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var =
            if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Summary { mean, std: var.sqrt(), median: median(values) }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub command: &'static str,
    pub config: EvolutionConfig,
    pub n: usize,
    pub names: Vec<String>,
    pub train_rmse: f64,
    pub disentanglement: Option<f64>,
    pub expression: String,
    pub model: ModelJson,
    pub history: Vec<GenerationStats>,
    pub seconds: f64,
}

/// Evolves on the whole dataset.
pub fn run_fit(data: &Dataset, cfg: &EvolutionConfig) -> Result<FitReport, CliError> {
    let start = Instant::now();
    let res = evolve(data, cfg)?;
    Ok(FitReport {
        command: "fit",
        config: cfg.clone(),
        n: data.n(),
        names: data.names.clone(),
        train_rmse: res.best.fitness,
        disentanglement: expression_disentanglement(&res.best, &data.x).ok().map(|r| r.value),
        expression: res.best.render(&data.names),
        model: res.best.to_model(),
        history: res.history,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CvRun {
    pub repeat: usize,
    pub fold: usize,
    pub seed: u64,
    pub train_rmse: f64,
    pub test_rmse: f64,
    pub disentanglement: Option<f64>,
    pub model: ModelJson,
    #[serde(skip)]
    pub test_predictions: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CvReport {
    pub command: &'static str,
    pub config: EvolutionConfig,
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    /// One plan per repeat.
    pub fold_plans: Vec<FoldPlan>,
    pub runs: Vec<CvRun>,
    pub train: Summary,
    pub test: Summary,
    pub seconds: f64,
}

/// `k`-fold cross-validation repeated `repeats` times.
///
/// Repeat `r` uses the fold plan seeded by `(seed, r)` and run `(r, f)`
/// evolves with the seed derived from `(seed, f, r)`. Test error uses
/// protected prediction.
pub fn run_cv(
    data: &Dataset,
    cfg: &EvolutionConfig,
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<CvReport, CliError> {
    if repeats == 0 {
        return Err(CliError::InvalidArgument("repeats must be at least 1".into()));
    }
    cfg.validate()?;
    let start = Instant::now();
    let plans: Vec<FoldPlan> = (0..repeats)
        .map(|r| data::kfold(data.n(), k, derive_seed(seed, SEED_FOLDS, r as u64, 0)))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..repeats).flat_map(|r| (0..k).map(move |f| (r, f))).collect();
    let runs: Vec<CvRun> = jobs
        .par_iter()
        .map(|&(repeat, fold)| {
            let plan = &plans[repeat];
            let train = data.subset(&plan.train_indices(fold));
            let test = data.subset(&plan.test_indices(fold));
            let run_seed = derive_seed(seed, SEED_RUN, fold as u64, repeat as u64);
            let run_cfg = EvolutionConfig { seed: run_seed, ..cfg.clone() };
            let res = evolve(&train, &run_cfg)?;
            let pred = predict(&res.best, &test.x, true).unwrap_or_else(|_| vec![f64::NAN; test.n()]);
            let test_rmse = rmse(&test.y, &pred).unwrap_or(f64::INFINITY);
            Ok(CvRun {
                repeat,
                fold,
                seed: run_seed,
                train_rmse: res.best.fitness,
                test_rmse,
                disentanglement: expression_disentanglement(&res.best, &train.x).ok().map(|r| r.value),
                model: res.best.to_model(),
                test_predictions: pred,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let train: Vec<f64> = runs.iter().map(|r| r.train_rmse).collect();
    let test: Vec<f64> = runs.iter().map(|r| r.test_rmse).collect();
    Ok(CvReport {
        command: "cv",
        config: cfg.clone(),
        k,
        repeats,
        seed,
        fold_plans: plans,
        train: Summary::of(&train),
        test: Summary::of(&test),
        runs,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Ranks of `values` (1 = smallest), ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]].total_cmp(&values[order[i]]).is_eq() {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetResult {
    pub subset: String,
    pub test: Summary,
    pub test_rmse: Vec<f64>,
    pub average_rank: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetAblation {
    pub dataset: String,
    pub subsets: Vec<SubsetResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationReport {
    pub command: &'static str,
    pub config: EvolutionConfig,
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    pub datasets: Vec<DatasetAblation>,
    /// Mean over datasets of each subset's average rank, in subset order.
    pub overall: Vec<(String, f64)>,
    pub seconds: f64,
}

/// Cross-validates every subset on every dataset with shared seeds and
/// fold plans, then ranks subsets run by run.
///
/// A subset's rank on a dataset is its mean rank over the paired runs.
pub fn run_ablation(
    datasets: &[(String, Dataset)],
    base: &EvolutionConfig,
    subsets: &[BTreeSet<MutationOp>],
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<AblationReport, CliError> {
    if subsets.is_empty() || subsets.iter().any(BTreeSet::is_empty) {
        return Err(CliError::InvalidArgument("every mutation subset must be non-empty".into()));
    }
    let start = Instant::now();
    let mut out = Vec::new();
    for (name, data) in datasets {
        let reports: Vec<CvReport> = subsets
            .iter()
            .map(|s| run_cv(data, &EvolutionConfig { mutation_set: s.clone(), ..base.clone() }, k, repeats, seed))
            .collect::<Result<_, _>>()?;
        let runs = reports[0].runs.len();
        let mut rank_sum = vec![0.0; subsets.len()];
        for r in 0..runs {
            let errs: Vec<f64> = reports.iter().map(|rep| rep.runs[r].test_rmse).collect();
            for (s, rank) in average_ranks(&errs).into_iter().enumerate() {
                rank_sum[s] += rank;
            }
        }
        let subsets = reports
            .iter()
            .zip(subsets)
            .zip(rank_sum)
            .map(|((rep, s), sum)| SubsetResult {
                subset: format_mutation_set(s),
                test: rep.test,
                test_rmse: rep.runs.iter().map(|r| r.test_rmse).collect(),
                average_rank: sum / runs as f64,
            })
            .collect();
        out.push(DatasetAblation { dataset: name.clone(), subsets });
    }
    let overall = subsets
        .iter()
        .enumerate()
        .map(|(s, set)| {
            let mean = out.iter().map(|d| d.subsets[s].average_rank).sum::<f64>() / out.len().max(1) as f64;
            (format_mutation_set(set), mean)
        })
        .collect();
    Ok(AblationReport {
        command: "ablate",
        config: base.clone(),
        k,
        repeats,
        seed,
        datasets: out,
        overall,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Parses `a,b;c;d,e` into operator sets.
pub fn parse_subsets(spec: &str) -> Result<Vec<BTreeSet<MutationOp>>, CliError> {
    spec.split(';')
        .map(|s| {
            let set = parse_mutation_set(s)?;
            if set.is_empty() {
                Err(CliError::InvalidArgument(format!("empty mutation subset in '{spec}'")))
            } else {
                Ok(set)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub variable: String,
    pub grid: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplainReport {
    pub command: &'static str,
    pub names: Vec<String>,
    pub expression: String,
    pub partials: Vec<PartialDerivative>,
    pub marginal_effects: Vec<Curve>,
    /// One gradient per row; `null` where undefined.
    pub gradients: Vec<Option<Vec<f64>>>,
}

pub fn run_explain(ind: &Individual, data: &Dataset, points: usize) -> Result<ExplainReport, CliError> {
    if points == 0 {
        return Err(CliError::InvalidArgument("grid must have at least one point".into()));
    }
    check_dim(ind, data.d())?;
    let mut curves = Vec::new();
    for (j, name) in data.names.iter().enumerate() {
        let (lo, hi) =
            data.x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])));
        let grid: Vec<f64> = if points == 1 {
            vec![lo]
        } else {
            (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
        };
        let values = explain::marginal_effect_points(ind, j, &data.x, &grid)?;
        curves.push(Curve { variable: name.clone(), grid, values });
    }
    Ok(ExplainReport {
        command: "explain",
        names: data.names.clone(),
        expression: ind.render(&data.names),
        partials: (0..data.d()).map(|j| explain::partial(ind, j)).collect(),
        marginal_effects: curves,
        gradients: data.x.iter().map(|x| explain::gradient(ind, x).ok()).collect(),
    })
}

fn check_dim(ind: &Individual, d: usize) -> Result<(), CliError> {
    match ind.dim() {
        Some(m) if m == d => Ok(()),
        m => Err(CliError::InvalidArgument(format!("model has {} variables, data has {d}", m.unwrap_or(0)))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymTreeReport {
    pub command: &'static str,
    pub threshold: f64,
    pub max_iter: usize,
    pub funcs: TransformSet,
    pub train_rmse: f64,
    pub disentanglement: Option<f64>,
    pub expression: String,
    pub model: ModelJson,
    pub seconds: f64,
}

fn load_model(path: &Path) -> Result<Individual, CliError> {
    Ok(Individual::from_json(&std::fs::read_to_string(path).map_err(io_err(path))?)?)
}

fn load_data(common: &Common) -> Result<Dataset, CliError> {
    Ok(data::load_csv(&common.data, common.target.as_deref())?)
}

/// Runs one parsed command.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(common) => {
            let cfg = load_config(common.config.as_deref(), common.seed, common.budget)?;
            let data = load_data(&common)?;
            let report = run_fit(&data, &cfg)?;
            write_json(&common.out.join("model.json"), &report.model)?;
            write_json(&common.out.join("report.json"), &report)?;
            eprintln!("train RMSE {:.6}: {}", report.train_rmse, report.expression);
        }
        Command::Predict { common, model } => {
            let ind = load_model(&model)?;
            let d = ind.dim().unwrap_or(0);
            let (header, table) = data::load_features(&common.data)?;
            let (x, y) = if header.len() == d && common.target.is_none() {
                (table, None)
            } else {
                let data = load_data(&common)?;
                (data.x, Some(data.y))
            };
            let rows_ok = x.first().map_or(0, Vec::len);
            check_dim(&ind, rows_ok)?;
            let pred = predict(&ind, &x, common.protected).map_err(|e| CliError::InvalidArgument(e.to_string()))?;
            let mut csv = String::from("prediction\n");
            for p in &pred {
                csv.push_str(&format!("{p}\n"));
            }
            write_atomic(&common.out.join("predictions.csv"), csv.as_bytes())?;
            if let Some(y) = y {
                eprintln!("RMSE {:.6}", rmse(&y, &pred).unwrap_or(f64::NAN));
            }
        }
        Command::Cv { common, k, repeats, dump_predictions } => {
            let cfg = load_config(common.config.as_deref(), common.seed, common.budget)?;
            let data = load_data(&common)?;
            let report = run_cv(&data, &cfg, k, repeats, cfg.seed)?;
            if dump_predictions {
                let mut csv = String::from("repeat,fold,row,target,prediction\n");
                for run in &report.runs {
                    let rows = report.fold_plans[run.repeat].test_indices(run.fold);
                    for (row, p) in rows.iter().zip(&run.test_predictions) {
                        csv.push_str(&format!("{},{},{},{},{}\n", run.repeat, run.fold, row, data.y[*row], p));
                    }
                }
                write_atomic(&common.out.join("predictions.csv"), csv.as_bytes())?;
            }
            write_json(&common.out.join("report.json"), &report)?;
            eprintln!(
                "test RMSE mean {:.4} std {:.4} median {:.4} over {} runs",
                report.test.mean,
                report.test.std,
                report.test.median,
                report.runs.len()
            );
        }
        Command::Explain { common, model, grid } => {
            let ind = load_model(&model)?;
            let data = load_data(&common)?;
            let report = run_explain(&ind, &data, grid)?;
            write_json(&common.out.join("explain.json"), &report)?;
        }
        Command::Ablate { common, extra_data, subsets, k, repeats } => {
            let cfg = load_config(common.config.as_deref(), common.seed, common.budget)?;
            let sets = match subsets {
                Some(spec) => parse_subsets(&spec)?,
                None => ABLATION_SUBSETS.iter().map(|s| parse_mutation_set(s)).collect::<Result<_, _>>()?,
            };
            let mut datasets = Vec::new();
            for path in std::iter::once(&common.data).chain(&extra_data) {
                let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
                datasets.push((name, data::load_csv(path, common.target.as_deref())?));
            }
            let report = run_ablation(&datasets, &cfg, &sets, k, repeats, cfg.seed)?;
            write_json(&common.out.join("ablate.json"), &report)?;
            for (subset, rank) in &report.overall {
                eprintln!("{rank:.3}  {subset}");
            }
        }
        Command::Symtree { common, threshold, max_iter, time_budget, funcs } => {
            if !(time_budget.is_finite() && time_budget >= 0.0) {
                return Err(CliError::InvalidArgument(format!("time budget must be non-negative, got {time_budget}")));
            }
            let funcs: TransformSet = match funcs {
                Some(f) => f.parse().map_err(ConfigError::from)?,
                None => TransformSet::all(),
            };
            let data = load_data(&common)?;
            let cfg = SymTreeConfig {
                threshold,
                max_iter,
                time_budget: Duration::from_secs_f64(time_budget),
                ..SymTreeConfig::default()
            };
            let start = Instant::now();
            let best = symtree_search(&data.x, &data.y, &cfg, &funcs)?;
            let report = SymTreeReport {
                command: "symtree",
                threshold,
                max_iter,
                funcs,
                train_rmse: best.fitness,
                disentanglement: expression_disentanglement(&best, &data.x).ok().map(|r| r.value),
                expression: best.render(&data.names),
                model: best.to_model(),
                seconds: start.elapsed().as_secs_f64(),
            };
            write_json(&common.out.join("model.json"), &report.model)?;
            write_json(&common.out.join("report.json"), &report)?;
            eprintln!("train RMSE {:.6}: {}", report.train_rmse, report.expression);
        }
    }
    Ok(())
}

/// Parses arguments, honours `ITEA_THREADS`, runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Ok(v) = std::env::var("ITEA_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: ITEA_THREADS must be a positive integer, got '{v}'");
                return 2;
            }
        }
    }
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
