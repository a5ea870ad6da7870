//! Experiment subcommands. Each takes a parsed config plus the shared
//! context, writes its artifacts under the output directory, and returns a
//! manifest of everything it emitted.

pub mod convergence;
pub mod eval_light;
pub mod hyperopt;
pub mod population;
pub mod sweep;
pub mod uci;

use crate::config::{ConfigError, ConfigFile};
use crate::manifest::RunManifest;
use light_core::activation::{ConfigTag, LightParams};
use light_core::net::OptimizerSpec;
use light_core::population::GrowthModel;
use light_core::search::apply_strategy;
use light_core::LightError;
use std::path::{Path, PathBuf};

/// Problem scale: `Paper` keeps the published protocol sizes, `Desk`
/// substitutes epochs = 300, 3 runs and the single (L = 1, d_l = 100)
/// architecture so everything finishes in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

impl Scale {
    pub fn label(&self) -> &'static str {
        match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    CsvSvg,
}

pub struct Ctx {
    pub out_dir: PathBuf,
    pub base_seed: u64,
    pub scale: Scale,
    pub jobs: usize,
    pub format: OutputFormat,
}

/// Failure classification mirrored into process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 1.
    Config(String),
    /// Exit code 3.
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<LightError> for CliError {
    fn from(e: LightError) -> Self {
        match e {
            LightError::Numeric { .. }
            | LightError::NonFinite { .. }
            | LightError::NonSeparable => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io error: {e}"))
    }
}

pub type CmdResult = Result<RunManifest, CliError>;

pub fn parse_model(s: &str) -> Result<GrowthModel, CliError> {
    match s {
        "verhulst" | "v" => Ok(GrowthModel::Verhulst),
        "gompertz" | "g" => Ok(GrowthModel::Gompertz),
        "generalized" => Ok(GrowthModel::Generalized),
        other => Err(CliError::Config(format!("unknown growth model {other:?}"))),
    }
}

pub fn parse_optimizer(s: &str) -> Result<OptimizerSpec, CliError> {
    match s {
        "sgd" => Ok(OptimizerSpec::sgd()),
        "adam" => Ok(OptimizerSpec::adam()),
        "adagrad" => Ok(OptimizerSpec::adagrad()),
        other => Err(CliError::Config(format!("unknown optimizer {other:?}"))),
    }
}

pub fn parse_config_tag(s: &str) -> Result<ConfigTag, CliError> {
    match s {
        "default" => Ok(ConfigTag::Default),
        "r" => Ok(ConfigTag::R),
        "e" => Ok(ConfigTag::EOnly),
        "er" => Ok(ConfigTag::Er),
        other => Err(CliError::Config(format!(
            "unknown configuration tag {other:?}"
        ))),
    }
}

/// One curve to train: output activation and optimizer, named like
/// `sigmoid-sgd` or `light-v-er-sgd`.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    pub label: String,
    pub model: GrowthModel,
    pub tag: ConfigTag,
    pub params: LightParams,
    pub optimizer: OptimizerSpec,
}

/// Per-model rate constants used by the non-default series.
#[derive(Debug, Clone, Copy)]
pub struct RateDefaults {
    pub v_r: f64,
    pub g_r: f64,
    pub v_e: f64,
    pub g_e: f64,
    pub t_start: f64,
    pub n_start: f64,
}

impl Default for RateDefaults {
    fn default() -> Self {
        // mean selected rates of the main synthetic results table
        RateDefaults {
            v_r: 13.23,
            g_r: 12.04,
            v_e: 7.6,
            g_e: 8.4,
            t_start: light_core::activation::DEFAULT_T_START,
            n_start: light_core::activation::DEFAULT_N_START,
        }
    }
}

/// Parse a series label. Accepted forms: `sigmoid-<opt>` and
/// `light-<v|g>-<default|r|e|er>-<opt>` with `<opt>` one of sgd, adam,
/// adagrad.
pub fn parse_series(label: &str, rates: &RateDefaults) -> Result<SeriesSpec, CliError> {
    let parts: Vec<&str> = label.split('-').collect();
    let bad = || CliError::Config(format!("unknown series {label:?}"));
    let (model, tag, opt_name) = match parts.as_slice() {
        ["sigmoid", opt] => (GrowthModel::Verhulst, ConfigTag::Default, *opt),
        ["light", m, tag, opt] => {
            let model = parse_model(m)?;
            (model, parse_config_tag(tag)?, *opt)
        }
        _ => return Err(bad()),
    };
    let optimizer = parse_optimizer(opt_name)?;
    let params = match tag {
        ConfigTag::Default => LightParams::default_config(),
        ConfigTag::R => {
            let r = if model == GrowthModel::Verhulst {
                rates.v_r
            } else {
                rates.g_r
            };
            LightParams {
                r,
                e: 0.0,
                t_start: rates.t_start,
                n_start: rates.n_start,
                ..LightParams::default_config()
            }
        }
        ConfigTag::EOnly => {
            let e = if model == GrowthModel::Verhulst {
                rates.v_e
            } else {
                rates.g_e
            };
            LightParams {
                r: 1.0,
                e,
                t_start: rates.t_start,
                n_start: rates.n_start,
                ..LightParams::default_config()
            }
        }
        ConfigTag::Er => {
            // the pre-defined-rates strategy: set r, derive E*
            let r = if model == GrowthModel::Verhulst {
                rates.v_r
            } else {
                rates.g_r
            };
            let mut p = apply_strategy(model, r)?;
            p.t_start = rates.t_start;
            p.n_start = rates.n_start;
            p
        }
    };
    Ok(SeriesSpec {
        label: label.to_string(),
        model,
        tag,
        params,
        optimizer,
    })
}

pub fn read_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    match path {
        Some(p) => Ok(ConfigFile::from_path(p)?),
        None => Ok(ConfigFile::default()),
    }
}

pub fn write_artifact(
    ctx: &Ctx,
    manifest: &mut RunManifest,
    rel_path: &str,
    contents: &[u8],
) -> Result<(), CliError> {
    let path = ctx.out_dir.join(rel_path);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, contents)?;
    manifest.add_artifact(rel_path);
    Ok(())
}

/// Run `tasks` closures on `jobs` workers, preserving result order by task
/// index regardless of completion order.
pub fn run_pool<T: Send, F>(jobs: usize, tasks: Vec<F>) -> Vec<T>
where
    F: FnOnce() -> T + Send,
{
    let jobs = jobs.max(1);
    if jobs == 1 || tasks.len() <= 1 {
        return tasks.into_iter().map(|t| t()).collect();
    }
    let n = tasks.len();
    let queue: std::sync::Mutex<Vec<(usize, F)>> =
        std::sync::Mutex::new(tasks.into_iter().enumerate().rev().collect());
    let results: Vec<std::sync::Mutex<Option<T>>> =
        (0..n).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(n) {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().pop();
                match job {
                    Some((i, task)) => {
                        let out = task();
                        *results[i].lock().unwrap() = Some(out);
                    }
                    None => break,
                }
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("task completed"))
        .collect()
}
