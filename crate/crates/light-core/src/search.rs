//! Hyperparameter protocol: the full grid, its fractional random pick, and
//! multi-run selection statistics.
//!
//! Grid axes (endpoints inclusive unless noted): `r`, 5 points on
//! `[0.1, 20]`; `E`, 5 points on `[0.1, 20)` (the closed-interval spacing
//! with the last point pulled back by `E_AXIS_DELTA`); `T`, 3 points on
//! `[0.1, 20]`; `N_T`, 3 points on `[0.2, 0.8]`; `K` fixed at 1. Axes frozen
//! by the configuration tag collapse to their pinned constants.

use crate::activation::{ConfigTag, LightParams, DEFAULT_N_START, DEFAULT_T_START};
use crate::data::Dataset;
use crate::error::{LightError, Result};
use crate::net::{train, NetworkSpec, TrainConfig};
use crate::population::{predefined_rates, GrowthModel, PredefinedRates};
use crate::special::QValue;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Offset pulling the top of the half-open `E` range inside `[0.1, 20)`.
pub const E_AXIS_DELTA: f64 = 1e-6;

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub r: f64,
    pub e: f64,
    pub t_start: f64,
    pub n_start: f64,
}

impl GridPoint {
    pub fn to_params(&self) -> LightParams {
        LightParams {
            r: self.r,
            e: self.e,
            k: 1.0,
            t_start: self.t_start,
            n_start: self.n_start,
            q: QValue::Infinite,
            epsilon: None,
        }
    }
}

/// The full hyperparameter grid for one (configuration, model) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub tag: ConfigTag,
    pub model: GrowthModel,
    pub points: Vec<GridPoint>,
}

impl HyperGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Build the full grid for a configuration tag, freezing the axes the tag
/// pins (`-r-`: E = 0; `-E-`: r = 1; `-default-`: everything).
pub fn build_grid(tag: ConfigTag, model: GrowthModel) -> HyperGrid {
    let r_axis = match tag {
        ConfigTag::R | ConfigTag::Er => linspace(0.1, 20.0, 5),
        ConfigTag::EOnly | ConfigTag::Default => vec![1.0],
    };
    let e_axis = match tag {
        ConfigTag::EOnly | ConfigTag::Er => {
            let mut e = linspace(0.1, 20.0, 5);
            *e.last_mut().unwrap() = 20.0 - E_AXIS_DELTA;
            e
        }
        ConfigTag::R | ConfigTag::Default => vec![0.0],
    };
    let t_axis = match tag {
        ConfigTag::Default => vec![0.0],
        _ => linspace(0.1, 20.0, 3),
    };
    let nt_axis = match tag {
        ConfigTag::Default => vec![0.5],
        _ => linspace(0.2, 0.8, 3),
    };
    let mut points = Vec::with_capacity(r_axis.len() * e_axis.len() * t_axis.len() * nt_axis.len());
    for &r in &r_axis {
        for &e in &e_axis {
            for &t_start in &t_axis {
                for &n_start in &nt_axis {
                    points.push(GridPoint {
                        r,
                        e,
                        t_start,
                        n_start,
                    });
                }
            }
        }
    }
    HyperGrid { tag, model, points }
}

/// Sample `ceil(fraction * |grid|)` distinct grid points (at least one)
/// uniformly without replacement; deterministic under the seed.
pub fn random_pick(grid: &HyperGrid, fraction: f64, seed: u64) -> Result<Vec<GridPoint>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(LightError::InvalidParams(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let k = ((fraction * grid.len() as f64).ceil() as usize).max(1);
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    Ok(idx[..k.min(grid.len())]
        .iter()
        .map(|&i| grid.points[i])
        .collect())
}

/// Whether the per-run candidate pick is redrawn per run or shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Each run draws its own candidate subset (default).
    IndependentPicks,
    /// One pick shared by all runs; only training seeds vary.
    SharedCandidates,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub h_epoch: usize,
    pub runs: usize,
    pub fraction: f64,
    pub base_seed: u64,
    pub mode: SearchMode,
    pub batch_size: usize,
    pub grad_cap: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            h_epoch: 1,
            runs: 10,
            fraction: 0.025,
            base_seed: 0,
            mode: SearchMode::IndependentPicks,
            batch_size: 75,
            grad_cap: TrainConfig::default().grad_cap,
        }
    }
}

/// Winner of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunBest {
    pub point: GridPoint,
    pub held_out_accuracy: f64,
}

/// How selection was scored; surfaced so downstream reports stay auditable.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchMetadata {
    pub selection_metric: &'static str,
    pub leakage_note: &'static str,
    pub mode: SearchMode,
}

/// Aggregated search output: per-run winners, rate statistics, the realized
/// harvest at the mean rates, and the predefined rates for the mean r.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub per_run: Vec<RunBest>,
    pub mean_r: f64,
    pub sd_r: f64,
    pub mean_e: f64,
    pub sd_e: f64,
    /// `H = E * N*` at the mean rates, clamped at 0.
    pub harvest: f64,
    pub predefined: PredefinedRates,
    pub metadata: SearchMetadata,
}

/// `E * N*` for the given rates with K = 1, clamped at 0 when the
/// equilibrium is not positive.
pub fn realized_harvest(model: GrowthModel, r: f64, e: f64) -> f64 {
    let n_star = match model {
        GrowthModel::Verhulst => 1.0 - e / r,
        GrowthModel::Gompertz | GrowthModel::Generalized => (-e / r).exp(),
    };
    if n_star > 0.0 {
        e * n_star
    } else {
        0.0
    }
}

fn population_sd(values: &[f64], mean: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Run the random-search protocol: per run, train every candidate for
/// `h_epoch` epochs and select the one with the highest held-out accuracy
/// (ties resolved by lower E, then lower r, then lower T, then lower N_T).
pub fn search(
    data: &Dataset,
    arch: &NetworkSpec,
    grid: &HyperGrid,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    if grid.is_empty() {
        return Err(LightError::InvalidParams(
            "empty hyperparameter grid".into(),
        ));
    }
    if cfg.runs == 0 || cfg.h_epoch == 0 {
        return Err(LightError::InvalidParams(
            "runs and h_epoch must be >= 1".into(),
        ));
    }
    let mut per_run = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let pick_seed = match cfg.mode {
            SearchMode::IndependentPicks => cfg.base_seed.wrapping_add(run as u64),
            SearchMode::SharedCandidates => cfg.base_seed,
        };
        let candidates = random_pick(grid, cfg.fraction, pick_seed)?;
        let mut best: Option<RunBest> = None;
        for point in candidates {
            let mut spec = arch.clone();
            spec.output_model = grid.model;
            spec.output_params = point.to_params();
            spec.init_seed = cfg.base_seed.wrapping_add(1000 + run as u64);
            let train_cfg = TrainConfig {
                batch_size: cfg.batch_size,
                epochs: cfg.h_epoch,
                shuffle_seed: cfg.base_seed.wrapping_add(2000 + run as u64),
                runs: 1,
                grad_cap: cfg.grad_cap,
            };
            let curve =
                train(&spec, data, &crate::net::OptimizerSpec::sgd(), &train_cfg).map_err(|e| {
                    LightError::InvalidParams(format!(
                        "candidate (r={}, E={}, T={}, N_T={}) failed in run {run}: {e}",
                        point.r, point.e, point.t_start, point.n_start
                    ))
                })?;
            let acc = curve.final_test_acc();
            let better = match &best {
                None => true,
                Some(b) => {
                    let cur = (acc, -point.e, -point.r, -point.t_start, -point.n_start);
                    let old = (
                        b.held_out_accuracy,
                        -b.point.e,
                        -b.point.r,
                        -b.point.t_start,
                        -b.point.n_start,
                    );
                    cur > old
                }
            };
            if better {
                best = Some(RunBest {
                    point,
                    held_out_accuracy: acc,
                });
            }
        }
        per_run.push(best.expect("non-empty candidate list"));
    }
    let rs: Vec<f64> = per_run.iter().map(|b| b.point.r).collect();
    let es: Vec<f64> = per_run.iter().map(|b| b.point.e).collect();
    let mean_r = rs.iter().sum::<f64>() / rs.len() as f64;
    let mean_e = es.iter().sum::<f64>() / es.len() as f64;
    Ok(SearchResult {
        mean_r,
        sd_r: population_sd(&rs, mean_r),
        mean_e,
        sd_e: population_sd(&es, mean_e),
        harvest: realized_harvest(grid.model, mean_r, mean_e),
        predefined: predefined_rates(grid.model, mean_r, 1.0)?,
        per_run,
        metadata: SearchMetadata {
            selection_metric: "held-out (test-subset) accuracy after h_epoch epochs",
            leakage_note: "selection reuses the test subset; final curves are therefore \
                           optimistically biased",
            mode: cfg.mode,
        },
    })
}

/// The pre-defined-rates shortcut: set `r`, derive the yield-maximizing `E*`,
/// and return a ready `-Er-` parameter set with K = 1 and the default onset
/// constants.
pub fn apply_strategy(model: GrowthModel, r: f64) -> Result<LightParams> {
    let rates = predefined_rates(model, r, 1.0)?;
    Ok(LightParams {
        r,
        e: rates.e_star,
        k: 1.0,
        t_start: DEFAULT_T_START,
        n_start: DEFAULT_N_START,
        q: QValue::Infinite,
        epsilon: None,
    })
}
