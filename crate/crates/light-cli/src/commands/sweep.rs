//! `sweep-synthetic`: train every (architecture, dataset, series, seed)
//! cell of the synthetic-blob experiment cross-product.
//!
//! Emits one accuracy-curve CSV per cell per series per seed, named
//! `curve_L{L}_d{d_l}_m{m}_n{n}_std{std}_{series}_seed{seed}.csv`, a summary
//! CSV (mean final accuracy and median epochs to 95% of final per
//! cell/series), and optional per-cell SVG plots. Failed cells are recorded
//! in the manifest and do not stop the sweep.

use super::{
    parse_series, CliError, CmdResult, Ctx, OutputFormat, RateDefaults, Scale, SeriesSpec,
};
use crate::config::ConfigFile;
use crate::manifest::RunManifest;
use crate::plot;
use light_core::data::{make_blobs, BlobParams, Dataset};
use light_core::fmt::float17;
use light_core::net::{train, AccuracyCurve, NetworkSpec, TrainConfig};

pub struct SweepPlan {
    pub layers: Vec<usize>,
    pub widths: Vec<usize>,
    pub samples: Vec<usize>,
    pub dims: Vec<usize>,
    pub cluster_stds: Vec<f64>,
    pub series: Vec<SeriesSpec>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub rates: RateDefaults,
}

pub fn read_rates(s: &crate::config::Section<'_>) -> Result<RateDefaults, CliError> {
    let d = RateDefaults::default();
    Ok(RateDefaults {
        v_r: s.f64_or("v_r", d.v_r)?,
        g_r: s.f64_or("g_r", d.g_r)?,
        v_e: s.f64_or("v_e", d.v_e)?,
        g_e: s.f64_or("g_e", d.g_e)?,
        t_start: s.f64_or("light_t_start", d.t_start)?,
        n_start: s.f64_or("light_n_start", d.n_start)?,
    })
}

pub fn plan_from_config(ctx: &Ctx, cfg: &ConfigFile) -> Result<SweepPlan, CliError> {
    let s = cfg.section("sweep");
    let rates = read_rates(&s)?;
    let series_labels = s.list_or(
        "series",
        &[
            "sigmoid-sgd",
            "sigmoid-adam",
            "sigmoid-adagrad",
            "light-v-er-sgd",
            "light-g-er-sgd",
        ],
    );
    if series_labels.is_empty() {
        return Err(CliError::Config(
            "sweep.series: at least one series is required".into(),
        ));
    }
    let mut series = Vec::new();
    for label in &series_labels {
        series.push(parse_series(label, &rates)?);
    }
    let default_epochs = match ctx.scale {
        Scale::Paper => 1500,
        Scale::Desk => 300,
    };
    let default_seeds: Vec<usize> = match ctx.scale {
        Scale::Paper => (1..=10).collect(),
        Scale::Desk => (1..=3).collect(),
    };
    let (layers, widths) = match ctx.scale {
        Scale::Paper => (
            s.usize_list_or("layers", &[0, 1, 2, 3])?,
            s.usize_list_or("widths", &[1, 10, 100, 1000])?,
        ),
        // the desk profile pins the single (L = 1, d_l = 100) architecture
        Scale::Desk => (vec![1], vec![100]),
    };
    let seeds: Vec<u64> = s
        .usize_list_or("seeds", &default_seeds)?
        .into_iter()
        .map(|v| ctx.base_seed + v as u64)
        .collect();
    if seeds.is_empty() {
        return Err(CliError::Config(
            "sweep.seeds: at least one seed is required".into(),
        ));
    }
    Ok(SweepPlan {
        layers,
        widths,
        samples: s.usize_list_or("samples", &[1000])?,
        dims: s.usize_list_or("dims", &[2])?,
        cluster_stds: s.f64_list_or("cluster_std", &[0.25])?,
        series,
        seeds,
        epochs: s.usize_or("epochs", default_epochs)?,
        batch_size: s.usize_or("batch_size", 75)?,
        rates,
    })
}

#[derive(Clone)]
struct Cell {
    layers: usize,
    width: usize,
    samples: usize,
    dims: usize,
    cluster_std: f64,
}

impl Cell {
    fn file_stem(&self) -> String {
        format!(
            "L{}_d{}_m{}_n{}_std{}",
            self.layers, self.width, self.samples, self.dims, self.cluster_std
        )
    }
}

struct TaskOutput {
    curve: Result<AccuracyCurve, String>,
}

pub fn run(ctx: &Ctx, cfg: &ConfigFile) -> CmdResult {
    let started = std::time::Instant::now();
    let plan = plan_from_config(ctx, cfg)?;
    let mut manifest = RunManifest::new("sweep-synthetic", ctx.base_seed, ctx.scale.label());
    record_plan(&mut manifest, &plan);
    manifest.seeds = plan.seeds.clone();

    let mut cells = Vec::new();
    for &layers in &plan.layers {
        for &width in &plan.widths {
            for &samples in &plan.samples {
                for &dims in &plan.dims {
                    for &cluster_std in &plan.cluster_stds {
                        cells.push(Cell {
                            layers,
                            width,
                            samples,
                            dims,
                            cluster_std,
                        });
                    }
                }
            }
        }
    }

    // Datasets are shared across series/seeds inside a cell.
    let datasets: Vec<Result<Dataset, String>> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            make_blobs(&BlobParams::standard(
                c.samples,
                c.dims,
                c.cluster_std,
                ctx.base_seed + i as u64,
            ))
            .map_err(|e| e.to_string())
        })
        .collect();

    // One task per (cell, series, seed), executed on the worker pool;
    // results keep task order so output is independent of scheduling.
    let mut task_meta = Vec::new();
    let mut tasks: Vec<Box<dyn FnOnce() -> TaskOutput + Send>> = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        for (si, series) in plan.series.iter().enumerate() {
            for &seed in &plan.seeds {
                task_meta.push((ci, si, seed));
                let cell = cell.clone();
                let series = series.clone();
                let dataset = datasets[ci].clone();
                let epochs = plan.epochs;
                let batch_size = plan.batch_size;
                tasks.push(Box::new(move || {
                    let data = match dataset {
                        Ok(d) => d,
                        Err(e) => return TaskOutput { curve: Err(e) },
                    };
                    let spec = NetworkSpec::new(
                        cell.dims,
                        cell.layers,
                        cell.width,
                        series.model,
                        series.params,
                        seed,
                    );
                    let tc = TrainConfig {
                        batch_size,
                        epochs,
                        shuffle_seed: seed,
                        runs: 1,
                        ..Default::default()
                    };
                    TaskOutput {
                        curve: train(&spec, &data, &series.optimizer, &tc)
                            .map_err(|e| e.to_string()),
                    }
                }));
            }
        }
    }
    let outputs = super::run_pool(ctx.jobs, tasks);

    // Emit per-run curves in task order; aggregate for the summary.
    let mut results: Vec<Vec<Vec<Option<AccuracyCurve>>>> =
        vec![vec![vec![None; plan.seeds.len()]; plan.series.len()]; cells.len()];
    for (&(ci, si, seed), out) in task_meta.iter().zip(outputs.into_iter()) {
        let cell = &cells[ci];
        let series = &plan.series[si];
        match out.curve {
            Ok(curve) => {
                let rel = format!(
                    "curve_{}_{}_seed{}.csv",
                    cell.file_stem(),
                    series.label,
                    seed
                );
                let mut bytes = Vec::new();
                curve.write_csv(&mut bytes).map_err(CliError::from)?;
                super::write_artifact(ctx, &mut manifest, &rel, &bytes)?;
                let seed_pos = plan.seeds.iter().position(|&s| s == seed).unwrap();
                results[ci][si][seed_pos] = Some(curve);
            }
            Err(e) => {
                manifest.failures.push(format!(
                    "cell {} series {} seed {}: {e}",
                    cell.file_stem(),
                    series.label,
                    seed
                ));
            }
        }
    }

    // Summary: one row per (cell, series).
    let mut summary = String::from(
        "L,d_l,m,n,cluster_std,series,seeds,mean_final_test_acc,median_epochs_to_95pct\n",
    );
    for (ci, cell) in cells.iter().enumerate() {
        for (si, series) in plan.series.iter().enumerate() {
            let curves: Vec<&AccuracyCurve> = results[ci][si].iter().flatten().collect();
            if curves.is_empty() {
                continue;
            }
            let mean_final =
                curves.iter().map(|c| c.final_test_acc()).sum::<f64>() / curves.len() as f64;
            let mut epochs95: Vec<usize> = curves
                .iter()
                .map(|c| c.epochs_to_fraction_of_final(0.95))
                .collect();
            epochs95.sort_unstable();
            let median = epochs95[epochs95.len() / 2];
            summary.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                cell.layers,
                cell.width,
                cell.samples,
                cell.dims,
                cell.cluster_std,
                series.label,
                curves.len(),
                float17(mean_final),
                median
            ));
        }
    }
    super::write_artifact(ctx, &mut manifest, "summary.csv", summary.as_bytes())?;

    if ctx.format == OutputFormat::CsvSvg {
        for (ci, cell) in cells.iter().enumerate() {
            let mut series_plots = Vec::new();
            for (si, series) in plan.series.iter().enumerate() {
                for (seed_pos, curve) in results[ci][si].iter().enumerate() {
                    if let Some(curve) = curve {
                        series_plots.push(plot::Series {
                            label: format!("{} s{}", series.label, plan.seeds[seed_pos]),
                            points: curve
                                .records
                                .iter()
                                .map(|r| (r.epoch as f64, r.test_acc))
                                .collect(),
                        });
                    }
                }
            }
            if !series_plots.is_empty() {
                let svg = plot::line_chart(
                    &format!("test accuracy, {}", cell.file_stem()),
                    "epoch",
                    "test accuracy",
                    &series_plots,
                );
                let rel = format!("plot_{}.svg", cell.file_stem());
                super::write_artifact(ctx, &mut manifest, &rel, svg.as_bytes())?;
            }
        }
    }

    manifest.wall_ms = started.elapsed().as_millis() as u64;
    Ok(manifest)
}

fn record_plan(manifest: &mut RunManifest, plan: &SweepPlan) {
    let join_usize = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    manifest.set("sweep", "layers", join_usize(&plan.layers));
    manifest.set("sweep", "widths", join_usize(&plan.widths));
    manifest.set("sweep", "samples", join_usize(&plan.samples));
    manifest.set("sweep", "dims", join_usize(&plan.dims));
    manifest.set(
        "sweep",
        "cluster_std",
        plan.cluster_stds
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.set(
        "sweep",
        "series",
        plan.series
            .iter()
            .map(|s| s.label.clone())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.set("sweep", "epochs", plan.epochs);
    manifest.set("sweep", "batch_size", plan.batch_size);
    manifest.set(
        "sweep",
        "seeds",
        plan.seeds
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.set("sweep", "v_r", plan.rates.v_r);
    manifest.set("sweep", "g_r", plan.rates.g_r);
    manifest.set("sweep", "v_e", plan.rates.v_e);
    manifest.set("sweep", "g_e", plan.rates.g_e);
    manifest.set("sweep", "light_t_start", plan.rates.t_start);
    manifest.set("sweep", "light_n_start", plan.rates.n_start);
}
