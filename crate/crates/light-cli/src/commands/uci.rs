//! `uci`: train the series on locally provided experimental datasets.
//!
//! Config keys under `[uci]` name the files: `pima_indians`,
//! `breast_cancer_wisc`, `heart_statlog` (delimited numeric tables, label
//! last), and `mnist`, `fashion_mnist`, `cifar10` (flattened pixel rows with
//! a trailing class index; cifar10 rows are channel-planar RGB and are
//! converted to grayscale). Image sets are binarized (class >= 5 maps to +1)
//! and subsampled to 1000 train / 200 test rows.

use super::{parse_series, CliError, CmdResult, Ctx, Scale};
use crate::config::ConfigFile;
use crate::manifest::RunManifest;
use light_core::data::{
    binarize_and_subsample, load_class_table, load_tabular, BinarizeRule, Dataset, PixelSchema,
    TabularSchema,
};
use light_core::fmt::float17;
use light_core::net::{train, NetworkSpec, TrainConfig};

const TABULAR_SHAPES: [(&str, usize, usize); 3] = [
    ("pima_indians", 768, 8),
    ("breast_cancer_wisc", 699, 9),
    ("heart_statlog", 270, 13),
];

const IMAGE_FEATURES: [(&str, usize, bool); 3] = [
    ("mnist", 784, false),
    ("fashion_mnist", 784, false),
    ("cifar10", 1024, true),
];

pub fn run(ctx: &Ctx, cfg: &ConfigFile) -> CmdResult {
    let started = std::time::Instant::now();
    let s = cfg.section("uci");
    let validate_shape = s.bool_or("validate_shape", true)?;
    let default_epochs = match ctx.scale {
        Scale::Paper => 1500,
        Scale::Desk => 300,
    };
    let epochs = s.usize_or("epochs", default_epochs)?;
    let batch_size = s.usize_or("batch_size", 75)?;
    let layers = s.usize_or("layers", 1)?;
    let width = s.usize_or("width", 10)?;
    let default_seeds: Vec<usize> = match ctx.scale {
        Scale::Paper => (1..=10).collect(),
        Scale::Desk => (1..=3).collect(),
    };
    let seeds: Vec<u64> = s
        .usize_list_or("seeds", &default_seeds)?
        .into_iter()
        .map(|v| ctx.base_seed + v as u64)
        .collect();
    let image_train = s.usize_or("image_train", 1000)?;
    let image_test = s.usize_or("image_test", 200)?;
    let rates = super::sweep::read_rates(&s)?;
    let series_labels = s.list_or(
        "series",
        &["sigmoid-sgd", "light-v-er-sgd", "light-g-er-sgd"],
    );
    let mut series = Vec::new();
    for label in &series_labels {
        series.push(parse_series(label, &rates)?);
    }

    let mut manifest = RunManifest::new("uci", ctx.base_seed, ctx.scale.label());
    manifest.seeds = seeds.clone();
    for (k, v) in [
        ("epochs", epochs.to_string()),
        ("batch_size", batch_size.to_string()),
        ("layers", layers.to_string()),
        ("width", width.to_string()),
        ("series", series_labels.join(",")),
        ("validate_shape", validate_shape.to_string()),
        ("image_train", image_train.to_string()),
        ("image_test", image_test.to_string()),
        ("binarize_rule", "class >= 5 maps to +1".to_string()),
        ("grayscale", "luminance 0.299/0.587/0.114".to_string()),
    ] {
        manifest.set("uci", k, v);
    }

    // Load every dataset named in the config.
    let mut datasets: Vec<(String, Dataset)> = Vec::new();
    for (name, m, n) in TABULAR_SHAPES {
        if let Some(path) = s.get_str(name) {
            manifest.set("uci", name, &path);
            let schema = TabularSchema {
                expected_shape: if validate_shape { Some((m, n)) } else { None },
                split_seed: ctx.base_seed,
                ..Default::default()
            };
            datasets.push((name.to_string(), load_tabular(&path, &schema)?));
        }
    }
    for (name, features, grayscale) in IMAGE_FEATURES {
        if let Some(path) = s.get_str(name) {
            manifest.set("uci", name, &path);
            let schema = PixelSchema {
                grayscale_rgb: grayscale,
                expected_features: Some(features),
                official_train_rows: s
                    .get_str(&format!("{name}_train_rows"))
                    .map(|v| v.parse::<usize>())
                    .transpose()
                    .map_err(|_| s.err(&format!("{name}_train_rows"), "expected an integer"))?,
                split_seed: ctx.base_seed,
                ..Default::default()
            };
            let table = load_class_table(&path, &schema)?;
            let data = binarize_and_subsample(
                &table,
                BinarizeRule::default(),
                image_train,
                image_test,
                ctx.base_seed,
            )?;
            datasets.push((name.to_string(), data));
        }
    }
    if datasets.is_empty() {
        return Err(CliError::Config(
            "uci: no dataset paths given; set keys like `pima_indians = /path/file.csv`".into(),
        ));
    }

    // Optionally persist the ingested datasets in the binary cache format.
    if s.bool_or("cache_datasets", false)? {
        for (name, data) in &datasets {
            let rel = format!("uci_{name}.cache");
            light_core::data::write_cache(data, ctx.out_dir.join(&rel))?;
            manifest.add_artifact(&rel);
        }
        manifest.set("uci", "cache_datasets", "true");
    }

    // Independent (dataset, series, seed) training tasks on the worker
    // pool; artifacts are written back in task order.
    let mut meta = Vec::new();
    let mut tasks: Vec<Box<dyn FnOnce() -> Result<light_core::net::AccuracyCurve, String> + Send>> =
        Vec::new();
    for (di, (_, data)) in datasets.iter().enumerate() {
        for (si, sp) in series.iter().enumerate() {
            for &seed in &seeds {
                meta.push((di, si, seed));
                let sp = sp.clone();
                let data = data;
                tasks.push(Box::new(move || {
                    let spec =
                        NetworkSpec::new(data.dim(), layers, width, sp.model, sp.params, seed);
                    let tc = TrainConfig {
                        batch_size,
                        epochs,
                        shuffle_seed: seed,
                        runs: 1,
                        ..Default::default()
                    };
                    train(&spec, data, &sp.optimizer, &tc).map_err(|e| e.to_string())
                }));
            }
        }
    }
    let outputs = super::run_pool(ctx.jobs, tasks);
    let mut results: Vec<Vec<Vec<Option<light_core::net::AccuracyCurve>>>> =
        vec![vec![vec![None; seeds.len()]; series.len()]; datasets.len()];
    for (&(di, si, seed), out) in meta.iter().zip(outputs.into_iter()) {
        let name = &datasets[di].0;
        let sp = &series[si];
        match out {
            Ok(curve) => {
                let rel = format!("uci_{}_{}_seed{}.csv", name, sp.label, seed);
                let mut bytes = Vec::new();
                curve.write_csv(&mut bytes).map_err(CliError::from)?;
                super::write_artifact(ctx, &mut manifest, &rel, &bytes)?;
                let pos = seeds.iter().position(|&s| s == seed).unwrap();
                results[di][si][pos] = Some(curve);
            }
            Err(e) => manifest
                .failures
                .push(format!("{name} series {} seed {seed}: {e}", sp.label)),
        }
    }

    let mut summary =
        String::from("dataset,series,seeds,mean_final_test_acc,median_epochs_to_95pct\n");
    for (di, (name, _)) in datasets.iter().enumerate() {
        for (si, sp) in series.iter().enumerate() {
            let curves: Vec<_> = results[di][si].iter().flatten().collect();
            if curves.is_empty() {
                continue;
            }
            let mean_final =
                curves.iter().map(|c| c.final_test_acc()).sum::<f64>() / curves.len() as f64;
            let mut e95: Vec<usize> = curves
                .iter()
                .map(|c| c.epochs_to_fraction_of_final(0.95))
                .collect();
            e95.sort_unstable();
            summary.push_str(&format!(
                "{},{},{},{},{}\n",
                name,
                sp.label,
                curves.len(),
                float17(mean_final),
                e95[e95.len() / 2]
            ));
        }
    }
    super::write_artifact(ctx, &mut manifest, "uci_summary.csv", summary.as_bytes())?;
    manifest.wall_ms = started.elapsed().as_millis() as u64;
    Ok(manifest)
}
