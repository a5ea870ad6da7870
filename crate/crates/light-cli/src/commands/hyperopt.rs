//! `hyperopt`: the random-search protocol over the hyperparameter grid,
//! emitting one results-table row per (model, configuration).

use super::{parse_config_tag, parse_model, CliError, CmdResult, Ctx, Scale};
use crate::config::ConfigFile;
use crate::manifest::RunManifest;
use light_core::activation::LightParams;
use light_core::data::{make_blobs, BlobParams};
use light_core::fmt::float17;
use light_core::net::NetworkSpec;
use light_core::population::GrowthModel;
use light_core::search::{build_grid, search, SearchConfig, SearchMode};

pub fn run(ctx: &Ctx, cfg: &ConfigFile) -> CmdResult {
    let started = std::time::Instant::now();
    let s = cfg.section("hyperopt");
    let models: Vec<GrowthModel> = s
        .list_or("models", &["v", "g"])
        .iter()
        .map(|m| parse_model(m))
        .collect::<Result<_, _>>()?;
    let tags = s.list_or("configurations", &["r", "e", "er"]);
    let m = s.usize_or("samples", 1000)?;
    let n = s.usize_or("dims", 2)?;
    let cluster_std = s.f64_or("cluster_std", 0.25)?;
    let layers = s.usize_or("layers", 1)?;
    let width = s.usize_or("width", 100)?;
    let h_epoch = s.usize_or("h_epoch", 1)?;
    if ![1, 10, 100].contains(&h_epoch) {
        return Err(CliError::Config(format!(
            "hyperopt.h_epoch: expected 1, 10 or 100, got {h_epoch}"
        )));
    }
    let default_runs = match ctx.scale {
        Scale::Paper => 10,
        Scale::Desk => 3,
    };
    let runs = s.usize_or("runs", default_runs)?;
    let fraction = s.f64_or("fraction", 0.025)?;
    let mode = match s.str_or("mode", "independent").as_str() {
        "independent" => SearchMode::IndependentPicks,
        "shared" => SearchMode::SharedCandidates,
        other => {
            return Err(CliError::Config(format!(
                "hyperopt.mode: unknown mode {other:?}"
            )))
        }
    };

    let mut manifest = RunManifest::new("hyperopt", ctx.base_seed, ctx.scale.label());
    for (k, v) in [
        (
            "models",
            models
                .iter()
                .map(|m| m.label())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("configurations", tags.join(",")),
        ("samples", m.to_string()),
        ("dims", n.to_string()),
        ("cluster_std", cluster_std.to_string()),
        ("layers", layers.to_string()),
        ("width", width.to_string()),
        ("h_epoch", h_epoch.to_string()),
        ("runs", runs.to_string()),
        ("fraction", fraction.to_string()),
        ("mode", format!("{mode:?}")),
        (
            "selection_metric",
            "held-out accuracy after h_epoch epochs".to_string(),
        ),
    ] {
        manifest.set("hyperopt", k, v);
    }
    manifest.seeds = vec![ctx.base_seed];

    let data = make_blobs(&BlobParams::standard(m, n, cluster_std, ctx.base_seed))?;

    // One independent search per (model, configuration) cell, run on the
    // worker pool; rows are emitted in cell order.
    let mut cells = Vec::new();
    for &model in &models {
        for tag_name in &tags {
            cells.push((model, parse_config_tag(tag_name)?));
        }
    }
    let tasks: Vec<_> = cells
        .iter()
        .map(|&(model, tag)| {
            let data = &data;
            let scfg = SearchConfig {
                h_epoch,
                runs,
                fraction,
                base_seed: ctx.base_seed,
                mode,
                ..Default::default()
            };
            let arch = NetworkSpec::new(
                n,
                layers,
                width,
                model,
                LightParams::default_config(),
                ctx.base_seed,
            );
            move || search(data, &arch, &build_grid(tag, model), &scfg)
        })
        .collect();
    let results = super::run_pool(ctx.jobs, tasks);

    let mut csv = String::from("model,configuration,mean_r,sd_r,mean_E,sd_E,H,E_star,H_star\n");
    for ((model, tag), result) in cells.iter().zip(results) {
        let result = result?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            model.label(),
            tag.label(),
            float17(result.mean_r),
            float17(result.sd_r),
            float17(result.mean_e),
            float17(result.sd_e),
            float17(result.harvest),
            float17(result.predefined.e_star),
            float17(result.predefined.h_star),
        ));
    }
    super::write_artifact(ctx, &mut manifest, "hyperopt.csv", csv.as_bytes())?;
    manifest.wall_ms = started.elapsed().as_millis() as u64;
    Ok(manifest)
}
