//! `convergence`: margin tracking under full-batch gradient descent on a
//! separable folded dataset, with the rate-function fit report.

use super::{parse_config_tag, parse_model, CliError, CmdResult, Ctx, Scale};
use crate::config::ConfigFile;
use crate::manifest::RunManifest;
use light_core::activation::{ConfigTag, LightParams};
use light_core::convergence::{margin_experiment, rate_g, RateParams};
use light_core::data::{make_blobs, BlobParams};
use light_core::fmt::float17;
use light_core::search::apply_strategy;
use serde::Serialize;

#[derive(Serialize)]
struct FitJson {
    model: String,
    configuration: String,
    r: f64,
    e: f64,
    t_start: f64,
    n_start: f64,
    eta: f64,
    iterations: usize,
    max_margin: f64,
    final_margin: f64,
    rate_constant: f64,
    rate_residual: f64,
    rate_points: usize,
    log_constant: f64,
    log_residual: f64,
    log_points: usize,
}

pub fn run(ctx: &Ctx, cfg: &ConfigFile) -> CmdResult {
    let started = std::time::Instant::now();
    let s = cfg.section("convergence");
    let model = parse_model(&s.str_or("model", "verhulst"))?;
    let tag = parse_config_tag(&s.str_or("configuration", "er"))?;
    let r = s.f64_or("r", 2.0)?;
    let params: LightParams = match tag {
        ConfigTag::Default => LightParams::default_config(),
        ConfigTag::Er => apply_strategy(model, r)?,
        _ => {
            return Err(CliError::Config(
                "convergence.configuration: only `default` and `er` are wired here".into(),
            ))
        }
    };
    let m = s.usize_or("samples", 200)?;
    let n = s.usize_or("dims", 2)?;
    let cluster_std = s.f64_or("cluster_std", 0.15)?;
    let eta = s.f64_or("eta", 0.01)?;
    let default_iterations = match ctx.scale {
        Scale::Paper => 5000,
        Scale::Desk => 1500,
    };
    let iterations = s.usize_or("iterations", default_iterations)?;

    let mut manifest = RunManifest::new("convergence", ctx.base_seed, ctx.scale.label());
    manifest.seeds = vec![ctx.base_seed];
    for (k, v) in [
        ("model", model.label().to_string()),
        ("configuration", tag.label().to_string()),
        ("r", params.r.to_string()),
        ("e", params.e.to_string()),
        ("t_start", params.t_start.to_string()),
        ("n_start", params.n_start.to_string()),
        ("samples", m.to_string()),
        ("dims", n.to_string()),
        ("cluster_std", cluster_std.to_string()),
        ("eta", eta.to_string()),
        ("iterations", iterations.to_string()),
    ] {
        manifest.set("convergence", k, v);
    }

    let data = make_blobs(&BlobParams::standard(m, n, cluster_std, ctx.base_seed))?;
    let (trace, fit) = margin_experiment(&data, &params, model, eta, iterations)?;

    let rp = RateParams::new(params);
    let mut csv = String::from("iteration,margin,d_minus_margin,g_of_t,ln_t\n");
    for (i, &margin) in trace.margins.iter().enumerate() {
        let it = i + 1;
        let g = rate_g(it as f64, &rp).map(float17).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            it,
            float17(margin),
            float17(trace.max_margin - margin),
            g,
            float17((it as f64).ln()),
        ));
    }
    super::write_artifact(ctx, &mut manifest, "convergence.csv", csv.as_bytes())?;

    let report = FitJson {
        model: model.label().to_string(),
        configuration: tag.label().to_string(),
        r: params.r,
        e: params.e,
        t_start: params.t_start,
        n_start: params.n_start,
        eta,
        iterations,
        max_margin: trace.max_margin,
        final_margin: *trace.margins.last().unwrap(),
        rate_constant: fit.rate_constant,
        rate_residual: fit.rate_residual,
        rate_points: fit.rate_points,
        log_constant: fit.log_constant,
        log_residual: fit.log_residual,
        log_points: fit.log_points,
    };
    let json = serde_json::to_string_pretty(&report).expect("fit report serializes");
    super::write_artifact(ctx, &mut manifest, "fit.json", json.as_bytes())?;
    manifest.wall_ms = started.elapsed().as_millis() as u64;
    Ok(manifest)
}
