//! `simulate-population`: emit (t, N(t)) for a harvested growth law.

use super::{parse_model, CliError, CmdResult, Ctx};
use crate::config::ConfigFile;
use crate::manifest::RunManifest;
use crate::plot;
use light_core::fmt::float17;
use light_core::population::{gompertz_solution, verhulst_solution, GrowthModel, PopulationParams};

pub fn run(ctx: &Ctx, cfg: &ConfigFile) -> CmdResult {
    let started = std::time::Instant::now();
    let s = cfg.section("population");
    let model = parse_model(&s.str_or("model", "verhulst"))?;
    let params = PopulationParams {
        r: s.f64_or("r", 0.9)?,
        e: s.f64_or("e", 0.1)?,
        k: s.f64_or("k", 1.0)?,
        t_start: s.f64_or("t_start", 4.0)?,
        n_start: s.f64_or("n_start", 0.2)?,
    };
    let t_min = s.f64_or("t_min", 0.0)?;
    let t_max = s.f64_or("t_max", 12.0)?;
    let points = s.usize_or("points", 241)?;
    if points < 2 || t_max <= t_min {
        return Err(CliError::Config(
            "population: need points >= 2 and t_max > t_min".into(),
        ));
    }

    let mut manifest = RunManifest::new("simulate-population", ctx.base_seed, ctx.scale.label());
    for (k, v) in [
        ("model", model.label().to_string()),
        ("r", params.r.to_string()),
        ("e", params.e.to_string()),
        ("k", params.k.to_string()),
        ("t_start", params.t_start.to_string()),
        ("n_start", params.n_start.to_string()),
        ("t_min", t_min.to_string()),
        ("t_max", t_max.to_string()),
        ("points", points.to_string()),
    ] {
        manifest.set("population", k, v);
    }

    let mut csv = String::from("t,N,model,r,E,K,T,N_T\n");
    let mut curve = Vec::with_capacity(points);
    for i in 0..points {
        let t = t_min + (t_max - t_min) * i as f64 / (points - 1) as f64;
        let n = match model {
            GrowthModel::Verhulst => verhulst_solution(t, &params)?,
            GrowthModel::Gompertz | GrowthModel::Generalized => gompertz_solution(t, &params)?,
        };
        curve.push((t, n));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            float17(t),
            float17(n),
            model.label(),
            float17(params.r),
            float17(params.e),
            float17(params.k),
            float17(params.t_start),
            float17(params.n_start),
        ));
    }
    super::write_artifact(ctx, &mut manifest, "population.csv", csv.as_bytes())?;
    if ctx.format == super::OutputFormat::CsvSvg {
        let svg = plot::line_chart(
            &format!(
                "{} population, r={} E={}",
                model.label(),
                params.r,
                params.e
            ),
            "t",
            "N(t)",
            &[plot::Series {
                label: model.label().to_string(),
                points: curve,
            }],
        );
        super::write_artifact(ctx, &mut manifest, "population.svg", svg.as_bytes())?;
    }
    manifest.wall_ms = started.elapsed().as_millis() as u64;
    Ok(manifest)
}
