//! `eval-light`: emit (t, l, l') over a grid for any activation
//! configuration, the data behind the activation-shape figures.

use super::{parse_config_tag, parse_model, CliError, CmdResult, Ctx};
use crate::config::ConfigFile;
use crate::manifest::RunManifest;
use crate::plot;
use light_core::activation::{config_to_params, ConfigOverrides, LightNeuron};
use light_core::fmt::float17;
use light_core::special::QValue;

pub fn run(ctx: &Ctx, cfg: &ConfigFile) -> CmdResult {
    let started = std::time::Instant::now();
    let s = cfg.section("eval-light");
    let model = parse_model(&s.str_or("model", "verhulst"))?;
    let tag = parse_config_tag(&s.str_or("configuration", "er"))?;
    let q = match s.str_or("q", "inf").as_str() {
        "inf" | "infinite" => QValue::Infinite,
        v => QValue::finite(
            v.parse::<f64>()
                .map_err(|_| s.err("q", "expected a number or `inf`"))?,
        )?,
    };
    let overrides = ConfigOverrides {
        r: s.get_str("r")
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| s.err("r", "expected a number"))
            })
            .transpose()?,
        e: s.get_str("e")
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| s.err("e", "expected a number"))
            })
            .transpose()?,
        t_start: s
            .get_str("t_start")
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| s.err("t_start", "expected a number"))
            })
            .transpose()?,
        n_start: s
            .get_str("n_start")
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| s.err("n_start", "expected a number"))
            })
            .transpose()?,
        q: Some(q),
        epsilon: s
            .get_str("epsilon")
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| s.err("epsilon", "expected a number"))
            })
            .transpose()?,
    };
    let params = config_to_params(tag, overrides)?;
    let t_min = s.f64_or("t_min", -6.0)?;
    let t_max = s.f64_or("t_max", 12.0)?;
    let points = s.usize_or("points", 361)?;
    if points < 2 || t_max <= t_min {
        return Err(CliError::Config(
            "eval-light: need points >= 2 and t_max > t_min".into(),
        ));
    }

    let mut manifest = RunManifest::new("eval-light", ctx.base_seed, ctx.scale.label());
    for (k, v) in [
        ("model", model.label().to_string()),
        ("configuration", tag.label().to_string()),
        ("r", params.r.to_string()),
        ("e", params.e.to_string()),
        ("k", params.k.to_string()),
        ("t_start", params.t_start.to_string()),
        ("n_start", params.n_start.to_string()),
        ("epsilon", params.epsilon_value().to_string()),
        ("t_min", t_min.to_string()),
        ("t_max", t_max.to_string()),
        ("points", points.to_string()),
    ] {
        manifest.set("eval-light", k, v);
    }

    let neuron = LightNeuron::new(model, &params)?;
    let mut csv = String::from("t,value,derivative\n");
    let mut value_pts = Vec::with_capacity(points);
    let mut deriv_pts = Vec::with_capacity(points);
    for i in 0..points {
        let t = t_min + (t_max - t_min) * i as f64 / (points - 1) as f64;
        let v = neuron.value(t)?;
        let d = neuron.derivative(t)?;
        value_pts.push((t, v));
        deriv_pts.push((t, d));
        csv.push_str(&format!("{},{},{}\n", float17(t), float17(v), float17(d)));
    }
    super::write_artifact(ctx, &mut manifest, "eval_light.csv", csv.as_bytes())?;
    if ctx.format == super::OutputFormat::CsvSvg {
        let svg = plot::line_chart(
            &format!("{} -{}- activation", model.label(), tag.label()),
            "t",
            "value",
            &[
                plot::Series {
                    label: "l(t)".into(),
                    points: value_pts,
                },
                plot::Series {
                    label: "l'(t)".into(),
                    points: deriv_pts,
                },
            ],
        );
        super::write_artifact(ctx, &mut manifest, "eval_light.svg", svg.as_bytes())?;
    }
    manifest.wall_ms = started.elapsed().as_millis() as u64;
    Ok(manifest)
}
