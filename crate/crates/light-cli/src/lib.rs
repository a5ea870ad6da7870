//! Library surface of the experiment CLI: argument parsing, config files,
//! manifests, plotting and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod plot;

use clap::{Parser, Subcommand, ValueEnum};
use commands::{CliError, Ctx, OutputFormat, Scale};
use std::path::PathBuf;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LIGHT_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "light",
    version,
    about = "Growth-and-harvesting activation experiments",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment configuration file (`key = value` with `[sections]`);
    /// omitted keys use the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory (default: $LIGHT_OUT_DIR or ./light-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Base seed added to every derived seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Problem scale: `paper` keeps published sizes, `desk` finishes in
    /// minutes.
    #[arg(long, global = true, value_enum, default_value_t = ScaleArg::Desk)]
    pub scale: ScaleArg,

    /// Worker threads for independent cells.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    /// Artifact format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit a (t, N) table for a harvested growth law.
    SimulatePopulation,
    /// Emit (t, value, derivative) for an activation configuration.
    EvalLight,
    /// Train the synthetic-blob experiment cross-product.
    SweepSynthetic,
    /// Random-search the hyperparameter grid and emit the rates table.
    Hyperopt,
    /// Train on locally provided experimental datasets.
    Uci,
    /// Margin tracking and the rate-function fit on separable data.
    Convergence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Paper,
    Desk,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

/// Exit codes: 0 success, 1 config error, 2 partial failure, 3 numeric
/// failure.
pub fn run(cli: Cli) -> u8 {
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("light-out"));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!(
            "error: cannot create output directory {}: {e}",
            out_dir.display()
        );
        return 1;
    }
    let ctx = Ctx {
        out_dir,
        base_seed: cli.seed,
        scale: match cli.scale {
            ScaleArg::Paper => Scale::Paper,
            ScaleArg::Desk => Scale::Desk,
        },
        jobs: cli.jobs,
        format: match cli.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::CsvSvg => OutputFormat::CsvSvg,
        },
    };
    let cfg = match commands::read_config(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let result = match cli.command {
        Command::SimulatePopulation => commands::population::run(&ctx, &cfg),
        Command::EvalLight => commands::eval_light::run(&ctx, &cfg),
        Command::SweepSynthetic => commands::sweep::run(&ctx, &cfg),
        Command::Hyperopt => commands::hyperopt::run(&ctx, &cfg),
        Command::Uci => commands::uci::run(&ctx, &cfg),
        Command::Convergence => commands::convergence::run(&ctx, &cfg),
    };
    match result {
        Ok(manifest) => {
            let partial = !manifest.failures.is_empty();
            for f in &manifest.failures {
                eprintln!("failed: {f}");
            }
            match manifest::append_manifest(&ctx.out_dir, &manifest) {
                Ok(path) => {
                    println!(
                        "{}: {} artifact(s), manifest appended to {}",
                        manifest.experiment,
                        manifest.artifacts.len(),
                        path.display()
                    );
                }
                Err(e) => {
                    eprintln!("error: cannot write manifest: {e}");
                    return 1;
                }
            }
            if partial {
                2
            } else {
                0
            }
        }
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(CliError::Numeric(m)) => {
            eprintln!("error: {m}");
            3
        }
    }
}
