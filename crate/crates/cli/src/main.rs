use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wheelprobe::commands;
use wheelprobe::formats::records::ModelKind;
use wheelprobe::{CliError, RunConfig};
use wheelprobe_core::traverse::CellIndex;

/// Predict wheel mobility on soft soil from bevameter probes and images.
#[derive(Parser)]
#[command(name = "wheelprobe", version)]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run configuration (JSON). Missing fields take their defaults.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sinkage,
    Slip,
}

#[derive(Subcommand)]
enum Command {
    /// Run both probe protocols on soil presets, log them and fit models.
    Probe {
        #[arg(required = true)]
        soils: Vec<String>,
    },
    /// Fit a sinkage or slip model to a measurement log.
    Fit {
        log: PathBuf,
        /// Inferred from the log when omitted.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Model file; defaults to `<log stem>_model.json` in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Estimate sinkage and contact angles from an image, or from every
    /// fixture in a directory.
    Detect {
        input: PathBuf,
        /// Marker corners (JSON); defaults to the image's `.json` sidecar.
        #[arg(long)]
        corners: Option<PathBuf>,
    },
    /// Render synthetic wheel images with ground-truth sidecars.
    RenderFixtures {
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Render this scene spec (JSON) instead of random scenes.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Write PNG instead of PPM.
        #[arg(long)]
        png: bool,
    },
    /// Probe a soil several times, drive it and check the drive against the predictions.
    Verify {
        soil: String,
        /// Drive a different soil than the one probed.
        #[arg(long)]
        drive_soil: Option<String>,
    },
    /// Score a terrain grid and plan the safest path across it.
    Plan {
        grid: PathBuf,
        /// Start cell as `row,col`.
        #[arg(long, value_parser = parse_cell)]
        start: CellIndex,
        /// Goal cell as `row,col`.
        #[arg(long, value_parser = parse_cell)]
        goal: CellIndex,
        /// Directory of fitted models written by `probe`; presets are probed when omitted.
        #[arg(long)]
        models: Option<PathBuf>,
    },
}

fn parse_cell(s: &str) -> Result<CellIndex, String> {
    let (r, c) = s.split_once(',').ok_or("expected row,col")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(r)?, parse(c)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    cfg.validate()?;
    match cli.command {
        Command::Probe { soils } => commands::probe(&cfg, &soils),
        Command::Fit { log, kind, output } => {
            let kind = kind.map(|k| match k {
                Kind::Sinkage => ModelKind::Sinkage,
                Kind::Slip => ModelKind::Slip,
            });
            commands::fit(&cfg, &log, kind, output.as_deref()).map(|_| ())
        }
        Command::Detect { input, corners } => commands::detect(&cfg, &input, corners.as_deref()),
        Command::RenderFixtures { count, spec, png } => {
            commands::render_fixtures(&cfg, count, spec.as_deref(), png).map(|_| ())
        }
        Command::Verify { soil, drive_soil } => {
            commands::verify(&cfg, &soil, drive_soil.as_deref()).map(|_| ())
        }
        Command::Plan {
            grid,
            start,
            goal,
            models,
        } => commands::plan(&cfg, &grid, start, goal, models.as_deref()).map(|_| ()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wheelprobe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
