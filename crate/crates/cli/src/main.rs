use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use toa_cli::config::{self, ScenarioKind, PRESET_NAMES};
use toa_cli::plot::{emit_plot_script, Figure};
use toa_cli::{CliError, Runner, ScenarioConfig};

/// Time-of-arrival distributions from CDF and current routes.
#[derive(Debug, Parser)]
#[command(name = "toa", version, arg_required_else_help = true)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: fig1, fig2-left, fig2-right, rb87-table.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Normalize the density over [0, inf).
    #[arg(long, global = true)]
    normalize: bool,
    /// Print the summary as JSON.
    #[arg(long, global = true)]
    json_summary: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run whatever scenario the configuration describes.
    Run,
    /// Backflow current, density and detection-window table.
    Backflow {
        /// Rubidium-87 at 3 mm/s, with the window table.
        #[arg(long)]
        rb87: bool,
    },
    /// Two free Gaussian packets.
    Superposition,
    /// Position arrival of a Gaussian packet in free fall.
    GaussianFreefallPosition,
    /// Momentum arrival of a Gaussian packet in free fall.
    GaussianFreefallMomentum,
    /// Draw samples; writes `index,value`.
    Sample,
    /// Write a matplotlib script for scenario CSVs.
    Plot {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// fig1, fig2, table or toa; inferred from the header by default.
        #[arg(long)]
        figure: Option<String>,
        /// Write the script here instead of stdout.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
}

fn load(cli: &Cli) -> Result<Option<ScenarioConfig>, CliError> {
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| toa_cli::error::io_error(path, e))?;
        return ScenarioConfig::parse(&text).map(Some);
    }
    if let Some(name) = &cli.preset {
        return config::preset(name).map(Some);
    }
    Ok(None)
}

fn expect_kind(cfg: ScenarioConfig, kind: ScenarioKind) -> Result<ScenarioConfig, CliError> {
    if cfg.kind != kind {
        return Err(CliError::Config(vec![format!(
            "subcommand {} given a {} configuration",
            kind.name(),
            cfg.kind.name()
        )]));
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<Option<String>, CliError> {
    let kind = match &cli.command {
        Command::Plot { files, figure, script } => {
            let figure = figure.as_deref().map(Figure::parse).transpose()?;
            let text = emit_plot_script(files, figure)?;
            return match script {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| toa_cli::error::io_error(path, e))?;
                    Ok(Some(path.display().to_string()))
                }
                None => Ok(Some(text.trim_end().to_string())),
            };
        }
        Command::Presets => return Ok(Some(PRESET_NAMES.join("\n"))),
        Command::Run => None,
        Command::Backflow { .. } => Some(ScenarioKind::Backflow),
        Command::Superposition => Some(ScenarioKind::Superposition),
        Command::GaussianFreefallPosition => Some(ScenarioKind::GaussianFreefallPosition),
        Command::GaussianFreefallMomentum => Some(ScenarioKind::GaussianFreefallMomentum),
        Command::Sample => Some(ScenarioKind::Sample),
    };
    let rb87 = matches!(cli.command, Command::Backflow { rb87: true });
    let mut cfg = match (load(cli)?, rb87) {
        (Some(_), true) => return Err(CliError::Usage("--rb87 cannot be combined with --config or --preset".into())),
        (Some(c), false) => c,
        (None, true) => config::rb87(),
        (None, false) => return Err(CliError::Usage("a scenario is required: pass --config or --preset".into())),
    };
    if let Some(k) = kind {
        cfg = expect_kind(cfg, k)?;
    }
    if cli.normalize {
        cfg.normalize = true;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    log::info!("running {} into {}", cfg.kind.name(), out_dir.display());
    let summary = Runner { out_dir }.run(&cfg)?;
    Ok(Some(if cli.json_summary { summary.to_json() } else { summary.line() }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Some(text)) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            if matches!(e, CliError::Usage(_)) {
                eprintln!("{}", Cli::command().render_usage());
            }
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
