//! Command-line front end: loads a JSON configuration (from a file or a
//! built-in preset), dispatches to the requested run, writes the CSV table
//! to the output path and prints a JSON summary on stdout.

mod config;
mod output;
mod runs;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{parse_config, RunConfig, RunMode};
use output::{config_hash, write_text, CliError};

const PRESETS: &[(&str, &str)] = &[
    ("fig5-local", include_str!("../presets/fig5-local.json")),
    ("fig5-global", include_str!("../presets/fig5-global.json")),
    ("fig7", include_str!("../presets/fig7.json")),
    ("fig9", include_str!("../presets/fig9.json")),
    ("fig10a", include_str!("../presets/fig10a.json")),
    ("fig10b", include_str!("../presets/fig10b.json")),
    ("fig10c", include_str!("../presets/fig10c.json")),
];

#[derive(Parser)]
#[command(
    name = "qtm",
    version,
    about = "Steady states, transients and stochastic runs of small thermal machines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one steady state and print currents, performance and law checks
    Steady(RunArgs),
    /// Sweep the cold frequency across the cooling window
    FridgeSweep(RunArgs),
    /// Relax from a product state and track the cold subsystem's temperature
    Transient(RunArgs),
    /// Finite-cycle engine efficiencies on the load ladder
    Engine(RunArgs),
    /// Clock accuracy/resolution/power tradeoff scans
    Clock(RunArgs),
    /// Parse and validate a configuration without running it
    ValidateConfig(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Steady(a)
            | Command::FridgeSweep(a)
            | Command::Transient(a)
            | Command::Engine(a)
            | Command::Clock(a)
            | Command::ValidateConfig(a) => a,
        }
    }

    /// The run mode this subcommand executes; None accepts any.
    fn expected_mode(&self) -> Option<RunMode> {
        match self {
            Command::Steady(_) => Some(RunMode::Steady),
            Command::FridgeSweep(_) => Some(RunMode::Sweep),
            Command::Transient(_) => Some(RunMode::Transient),
            Command::Engine(_) => Some(RunMode::EngineWalk),
            Command::Clock(_) => Some(RunMode::Clock),
            Command::ValidateConfig(_) => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Steady(_) => "steady",
            Command::FridgeSweep(_) => "fridge-sweep",
            Command::Transient(_) => "transient",
            Command::Engine(_) => "engine",
            Command::Clock(_) => "clock",
            Command::ValidateConfig(_) => "validate-config",
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Path to a JSON run configuration
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: fig5-local, fig5-global, fig7, fig9,
    /// fig10a, fig10b or fig10c
    #[arg(long)]
    preset: Option<String>,
    /// Write the CSV table here (overrides the config's output field)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the configuration's random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Size of the worker pool (defaults to the available cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn load_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let text = match (&args.config, &args.preset) {
        (Some(path), None) => std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?,
        (None, Some(name)) => PRESETS
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| {
                let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                CliError::Usage(format!(
                    "unknown preset {name:?}; available: {}",
                    known.join(", ")
                ))
            })?,
        _ => unreachable!("clap enforces exactly one of --config/--preset"),
    };
    let mut cfg = parse_config(&text)?;
    // The override participates in the header hash, so apply it before
    // anything derives from the config.
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// CSV destination: the flag wins over the config's own output field.
fn output_path(args: &RunArgs, cfg: &RunConfig) -> Option<PathBuf> {
    args.output
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
}

fn require_output(args: &RunArgs, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    output_path(args, cfg).ok_or_else(|| {
        CliError::Usage(
            "this run produces a CSV table but no destination is set; \
             pass --output or set the config's output field"
                .to_string(),
        )
    })
}

/// Print to stdout, treating a closed pipe as a normal early exit rather
/// than an error.
fn print_stdout(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn emit(
    cfg: &RunConfig,
    mode: &str,
    written: Option<&Path>,
    summary: serde_json::Value,
) -> Result<(), CliError> {
    let doc = json!({
        "mode": mode,
        "config_sha256": config_hash(cfg),
        "seed": cfg.seed,
        "output": written.map(|p| p.display().to_string()),
        "summary": summary,
    });
    print_stdout(&serde_json::to_string_pretty(&doc)?)
}

fn dispatch(cmd: &Command) -> Result<(), CliError> {
    let args = cmd.args();
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    }
    let cfg = load_config(args)?;
    if let Some(expected) = cmd.expected_mode() {
        if cfg.run.mode != expected {
            return Err(CliError::Usage(format!(
                "subcommand {:?} needs run.mode {:?}, but the config sets {:?}",
                cmd.name(),
                expected.to_string(),
                cfg.run.mode.to_string()
            )));
        }
    }

    match cmd {
        Command::Steady(_) => {
            let report = runs::steady::run(&cfg)?;
            let written = match output_path(args, &cfg) {
                Some(path) => {
                    write_text(&path, &runs::steady::to_csv(&cfg, &report))?;
                    Some(path)
                }
                None => None,
            };
            emit(&cfg, "steady", written.as_deref(), serde_json::to_value(&report)?)
        }
        Command::FridgeSweep(_) => {
            let out = runs::fridge::run(&cfg)?;
            let path = require_output(args, &cfg)?;
            write_text(&path, &runs::fridge::to_csv(&cfg, &out))?;
            emit(&cfg, "fridge-sweep", Some(&path), serde_json::to_value(&out.summary)?)
        }
        Command::Transient(_) => {
            let out = runs::transient::run(&cfg)?;
            let path = require_output(args, &cfg)?;
            write_text(&path, &runs::transient::to_csv(&cfg, &out))?;
            emit(&cfg, "transient", Some(&path), serde_json::to_value(&out.summary)?)
        }
        Command::Engine(_) => {
            let out = runs::engine::run(&cfg)?;
            let path = require_output(args, &cfg)?;
            write_text(&path, &runs::engine::to_csv(&cfg, &out))?;
            emit(&cfg, "engine", Some(&path), serde_json::to_value(&out.summary)?)
        }
        Command::Clock(_) => {
            let out = runs::clock::run(&cfg)?;
            let path = require_output(args, &cfg)?;
            write_text(&path, &runs::clock::to_csv(&cfg, &out))?;
            emit(&cfg, "clock", Some(&path), serde_json::to_value(&out.summary)?)
        }
        Command::ValidateConfig(_) => {
            let doc = json!({
                "valid": true,
                "config_sha256": config_hash(&cfg),
                "normalized": serde_json::to_value(&cfg)?,
            });
            print_stdout(&serde_json::to_string_pretty(&doc)?)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(&cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
