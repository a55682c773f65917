//! Command-line experiment driver: generate traces, replay them into trust
//! reports, sweep malicious fractions and compare weight schemes.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use siot_trust::graph::ObjectId;
use siot_trust::metrics::{
    malicious_sweep, run_experiment, scheme_comparison, ExperimentConfig, SchemeSpec, TraceSource,
};
use siot_trust::trace::{generate_trace, load_trace, write_trace};

use config::{apply_entries, parse_config_text, set_seed};

#[derive(Parser)]
#[command(name = "siot-trust", version, about = "Trust quantification and attack simulation for social IoT networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key=value config file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for trace generation and replay
    #[arg(long)]
    seed: Option<u64>,
    /// Weight scheme: ws1, ws2, mean or w1,w2,w3
    #[arg(long)]
    scheme: Option<String>,
    /// Trust threshold separating trustworthy from untrustworthy
    #[arg(long)]
    theta: Option<f64>,
    /// Snapshot checkpoints, comma-separated event counts
    #[arg(long)]
    checkpoints: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replay with a sliding evidence window of this many events
    #[arg(long)]
    window: Option<u64>,
    /// Replay a trace file instead of generating one
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Objects in the generated trace
    #[arg(long)]
    objects: Option<u32>,
    /// Events in the generated trace
    #[arg(long)]
    events: Option<u64>,
    /// Fraction of objects given malicious-family behaviour
    #[arg(long)]
    malicious_fraction: Option<f64>,
    /// Node ids to track in trajectory outputs, comma-separated
    #[arg(long)]
    tracked: Option<String>,
    /// Schemes for compare/sweep, comma-separated
    #[arg(long)]
    schemes: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic trace file
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        /// Trace file to write
        #[arg(long, default_value = "trace.siot")]
        file: PathBuf,
    },
    /// Replay a trace and write snapshot, trajectory and detection reports
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Detection accuracy across malicious fractions and schemes
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Malicious fractions, comma-separated
        #[arg(long)]
        fractions: Option<String>,
    },
    /// Replay the identical trace under each scheme
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check a trace file and report the first problem found
    Validate {
        /// Trace file to validate
        #[arg(long)]
        trace: PathBuf,
    },
}

enum CliError {
    /// Bad config or flags; exit 2.
    Usage(anyhow::Error),
    /// Failure while running; exit 1.
    Runtime(anyhow::Error),
}

fn usage(e: anyhow::Error) -> CliError {
    CliError::Usage(e)
}

fn runtime(e: anyhow::Error) -> CliError {
    CliError::Runtime(e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Builds the experiment config from defaults, then the config file, then
/// flags. A JSON config (a previous run's manifest, or a bare experiment
/// config) is accepted as well, so a manifest alone can reproduce a run.
fn build_config(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(usage)?;
        if text.trim_start().starts_with('{') {
            let value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing JSON config {}", path.display()))
                .map_err(usage)?;
            let config_value = value.get("config").cloned().unwrap_or(value);
            cfg = serde_json::from_value(config_value)
                .context("manifest `config` does not match the experiment schema")
                .map_err(usage)?;
        } else {
            let entries = parse_config_text(&text).map_err(usage)?;
            apply_entries(&mut cfg, &entries).map_err(usage)?;
        }
    }
    if let Some(path) = &common.trace {
        cfg.source = TraceSource::File { path: path.clone() };
    }
    if let Some(objects) = common.objects {
        config::generator_mut(&mut cfg).map_err(usage)?.object_count = objects;
    }
    if let Some(events) = common.events {
        config::generator_mut(&mut cfg).map_err(usage)?.target_event_count = events;
    }
    if let Some(fraction) = common.malicious_fraction {
        config::generator_mut(&mut cfg).map_err(usage)?.malicious_fraction = fraction;
    }
    if let Some(seed) = common.seed {
        set_seed(&mut cfg, seed);
    }
    if let Some(scheme) = &common.scheme {
        cfg.scheme = scheme.parse::<SchemeSpec>().map_err(|e| usage(e.into()))?;
    }
    if let Some(schemes) = &common.schemes {
        cfg.schemes = schemes
            .split(',')
            .map(|s| s.trim().parse::<SchemeSpec>())
            .collect::<Result<_, _>>()
            .map_err(|e| usage(e.into()))?;
    }
    if let Some(theta) = common.theta {
        cfg.theta = theta;
    }
    if let Some(checkpoints) = &common.checkpoints {
        cfg.checkpoints = parse_u64_list(checkpoints).map_err(usage)?;
    }
    if let Some(tracked) = &common.tracked {
        cfg.tracked_nodes = tracked
            .split(',')
            .map(|s| s.trim().parse::<u32>().map(ObjectId))
            .collect::<Result<_, _>>()
            .map_err(|e| usage(anyhow::anyhow!("--tracked: {e}")))?;
    }
    if let Some(window) = common.window {
        cfg.window_events = Some(window);
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate().map_err(|e| usage(e.into()))?;
    Ok(cfg)
}

fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| anyhow::anyhow!("invalid count `{s}`: {e}")))
        .collect()
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { common, file } => {
            let cfg = build_config(&common)?;
            let TraceSource::Generate { config } = &cfg.source else {
                return Err(usage(anyhow::anyhow!("generate needs generator settings, not --trace")));
            };
            let data = generate_trace(config).map_err(|e| runtime(e.into()))?;
            fs::write(&file, write_trace(&data))
                .with_context(|| format!("writing {}", file.display()))
                .map_err(runtime)?;
            println!(
                "wrote {} ({} objects, {} events, seed {})",
                file.display(),
                data.network.len(),
                data.events.len(),
                config.seed
            );
            Ok(())
        }
        Command::Run { common } => {
            let cfg = build_config(&common)?;
            let out = run_experiment(&cfg).map_err(|e| runtime(e.into()))?;
            let mut files = Vec::new();
            for snapshot in &out.snapshots {
                files.push((
                    format!("snapshot_{}.csv", snapshot.at_event),
                    output::snapshot_csv(snapshot),
                ));
            }
            files.push(("trajectory.csv".to_string(), output::trajectory_csv(&out.trajectories)));
            files.push((
                "detection.csv".to_string(),
                output::detection_csv(&[&out.detection], cfg.theta),
            ));
            let dir = output::write_outputs("run", &cfg, &files).map_err(runtime)?;
            let accuracy = out
                .detection
                .accuracy
                .map(|a| format!("{a:.3}"))
                .unwrap_or_else(|| "n/a".to_string());
            println!(
                "run complete: {} snapshots, detection {}/{} (accuracy {}), outputs in {}",
                out.snapshots.len(),
                out.detection.detected,
                out.detection.true_malicious,
                accuracy,
                dir.display()
            );
            Ok(())
        }
        Command::Sweep { common, fractions } => {
            let mut cfg = build_config(&common)?;
            if let Some(fractions) = &fractions {
                cfg.sweep_fractions = fractions
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| usage(anyhow::anyhow!("--fractions: {e}")))?;
                cfg.validate().map_err(|e| usage(e.into()))?;
            }
            let rows = malicious_sweep(&cfg).map_err(|e| runtime(e.into()))?;
            let files = vec![("sweep.csv".to_string(), output::sweep_csv(&rows))];
            let dir = output::write_outputs("sweep", &cfg, &files).map_err(runtime)?;
            println!("sweep complete: {} cells, outputs in {}", rows.len(), dir.display());
            Ok(())
        }
        Command::Compare { common } => {
            let cfg = build_config(&common)?;
            let rows = scheme_comparison(&cfg).map_err(|e| runtime(e.into()))?;
            let files = vec![("comparison.csv".to_string(), output::comparison_csv(&rows))];
            let dir = output::write_outputs("compare", &cfg, &files).map_err(runtime)?;
            println!("comparison complete: {} rows, outputs in {}", rows.len(), dir.display());
            Ok(())
        }
        Command::Validate { trace } => match load_trace(&trace) {
            Ok(data) => {
                println!(
                    "{} is valid: {} objects, {} events",
                    trace.display(),
                    data.network.len(),
                    data.events.len()
                );
                Ok(())
            }
            Err(e) => Err(runtime(anyhow::anyhow!("{}: {e}", trace.display()))),
        },
    }
}
