use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use soq::run;
use soq::{RunConfig, Result, SoqError};
use soq_core::pipeline::SoQState;

#[derive(Parser)]
#[command(name = "soq", version, about = "Topological stream-of-quality analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic stage CSVs and their ground truth.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the Mapper graph of a point-cloud CSV (graph.json, graph.dot).
    Mapper {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rips persistence diagram of a point-cloud CSV (diagram.json).
    Persist {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = f64::INFINITY)]
        max_scale: f64,
        #[arg(long, default_value_t = 1)]
        max_dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage and write report.json and novelty.json.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Adopt novelty candidates under their ground-truth majority label.
        /// For headless testing only.
        #[arg(long)]
        oracle_labels: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API on 127.0.0.1.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn load(config: Option<&Path>) -> Result<RunConfig> {
    match config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output_dir.clone())
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { config, out } => {
            let cfg = load(config.as_deref())?;
            print_written(&run::gen(&cfg, &out_dir(&cfg, out))?);
        }
        Command::Mapper { input, config, out } => {
            let cfg = load(config.as_deref())?;
            let written = run::mapper(&input, &cfg.pipeline.mapper, &out_dir(&cfg, out))?;
            print_written(&written);
        }
        Command::Persist {
            input,
            config,
            max_scale,
            max_dim,
            out,
        } => {
            let cfg = load(config.as_deref())?;
            let metric = cfg.pipeline.mapper.metric;
            print_written(&[run::persist(&input, metric, max_scale, max_dim, &out_dir(&cfg, out))?]);
        }
        Command::Run {
            config,
            oracle_labels,
            out,
        } => {
            let cfg = load(config.as_deref())?;
            let (_, written) = run::run(&cfg, oracle_labels, &out_dir(&cfg, out))?;
            print_written(&written);
        }
        Command::Serve { config, port } => {
            let cfg = load(config.as_deref())?;
            let state = SoQState::new(cfg.pipeline.clone())?;
            let runtime = tokio::runtime::Runtime::new().map_err(|source| SoqError::Bind {
                addr: format!("127.0.0.1:{port}"),
                source,
            })?;
            runtime.block_on(soq::service::serve(state, port))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.body()).expect("error serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
