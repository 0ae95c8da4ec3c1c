use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cosearch::commands;
use cosearch::config::ExperimentConfig;
use cosearch::Error;

#[derive(Parser)]
#[command(
    name = "cosearch",
    about = "Correlational object search in simulated households",
    version
)]
struct Cli {
    /// Experiment configuration file (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the training / world seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the per-episode step limit.
    #[arg(long, global = true)]
    limit: Option<usize>,

    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the link predictor on the corpus and write a checkpoint.
    Train,
    /// Evaluate checkpoint link accuracy over the corpus graph.
    EvalLinks,
    /// Generate one household world file (plus an SVG render).
    GenWorld {
        /// Target object category to hide in the world.
        #[arg(long)]
        target: Option<String>,
        /// Output world file path.
        #[arg(long)]
        world_out: Option<PathBuf>,
    },
    /// Run the (seed × policy × target) search benchmark.
    SearchBench {
        /// Restrict to one policy (gnn, random, frontier, oracle).
        #[arg(long)]
        policy: Option<String>,
    },
    /// Parse, plan, and execute one instruction.
    Instruct {
        /// The instruction, quoted.
        instruction: String,
        /// World file to run in (generated when omitted).
        #[arg(long)]
        world: Option<PathBuf>,
    },
    /// Re-check a recorded episode trace against its world.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        world: PathBuf,
        /// Write an SVG render of the trajectory.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_env(),
    };
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
        cfg.world.seed_start = seed;
    }
    if let Some(limit) = cli.limit {
        cfg.search.step_limit = limit;
    }
    if let Some(out) = &cli.out {
        cfg.paths.checkpoint = out.join(
            cfg.paths
                .checkpoint
                .file_name()
                .unwrap_or_else(|| "model.ckpt".as_ref()),
        );
        cfg.paths.out_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Train => {
            commands::cmd_train(&cfg)?;
        }
        Command::EvalLinks => {
            commands::cmd_eval_links(&cfg)?;
        }
        Command::GenWorld { target, world_out } => {
            let target = target
                .clone()
                .or_else(|| cfg.search.targets.first().cloned())
                .ok_or_else(|| Error::Config("no target configured".into()))?;
            let seed = cli.seed.unwrap_or(cfg.world.seed_start);
            commands::cmd_gen_world(&cfg, seed, &target, world_out.as_deref())?;
        }
        Command::SearchBench { policy } => {
            if let Some(p) = policy {
                p.parse::<cosearch::search::Policy>()
                    .map_err(|e| Error::Config(e.to_string()))?;
                cfg.search.policies = vec![p.clone()];
            }
            commands::cmd_search_bench(&cfg)?;
        }
        Command::Instruct { instruction, world } => {
            let report = commands::cmd_instruct(&cfg, instruction, world.as_deref())?;
            if !report.exec.exe_success {
                return Err(Error::Execution {
                    step: report.exec.steps.len().saturating_sub(1),
                    op: report
                        .exec
                        .steps
                        .last()
                        .map(|s| s.op.clone())
                        .unwrap_or_default(),
                    msg: "instruction did not complete".into(),
                });
            }
        }
        Command::Replay { trace, world, svg } => {
            commands::cmd_replay(trace, world, &cfg.paths.ontology, svg.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
