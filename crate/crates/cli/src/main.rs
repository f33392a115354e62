use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gibbseg_cli::commands;
use gibbseg_cli::config::{parse_config, ExperimentConfig};

/// Simulation and verification runner for planar Gibbs segment processes.
#[derive(Parser)]
#[command(name = "gibbseg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to a key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replicate fan-out (0 = all cores).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Output directory (defaults to the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GnzArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Negative control: accept every death proposal unconditionally, which
    /// a healthy GNZ check must flag. Only available in debug builds.
    #[cfg(debug_assertions)]
    #[arg(long)]
    sabotage_death: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one chain and write the final configuration.
    Sample(RunArgs),
    /// Check the GNZ balance equations (exit code 3 on failure).
    Gnz(GnzArgs),
    /// Evaluate the analytic distance bound along the sequence.
    Bound(RunArgs),
    /// Full experiment: bounds plus simulated innovation distances.
    Experiment(RunArgs),
}

fn load_config(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), String> {
    let source = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read config {}: {e}", args.config.display()))?;
    let mut cfg = parse_config(&source).map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(par) = args.parallelism {
        cfg.parallelism = par;
    }
    let out = args.out.clone().unwrap_or_else(|| cfg.out.clone());
    Ok((cfg, out))
}

fn setup_pool(parallelism: usize) {
    if parallelism > 0 {
        // ignore failures from double initialization (tests call run() twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run_args, kind): (&RunArgs, &str) = match &cli.command {
        Command::Sample(a) => (a, "sample"),
        Command::Gnz(a) => (&a.run, "gnz"),
        Command::Bound(a) => (a, "bound"),
        Command::Experiment(a) => (a, "experiment"),
    };
    let (cfg, out) = match load_config(run_args) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    setup_pool(cfg.parallelism);

    let result = match &cli.command {
        Command::Sample(_) => commands::cmd_sample(&cfg, &out),
        Command::Gnz(_args) => {
            #[cfg(debug_assertions)]
            let sabotage = _args.sabotage_death;
            #[cfg(not(debug_assertions))]
            let sabotage = false;
            commands::cmd_gnz(&cfg, &out, sabotage)
        }
        Command::Bound(_) => commands::cmd_bound(&cfg, &out),
        Command::Experiment(_) => commands::cmd_experiment(&cfg, &out),
    };
    match result {
        Ok(code) => {
            let _ = kind;
            ExitCode::from(code as u8)
        }
        Err(err) => {
            eprintln!("{kind} failed: {err:#}");
            ExitCode::from(1)
        }
    }
}
