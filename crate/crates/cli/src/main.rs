//! `handq` — batch driver for the hand-design QUBO pipeline.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use handq_core::error::{Error, Result};

use config::{parse_angle, RunConfig};

/// Exit codes: 0 success, 2 validation, 3 parse, 4 I/O.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 4,
        Error::Parse(_) | Error::Json(_) => 3,
        _ => 2,
    }
}

#[derive(Debug, Parser)]
#[command(name = "handq", version, about = "QUBO-based kinematic hand design selection")]
struct Cli {
    /// JSON config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides config and the HANDQ_OUT_DIR env var).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Bound internal parallelism to this many threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Joint grid resolution in radians; accepts "pi/36"-style literals.
    #[arg(long, global = true)]
    resolution: Option<String>,

    /// Voxel edge length.
    #[arg(long, global = true)]
    voxel_size: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PenaltyArgs {
    #[arg(long)]
    lambda_t: Option<f64>,
    #[arg(long)]
    lambda_i: Option<f64>,
    #[arg(long)]
    lambda_m: Option<f64>,
    #[arg(long)]
    lambda_r: Option<f64>,
    #[arg(long)]
    lambda_l: Option<f64>,
    #[arg(long)]
    lambda_rl: Option<f64>,
}

#[derive(Debug, Args)]
struct SaArgs {
    /// Number of independent annealing reads.
    #[arg(long)]
    reads: Option<usize>,
    /// Metropolis sweeps per read.
    #[arg(long)]
    sweeps: Option<usize>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta_initial: Option<f64>,
    #[arg(long)]
    beta_final: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep all candidates and write the evaluation table.
    Evaluate {
        /// Override the maximum hand DoF used in the DoF normalization.
        #[arg(long)]
        d_h: Option<u32>,
    },
    /// Assemble the QUBO from an evaluation file (COO + JSON exports).
    Build {
        /// Evaluation JSON produced by `evaluate`.
        #[arg(long)]
        evaluation: Option<PathBuf>,
        #[command(flatten)]
        penalties: PenaltyArgs,
    },
    /// Run the simulated-annealing sampler on a QUBO file.
    Solve {
        /// QUBO file (.json or .coo).
        #[arg(long)]
        qubo: Option<PathBuf>,
        #[command(flatten)]
        sa: SaArgs,
    },
    /// Exhaustively enumerate the feasible space.
    Oracle {
        #[arg(long)]
        qubo: Option<PathBuf>,
        /// Also sample this many random infeasible assignments and check
        /// none undercuts the feasible minimum.
        #[arg(long)]
        check_infeasible: Option<usize>,
        #[command(flatten)]
        sa: SaArgs,
    },
    /// Repeated solves across read counts; writes the band CSV.
    Band {
        #[arg(long)]
        qubo: Option<PathBuf>,
        /// Comma-separated read counts, e.g. "100,1000,5000".
        #[arg(long, default_value = "100,1000,5000")]
        nor_list: String,
        /// Runs per read count.
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[command(flatten)]
        sa: SaArgs,
    },
    /// Dump a candidate's reachable voxels (or raw fingertip points).
    Export {
        /// Candidate id, e.g. "t1" or "l7".
        #[arg(long)]
        candidate: String,
        /// Dump raw fingertip points instead of voxel cells.
        #[arg(long)]
        points: bool,
    },
}

fn apply_penalty_args(cfg: &mut RunConfig, p: &PenaltyArgs) {
    if let Some(v) = p.lambda_t {
        cfg.penalties.lambda_t = v;
    }
    if let Some(v) = p.lambda_i {
        cfg.penalties.lambda_i = v;
    }
    if let Some(v) = p.lambda_m {
        cfg.penalties.lambda_m = v;
    }
    if let Some(v) = p.lambda_r {
        cfg.penalties.lambda_r = v;
    }
    if let Some(v) = p.lambda_l {
        cfg.penalties.lambda_l = v;
    }
    if let Some(v) = p.lambda_rl {
        cfg.penalties.lambda_rl = v;
    }
}

fn apply_sa_args(cfg: &mut RunConfig, s: &SaArgs) {
    if let Some(v) = s.reads {
        cfg.sa.num_reads = v;
    }
    if let Some(v) = s.sweeps {
        cfg.sa.sweeps_per_read = v;
    }
    if let Some(v) = s.seed {
        cfg.sa.seed = v;
    }
    if let Some(v) = s.beta_initial {
        cfg.sa.beta_initial = v;
    }
    if let Some(v) = s.beta_final {
        cfg.sa.beta_final = v;
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }

    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(res) = &cli.resolution {
        cfg.resolution = parse_angle(res)?;
    }
    if let Some(v) = cli.voxel_size {
        cfg.voxel_size = v;
    }

    let default_eval = cfg.output_dir.join("evaluation.json");
    let default_qubo = cfg.output_dir.join("qubo.json");

    match &cli.command {
        Command::Evaluate { d_h } => {
            if d_h.is_some() {
                cfg.d_h_override = *d_h;
            }
            commands::cmd_evaluate(&cfg)
        }
        Command::Build {
            evaluation,
            penalties,
        } => {
            apply_penalty_args(&mut cfg, penalties);
            commands::cmd_build(&cfg, evaluation.as_deref().unwrap_or(&default_eval))
        }
        Command::Solve { qubo, sa } => {
            apply_sa_args(&mut cfg, sa);
            commands::cmd_solve(&cfg, qubo.as_deref().unwrap_or(&default_qubo))
        }
        Command::Oracle {
            qubo,
            check_infeasible,
            sa,
        } => {
            apply_sa_args(&mut cfg, sa);
            commands::cmd_oracle(&cfg, qubo.as_deref().unwrap_or(&default_qubo), *check_infeasible)
        }
        Command::Band {
            qubo,
            nor_list,
            runs,
            sa,
        } => {
            apply_sa_args(&mut cfg, sa);
            let nors: Result<Vec<usize>> = nor_list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("NoR list entry {t:?}: {e}")))
                })
                .collect();
            commands::cmd_band(&cfg, qubo.as_deref().unwrap_or(&default_qubo), &nors?, *runs)
        }
        Command::Export { candidate, points } => commands::cmd_export(&cfg, candidate, *points),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
