use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use openloop::bounds::{bound_curve, check_bandit_consistency, parse_depths, parse_n_grid, DEFAULT_RHO};
use openloop::harness::{
    aggregate, episode_seed, read_episodes, run_grid, write_csv, Environment, ExperimentConfig, SMOKE_EPISODES,
};

#[derive(Parser)]
#[command(name = "openloop", version, about = "Open-loop tree search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write one CSV row per episode.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Episodes per (q, algorithm) cell.
        #[arg(long, conflicts_with = "smoke")]
        episodes: Option<usize>,
        /// Shorthand for a 20-episode run.
        #[arg(long)]
        smoke: bool,
        /// Master seed override.
        #[arg(long, env = "OPENLOOP_SEED")]
        seed: Option<u64>,
        /// Also write one row per real step with the reason for any re-plan.
        #[arg(long)]
        steps_out: Option<PathBuf>,
        /// Write the first episode's initial tree as JSON.
        #[arg(long)]
        dump_tree: Option<PathBuf>,
    },
    /// Summarize an episode CSV per (env, algorithm, q).
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit failure-probability bound curves as CSV (n, d, bound, vacuous).
    Bounds {
        #[arg(long, default_value_t = DEFAULT_RHO)]
        rho: f64,
        #[arg(long, default_value_t = 0.27)]
        delta: f64,
        /// `0..3` or a comma list.
        #[arg(long, default_value = "0..3")]
        depths: String,
        /// Comma list, or `lo..hi[:points_per_decade]` on a log scale.
        #[arg(long, default_value = "1e1..1e9:10")]
        n_grid: String,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibrate rho on a two-armed Bernoulli bandit and check it on fresh trials.
    Calibrate {
        #[arg(long, default_value_t = 0.27)]
        gap: f64,
        #[arg(long, default_value = "50,100,200,400")]
        n_grid: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0.7)]
        exploration: f64,
        /// Normal quantile of the upper confidence limit used for calibration.
        #[arg(long, default_value_t = 3.0)]
        z: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, workers, episodes, smoke, seed, steps_out, dump_tree } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if smoke {
                cfg.episodes = SMOKE_EPISODES;
            }
            if let Some(e) = episodes {
                cfg.episodes = e;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let out = out.or_else(|| cfg.output.clone()).context("no output path: pass --out or set `output`")?;
            if let Some(path) = dump_tree {
                let env = Environment::new(&cfg.environment, cfg.q_grid[0])?;
                let tree = env.initial_tree(&cfg.planner, episode_seed(cfg.seed, cfg.q_grid[0], 0))?;
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                serde_json::to_writer_pretty(file, &tree)?;
            }
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(w) = workers {
                if w == 0 {
                    bail!("--workers must be at least 1");
                }
                pool = pool.num_threads(w);
            }
            let result = pool.build()?.install(|| run_grid(&cfg, steps_out.is_some()))?;
            write_csv(&out, &result.episodes)?;
            log::info!("wrote {} rows to {}", result.episodes.len(), out.display());
            if let Some(path) = steps_out {
                write_csv(&path, &result.steps)?;
            }
        }
        Command::Aggregate { input, out } => {
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let rows = read_episodes(file).with_context(|| format!("reading {}", input.display()))?;
            let summary = aggregate(&rows);
            write_csv(&out, &summary)?;
            log::info!("{} groups from {} rows", summary.len(), rows.len());
        }
        Command::Bounds { rho, delta, depths, n_grid, out } => {
            if !(rho >= 0.0 && rho.is_finite()) {
                bail!("--rho must be a finite non-negative number");
            }
            if !(0.0..=1.0).contains(&delta) {
                bail!("--delta must lie in [0, 1]");
            }
            let depths = parse_depths(&depths).context("--depths")?;
            let grid = parse_n_grid(&n_grid).context("--n-grid")?;
            if let Some(&n) = grid.iter().find(|&&n| n < 2) {
                bail!("--n-grid: budget {n} must exceed 1");
            }
            let rows = bound_curve(rho, delta, &depths, &grid);
            match out {
                Some(path) => write_csv(&path, &rows)?,
                None => {
                    let mut w = csv::Writer::from_writer(io::stdout().lock());
                    for row in &rows {
                        w.serialize(row)?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Calibrate { gap, n_grid, trials, exploration, z, seed } => {
            let grid = parse_n_grid(&n_grid).context("--n-grid")?;
            if trials == 0 {
                bail!("--trials must be at least 1");
            }
            let (calibration, rows) =
                check_bandit_consistency(gap, &grid, exploration, trials, seed, seed.wrapping_add(1), z)?;
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "rho = {:.4}", calibration.rho)?;
            writeln!(stdout, "n,observed,bound,holds")?;
            for r in rows {
                writeln!(stdout, "{},{},{},{}", r.n, r.observed, r.bound, r.holds)?;
            }
        }
    }
    Ok(())
}
