//! `cellnet`: regenerate figures, run parameter sweeps and check invariants.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use cellnet::experiments::output::{write_outputs, RunMetadata};
use cellnet::experiments::{merge_shards, run_figure, run_sweep, ExperimentConfig, FigureId, Quantity, ResultTable, Shard};
use cellnet::geometry::LayoutKind;
use cellnet::parallel::Execution;
use cellnet::validation::run_validation;

#[derive(Parser)]
#[command(name = "cellnet", version, about = "Downlink MIMO rate simulator for co-located, distributed and small-cell layouts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regenerate one figure as CSV.
    Figure {
        /// fig2, fig3, fig4, fig5a, fig5b, fig6, fig8 or fig9.
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate one quantity over the Cartesian product of the grid axes.
    Sweep {
        /// average_rate, ca_su_avg, da_su_avg_lb, psi_c, ... (default average_rate).
        #[arg(long)]
        quantity: Option<String>,
        /// Run only shard INDEX/COUNT of the grid.
        #[arg(long, value_name = "INDEX/COUNT")]
        shard: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Merge sweep shard CSVs back into grid order.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the quick invariant suite.
    Validate {
        #[arg(long, default_value_t = cellnet::experiments::config::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Flags shared by `figure` and `sweep`. Each overrides the config file.
#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    alpha: Option<Vec<f64>>,
    #[arg(long = "snr-db", value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    /// Users per cell, K.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    users: Option<Vec<usize>>,
    /// Antenna clusters per cell, L.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    clusters: Option<Vec<usize>>,
    /// Antennas per user and per cluster, N.
    #[arg(long = "user-antennas", value_delimiter = ',', num_args = 1..)]
    user_antennas: Option<Vec<usize>>,
    /// ca, da or smallcell.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    layout: Option<Vec<String>>,
    #[arg(long = "trials-pos")]
    trials_pos: Option<usize>,
    #[arg(long = "trials-layout")]
    trials_layout: Option<usize>,
    #[arg(long = "trials-chan")]
    trials_chan: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `results`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full-scale parameters instead of the desk-scale defaults.
    #[arg(long)]
    full: bool,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, Execution)> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        let g = &mut cfg.grid;
        if self.alpha.is_some() {
            g.alpha = self.alpha.clone();
        }
        if self.snr_db.is_some() {
            g.snr_db = self.snr_db.clone();
        }
        if self.users.is_some() {
            g.users = self.users.clone();
        }
        if self.clusters.is_some() {
            g.clusters = self.clusters.clone();
        }
        if self.user_antennas.is_some() {
            g.user_antennas = self.user_antennas.clone();
        }
        if let Some(l) = &self.layout {
            g.layout = Some(l.iter().map(|s| s.parse::<LayoutKind>()).collect::<Result<_, _>>()?);
        }
        cfg.draws.positions = self.trials_pos.or(cfg.draws.positions);
        cfg.draws.layouts = self.trials_layout.or(cfg.draws.layouts);
        cfg.draws.channels = self.trials_chan.or(cfg.draws.channels);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.out = self.out.clone().or(cfg.out);
        cfg.full |= self.full;
        cfg.check()?;
        let exec = if self.sequential { Execution::Sequential } else { Execution::Parallel };
        Ok((cfg, exec))
    }
}

fn emit(table: &ResultTable, cfg: &ExperimentConfig, exec: Execution, started: Instant) -> Result<()> {
    let meta = RunMetadata::new(table, cfg, exec == Execution::Parallel, started.elapsed().as_secs_f64());
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    for p in write_outputs(table, &meta, &dir)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Figure { id, common } => {
            let (mut cfg, exec) = common.resolve()?;
            let id: FigureId = id.parse()?;
            cfg.figure = Some(id);
            let started = Instant::now();
            let table = run_figure(id, &cfg, exec)?;
            emit(&table, &cfg, exec, started)?;
        }
        Command::Sweep { quantity, shard, common } => {
            let (mut cfg, exec) = common.resolve()?;
            if let Some(q) = quantity {
                cfg.sweep.quantity = q.parse::<Quantity>()?;
            }
            if let Some(s) = shard {
                cfg.sweep.shard = Some(s.parse::<Shard>()?);
            }
            let started = Instant::now();
            let table = run_sweep(&cfg, exec)?;
            emit(&table, &cfg, exec, started)?;
        }
        Command::Merge { inputs, out } => {
            let shards = inputs.iter().map(|p| ResultTable::load_csv(p)).collect::<Result<Vec<_>, _>>()?;
            merge_shards(&shards)?.save_csv(&out)?;
            println!("{}", out.display());
        }
        Command::Validate { seed } => {
            let checks = run_validation(seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
