use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spectral_gcn::data::{generate_spiral, SpiralConfig};
use spectral_gcn::experiment::{
    load_dataset, rank_sweep, run_prepared, smoother_sweep, sweep_csv, timing_report, Architecture,
    ExperimentConfig,
};
use spectral_gcn::{Error, SmootherKind};

#[derive(Parser)]
#[command(name = "spectral-gcn", version, about = "Spectral GCN experiments on graphs and hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a batch of runs and write per-run accuracies as CSV.
    Train(Common),
    /// Train low-rank networks at several ranks from one eigenbasis.
    RankSweep {
        #[command(flatten)]
        common: Common,
        /// Ascending list of ranks.
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
        /// Low-rank architectures to train at each rank.
        #[arg(long, value_delimiter = ',', default_value = "lgcn,rgcn")]
        archs: Vec<String>,
    },
    /// Train one configuration under several smoothers.
    SmootherSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "none,identity,hypergraph,combined")]
        smoothers: Vec<String>,
    },
    /// Compare the naive dense full-rank kernel with the structured one.
    Timing(Common),
    /// Write a spiral point cloud as `x,y,z,label` lines.
    GenSpiral {
        #[arg(long, default_value_t = 2000)]
        points_per_orb: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// spiral, cars, mushrooms or csv:<path>
    #[arg(long)]
    dataset: Option<String>,
    /// Directory holding car.data, agaricus-lepiota.data and the index files.
    #[arg(long)]
    data_dir: Option<String>,
    /// gcn, gcn-naive, lgcn or rgcn
    #[arg(long)]
    arch: Option<String>,
    /// linear, quadratic, pinv or poly:a0,a1,...
    #[arg(long)]
    filter: Option<String>,
    #[arg(long)]
    rank: Option<String>,
    /// none, identity, hypergraph or combined
    #[arg(long)]
    smoother: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    /// Hidden layer width N₁.
    #[arg(long)]
    hidden: Option<String>,
    /// Index file (1-based), `stratified:K` or `resample:K`.
    #[arg(long)]
    train_indices: Option<String>,
    #[arg(long)]
    lambda_n: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Common {
    /// Loads the config file, then applies flags on top.
    fn config(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).map_err(|e| format!("config: {e}"))?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("dataset", &self.dataset),
            ("data_dir", &self.data_dir),
            ("arch", &self.arch),
            ("filter", &self.filter),
            ("rank", &self.rank),
            ("smoother", &self.smoother),
            ("runs", &self.runs),
            ("seed", &self.seed),
            ("lr", &self.lr),
            ("iters", &self.iters),
            ("rho", &self.rho),
            ("hidden", &self.hidden),
            ("train_indices", &self.train_indices),
            ("lambda_n", &self.lambda_n),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| format!("config: --{}: {e}", key.replace('_', "-")))?;
            }
        }
        Ok(cfg)
    }

    fn validated(&self) -> Result<ExperimentConfig, String> {
        let cfg = self.config()?;
        cfg.validate().map_err(|e| format!("config: {e}"))?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("output: {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn stage<T>(name: &str, r: Result<T, Error>) -> Result<T, String> {
    r.map_err(|e| format!("{name}: {e}"))
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Train(common) => {
            let cfg = common.validated()?;
            let prepared = stage("load", load_dataset(&cfg))?;
            let res = stage("experiment", run_prepared(&cfg, &prepared))?;
            if res.summary.diverged > 0 {
                eprintln!("warning: {} runs diverged and were excluded from the mean", res.summary.diverged);
            }
            emit(cfg.out.as_deref(), &res.to_csv())
        }
        Command::RankSweep { common, ranks, archs } => {
            let cfg = common.config()?;
            let archs = archs
                .iter()
                .map(|a| a.parse::<Architecture>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("config: {e}"))?;
            let prepared = stage("load", load_dataset(&cfg))?;
            let rows = stage("rank sweep", rank_sweep(&cfg, &prepared, &ranks, &archs))?;
            emit(cfg.out.as_deref(), &sweep_csv(&rows))
        }
        Command::SmootherSweep { common, smoothers } => {
            let cfg = common.config()?;
            let smoothers = smoothers
                .iter()
                .map(|s| s.parse::<SmootherKind>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("config: {e}"))?;
            let prepared = stage("load", load_dataset(&cfg))?;
            let rows = stage("smoother sweep", smoother_sweep(&cfg, &prepared, &smoothers))?;
            emit(cfg.out.as_deref(), &sweep_csv(&rows))
        }
        Command::Timing(common) => {
            let cfg = common.config()?;
            let prepared = stage("load", load_dataset(&cfg))?;
            let report = stage("timing", timing_report(&cfg, &prepared))?;
            if !report.structured_faster() {
                eprintln!("warning: structured path was not faster than the naive one");
            }
            emit(cfg.out.as_deref(), &report.to_csv())
        }
        Command::GenSpiral { points_per_orb, seed, out } => {
            let sc = SpiralConfig { points_per_orb, seed, ..Default::default() };
            let (points, labels) = stage("spiral", generate_spiral(&sc))?;
            let mut s = String::with_capacity(points.rows() * 48);
            for (i, label) in labels.iter().enumerate() {
                let p = points.row(i);
                let _ = writeln!(s, "{},{},{},{}", p[0], p[1], p[2], label + 1);
            }
            emit(out.as_deref(), &s)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
