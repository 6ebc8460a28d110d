use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use synthprune::analysis::{connections_to_text, dag_prune_network, find_redundant};
use synthprune::compression::{InitStrategy, Strategy};
use synthprune::data::{load_csv, prepare, SplitDataset};
use synthprune::harness::{
    load_results, report, run_experiment, similarity_report, sweep, worker_count, ExperimentConfig, RunResult,
    RunSpec,
};
use synthprune::network::{ConnectionMask, MaskedNetwork};
use synthprune::{Error, Result};

#[derive(Parser)]
#[command(name = "synthprune", version, about = "Sparse network synthesis and pruning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one network and write its result files.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Seed to run; defaults to the first entry of `seeds`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every strategy × threshold × seed of the grid.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Summary tables and box-plot data from a results directory.
    Report {
        /// Directory holding `runs/*.json` (default: `output_dir`).
        #[arg(long)]
        results: Option<PathBuf>,
        /// Threshold for the means table (default: the largest present).
        #[arg(long)]
        threshold: Option<f64>,
        /// Where to write the tables (default: `<results>/report`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Similarity matrix over final masks of selected runs.
    Similarity {
        #[arg(long)]
        results: PathBuf,
        /// Comma-separated run ids; default is the best run of each strategy.
        #[arg(long, value_delimiter = ',')]
        runs: Vec<String>,
        /// Restrict the default selection to this threshold.
        #[arg(long)]
        threshold: Option<f64>,
        /// Output CSV (default: `<results>/report/similarity.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove connections on no input-to-output path from a saved network,
    /// mask or run result.
    DagPrune {
        input: PathBuf,
        /// Write the pruned network or mask here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Strategy for `train`.
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long = "sparsity_threshold")]
    sparsity_threshold: Option<f64>,
    /// Range or list, e.g. `0..50` or `1,4,9`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long = "layer_widths", value_delimiter = ',')]
    layer_widths: Option<Vec<usize>>,
    #[arg(long = "learning_rate")]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long = "batch_size")]
    batch_size: Option<usize>,
    /// Focal junctures per strategic synthesis.
    #[arg(long = "n_targets")]
    n_targets: Option<usize>,
    #[arg(long = "max_resamples")]
    max_resamples: Option<usize>,
    #[arg(long = "init_strategy")]
    init_strategy: Option<InitStrategy>,
    /// Connections per random synthesis.
    #[arg(long = "random_count")]
    random_count: Option<usize>,
    #[arg(long = "cycle_period")]
    cycle_period: Option<usize>,
    /// No structural changes in the last `stop_delay` epochs.
    #[arg(long = "stop_delay")]
    stop_delay: Option<usize>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long = "output_dir")]
    output_dir: Option<PathBuf>,
    #[arg(long = "split_ratio")]
    split_ratio: Option<f64>,
    #[arg(long = "split_seed")]
    split_seed: Option<u64>,
    /// Strategies for `sweep`.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    /// Sparsity thresholds for `sweep`.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
}

macro_rules! apply {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $(if let Some(v) = $args.$field { $cfg.$field = v; })*
    };
}

impl ConfigArgs {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let a = self;
        apply!(
            cfg, a, strategy, sparsity_threshold, seeds, layer_widths, learning_rate, epochs, batch_size,
            n_targets, max_resamples, init_strategy, random_count, cycle_period, stop_delay, dataset,
            output_dir, split_ratio, split_seed, strategies, thresholds
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_data(cfg: &ExperimentConfig) -> Result<SplitDataset> {
    prepare(&load_csv(&cfg.dataset)?, cfg.split_ratio, cfg.split_seed)
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { cfg, seed } => {
            let cfg = cfg.resolve()?;
            let seed = match seed {
                Some(s) => s,
                None => cfg.seed_list()?[0],
            };
            let data = load_data(&cfg)?;
            let spec = RunSpec::new(&cfg, cfg.strategy, cfg.sparsity_threshold, seed);
            let result = run_experiment(&spec, &data)?;
            for p in result.write_with_artifacts(&cfg.output_dir.join("runs"))? {
                println!("wrote {}", p.display());
            }
            match (&result.summary, &result.error) {
                (_, Some(e)) => println!("{}: failed: {e}", result.id),
                (Some(s), None) => println!(
                    "{}: val_accuracy {:.4} val_auc {:.4} sparsity {:.4}",
                    result.id, s.final_val_accuracy, s.final_val_auc, s.final_sparsity
                ),
                (None, None) => {}
            }
        }
        Command::Sweep { cfg } => {
            let cfg = cfg.resolve()?;
            let data = load_data(&cfg)?;
            let workers = worker_count();
            let outcome = sweep(&cfg, &data, &cfg.output_dir, workers)?;
            let failed = outcome.results.iter().filter(|r| r.error.is_some()).count();
            println!(
                "{} runs ({failed} failed) on {workers} workers; summary in {}",
                outcome.results.len(),
                cfg.output_dir.join("summary.csv").display()
            );
        }
        Command::Report { results, threshold, out } => {
            let results = results.unwrap_or_else(|| ExperimentConfig::default().output_dir);
            let out = out.unwrap_or_else(|| results.join("report"));
            for p in report(&results, &out, threshold)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Similarity { results, runs, threshold, out } => {
            let loaded = load_results(&results)?;
            let m = similarity_report(&loaded, &runs, threshold)?;
            let out = out.unwrap_or_else(|| results.join("report").join("similarity.csv"));
            write(&out, &m.to_csv())?;
            println!("wrote {}", out.display());
            if let Some(v) = m.max_off_diagonal() {
                println!("max off-diagonal {} similarity: {v:.4}", m.metric);
            }
        }
        Command::DagPrune { input, out } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
            let (pruned, removed) = if text.trim_start().starts_with('{') {
                let r = RunResult::from_json(&text)?;
                let (net, removed) = dag_prune_network(&MaskedNetwork::from_text(&r.final_network)?);
                (net.to_text(), removed)
            } else if text.starts_with("synthprune-mask") {
                let mask = ConnectionMask::from_text(&text)?;
                let removed = find_redundant(&mask);
                (synthprune::analysis::dag_prune(&mask).to_text(), removed)
            } else {
                let (net, removed) = dag_prune_network(&MaskedNetwork::from_text(&text)?);
                (net.to_text(), removed)
            };
            eprintln!("{} connections removed", removed.len());
            print!("{}", connections_to_text(&removed));
            if let Some(out) = out {
                write(&out, &pruned)?;
                eprintln!("wrote {}", out.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
