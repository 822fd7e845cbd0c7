use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use neurograph::experiment::{analyze_snapshot_dir, default_output, inspect_graph, ExperimentConfig, ExperimentError, LayerAnalysis, MetricReport};
use neurograph::run_experiment;

const EXIT_CONFIG: u8 = 2;
const EXIT_PIPELINE: u8 = 3;

/// Activation-pattern graphs and entropy for MLP training runs.
#[derive(Parser)]
#[command(name = "neurograph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train, snapshot and analyze one experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's `output_dir`, else `./run`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute every report from a snapshot directory.
    Metrics {
        #[arg(long)]
        snapshots: PathBuf,
        /// Output directory (default: the directory containing the snapshots).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the pattern graph and community metrics of one layer.
    InspectGraph {
        /// Hidden layer, counted from 1.
        #[arg(long)]
        layer: usize,
        /// Snapshot, counted from 1.
        #[arg(long)]
        snapshot: usize,
        #[arg(long, default_value = "run/snapshots")]
        snapshots: PathBuf,
    },
}

fn configure_threads() -> Result<(), ExperimentError> {
    let Ok(raw) = std::env::var("NEUROGRAPH_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ExperimentError::Config(format!("NEUROGRAPH_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
}

fn summarize(report: &MetricReport, out: &Path) {
    let k = report.snapshot_count();
    println!(
        "{} snapshots, train accuracy {:.4} -> {:.4}, test accuracy {:.4} -> {:.4}",
        k,
        report.train_accuracy[0],
        report.train_accuracy[k - 1],
        report.test_accuracy[0],
        report.test_accuracy[k - 1]
    );
    if let Some(e) = report.model_entropy_series().into_iter().collect::<Option<Vec<f64>>>() {
        let p = neurograph::pearson(&e, &report.train_accuracy).ok();
        let s = neurograph::spearman(&e, &report.train_accuracy).ok();
        println!("entropy vs train accuracy: pcc {} scc {}", fmt(p), fmt(s));
    }
    println!("method              layer  pcc      scc");
    for row in report.table5().rows {
        println!("{:<19} {:<6} {:<8} {}", row.method.name(), row.layer, fmt(row.pcc), fmt(row.scc));
    }
    println!("reports written to {}", out.display());
}

fn print_layer(a: &LayerAnalysis, layer: usize, snapshot: usize) {
    println!("layer {layer} snapshot {snapshot}");
    println!("nodes {} edges {} total weight {}", a.node_count, a.edge_count, a.total_weight);
    println!("louvain communities {} (q {}, mean size {})", a.louvain_communities.map_or("NA".into(), |c| c.to_string()), fmt(a.louvain_q), fmt(a.avg_community_size));
    println!("community sizes {:?}", a.community_sizes);
    println!("klb modularity {} cut {}", fmt(a.klb), fmt(a.klb_cut));
    println!("no-overlap {} unweighted-overlap {} weighted-overlap {}", fmt(a.no_overlap), fmt(a.unweighted_overlap), fmt(a.weighted_overlap));
}

fn execute(cli: Cli) -> Result<(), ExperimentError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let out = out.unwrap_or_else(|| default_output(&config));
            let report = run_experiment(&config, &out)?;
            summarize(&report, &out);
        }
        Command::Metrics { snapshots, out } => {
            let out = out.unwrap_or_else(|| snapshots.parent().map(Path::to_path_buf).unwrap_or_default());
            let report = analyze_snapshot_dir(&snapshots, &out)?;
            summarize(&report, &out);
        }
        Command::InspectGraph { layer, snapshot, snapshots } => {
            let a = inspect_graph(&snapshots, layer, snapshot)?;
            print_layer(&a, layer, snapshot);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_PIPELINE })
        }
    }
}
