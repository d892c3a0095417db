use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pace::config::ExperimentConfig;
use pace::error::{Error, Result};
use pace::experiment::{evaluate, resolve_workers, run_experiment_with, RunReport};
use pace::io;
use pace_core::graph::{generate_sbm, planted_partition_params};
use pace_core::SbmParams;

#[derive(Parser)]
#[command(name = "pace", version, about = "Divide-and-conquer community detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write a CSV report.
    Run {
        config: PathBuf,
        /// Worker threads (overrides the config and PACE_WORKERS).
        #[arg(long)]
        workers: Option<usize>,
        /// Report path (overrides the config; stdout when neither is set).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave out the timing columns.
        #[arg(long)]
        metrics_only: bool,
        /// Directory for per-seed label files.
        #[arg(long)]
        labels_dir: Option<PathBuf>,
        /// Directory for per-seed clustering-matrix files (PACE only).
        #[arg(long)]
        chat_dir: Option<PathBuf>,
    },
    /// Sample a planted-partition graph.
    GenSbm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rho_a: f64,
        #[arg(long)]
        r: f64,
        /// Comma-separated block proportions; balanced when absent.
        #[arg(long, value_delimiter = ',')]
        pi: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Compare a label file against a reference label file.
    Eval { labels: PathBuf, truth: PathBuf },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_owned(), source }
}

fn write_report(report: &RunReport, out: Option<&Path>, metrics_only: bool) -> Result<()> {
    let write = |w: &mut dyn Write| if metrics_only { report.write_metrics_csv(w) } else { report.write_csv(w) };
    match out {
        Some(path) => write(&mut create(path)?),
        None => write(&mut std::io::stdout().lock()),
    }
}

fn run(
    config: &Path,
    workers: Option<usize>,
    out: Option<PathBuf>,
    metrics_only: bool,
    labels_dir: Option<PathBuf>,
    chat_dir: Option<PathBuf>,
) -> Result<()> {
    let config = ExperimentConfig::from_file(config)?;
    let workers = resolve_workers(workers, &config)?;
    for dir in labels_dir.iter().chain(&chat_dir) {
        std::fs::create_dir_all(dir).map_err(io_at(dir))?;
    }
    let report = run_experiment_with(&config, workers, |outcome| {
        let seed = outcome.row.seed;
        if let Some(dir) = &labels_dir {
            let path = dir.join(format!("seed-{seed}.labels"));
            io::write_labels(&outcome.membership, create(&path)?).map_err(io_at(&path))?;
        }
        if let (Some(dir), Some(chat)) = (&chat_dir, &outcome.chat) {
            io::emit_chat_heatmap_data(chat, &dir.join(format!("seed-{seed}.chat")))?;
        }
        Ok(())
    })?;
    write_report(&report, out.or(config.output.clone()).as_deref(), metrics_only)
}

#[allow(clippy::too_many_arguments)]
fn gen_sbm(
    n: usize,
    k: usize,
    rho_a: f64,
    r: f64,
    pi: Option<Vec<f64>>,
    seed: u64,
    edges: &Path,
    labels: Option<&Path>,
) -> Result<()> {
    let pi = pi.unwrap_or_else(|| SbmParams::balanced(k));
    if pi.len() != k {
        return Err(Error::Usage(format!("--pi has {} entries, expected {k}", pi.len())));
    }
    let params = planted_partition_params(1.0, rho_a, r, pi).map_err(|e| Error::Usage(e.to_string()))?;
    let lg = generate_sbm(&params, n, seed).map_err(|e| Error::Usage(e.to_string()))?;
    io::write_edge_list(&lg.graph, create(edges)?).map_err(io_at(edges))?;
    if let Some(path) = labels {
        io::write_labels(&lg.membership(), create(path)?).map_err(io_at(path))?;
    }
    Ok(())
}

fn eval(labels: &Path, truth: &Path) -> Result<()> {
    let estimate = io::labels_to_membership(&io::read_labels(labels)?)?;
    let truth = io::labels_to_membership(&io::read_labels(truth)?)?;
    if estimate.n() != truth.n() {
        return Err(Error::Usage(format!("{} labels against {} reference labels", estimate.n(), truth.n())));
    }
    let m = evaluate(&estimate, &truth, None)?;
    let mut out = csv::Writer::from_writer(std::io::stdout().lock());
    out.write_record(["delta", "misclustered", "delta_extended", "misclustered_extended"])?;
    let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    out.write_record([cell(m.delta), cell(m.misclustered), cell(m.delta_extended), cell(m.misclustered_extended)])?;
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, workers, out, metrics_only, labels_dir, chat_dir } => {
            run(&config, workers, out, metrics_only, labels_dir, chat_dir)
        }
        Command::GenSbm { n, k, rho_a, r, pi, seed, edges, labels } => {
            gen_sbm(n, k, rho_a, r, pi, seed, &edges, labels.as_deref())
        }
        Command::Eval { labels, truth } => eval(&labels, &truth),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
