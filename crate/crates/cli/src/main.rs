use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mstclust_core::benchmark::{aggregate_summary, run_and_write, BenchmarkConfig};
use mstclust_core::oracle::exhaustive_max_ar_with_budget;
use mstclust_core::{
    best_ar_over_references, build_mst, load_dataset, load_labels, local_search_max_ar, write_labels, write_mst,
    Algorithm, Partition, SearchConfig,
};

#[derive(Parser)]
#[command(name = "mstclust", version, about = "Clustering by cutting Euclidean minimum spanning trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the MST of a dataset and print its edges as `u v weight`.
    Mst {
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster a dataset and print one 1-based label per line.
    Cluster {
        data: PathBuf,
        #[arg(long)]
        algo: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adjusted Rand index of a labeling, best over the references.
    Score {
        #[arg(long = "ref", value_delimiter = ',', required = true)]
        refs: Vec<PathBuf>,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Best adjusted Rand index attainable by any cut of the MST.
    Oracle {
        data: PathBuf,
        #[arg(long = "ref", value_delimiter = ',', required = true)]
        refs: Vec<PathBuf>,
        /// Number of clusters; defaults to that of the first reference.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tenure: Option<usize>,
        #[arg(long, default_value_t = 10)]
        stall_limit: usize,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u128,
        #[arg(long)]
        verbose: bool,
    },
    /// Run a benchmark grid described by a TOML config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Search,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_refs(paths: &[PathBuf]) -> Result<Vec<Partition>> {
    paths.iter().map(|p| Ok(load_labels(p)?)).collect()
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Mst { data, out } => {
            let ds = load_dataset(&data)?;
            let mut w = output(out.as_deref())?;
            write_mst(&build_mst(&ds), &mut w)?;
            w.flush()?;
        }
        Command::Cluster { data, algo, k, out } => {
            let algo: Algorithm = algo.parse()?;
            let ds = load_dataset(&data)?;
            let p = algo.run(&ds, &build_mst(&ds), k, None)?;
            let mut w = output(out.as_deref())?;
            write_labels(&p, &mut w)?;
            w.flush()?;
        }
        Command::Score { refs, pred } => {
            let refs = load_refs(&refs)?;
            let pred = load_labels(&pred)?;
            if pred.has_noise() {
                bail!("predicted labels must not contain 0");
            }
            println!("{}", best_ar_over_references(&refs, &pred)?);
        }
        Command::Oracle {
            data,
            refs,
            k,
            mode,
            restarts,
            seed,
            tenure,
            stall_limit,
            budget,
            verbose,
        } => {
            let ds = load_dataset(&data)?;
            let refs = load_refs(&refs)?;
            let k = k.unwrap_or_else(|| refs[0].num_clusters());
            let mst = build_mst(&ds);
            let result = match mode {
                Mode::Exhaustive => exhaustive_max_ar_with_budget(&mst, &refs, k, budget).map_err(|e| {
                    anyhow::anyhow!("{e}; use --mode search for this many clusters")
                })?,
                Mode::Search => {
                    let cfg = SearchConfig {
                        restarts,
                        tabu_tenure: tenure,
                        stall_limit,
                        seed,
                    };
                    local_search_max_ar(&mst, &refs, k, &cfg)?
                }
            };
            println!("ar {}", result.best_ar);
            for &e in &result.removed {
                let edge = mst.edge(e);
                println!("removed {} {} {:.16e}", edge.u, edge.v, edge.weight);
            }
            if verbose {
                for t in &result.restarts {
                    eprintln!("restart {} best {} sweeps {}", t.restart, t.best_ar, t.sweeps);
                }
            }
        }
        Command::Bench { config, seed } => {
            let mut cfg = BenchmarkConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let records = run_and_write(&cfg)?;
            let failed = records.iter().filter(|r| r.status != mstclust_core::benchmark::Status::Ok).count();
            for s in aggregate_summary(&records)? {
                println!(
                    "{:<24} <0.8: {:>3}  >=0.95: {:>3}  min {:.3}  q1 {:.3}  median {:.3}  mean {:.3}",
                    s.algorithm, s.n_lt_080, s.n_ge_095, s.min, s.q1, s.median, s.mean
                );
            }
            eprintln!(
                "{} runs ({failed} failed), results in {}",
                records.len(),
                cfg.results.display()
            );
        }
    }
    Ok(())
}
