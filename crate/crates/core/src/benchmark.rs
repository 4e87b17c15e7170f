//! Benchmark grid: datasets × algorithms, scored against every reference
//! labeling, plus the per-algorithm summary statistics.
//!
//! A config is a TOML file:
//!
//! ```toml
//! algorithms = ["single", "Genie_G0.3", "ITM"]
//! seed = 42
//! parallelism = 4
//! time_limit_secs = 600
//! results = "out/results.csv"
//! summary = "out/summary.csv"
//!
//! [[datasets]]
//! root = "data/toy"
//! include = ["blobs*"]
//! ```
//!
//! A dataset `<name>` is a file `<name>.data` (optionally gzipped) with
//! reference labelings `<name>.labels0`, `<name>.labels1`, …. Relative paths
//! resolve against the config file's directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::algorithm::Algorithm;
use crate::dataset::{load_dataset, Dataset};
use crate::error::{Error, Result};
use crate::external::adjusted_rand;
use crate::knn::{knn_table, NeighbourTable};
use crate::mst::{build_mst, Mst};
use crate::oracle::{exhaustive_max_ar, local_search_max_ar, SearchConfig};
use crate::partition::{load_labels, Partition};

/// Name of the pseudo-algorithm reporting the best AR any tree cut attains.
pub const ORACLE_NAME: &str = "MaxMST";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSource {
    pub root: PathBuf,
    /// Dataset ids to keep (`collection/name` relative to the root); a
    /// trailing `*` matches any suffix. Empty keeps everything.
    #[serde(default)]
    pub include: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub datasets: Vec<DatasetSource>,
    pub algorithms: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_time_limit")]
    pub time_limit_secs: f64,
    pub results: PathBuf,
    pub summary: Option<PathBuf>,
    /// Write wall times; off by default so results files are reproducible
    /// byte for byte (the `seconds` column then reads `NA`).
    #[serde(default)]
    pub record_timings: bool,
    /// Restarts of the local search behind `MaxMST` when enumeration is
    /// out of budget.
    #[serde(default = "default_restarts")]
    pub oracle_restarts: usize,
}

fn default_parallelism() -> usize {
    1
}

fn default_time_limit() -> f64 {
    600.0
}

fn default_restarts() -> usize {
    10
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: BenchmarkConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("bad benchmark config: {e}")))?;
        for d in &mut cfg.datasets {
            if d.root.is_relative() {
                d.root = base.join(&d.root);
            }
        }
        if cfg.results.is_relative() {
            cfg.results = base.join(&cfg.results);
        }
        if let Some(s) = cfg.summary.as_mut().filter(|s| s.is_relative()) {
            *s = base.join(&*s);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        BenchmarkConfig::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::config("no dataset sources configured"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("no algorithms configured"));
        }
        if self.time_limit_secs.is_nan() || self.time_limit_secs <= 0.0 {
            return Err(Error::config("time limit must be positive"));
        }
        if self.parallelism == 0 {
            return Err(Error::config("parallelism must be at least 1"));
        }
        self.methods()?;
        Ok(())
    }

    fn methods(&self) -> Result<Vec<Method>> {
        self.algorithms
            .iter()
            .map(|a| {
                if a == ORACLE_NAME {
                    Ok(Method::Oracle)
                } else {
                    Ok(Method::Algorithm(a.parse()?))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Method {
    Algorithm(Algorithm),
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Error,
    Timeout,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Error => "error",
            Status::Timeout => "timeout",
        }
    }
}

/// One algorithm run for one dataset and one cluster count.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    /// Reference labelings with this `k`, by file name.
    pub labels: Vec<String>,
    pub algorithm: String,
    pub k: usize,
    /// Best AR over `labels`; 0 unless `status` is ok.
    pub ar: f64,
    pub seconds: f64,
    pub status: Status,
    pub message: Option<String>,
}

/// A dataset found on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub id: String,
    pub data: PathBuf,
    pub labels: Vec<PathBuf>,
}

fn matches(pattern: &str, id: &str) -> bool {
    match pattern.strip_suffix('*') {
        Some(prefix) => id.starts_with(prefix),
        None => pattern == id,
    }
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Finds the datasets under the configured roots, sorted by id.
pub fn discover(sources: &[DatasetSource]) -> Result<Vec<DatasetEntry>> {
    let mut found = BTreeMap::new();
    for src in sources {
        let mut files = Vec::new();
        walk(&src.root, &mut files)?;
        for f in &files {
            let Some(name) = f.file_name().and_then(|s| s.to_str()) else {
                continue;
            };
            let stem = name.strip_suffix(".gz").unwrap_or(name);
            let Some(stem) = stem.strip_suffix(".data") else {
                continue;
            };
            let dir = f.parent().expect("a file has a parent");
            let rel = dir.strip_prefix(&src.root).unwrap_or(Path::new(""));
            let id = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .chain(std::iter::once(stem.to_string()))
                .collect::<Vec<_>>()
                .join("/");
            if !src.include.is_empty() && !src.include.iter().any(|p| matches(p, &id)) {
                continue;
            }
            if src.exclude.iter().any(|p| matches(p, &id)) {
                continue;
            }
            let prefix = format!("{stem}.labels");
            let mut labels: Vec<(usize, PathBuf)> = files
                .iter()
                .filter(|g| g.parent() == Some(dir))
                .filter_map(|g| {
                    let n = g.file_name()?.to_str()?;
                    let n = n.strip_suffix(".gz").unwrap_or(n);
                    let idx = n.strip_prefix(&prefix)?.parse().ok()?;
                    Some((idx, g.clone()))
                })
                .collect();
            labels.sort();
            found.insert(
                id.clone(),
                DatasetEntry {
                    id,
                    data: f.clone(),
                    labels: labels.into_iter().map(|(_, p)| p).collect(),
                },
            );
        }
    }
    Ok(found.into_values().collect())
}

/// A dataset with its tree and references, shared by all runs on it.
struct Loaded {
    ds: Arc<Dataset>,
    mst: Arc<Mst>,
    neighbours: OnceLock<Result<Arc<NeighbourTable>>>,
    /// References grouped by `k`, with their file names.
    by_k: BTreeMap<usize, (Vec<String>, Arc<Vec<Partition>>)>,
}

fn load(entry: &DatasetEntry) -> Result<Loaded> {
    let ds = load_dataset(&entry.data)?;
    if entry.labels.is_empty() {
        return Err(Error::config(format!("{}: no reference labelings", entry.id)));
    }
    let mut by_k: BTreeMap<usize, (Vec<String>, Vec<Partition>)> = BTreeMap::new();
    for path in &entry.labels {
        let p = load_labels(path)?;
        if p.n() != ds.n() {
            return Err(Error::Validation(format!(
                "{}: {} labels for {} points",
                path.display(),
                p.n(),
                ds.n()
            )));
        }
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let slot = by_k.entry(p.num_clusters()).or_default();
        slot.0.push(name);
        slot.1.push(p);
    }
    let mst = build_mst(&ds);
    Ok(Loaded {
        ds: Arc::new(ds),
        mst: Arc::new(mst),
        neighbours: OnceLock::new(),
        by_k: by_k.into_iter().map(|(k, (n, p))| (k, (n, Arc::new(p)))).collect(),
    })
}

/// FNV-1a; stable across platforms and releases, unlike the std hasher.
fn stream_seed(seed: u64, dataset: &str, algorithm: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(dataset.as_bytes()).chain([0u8].iter()).chain(algorithm.as_bytes()) {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Runs every configured algorithm on every discovered dataset. Records
/// come back ordered by dataset id, then config order, then `k`.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let methods = cfg.methods()?;
    let entries = discover(&cfg.datasets)?;
    if entries.is_empty() {
        return Err(Error::config("no datasets matched the configured sources"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let limit = Duration::from_secs_f64(cfg.time_limit_secs);
    let records = pool.install(|| {
        use rayon::prelude::*;
        let loaded: Vec<(usize, std::result::Result<Loaded, String>)> = entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| (i, load(e).map_err(|err| err.to_string())))
            .collect();
        let mut tasks = Vec::new();
        for (i, l) in &loaded {
            for (j, m) in methods.iter().enumerate() {
                tasks.push((*i, l, j, m));
            }
        }
        tasks
            .par_iter()
            .flat_map_iter(|&(i, l, j, m)| {
                let entry = &entries[i];
                let name = cfg.algorithms[j].clone();
                match l {
                    Err(msg) => vec![RunRecord {
                        dataset: entry.id.clone(),
                        labels: Vec::new(),
                        algorithm: name,
                        k: 0,
                        ar: 0.0,
                        seconds: 0.0,
                        status: Status::Error,
                        message: Some(msg.clone()),
                    }],
                    Ok(l) => run_dataset(entry, l, m, &name, cfg, limit),
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(records)
}

fn run_dataset(
    entry: &DatasetEntry,
    l: &Loaded,
    method: &Method,
    name: &str,
    cfg: &BenchmarkConfig,
    limit: Duration,
) -> Vec<RunRecord> {
    let seed = stream_seed(cfg.seed, &entry.id, name);
    l.by_k
        .iter()
        .map(|(&k, (files, refs))| {
            let start = Instant::now();
            let outcome = match method {
                Method::Algorithm(a) => {
                    let nt = match a.neighbours_needed() {
                        Some(m) => match l
                            .neighbours
                            .get_or_init(|| knn_table(&l.ds, m).map(Arc::new))
                        {
                            Ok(nt) => Some(nt.clone()),
                            Err(e) => {
                                return failed(entry, files, name, k, Status::Error, e.to_string());
                            }
                        },
                        None => None,
                    };
                    with_time_limit(limit, {
                        let (a, ds, mst, refs) = (a.clone(), l.ds.clone(), l.mst.clone(), refs.clone());
                        move || {
                            let p = a.run(&ds, &mst, k, nt.as_deref())?;
                            best_ar(&refs, &p)
                        }
                    })
                }
                Method::Oracle => with_time_limit(limit, {
                    let (mst, refs) = (l.mst.clone(), refs.clone());
                    let restarts = cfg.oracle_restarts;
                    move || oracle_ar(&mst, &refs, k, seed, restarts)
                }),
            };
            let seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok(ar) => RunRecord {
                    dataset: entry.id.clone(),
                    labels: files.clone(),
                    algorithm: name.to_string(),
                    k,
                    ar,
                    seconds,
                    status: Status::Ok,
                    message: None,
                },
                Err((status, msg)) => {
                    log::warn!("{} / {name} / k={k}: {msg}", entry.id);
                    let mut r = failed(entry, files, name, k, status, msg);
                    r.seconds = seconds;
                    r
                }
            }
        })
        .collect()
}

fn failed(entry: &DatasetEntry, files: &[String], name: &str, k: usize, status: Status, msg: String) -> RunRecord {
    RunRecord {
        dataset: entry.id.clone(),
        labels: files.to_vec(),
        algorithm: name.to_string(),
        k,
        ar: 0.0,
        seconds: 0.0,
        status,
        message: Some(msg),
    }
}

fn best_ar(refs: &[Partition], p: &Partition) -> Result<f64> {
    refs.iter()
        .map(|r| adjusted_rand(r, p))
        .try_fold(f64::NEG_INFINITY, |b, ar| Ok(b.max(ar?)))
}

fn oracle_ar(mst: &Mst, refs: &[Partition], k: usize, seed: u64, restarts: usize) -> Result<f64> {
    match exhaustive_max_ar(mst, refs, k) {
        Ok(r) => Ok(r.best_ar),
        Err(Error::BudgetExceeded { .. }) => {
            let cfg = SearchConfig {
                restarts,
                seed,
                ..SearchConfig::default()
            };
            Ok(local_search_max_ar(mst, refs, k, &cfg)?.best_ar)
        }
        Err(e) => Err(e),
    }
}

/// Runs `job` on its own thread and gives up after `limit`. A job that
/// overruns is left to finish in the background; its result is dropped.
fn with_time_limit<F>(limit: Duration, job: F) -> std::result::Result<f64, (Status, String)>
where
    F: FnOnce() -> Result<f64> + Send + 'static,
{
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(job));
        let _ = tx.send(out);
    });
    match rx.recv_timeout(limit) {
        Ok(Ok(Ok(ar))) => Ok(ar),
        Ok(Ok(Err(e))) => Err((Status::Error, e.to_string())),
        Ok(Err(_)) => Err((Status::Error, "algorithm panicked".into())),
        Err(_) => Err((Status::Timeout, format!("exceeded {:?}", limit))),
    }
}

/// Writes `dataset,algorithm,k,ar,seconds,status`.
pub fn write_results(records: &[RunRecord], out: impl Write, record_timings: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::config(format!("cannot write results: {e}"));
    w.write_record(["dataset", "algorithm", "k", "ar", "seconds", "status"])
        .map_err(csv_err)?;
    for r in records {
        let seconds = if record_timings {
            format!("{:.3}", r.seconds)
        } else {
            "NA".to_string()
        };
        w.write_record([
            r.dataset.as_str(),
            r.algorithm.as_str(),
            &r.k.to_string(),
            &r.ar.to_string(),
            &seconds,
            r.status.as_str(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::config(format!("cannot write results: {e}")))?;
    Ok(())
}

/// Per-algorithm statistics over per-dataset AR values.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub algorithm: String,
    pub n_lt_080: usize,
    pub n_ge_095: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
}

/// Linear interpolation between order statistics (`sorted` ascending).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Statistics of one algorithm's per-dataset scores.
pub fn summarize(algorithm: &str, ars: &[f64]) -> Result<SummaryStats> {
    if ars.is_empty() {
        return Err(Error::config(format!("no results for {algorithm}")));
    }
    let mut v = ars.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(SummaryStats {
        algorithm: algorithm.to_string(),
        n_lt_080: v.iter().filter(|&&x| x < 0.8).count(),
        n_ge_095: v.iter().filter(|&&x| x >= 0.95).count(),
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        mean: v.iter().sum::<f64>() / v.len() as f64,
    })
}

/// One row per algorithm (first-appearance order). Each dataset counts
/// once, with its best AR over all reference labelings.
pub fn aggregate_summary(records: &[RunRecord]) -> Result<Vec<SummaryStats>> {
    if records.is_empty() {
        return Err(Error::config("no run records to summarise"));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut per: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for r in records {
        if !order.contains(&r.algorithm.as_str()) {
            order.push(&r.algorithm);
        }
        let best = per.entry(&r.algorithm).or_default().entry(&r.dataset).or_insert(f64::NEG_INFINITY);
        *best = best.max(r.ar);
    }
    order
        .into_iter()
        .map(|a| summarize(a, &per[a].values().copied().collect::<Vec<_>>()))
        .collect()
}

/// Writes `algorithm,n_lt_080,n_ge_095,min,q1,median,mean`.
pub fn write_summary(stats: &[SummaryStats], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::config(format!("cannot write summary: {e}"));
    w.write_record(["algorithm", "n_lt_080", "n_ge_095", "min", "q1", "median", "mean"])
        .map_err(csv_err)?;
    for s in stats {
        w.write_record([
            s.algorithm.clone(),
            s.n_lt_080.to_string(),
            s.n_ge_095.to_string(),
            format!("{:.4}", s.min),
            format!("{:.4}", s.q1),
            format!("{:.4}", s.median),
            format!("{:.4}", s.mean),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::config(format!("cannot write summary: {e}")))?;
    Ok(())
}

/// Runs the grid and writes the configured output files.
pub fn run_and_write(cfg: &BenchmarkConfig) -> Result<Vec<RunRecord>> {
    let records = run_benchmark(cfg)?;
    let create = |p: &Path| -> Result<fs::File> {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::File::create(p).map_err(|e| Error::io(p, e))
    };
    write_results(&records, create(&cfg.results)?, cfg.record_timings)?;
    if let Some(path) = &cfg.summary {
        write_summary(&aggregate_summary(&records)?, create(path)?)?;
    }
    Ok(records)
}
