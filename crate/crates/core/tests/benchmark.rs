use std::fs;
use std::path::Path;

use mstclust_core::benchmark::{aggregate_summary, discover, run_and_write, run_benchmark, BenchmarkConfig, Status};

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn config(dir: &Path, extra: &str, algorithms: &str) -> BenchmarkConfig {
    let text = format!(
        "algorithms = [{algorithms}]\nresults = \"out/results.csv\"\nsummary = \"out/summary.csv\"\n{extra}\n[[datasets]]\nroot = \"data\"\n"
    );
    BenchmarkConfig::from_toml(&text, dir).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir_all(data.join("set")).unwrap();
    write(&data, "line.data", "0\n1\n2\n10\n");
    write(&data, "line.labels0", "1\n1\n1\n2\n");
    // two references: the second is a worse match for every 2-cut
    write(&data.join("set"), "pairs.data", "0\n1\n10\n11\n");
    write(&data.join("set"), "pairs.labels0", "1\n2\n1\n2\n");
    write(&data.join("set"), "pairs.labels1", "1\n1\n2\n2\n");
    dir
}

#[test]
fn discovers_datasets_with_all_labelings() {
    let dir = setup();
    let cfg = config(dir.path(), "", "\"single\"");
    let found = discover(&cfg.datasets).unwrap();
    let ids: Vec<&str> = found.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(ids, ["line", "set/pairs"]);
    assert_eq!(found[1].labels.len(), 2);
}

#[test]
fn one_record_per_algorithm_and_best_reference() {
    let dir = setup();
    let cfg = config(dir.path(), "", "\"single\", \"Genie_G0.3\"");
    let records = run_benchmark(&cfg).unwrap();
    assert_eq!(records.len(), 4);
    for r in &records {
        assert_eq!(r.status, Status::Ok);
        assert_eq!(r.k, 2);
        assert_eq!(r.ar, 1.0, "{} {}", r.dataset, r.algorithm);
    }
    let pairs = records.iter().find(|r| r.dataset == "set/pairs").unwrap();
    assert_eq!(pairs.labels, ["pairs.labels0", "pairs.labels1"]);
}

#[test]
fn timeouts_score_zero() {
    let dir = setup();
    let cfg = config(dir.path(), "time_limit_secs = 1e-9", "\"ITM\"");
    let records = run_benchmark(&cfg).unwrap();
    assert!(records.iter().all(|r| r.ar == 0.0));
    assert!(records.iter().any(|r| r.status == Status::Timeout));
}

#[test]
fn unreadable_dataset_gives_error_record() {
    let dir = setup();
    write(&dir.path().join("data"), "broken.data", "1 2\n3\n");
    write(&dir.path().join("data"), "broken.labels0", "1\n2\n");
    let cfg = config(dir.path(), "", "\"single\"");
    let records = run_benchmark(&cfg).unwrap();
    let broken = records.iter().find(|r| r.dataset == "broken").unwrap();
    assert_eq!((broken.status, broken.ar), (Status::Error, 0.0));
    assert_eq!(records.iter().filter(|r| r.status == Status::Ok).count(), 2);
}

#[test]
fn writes_results_and_summary() {
    let dir = setup();
    let cfg = config(dir.path(), "seed = 3", "\"single\", \"MaxMST\"");
    let records = run_and_write(&cfg).unwrap();
    let results = fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(lines.next(), Some("dataset,algorithm,k,ar,seconds,status"));
    assert_eq!(lines.next(), Some("line,single,2,1,NA,ok"));
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert!(summary.starts_with("algorithm,n_lt_080,n_ge_095,min,q1,median,mean\n"));
    let stats = aggregate_summary(&records).unwrap();
    assert_eq!(stats.len(), 2);
    assert_eq!(stats[1].algorithm, "MaxMST");
    assert_eq!(stats[1].n_ge_095, 2);
}

#[test]
fn rejects_bad_configs() {
    let dir = setup();
    let bad = |text: &str| BenchmarkConfig::from_toml(text, dir.path()).is_err();
    assert!(bad("algorithms = [\"single\"]\n"));
    assert!(bad("algorithms = [\"nope\"]\nresults = \"r\"\n[[datasets]]\nroot = \"data\"\n"));
    assert!(bad("algorithms = [\"single\"]\nresults = \"r\"\nparallelism = 0\n[[datasets]]\nroot = \"data\"\n"));
    assert!(bad("algorithms = [\"single\"]\nresults = \"r\"\ncolour = 1\n[[datasets]]\nroot = \"data\"\n"));
}
