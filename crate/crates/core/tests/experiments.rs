use std::time::Instant;

use regdiff::experiments::{
    all_specs, named_spec, read_report_csv, run_example, write_report, write_report_csv, EXPERIMENT_NAMES,
};

fn lines(path: &std::path::Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn empty_seed_list_writes_only_the_header() {
    let spec = named_spec("example1_sparse_s001").unwrap().with_seeds(vec![]);
    let report = run_example(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_report_csv(&report, &path).unwrap();
    assert_eq!(lines(&path), vec!["seed,rel_error,iterations,stop_reason"]);
}

#[test]
fn one_seed_writes_two_lines() {
    let spec = named_spec("example1_sparse_s001").unwrap().with_seeds(vec![7]);
    let report = run_example(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_report_csv(&report, &path).unwrap();
    let l = lines(&path);
    assert_eq!(l.len(), 2);
    assert!(l[1].starts_with("7,"));
    assert_eq!(read_report_csv(&path).unwrap(), report.outcomes);
}

#[test]
fn history_columns() {
    let spec = named_spec("example1_dense_s001").unwrap().with_seeds(vec![1]);
    let report = run_example(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_report(&report, dir.path()).unwrap();
    let l = lines(&files.histories[0]);
    assert_eq!(l[0], "iter,G,residual_g,residual_u,residual_uprime,alpha");
    assert_eq!(l.len(), report.runs[0].history.len() + 1);
    let stats = std::fs::read_to_string(&files.stats).unwrap();
    assert!(stats.contains("published reference"));
    assert!(stats.contains("tikhonov k=2"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in ["example1_dense_s01", "example3_nonzero_mean"] {
        let spec = named_spec(name).unwrap().with_seeds(vec![0, 1, 2, 3]);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let fa = write_report(&run_example(&spec).unwrap(), a.path()).unwrap();
        let fb = write_report(&run_example(&spec).unwrap(), b.path()).unwrap();
        let pairs = [
            (&fa.summary, &fb.summary),
            (&fa.stats, &fb.stats),
            (&fa.trajectories, &fb.trajectories),
            (&fa.estimates, &fb.estimates),
        ];
        for (x, y) in pairs.into_iter().chain(fa.histories.iter().zip(&fb.histories)) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
        }
    }
}

#[test]
fn every_named_spec_finishes_quickly() {
    assert_eq!(all_specs().len(), EXPERIMENT_NAMES.len());
    for spec in all_specs() {
        let start = Instant::now();
        let report = run_example(&spec).unwrap();
        assert!(report.failures.is_empty(), "{}: {:?}", spec.name, report.failures);
        assert_eq!(report.outcomes.len(), 11);
        assert!(start.elapsed().as_secs() < 60, "{}", spec.name);
    }
}
