use std::path::{Path, PathBuf};

use asp_core::config::RunConfig;
use asp_core::pipeline::{evaluate_network, forgetting_diagnostics, load_datasets, train_run};
use asp_core::trainer::label_neurons;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}

fn config(overrides: &[&str]) -> RunConfig {
    let mut cfg = RunConfig::default();
    let d = data_dir();
    cfg.data.train_images = d.join("train-images-idx3-ubyte.gz");
    cfg.data.train_labels = d.join("train-labels-idx1-ubyte.gz");
    cfg.data.test_images = d.join("t10k-images-idx3-ubyte.gz");
    cfg.data.test_labels = d.join("t10k-labels-idx1-ubyte.gz");
    cfg.apply_overrides(overrides).unwrap();
    cfg
}

#[test]
fn two_one_zero_keeps_earlier_digits() {
    let cfg = config(&[
        "network.n_exc=9",
        "schedule.mode=sequential",
        "schedule.preset=two_one_zero",
        "schedule.count=100",
        "run.snapshot_every=100",
        "data.label_count=600",
        "data.test_count=300",
    ]);
    let data = load_datasets(&cfg).unwrap();
    let out = train_run(&cfg, &data).unwrap();
    assert!(out.fault.is_none());
    assert_eq!(out.log.first().unwrap().class, 2);
    assert_eq!(out.log.last().unwrap().class, 0);

    let labels = label_neurons(&out.network, &data.label, &cfg.train.inference()).unwrap();
    let count = |c: u8| labels.labels.iter().filter(|l| **l == Some(c)).count();
    assert!(count(0) > 0 && count(1) > 0, "labels {:?}", labels.labels);
    assert!(count(2) > 0, "no neuron kept digit 2: {:?}", labels.labels);

    // After each block, every digit seen so far is still recognized.
    let diag = forgetting_diagnostics(&cfg, &data, &out.snapshots, None).unwrap();
    assert_eq!(diag.retention.len(), 3);
    for (snap, seen) in diag.retention.iter().zip([&[2usize][..], &[2, 1], &[2, 1, 0]]) {
        for &c in seen {
            let r = snap[c].unwrap_or(0.0);
            assert!(r >= 0.5, "digit {c} after block {}: {snap:?}", seen[seen.len() - 1]);
        }
    }
    let (_, report) = evaluate_network(&cfg, &out.network, &data).unwrap();
    assert!(report.accuracy > 1.0 / 3.0, "accuracy {}", report.accuracy);
}
