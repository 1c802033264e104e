//! File-level orchestration: load data for a configuration, train, evaluate
//! snapshots, and write run artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use crate::config::RunConfig;
use crate::dataio::{apply_noise, build_schedule, load_idx, ImageSet, NoiseKind, Schedule, PIXELS};
use crate::error::{Result, SimError};
use crate::sim::Network;
use crate::trainer::{
    evaluate, label_neurons, log_to_csv, overlap_metric, templates_of, EvalReport,
    ForgettingDiagnostics, LabelMap, Snapshot, TrainOutput,
};

pub const RESOLVED_CONFIG: &str = "resolved.cfg";
pub const RUN_LOG: &str = "run_log.csv";
pub const FINAL_SNAPSHOT: &str = "final.bin";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const REPORT: &str = "report.txt";

/// Data for one run: the training file (pool plus held-out labeling tail)
/// and the test file, restricted to the scheduled classes.
#[derive(Debug, Clone)]
pub struct Datasets {
    pub train: ImageSet,
    /// Indices of `train` available to the schedule.
    pub pool: Vec<usize>,
    pub label: ImageSet,
    pub test: ImageSet,
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(SimError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
        ))
    }
}

pub fn load_datasets(cfg: &RunConfig) -> Result<Datasets> {
    let d = &cfg.data;
    for p in [&d.train_images, &d.train_labels, &d.test_images, &d.test_labels] {
        require(p)?;
    }
    let mut train = load_idx(&d.train_images, &d.train_labels)?;
    let mut test = load_idx(&d.test_images, &d.test_labels)?;
    if cfg.noise.kind != NoiseKind::None {
        train = apply_noise(&train, &cfg.noise, cfg.noise_seed);
        test = apply_noise(&test, &cfg.noise, cfg.noise_seed.wrapping_add(1));
    }
    if d.label_count >= train.len() {
        return Err(SimError::Config(format!(
            "data.label_count={} leaves no training images out of {}",
            d.label_count,
            train.len()
        )));
    }
    let classes = cfg.schedule.spec()?.classes();
    let split = train.len() - d.label_count;
    let pool: Vec<usize> = (0..split).collect();
    let tail: Vec<usize> = (split..train.len()).collect();
    let label = train.subset(&tail).filter_classes(&classes);
    let mut test = test.filter_classes(&classes);
    if d.test_count > 0 && d.test_count < test.len() {
        test = test.subset(&(0..d.test_count).collect::<Vec<_>>());
    }
    Ok(Datasets {
        train,
        pool,
        label,
        test,
    })
}

pub fn schedule_for(cfg: &RunConfig, data: &Datasets) -> Result<Schedule> {
    build_schedule(&data.train, &data.pool, &cfg.schedule.spec()?, cfg.train.seed)
}

/// Trains as configured; a numerical fault is returned in `TrainOutput::fault`.
pub fn train_run(cfg: &RunConfig, data: &Datasets) -> Result<TrainOutput> {
    cfg.validate()?;
    let schedule = schedule_for(cfg, data)?;
    info!(
        "training {} neurons on {} presentations ({}, rule {})",
        cfg.train.n_exc,
        schedule.len(),
        schedule.mode,
        cfg.rule()
    );
    crate::trainer::train(&cfg.train, &data.train, &schedule)
}

/// Labels neurons on the labeling set, then evaluates on the test set.
pub fn evaluate_network(cfg: &RunConfig, net: &Network, data: &Datasets) -> Result<(LabelMap, EvalReport)> {
    let params = cfg.train.inference();
    let labels = label_neurons(net, &data.label, &params)?;
    let report = evaluate(net, &data.test, &labels, &params)?;
    Ok((labels, report))
}

pub fn check_snapshot_dims(cfg: &RunConfig, snap: &Snapshot) -> Result<()> {
    if snap.n_exc != cfg.train.n_exc || snap.n_input != PIXELS {
        return Err(SimError::Dimension(format!(
            "snapshot holds {}x{} weights, configuration expects {}x{}",
            snap.n_exc, snap.n_input, cfg.train.n_exc, PIXELS
        )));
    }
    Ok(())
}

/// Overlap score and per-class test accuracy for every snapshot. Each
/// snapshot is labeled and tested only on the classes scheduled before it.
pub fn forgetting_diagnostics(
    cfg: &RunConfig,
    data: &Datasets,
    snapshots: &[Snapshot],
    background_mask: Option<&[bool]>,
) -> Result<ForgettingDiagnostics> {
    let schedule = schedule_for(cfg, data)?;
    let templates = templates_of(&data.label);
    let params = cfg.train.inference();
    let mut overlap = Vec::with_capacity(snapshots.len());
    let mut retention = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        overlap.push(overlap_metric(s.rows(), &templates)?.score);
        let done = (s.presentation_index as usize).min(schedule.len());
        let mut seen: Vec<u8> = schedule.entries[..done].iter().map(|e| e.1).collect();
        seen.sort_unstable();
        seen.dedup();
        let net = s.to_network(cfg.train.network)?;
        let labels = label_neurons(&net, &data.label.filter_classes(&seen), &params)?;
        let report = evaluate(&net, &data.test.filter_classes(&seen), &labels, &params)?;
        retention.push(report.per_class_accuracy);
    }
    let background_variance = match (background_mask, snapshots.last()) {
        (Some(m), Some(s)) => Some(crate::trainer::background_variance(s.rows(), m)?),
        _ => None,
    };
    Ok(ForgettingDiagnostics {
        overlap,
        retention,
        background_variance,
    })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| SimError::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| SimError::io(path, e))
}

pub fn snapshot_path(out_dir: &Path, presentation_index: u64) -> PathBuf {
    out_dir.join(SNAPSHOT_DIR).join(format!("snapshot_{presentation_index:07}.bin"))
}

#[derive(Debug)]
pub struct TrainSummary {
    pub presentations: usize,
    pub snapshots: usize,
    pub degenerate_presentations: usize,
    pub mean_theta: f64,
    pub final_snapshot: PathBuf,
    pub fault: Option<SimError>,
}

/// Writes the resolved config, run log, snapshots and final weights into
/// `out_dir`.
pub fn run_training(cfg: &RunConfig, out_dir: &Path) -> Result<TrainSummary> {
    cfg.validate()?;
    let data = load_datasets(cfg)?;
    create_dir(&out_dir.join(SNAPSHOT_DIR))?;
    write(&out_dir.join(RESOLVED_CONFIG), cfg.to_text())?;
    let out = train_run(cfg, &data)?;
    write(&out_dir.join(RUN_LOG), log_to_csv(&out.log))?;
    for s in &out.snapshots {
        s.write(&snapshot_path(out_dir, s.presentation_index))?;
    }
    let final_snapshot = out_dir.join(FINAL_SNAPSHOT);
    if let Some(last) = out.snapshots.last() {
        last.write(&final_snapshot)?;
    }
    let thetas = out.network.thetas();
    Ok(TrainSummary {
        presentations: out.log.len(),
        snapshots: out.snapshots.len(),
        degenerate_presentations: out.degenerate_presentations,
        mean_theta: thetas.iter().sum::<f64>() / thetas.len() as f64,
        final_snapshot,
        fault: out.fault,
    })
}

/// Labels and evaluates `snapshot`, writing the report into `out_dir`.
pub fn run_evaluation(cfg: &RunConfig, snapshot: &Path, out_dir: &Path, per_class: bool) -> Result<EvalReport> {
    cfg.validate()?;
    let snap = Snapshot::read(snapshot)?;
    check_snapshot_dims(cfg, &snap)?;
    let data = load_datasets(cfg)?;
    let net = snap.to_network(cfg.train.network)?;
    let (labels, report) = evaluate_network(cfg, &net, &data)?;
    info!("{} of {} neurons labeled", labels.assigned(), labels.labels.len());
    create_dir(out_dir)?;
    write(&out_dir.join(RESOLVED_CONFIG), cfg.to_text())?;
    write(&out_dir.join(REPORT), report.to_text(per_class))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_check() {
        let cfg = RunConfig::default();
        let snap = Snapshot {
            presentation_index: 0,
            seed: 1,
            n_exc: 100,
            n_input: PIXELS,
            weights: vec![0.0; 100 * PIXELS],
            thetas: vec![0.0; 100],
        };
        assert!(check_snapshot_dims(&cfg, &snap).is_ok());
        let mut big = cfg.clone();
        big.train.n_exc = 400;
        assert!(matches!(check_snapshot_dims(&big, &snap), Err(SimError::Dimension(_))));
    }

    #[test]
    fn missing_dataset_names_path() {
        let mut cfg = RunConfig::default();
        cfg.data.train_images = "/nonexistent/train.idx".into();
        let err = load_datasets(&cfg).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/train.idx"));
    }
}
