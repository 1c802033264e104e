use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_asp-snn"));
    c.env("RUST_LOG", "warn");
    c
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/mnist")
        .join(name)
        .display()
        .to_string()
}

fn data_sets() -> Vec<String> {
    [
        ("train_images", "train-images-idx3-ubyte.gz"),
        ("train_labels", "train-labels-idx1-ubyte.gz"),
        ("test_images", "t10k-images-idx3-ubyte.gz"),
        ("test_labels", "t10k-labels-idx1-ubyte.gz"),
    ]
    .iter()
    .flat_map(|(k, f)| ["--set".to_string(), format!("data.{k}={}", data(f))])
    .collect()
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_train(out: &Path, extra: &[&str]) -> Output {
    run(bin()
        .arg("train")
        .args(data_sets())
        .args(["--set", "network.n_exc=4", "--set", "schedule.count=3", "--set", "data.label_count=100"])
        .args(extra)
        .arg("--out")
        .arg(out))
}

#[test]
fn dump_config_applies_file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "network.n_exc = 49\nnetwork.w_inh = 3.5\n").unwrap();
    let o = run(bin()
        .arg("dump-config")
        .arg("--config")
        .arg(&cfg)
        .args(["--set", "network.w_inh=7"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("network.n_exc = 49\n"), "{text}");
    assert!(text.contains("network.w_inh = 7\n"), "{text}");
    assert!(text.contains("plasticity.rule = asp_exponential\n"), "{text}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let o = run(bin().args(["dump-config", "--set", "network.bogus=1"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("network.bogus"), "{}", stderr(&o));
}

#[test]
fn selfcheck_passes_with_defaults() {
    let o = run(bin().arg("selfcheck"));
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() >= 7, "{text}");
    assert!(!text.contains("FAIL "), "{text}");
}

#[test]
fn selfcheck_fails_on_perturbed_trace_constant() {
    let o = run(bin().args(["selfcheck", "--set", "plasticity.tau_acc=41"]));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL trace_closed_form"), "{}", stdout(&o));
}

#[test]
fn missing_dataset_exits_2_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin()
        .args(["train", "--set", "data.train_images=/no/such/train-images.gz", "--out"])
        .arg(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/train-images.gz"), "{}", stderr(&o));
}

#[test]
fn train_eval_and_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = small_train(&out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("trained presentations=30 "), "{}", stdout(&o));
    for f in ["resolved.cfg", "run_log.csv", "final.bin"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let log = std::fs::read_to_string(out.join("run_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 31);

    let eval_dir = dir.path().join("eval");
    let common = ["--set", "network.n_exc=4", "--set", "data.label_count=100", "--set", "data.test_count=50"];
    let o = run(bin()
        .arg("eval")
        .args(data_sets())
        .args(common)
        .arg("--snapshot")
        .arg(out.join("final.bin"))
        .arg("--out")
        .arg(&eval_dir)
        .arg("--per-class"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("accuracy="), "{}", stdout(&o));
    assert!(eval_dir.join("report.txt").exists());

    let o = run(bin()
        .arg("eval")
        .args(data_sets())
        .args(["--set", "network.n_exc=9"])
        .arg("--snapshot")
        .arg(out.join("final.bin"))
        .arg("--out")
        .arg(&eval_dir));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn repeated_training_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(small_train(&a, &[]).status.success());
    let o = run(bin()
        .arg("train")
        .arg("--config")
        .arg(a.join("resolved.cfg"))
        .arg("--out")
        .arg(&b));
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["resolved.cfg", "run_log.csv", "final.bin"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn export_weights_writes_pgm_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(small_train(&out, &[]).status.success());
    let pgm = dir.path().join("w.pgm");
    let o = run(bin()
        .arg("export-weights")
        .arg("--snapshot")
        .arg(out.join("final.bin"))
        .args(["--cols", "3", "--out"])
        .arg(&pgm));
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(&pgm).unwrap();
    let header = b"P5\n86 57\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 86 * 57);
}

fn make_noisy(out_dir: &PathBuf, seed: &str) -> Output {
    run(bin()
        .args(["make-noisy", "--kind", "awgn_reduced_contrast", "--seed", seed, "--images"])
        .arg(data("t10k-images-idx3-ubyte.gz"))
        .arg("--labels")
        .arg(data("t10k-labels-idx1-ubyte.gz"))
        .arg("--out-dir")
        .arg(out_dir))
}

#[test]
fn make_noisy_is_seeded_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (d, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let o = make_noisy(d, seed);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let img = "awgn_reduced_contrast-t10k-images-idx3-ubyte.gz";
    let read = |d: &PathBuf| std::fs::read(d.join(img)).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let meta = std::fs::read_to_string(a.join("awgn_reduced_contrast-meta.txt")).unwrap();
    for key in ["kind", "snr_db", "contrast", "seed"] {
        assert!(meta.contains(key), "sidecar lacks {key}: {meta}");
    }
    assert!(a.join("awgn_reduced_contrast-t10k-labels-idx1-ubyte.gz").exists());
}
