use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;

use asp_core::config::RunConfig;
use asp_core::dataio::{apply_noise, load_idx, write_idx, write_noise_sidecar, NoiseKind, NoiseSpec};
use asp_core::pipeline::{run_evaluation, run_training, REPORT};
use asp_core::selfcheck::run_selfcheck;
use asp_core::trainer::Snapshot;
use asp_core::weightmap::{snapshot_grid, write_pgm, Normalization};
use asp_core::SimError;

/// Spiking-network simulator with adaptive synaptic plasticity.
#[derive(Debug, Parser)]
#[command(name = "asp-snn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Configuration file (`section.key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set plasticity.rule=stdp_powerlaw`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> asp_core::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| SimError::io(p, e))?;
                let mut c = RunConfig::default();
                c.apply_text(&text)?;
                c
            }
            None => RunConfig::default(),
        };
        cfg.apply_overrides(&self.overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a network and write snapshots, run log and final weights.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = "runs/out")]
        out: PathBuf,
    },
    /// Label neurons and evaluate a snapshot on the test set.
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value = "runs/eval")]
        out: PathBuf,
        /// Add per-class accuracy rows to the report.
        #[arg(long)]
        per_class: bool,
    },
    /// Write a snapshot's receptive fields as a PGM grid.
    ExportWeights {
        #[arg(long)]
        snapshot: PathBuf,
        /// Tiles per grid row (default: ceil(sqrt(n))).
        #[arg(long)]
        cols: Option<usize>,
        /// Normalize over all neurons instead of per neuron.
        #[arg(long)]
        global: bool,
        #[arg(long, default_value = "weights.pgm")]
        out: PathBuf,
    },
    /// Write a noisy copy of an IDX image set plus a metadata sidecar.
    MakeNoisy {
        #[arg(long, value_parser = ["awgn", "awgn_reduced_contrast"])]
        kind: String,
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long)]
        contrast: Option<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "data/mnist/t10k-images-idx3-ubyte.gz")]
        images: PathBuf,
        #[arg(long, default_value = "data/mnist/t10k-labels-idx1-ubyte.gz")]
        labels: PathBuf,
        #[arg(long, default_value = "data/noisy")]
        out_dir: PathBuf,
    },
    /// Check the engine against scalar oracles and closed forms.
    Selfcheck {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Print every configuration key with its effective value.
    DumpConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn exit_code(e: &SimError) -> u8 {
    match e {
        SimError::Dimension(_) => 3,
        _ => 2,
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("ASP_SNN_THREADS") else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size thread pool: {e}");
            }
        }
        _ => warn!("ignoring ASP_SNN_THREADS={v}: expected a positive integer"),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn noisy_name(p: &Path, kind: &str) -> PathBuf {
    PathBuf::from(format!("{kind}-{}", file_name(p)))
}

fn run(cli: Cli) -> asp_core::Result<u8> {
    match cli.command {
        Command::Train { config, out } => {
            let cfg = config.resolve()?;
            let s = run_training(&cfg, &out)?;
            println!(
                "trained presentations={} snapshots={} degenerate={} mean_theta={} final={}",
                s.presentations,
                s.snapshots,
                s.degenerate_presentations,
                s.mean_theta,
                s.final_snapshot.display()
            );
            if let Some(f) = s.fault {
                eprintln!("error: {f}");
                return Ok(2);
            }
        }
        Command::Eval {
            config,
            snapshot,
            out,
            per_class,
        } => {
            let cfg = config.resolve()?;
            let r = run_evaluation(&cfg, &snapshot, &out, per_class)?;
            println!("accuracy={}", r.accuracy);
            if per_class {
                for (c, a) in r.per_class_accuracy.iter().enumerate() {
                    if let Some(a) = a {
                        println!("class.{c}.accuracy={a}");
                    }
                }
            }
            if r.degenerate > 0 {
                println!("degenerate={}", r.degenerate);
            }
            log::info!("report written to {}", out.join(REPORT).display());
        }
        Command::ExportWeights {
            snapshot,
            cols,
            global,
            out,
        } => {
            let snap = Snapshot::read(&snapshot)?;
            let cols = cols.unwrap_or_else(|| (snap.n_exc as f64).sqrt().ceil() as usize);
            let norm = if global { Normalization::Global } else { Normalization::PerNeuron };
            let img = snapshot_grid(&snap, cols, norm)?;
            write_pgm(&img, &out)?;
            println!("wrote {} ({}x{})", out.display(), img.width, img.height);
        }
        Command::MakeNoisy {
            kind,
            snr_db,
            contrast,
            seed,
            images,
            labels,
            out_dir,
        } => {
            let mut spec = match kind.as_str() {
                "awgn" => NoiseSpec::awgn(),
                _ => NoiseSpec::awgn_reduced_contrast(),
            };
            if let Some(s) = snr_db {
                spec.snr_db = s;
            }
            if let Some(c) = contrast {
                if spec.kind == NoiseKind::Awgn {
                    warn!("--contrast has no effect with --kind awgn");
                }
                spec.contrast_factor = c;
            }
            spec.validate()?;
            let set = load_idx(&images, &labels)?;
            let noisy = apply_noise(&set, &spec, seed);
            std::fs::create_dir_all(&out_dir).map_err(|e| SimError::io(&out_dir, e))?;
            let img_out = out_dir.join(noisy_name(&images, &kind));
            let lbl_out = out_dir.join(noisy_name(&labels, &kind));
            write_idx(&noisy, &img_out, &lbl_out)?;
            let sidecar = out_dir.join(format!("{kind}-meta.txt"));
            write_noise_sidecar(&sidecar, &spec, seed, &file_name(&images), noisy.len())?;
            println!(
                "wrote {} {} {}",
                img_out.display(),
                lbl_out.display(),
                sidecar.display()
            );
        }
        Command::Selfcheck { config } => {
            let cfg = config.resolve()?;
            let results = run_selfcheck(&cfg.train.plasticity);
            for r in &results {
                println!("{}", r.line());
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} checks, {} failed", results.len(), failed);
            if failed > 0 {
                return Ok(1);
            }
        }
        Command::DumpConfig { config } => {
            print!("{}", config.resolve()?.to_text());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
