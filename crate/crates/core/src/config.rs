//! Plain-text run configuration: one `section.key = value` per line, `#`
//! starts a comment line. Unknown keys are rejected with their line number.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataio::{decreasing_counts, NoiseKind, NoiseSpec, ScheduleMode, ScheduleSpec};
use crate::error::{Result, SimError};
use crate::plasticity::{PlasticityConfig, Rule};
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulePreset {
    /// Every listed class gets `count` images.
    Uniform,
    /// Class `classes[k]` gets `base + k * step` images.
    Decreasing,
    /// The `blocks` list is used as given.
    Blocks,
    /// Digits 2, 1, 0 in that order, `count` images each.
    TwoOneZero,
}

impl Display for SchedulePreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SchedulePreset::Uniform => "uniform",
            SchedulePreset::Decreasing => "decreasing",
            SchedulePreset::Blocks => "blocks",
            SchedulePreset::TwoOneZero => "two_one_zero",
        })
    }
}

impl FromStr for SchedulePreset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(SchedulePreset::Uniform),
            "decreasing" => Ok(SchedulePreset::Decreasing),
            "blocks" => Ok(SchedulePreset::Blocks),
            "two_one_zero" => Ok(SchedulePreset::TwoOneZero),
            o => Err(format!("unknown schedule preset '{o}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleConfig {
    pub mode: ScheduleMode,
    pub preset: SchedulePreset,
    pub classes: Vec<u8>,
    pub count: usize,
    pub base: i64,
    pub step: i64,
    pub blocks: Vec<(u8, usize)>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            mode: ScheduleMode::Intermixed,
            preset: SchedulePreset::Uniform,
            classes: (0..10).collect(),
            count: 500,
            base: 500,
            step: -50,
            blocks: Vec::new(),
        }
    }
}

impl ScheduleConfig {
    pub fn spec(&self) -> Result<ScheduleSpec> {
        let blocks: Vec<(u8, usize)> = match self.preset {
            SchedulePreset::Uniform => self.classes.iter().map(|&c| (c, self.count)).collect(),
            SchedulePreset::Decreasing => {
                // Listed class order, not ascending order.
                let counts = decreasing_counts(&self.classes, self.base, self.step)?;
                self.classes.iter().map(|c| (*c, counts[c])).collect()
            }
            SchedulePreset::Blocks => self.blocks.clone(),
            SchedulePreset::TwoOneZero => vec![(2, self.count), (1, self.count), (0, self.count)],
        };
        if let Some(&(c, _)) = blocks.iter().find(|b| b.0 > 9) {
            return Err(SimError::Config(format!("schedule class {c} out of range 0-9")));
        }
        if blocks.iter().all(|b| b.1 == 0) {
            return Err(SimError::Config("schedule presents no images".into()));
        }
        Ok(ScheduleSpec::new(self.mode, blocks))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataConfig {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    /// Images held out from the end of the training file for labeling.
    pub label_count: usize,
    /// Test images used (after class filtering); 0 means all.
    pub test_count: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            train_images: "data/mnist/train-images-idx3-ubyte.gz".into(),
            train_labels: "data/mnist/train-labels-idx1-ubyte.gz".into(),
            test_images: "data/mnist/t10k-images-idx3-ubyte.gz".into(),
            test_labels: "data/mnist/t10k-labels-idx1-ubyte.gz".into(),
            label_count: 1000,
            test_count: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    /// Last plasticity preset applied; kept so the resolved file names it.
    pub plasticity_preset: String,
    pub schedule: ScheduleConfig,
    pub data: DataConfig,
    pub noise: NoiseSpec,
    pub noise_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            plasticity_preset: "nominal".into(),
            schedule: ScheduleConfig::default(),
            data: DataConfig::default(),
            noise: NoiseSpec {
                kind: NoiseKind::None,
                ..NoiseSpec::awgn()
            },
            noise_seed: 7,
        }
    }
}

type Getter = fn(&RunConfig) -> String;
type Setter = fn(&mut RunConfig, &str) -> Result<(), String>;

fn parse<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: Display,
{
    v.parse::<T>().map_err(|e| format!("invalid value '{v}': {e}"))
}

fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: Display,
{
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect()
}

fn parse_blocks(v: &str) -> Result<Vec<(u8, usize)>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|b| {
            let (c, n) = b.split_once(':').ok_or_else(|| format!("block '{b}' is not class:count"))?;
            Ok((parse(c.trim())?, parse(n.trim())?))
        })
        .collect()
}

fn noise_kind_str(k: NoiseKind) -> &'static str {
    match k {
        NoiseKind::None => "none",
        NoiseKind::Awgn => "awgn",
        NoiseKind::AwgnReducedContrast => "awgn_reduced_contrast",
    }
}

fn parse_noise_kind(v: &str) -> Result<NoiseKind, String> {
    match v {
        "none" => Ok(NoiseKind::None),
        "awgn" => Ok(NoiseKind::Awgn),
        "awgn_reduced_contrast" => Ok(NoiseKind::AwgnReducedContrast),
        o => Err(format!("unknown noise kind '{o}'")),
    }
}

macro_rules! field {
    ($key:literal, $($f:ident).+) => {
        (
            $key,
            (|c: &RunConfig| c.$($f).+.to_string()) as Getter,
            (|c: &mut RunConfig, v: &str| {
                c.$($f).+ = parse(v)?;
                Ok(())
            }) as Setter,
        )
    };
}

macro_rules! path_field {
    ($key:literal, $($f:ident).+) => {
        (
            $key,
            (|c: &RunConfig| c.$($f).+.display().to_string()) as Getter,
            (|c: &mut RunConfig, v: &str| {
                c.$($f).+ = PathBuf::from(v);
                Ok(())
            }) as Setter,
        )
    };
}

/// Every key in dump order.
fn table() -> Vec<(&'static str, Getter, Setter)> {
    vec![
        field!("network.n_exc", train.n_exc),
        field!("network.dt", train.network.dt),
        field!("network.w_exc_to_inh", train.network.w_exc_to_inh),
        field!("network.w_inh", train.network.w_inh),
        field!("network.theta_plus", train.network.theta_plus),
        field!("network.tau_theta", train.network.tau_theta),
        (
            "network.w_max",
            |c| c.train.network.w_max.to_string(),
            |c, v| {
                let w: f64 = parse(v)?;
                c.train.network.w_max = w;
                c.train.plasticity.w_max = w;
                Ok(())
            },
        ),
        field!("exc.tau_mem", train.network.exc.tau_mem),
        field!("exc.v_rest", train.network.exc.v_rest),
        field!("exc.v_reset", train.network.exc.v_reset),
        field!("exc.v_thresh", train.network.exc.v_thresh),
        field!("exc.refractory", train.network.exc.refractory),
        field!("exc.tau_current", train.network.exc.tau_post_current),
        field!("exc.resistance", train.network.exc.resistance),
        field!("inh.tau_mem", train.network.inh.tau_mem),
        field!("inh.v_rest", train.network.inh.v_rest),
        field!("inh.v_reset", train.network.inh.v_reset),
        field!("inh.v_thresh", train.network.inh.v_thresh),
        field!("inh.refractory", train.network.inh.refractory),
        field!("inh.tau_current", train.network.inh.tau_post_current),
        field!("inh.resistance", train.network.inh.resistance),
        (
            "plasticity.preset",
            |c| c.plasticity_preset.clone(),
            |c, v| {
                let p = PlasticityConfig::preset(v).ok_or_else(|| format!("unknown plasticity preset '{v}'"))?;
                let keep = c.train.plasticity;
                c.train.plasticity = PlasticityConfig {
                    rule: keep.rule,
                    w_max: keep.w_max,
                    ..p
                };
                c.plasticity_preset = v.to_string();
                Ok(())
            },
        ),
        field!("plasticity.rule", train.plasticity.rule),
        field!("plasticity.tau_rec", train.plasticity.tau_rec),
        field!("plasticity.tau_acc", train.plasticity.tau_acc),
        field!("plasticity.tau_post_trace", train.plasticity.tau_post_trace),
        field!("plasticity.offset", train.plasticity.offset),
        field!("plasticity.k", train.plasticity.k_const),
        field!("plasticity.k1", train.plasticity.k1_const),
        field!("plasticity.k2", train.plasticity.k2_const),
        field!("plasticity.alpha", train.plasticity.alpha),
        field!("plasticity.alpha_lin", train.plasticity.alpha_lin),
        field!("plasticity.theta_norm", train.plasticity.theta_norm),
        field!("plasticity.tau_leak_iso", train.plasticity.tau_leak_iso),
        field!("plasticity.alpha_iso", train.plasticity.alpha_iso),
        field!("plasticity.tau_trace_iso", train.plasticity.tau_trace_iso),
        field!("plasticity.eta_stdp", train.plasticity.eta_stdp),
        field!("plasticity.mu", train.plasticity.mu),
        field!("presentation.duration_ms", train.presentation.duration_ms),
        field!("presentation.rest_ms", train.presentation.rest_ms),
        field!("presentation.min_spikes", train.presentation.min_spikes),
        field!("presentation.rate_boost", train.presentation.rate_boost),
        field!("presentation.max_retries", train.presentation.max_retries),
        field!("encoding.rate_scale", train.rate_scale),
        field!("schedule.mode", schedule.mode),
        field!("schedule.preset", schedule.preset),
        (
            "schedule.classes",
            |c| join(&c.schedule.classes),
            |c, v| {
                c.schedule.classes = parse_list(v)?;
                Ok(())
            },
        ),
        field!("schedule.count", schedule.count),
        field!("schedule.base", schedule.base),
        field!("schedule.step", schedule.step),
        (
            "schedule.blocks",
            |c| {
                c.schedule
                    .blocks
                    .iter()
                    .map(|(k, n)| format!("{k}:{n}"))
                    .collect::<Vec<_>>()
                    .join(",")
            },
            |c, v| {
                c.schedule.blocks = parse_blocks(v)?;
                Ok(())
            },
        ),
        path_field!("data.train_images", data.train_images),
        path_field!("data.train_labels", data.train_labels),
        path_field!("data.test_images", data.test_images),
        path_field!("data.test_labels", data.test_labels),
        field!("data.label_count", data.label_count),
        field!("data.test_count", data.test_count),
        (
            "noise.kind",
            |c| noise_kind_str(c.noise.kind).to_string(),
            // Resets snr_db and contrast to the kind's defaults.
            |c, v| {
                let kind = parse_noise_kind(v)?;
                let defaults = match kind {
                    NoiseKind::AwgnReducedContrast => NoiseSpec::awgn_reduced_contrast(),
                    _ => NoiseSpec::awgn(),
                };
                c.noise = NoiseSpec {
                    kind,
                    floor_var: c.noise.floor_var,
                    ..defaults
                };
                Ok(())
            },
        ),
        field!("noise.snr_db", noise.snr_db),
        field!("noise.contrast", noise.contrast_factor),
        field!("noise.floor_var", noise.floor_var),
        field!("noise.seed", noise_seed),
        field!("run.seed", train.seed),
        field!("run.snapshot_every", train.snapshot_every),
        field!("run.init_frac", train.init_frac),
        field!("run.record_wallclock", train.record_wallclock),
    ]
}

impl RunConfig {
    pub fn keys() -> Vec<&'static str> {
        table().into_iter().map(|e| e.0).collect()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let (_, _, setter) = table()
            .into_iter()
            .find(|e| e.0 == key)
            .ok_or_else(|| format!("unknown key '{key}'"))?;
        setter(self, value.trim())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        table().into_iter().find(|e| e.0 == key).map(|e| (e.1)(self))
    }

    /// Applies `text` on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| SimError::ConfigLine { line: n + 1, msg };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, found '{line}'")))?;
            self.set(k.trim(), v).map_err(err)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_text(&text)
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| SimError::Config(format!("override '{o}' is not key=value")))?;
            self.set(k.trim(), v)
                .map_err(|m| SimError::Config(format!("override '{o}': {m}")))?;
        }
        Ok(())
    }

    /// Every effective value, one per line, in a form `from_text` reads back
    /// to an identical configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut section = "";
        for (key, get, _) in table() {
            let sec = key.split('.').next().unwrap_or("");
            if sec != section {
                if !section.is_empty() {
                    s.push('\n');
                }
                section = sec;
            }
            s.push_str(&format!("{key} = {}\n", get(self)));
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.schedule.spec()?;
        if self.noise.kind != NoiseKind::None {
            self.noise.validate()?;
        }
        Ok(())
    }

    pub fn rule(&self) -> Rule {
        self.train.plasticity.rule
    }
}
