//! Presentation schedules: sequential class blocks, seeded intermixing, or
//! an explicit list of `(class, count)` blocks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use super::ImageSet;
use crate::encoding::{domain, RngStream};
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    Sequential,
    Intermixed,
    Custom,
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleMode::Sequential => "sequential",
            ScheduleMode::Intermixed => "intermixed",
            ScheduleMode::Custom => "custom",
        })
    }
}

impl FromStr for ScheduleMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sequential" => Ok(ScheduleMode::Sequential),
            "intermixed" => Ok(ScheduleMode::Intermixed),
            "custom" => Ok(ScheduleMode::Custom),
            o => Err(format!("unknown schedule mode '{o}'")),
        }
    }
}

/// What to present. `blocks` is an ordered list of `(class, count)`:
/// sequential mode presents the blocks in order, intermixed mode shuffles
/// their union, custom mode presents them in order and allows a class to
/// appear in several blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleSpec {
    pub mode: ScheduleMode,
    pub blocks: Vec<(u8, usize)>,
}

impl ScheduleSpec {
    pub fn new(mode: ScheduleMode, blocks: Vec<(u8, usize)>) -> Self {
        Self { mode, blocks }
    }

    /// Ascending class order with the given per-class counts.
    pub fn from_counts(mode: ScheduleMode, counts: &BTreeMap<u8, usize>) -> Self {
        Self::new(mode, counts.iter().map(|(&c, &n)| (c, n)).collect())
    }

    pub fn classes(&self) -> Vec<u8> {
        let mut c: Vec<u8> = self.blocks.iter().map(|b| b.0).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn per_class_counts(&self) -> BTreeMap<u8, usize> {
        let mut m = BTreeMap::new();
        for &(c, n) in &self.blocks {
            *m.entry(c).or_insert(0) += n;
        }
        m
    }

    pub fn total(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }
}

/// Linearly decreasing counts: class `classes[k]` gets `base + k * step`.
pub fn decreasing_counts(classes: &[u8], base: i64, step: i64) -> Result<BTreeMap<u8, usize>> {
    classes
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let n = base + step * k as i64;
            if n < 0 {
                Err(SimError::Config(format!("decreasing preset gives negative count {n} for class {c}")))
            } else {
                Ok((c, n as usize))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    /// `(image index, class)` in presentation order.
    pub entries: Vec<(usize, u8)>,
    pub mode: ScheduleMode,
    pub per_class_counts: BTreeMap<u8, usize>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn classes(&self) -> Vec<u8> {
        self.per_class_counts.keys().copied().collect()
    }
}

/// Draws images for each block from `pool` (indices into `set`), taking each
/// class's images in pool order without reuse.
pub fn build_schedule(set: &ImageSet, pool: &[usize], spec: &ScheduleSpec, seed: u64) -> Result<Schedule> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); 10];
    for &k in pool {
        by_class[set.label(k) as usize].push(k);
    }
    let per_class = spec.per_class_counts();
    for (&c, &n) in &per_class {
        if c > 9 {
            return Err(SimError::Config(format!("class {c} out of range 0-9")));
        }
        let have = by_class[c as usize].len();
        if n > have {
            return Err(SimError::InsufficientImages {
                class: c,
                requested: n,
                available: have,
            });
        }
    }

    let mut next = [0usize; 10];
    let mut entries = Vec::with_capacity(spec.total());
    for &(c, n) in &spec.blocks {
        let ci = c as usize;
        for k in &by_class[ci][next[ci]..next[ci] + n] {
            entries.push((*k, c));
        }
        next[ci] += n;
    }
    if spec.mode == ScheduleMode::Intermixed {
        let mut rng = RngStream::substream(seed, domain::SCHEDULE, 0);
        entries.shuffle(rng.rng());
    }
    Ok(Schedule {
        entries,
        mode: spec.mode,
        per_class_counts: per_class,
    })
}
