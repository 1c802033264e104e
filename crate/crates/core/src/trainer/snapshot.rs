//! Weight snapshots.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ASPW"
//! 4       4     u32 format version (1)
//! 8       4     u32 n_exc
//! 12      4     u32 n_input
//! 16      8     u64 presentation index (presentations completed)
//! 24      8     u64 run seed
//! 32      8*n_exc*n_input   f64 weights, row-major (neuron, input)
//! ...     8*n_exc           f64 homeostatic theta per neuron (mV)
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::sim::{Network, NetworkParams, WeightMatrix};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"ASPW";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub presentation_index: u64,
    pub seed: u64,
    pub n_exc: usize,
    pub n_input: usize,
    pub weights: Vec<f64>,
    pub thetas: Vec<f64>,
}

impl Snapshot {
    pub fn capture(net: &Network, presentation_index: u64, seed: u64) -> Self {
        Self {
            presentation_index,
            seed,
            n_exc: net.n_exc(),
            n_input: net.n_input(),
            weights: net.weights.to_dense(),
            thetas: net.thetas(),
        }
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.n_input..(j + 1) * self.n_input]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks(self.n_input)
    }

    /// Fresh network (neurons at rest) carrying these weights and thresholds.
    pub fn to_network(&self, params: NetworkParams) -> Result<Network> {
        let mut net = Network::new(
            params,
            WeightMatrix::from_vec(self.n_exc, self.n_input, self.weights.clone()),
        )?;
        net.set_thetas(&self.thetas)?;
        Ok(net)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * (self.weights.len() + self.thetas.len()));
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_exc as u32).to_le_bytes());
        out.extend_from_slice(&(self.n_input as u32).to_le_bytes());
        out.extend_from_slice(&self.presentation_index.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for v in self.weights.iter().chain(&self.thetas) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| SimError::Dimension(format!("snapshot: {m}"));
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..4] != SNAPSHOT_MAGIC {
            return Err(bad("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != SNAPSHOT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let n_exc = u32_at(8) as usize;
        let n_input = u32_at(12) as usize;
        let expected = HEADER_LEN + 8 * (n_exc * n_input + n_exc);
        if bytes.len() != expected {
            return Err(bad(format!("expected {expected} bytes, found {}", bytes.len())));
        }
        let floats: Vec<f64> = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let (weights, thetas) = floats.split_at(n_exc * n_input);
        Ok(Self {
            presentation_index: u64_at(16),
            seed: u64_at(24),
            n_exc,
            n_input,
            weights: weights.to_vec(),
            thetas: thetas.to_vec(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| SimError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| SimError::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
