//! Receptive-field grids as binary PGM (P5, maxval 255).

use std::path::Path;

use crate::dataio::SIDE;
use crate::error::{Result, SimError};
use crate::trainer::Snapshot;

/// Separator pixel value between tiles.
pub const SEPARATOR: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Each tile spans the full gray range on its own min..max.
    PerNeuron,
    /// One min..max over all neurons.
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn scale(v: f64, lo: f64, hi: f64) -> u8 {
    if hi > lo {
        ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
    } else {
        0
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Tiles 28x28 rows row-major by neuron index, `cols` tiles per grid row,
/// with one-pixel separators.
pub fn tile_rows<'a>(rows: impl ExactSizeIterator<Item = &'a [f64]>, cols: usize, norm: Normalization) -> Result<GrayImage> {
    if cols == 0 {
        return Err(SimError::Config("grid columns must be >= 1".into()));
    }
    let rows: Vec<&[f64]> = rows.collect();
    if let Some(r) = rows.iter().find(|r| r.len() != SIDE * SIDE) {
        return Err(SimError::Dimension(format!("receptive field has {} weights, expected 784", r.len())));
    }
    let n = rows.len();
    let grid_rows = n.div_ceil(cols).max(1);
    let grid_cols = cols.min(n.max(1));
    let width = (SIDE + 1) * grid_cols - 1;
    let height = (SIDE + 1) * grid_rows - 1;
    let mut pixels = vec![SEPARATOR; width * height];
    let global = min_max(&rows.concat());
    for gr in 0..grid_rows {
        for gc in 0..grid_cols {
            let j = gr * cols + gc;
            let (x0, y0) = (gc * (SIDE + 1), gr * (SIDE + 1));
            for y in 0..SIDE {
                for x in 0..SIDE {
                    pixels[(y0 + y) * width + x0 + x] = 0;
                }
            }
            let Some(row) = rows.get(j) else { continue };
            let (lo, hi) = match norm {
                Normalization::PerNeuron => min_max(row),
                Normalization::Global => global,
            };
            for y in 0..SIDE {
                for x in 0..SIDE {
                    pixels[(y0 + y) * width + x0 + x] = scale(row[y * SIDE + x], lo, hi);
                }
            }
        }
    }
    Ok(GrayImage { width, height, pixels })
}

pub fn snapshot_grid(snap: &Snapshot, cols: usize, norm: Normalization) -> Result<GrayImage> {
    tile_rows(snap.weights.chunks(snap.n_input.max(1)), cols, norm)
}

pub fn write_pgm(image: &GrayImage, path: &Path) -> Result<()> {
    std::fs::write(path, image.to_pgm()).map_err(|e| SimError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(n: usize, f: impl Fn(usize, usize) -> f64) -> Snapshot {
        Snapshot {
            presentation_index: 0,
            seed: 0,
            n_exc: n,
            n_input: 784,
            weights: (0..n * 784).map(|k| f(k / 784, k % 784)).collect(),
            thetas: vec![0.0; n],
        }
    }

    #[test]
    fn nine_tiles_in_three_columns() {
        let img = snapshot_grid(&snap(9, |j, i| (j * i) as f64), 3, Normalization::PerNeuron).unwrap();
        assert_eq!((img.width, img.height), (86, 86));
        let pgm = img.to_pgm();
        let header = b"P5\n86 86\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 86 * 86);
        // Separator column between the first two tiles.
        assert_eq!(img.pixels[28], SEPARATOR);
    }

    #[test]
    fn zero_weights_are_black() {
        let img = snapshot_grid(&snap(4, |_, _| 0.0), 2, Normalization::PerNeuron).unwrap();
        for y in 0..28 {
            for x in 0..28 {
                assert_eq!(img.pixels[y * img.width + x], 0);
            }
        }
    }

    #[test]
    fn per_neuron_vs_global() {
        // Neuron 1 is neuron 0 at a tenth of the strength.
        let s = snap(2, |j, i| (i % 28) as f64 / if j == 0 { 1.0 } else { 10.0 });
        let per = snapshot_grid(&s, 2, Normalization::PerNeuron).unwrap();
        let glob = snapshot_grid(&s, 2, Normalization::Global).unwrap();
        let at = |img: &GrayImage, tile: usize, x: usize| img.pixels[tile * 29 + x];
        assert_eq!(at(&per, 0, 27), 255);
        assert_eq!(at(&per, 1, 27), 255);
        assert_eq!(at(&glob, 0, 27), 255);
        assert_eq!(at(&glob, 1, 27), 26);
    }

    #[test]
    fn partial_last_row() {
        let img = snapshot_grid(&snap(5, |_, i| i as f64), 3, Normalization::PerNeuron).unwrap();
        assert_eq!((img.width, img.height), (86, 57));
        assert_eq!(img.pixels.len(), 86 * 57);
    }
}
