//! Big-endian IDX files (the MNIST distribution format), optionally gzipped.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::ImageSet;
use crate::error::{Result, SimError};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// Reads a file, transparently inflating `.gz`.
pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| SimError::io(path, e))?;
    if !is_gz(path) {
        return Ok(raw);
    }
    let mut out = Vec::new();
    GzDecoder::new(&raw[..])
        .read_to_end(&mut out)
        .map_err(|e| SimError::io(path, e))?;
    Ok(out)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let data = if is_gz(path) {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(bytes).map_err(|e| SimError::io(path, e))?;
        enc.finish().map_err(|e| SimError::io(path, e))?
    } else {
        bytes.to_vec()
    };
    fs::write(path, data).map_err(|e| SimError::io(path, e))
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, offset: usize, msg: String) -> SimError {
        SimError::Load {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            msg,
        }
    }

    fn u32(&mut self) -> Result<u32> {
        let end = self.pos + 4;
        if end > self.bytes.len() {
            return Err(self.err(
                self.bytes.len(),
                format!("truncated header: expected at least {end} bytes, found {}", self.bytes.len()),
            ));
        }
        let v = u32::from_be_bytes(self.bytes[self.pos..end].try_into().unwrap());
        self.pos = end;
        Ok(v)
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let m = self.u32()?;
        if m != expected {
            return Err(self.err(0, format!("bad magic: expected {expected}, found {m}")));
        }
        Ok(())
    }

    fn payload(&mut self, len: usize) -> Result<&'a [u8]> {
        let expected = self.pos + len;
        if self.bytes.len() < expected {
            return Err(self.err(
                self.bytes.len(),
                format!("truncated: expected {expected} bytes, found {}", self.bytes.len()),
            ));
        }
        if self.bytes.len() > expected {
            return Err(self.err(
                expected,
                format!("trailing data: expected {expected} bytes, found {}", self.bytes.len()),
            ));
        }
        let out = &self.bytes[self.pos..expected];
        self.pos = expected;
        Ok(out)
    }
}

/// Decodes an image file: returns `(rows, cols, pixels)`.
pub fn parse_images(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut c = Cursor { path, bytes, pos: 0 };
    c.magic(IMAGE_MAGIC)?;
    let n = c.u32()? as usize;
    let rows = c.u32()? as usize;
    let cols = c.u32()? as usize;
    let px = c.payload(n * rows * cols)?;
    Ok((rows, cols, px.to_vec()))
}

pub fn parse_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u8>> {
    let mut c = Cursor { path, bytes, pos: 0 };
    c.magic(LABEL_MAGIC)?;
    let n = c.u32()? as usize;
    let labels = c.payload(n)?;
    if let Some(k) = labels.iter().position(|&l| l > 9) {
        return Err(c.err(8 + k, format!("label {} out of range 0-9", labels[k])));
    }
    Ok(labels.to_vec())
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<ImageSet> {
    let (rows, cols, pixels) = parse_images(images_path, &read_bytes(images_path)?)?;
    if rows != super::SIDE || cols != super::SIDE {
        return Err(SimError::Load {
            path: images_path.to_path_buf(),
            offset: 8,
            msg: format!("expected 28x28 images, found {rows}x{cols}"),
        });
    }
    let labels = parse_labels(labels_path, &read_bytes(labels_path)?)?;
    let n_images = pixels.len() / super::PIXELS;
    if n_images != labels.len() {
        return Err(SimError::Load {
            path: labels_path.to_path_buf(),
            offset: 4,
            msg: format!("count mismatch: {n_images} images, {} labels", labels.len()),
        });
    }
    Ok(ImageSet::new(pixels, labels))
}

pub fn encode_images(set: &ImageSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + set.pixels().len());
    for v in [IMAGE_MAGIC, set.len() as u32, super::SIDE as u32, super::SIDE as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(set.pixels());
    out
}

pub fn encode_labels(set: &ImageSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + set.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(set.len() as u32).to_be_bytes());
    out.extend_from_slice(set.labels());
    out
}

pub fn write_idx(set: &ImageSet, images_path: &Path, labels_path: &Path) -> Result<()> {
    write_bytes(images_path, &encode_images(set))?;
    write_bytes(labels_path, &encode_labels(set))
}
