use std::io::Read;
use std::path::{Path, PathBuf};

use asp_core::dataio::{load_idx, write_idx, ImageSet, PIXELS};
use asp_core::SimError;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}

fn gunzip(path: &Path) -> Vec<u8> {
    let mut out = Vec::new();
    flate2::read::GzDecoder::new(std::fs::File::open(path).unwrap())
        .read_to_end(&mut out)
        .unwrap();
    out
}

fn be32(b: &[u8], at: usize) -> usize {
    u32::from_be_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]]) as usize
}

#[test]
fn loader_matches_independent_reader() {
    for (img, lbl) in [("train-images-idx3-ubyte.gz", "train-labels-idx1-ubyte.gz"), ("t10k-images-idx3-ubyte.gz", "t10k-labels-idx1-ubyte.gz")] {
        let (ip, lp) = (data_dir().join(img), data_dir().join(lbl));
        let set = load_idx(&ip, &lp).unwrap();
        let (ib, lb) = (gunzip(&ip), gunzip(&lp));
        assert_eq!(be32(&ib, 0), 0x0803);
        assert_eq!(be32(&lb, 0), 0x0801);
        let n = be32(&ib, 4);
        assert_eq!((be32(&ib, 8), be32(&ib, 12)), (28, 28));
        assert_eq!(be32(&lb, 4), n);
        assert_eq!(set.len(), n);
        assert_eq!(set.pixels(), &ib[16..16 + n * PIXELS]);
        assert_eq!(set.labels(), &lb[8..8 + n]);
        for k in [0, n / 2, n - 1] {
            assert_eq!(set.image(k), &ib[16 + k * PIXELS..16 + (k + 1) * PIXELS]);
        }
    }
}

#[test]
fn bundled_sets_cover_all_classes() {
    let set = load_idx(
        &data_dir().join("train-images-idx3-ubyte.gz"),
        &data_dir().join("train-labels-idx1-ubyte.gz"),
    )
    .unwrap();
    assert!(set.class_counts().iter().all(|&c| c > 500), "{:?}", set.class_counts());
}

#[test]
fn write_then_load_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut set = ImageSet::empty();
    for k in 0..5u8 {
        set.push(&[k.wrapping_mul(51); PIXELS], k);
    }
    for ext in ["", ".gz"] {
        let ip = dir.path().join(format!("img{ext}"));
        let lp = dir.path().join(format!("lbl{ext}"));
        write_idx(&set, &ip, &lp).unwrap();
        assert_eq!(load_idx(&ip, &lp).unwrap(), set);
    }
}

#[test]
fn truncated_file_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let ip = dir.path().join("short-images");
    let lp = dir.path().join("short-labels");
    let mut set = ImageSet::empty();
    set.push(&[0; PIXELS], 3);
    write_idx(&set, &ip, &lp).unwrap();
    let bytes = std::fs::read(&ip).unwrap();
    std::fs::write(&ip, &bytes[..bytes.len() - 10]).unwrap();
    let err = load_idx(&ip, &lp).unwrap_err();
    assert!(matches!(err, SimError::Load { .. }), "{err:?}");
    assert!(err.to_string().contains("short-images"), "{err}");
}
