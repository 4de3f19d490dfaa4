//! MNIST IDX containers: big-endian headers followed by unsigned bytes.
//! Files ending in gzip's magic bytes are inflated on the fly.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use cellnet_core::Dataset;
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
const UNSIGNED_BYTE: u8 = 0x08;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    pub type_code: u8,
    pub dims: Vec<usize>,
}

impl IdxHeader {
    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    fn byte_len(&self) -> usize {
        4 + 4 * self.dims.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxArray {
    pub header: IdxHeader,
    pub data: Vec<u8>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Parses an in-memory IDX file whose magic must equal `expected_magic`.
pub fn parse(bytes: &[u8], expected_magic: u32, path: &Path) -> Result<IdxArray> {
    let err = |offset: usize, reason: String| Error::Idx {
        path: path.to_path_buf(),
        offset,
        reason,
    };
    if bytes.len() < 4 {
        return Err(err(bytes.len(), "truncated header".into()));
    }
    let magic = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
    if magic != expected_magic {
        return Err(err(0, format!("bad magic {magic:#010x}, expected {expected_magic:#010x}")));
    }
    let type_code = bytes[2];
    if type_code != UNSIGNED_BYTE {
        return Err(err(2, format!("unsupported element type {type_code:#04x}")));
    }
    let rank = bytes[3] as usize;
    let mut dims = Vec::with_capacity(rank);
    for r in 0..rank {
        let at = 4 + 4 * r;
        let Some(b) = bytes.get(at..at + 4) else {
            return Err(err(bytes.len(), format!("truncated header, dimension {r} missing")));
        };
        dims.push(u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize);
    }
    let header = IdxHeader {
        magic,
        type_code,
        dims,
    };
    let start = header.byte_len();
    let count = header
        .dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| err(4, "dimension product overflows".into()))?;
    let available = bytes.len() - start;
    if available < count {
        return Err(err(
            bytes.len(),
            format!("truncated data: {count} bytes declared, {available} present"),
        ));
    }
    if available > count {
        return Err(err(start + count, format!("{} trailing bytes", available - count)));
    }
    Ok(IdxArray {
        header,
        data: bytes[start..].to_vec(),
    })
}

pub fn read_idx(path: &Path, expected_magic: u32) -> Result<IdxArray> {
    parse(&read_bytes(path)?, expected_magic, path)
}

pub fn encode(dims: &[usize], data: &[u8]) -> Vec<u8> {
    assert_eq!(dims.iter().product::<usize>(), data.len(), "IDX shape");
    let magic = 0x0800 | dims.len() as u32;
    let mut out = magic.to_be_bytes().to_vec();
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(data);
    out
}

/// Writes an unsigned-byte IDX file, gzipped when `gzip` is set.
pub fn write_idx(path: &Path, dims: &[usize], data: &[u8], gzip: bool) -> Result<()> {
    let bytes = encode(dims, data);
    let bytes = if gzip {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        enc.finish().map_err(|e| Error::io(path, e))?
    } else {
        bytes
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Loads an image/label pair. Images are flattened row-major and scaled by
/// 1/255; targets are the digit labels.
pub fn load_mnist(images: &Path, labels: &Path) -> Result<Dataset> {
    let img = read_idx(images, IMAGE_MAGIC)?;
    let lab = read_idx(labels, LABEL_MAGIC)?;
    let n = img.header.dims[0];
    if lab.header.dims[0] != n {
        return Err(Error::Idx {
            path: labels.to_path_buf(),
            offset: 4,
            reason: format!("{} labels for {n} images", lab.header.dims[0]),
        });
    }
    let d = img.header.dims[1] * img.header.dims[2];
    if n == 0 || d == 0 {
        return Err(Error::Idx {
            path: images.to_path_buf(),
            offset: 4,
            reason: "empty image file".into(),
        });
    }
    let features = img.data.iter().map(|&b| f64::from(b) / 255.0).collect();
    let targets = lab.data.iter().map(|&b| f64::from(b)).collect();
    Ok(Dataset::new(d, features, targets)?)
}
