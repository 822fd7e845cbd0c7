//! Big-endian IDX files as distributed for MNIST. Gzip input is detected by
//! its magic bytes and decompressed transparently.

use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use super::{Dataset, DatasetError, Split};

const IMAGE_MAGIC: u32 = 2051;
const LABEL_MAGIC: u32 = 2049;
const UBYTE: u8 = 0x08;

/// Raw image tensor from an IDX3 file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, DatasetError> {
    let io_err = |source| DatasetError::Io { path: path.display().to_string(), source };
    let raw = std::fs::read(path).map_err(io_err)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out).map_err(io_err)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

struct Cursor<'a> {
    path: &'a str,
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DatasetError> {
        let available = self.bytes.len() - self.offset;
        if available < n {
            return Err(DatasetError::Truncated {
                path: self.path.to_string(),
                offset: self.bytes.len(),
                needed: n - available,
            });
        }
        let s = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(s)
    }

    fn u32_be(&mut self) -> Result<u32, DatasetError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Checks the magic number and returns the dimension sizes.
fn parse_header(cur: &mut Cursor<'_>, magic: u32) -> Result<Vec<usize>, DatasetError> {
    let found = cur.u32_be()?;
    if found != magic {
        if found >> 16 == 0 && (found >> 8) as u8 != UBYTE && (found & 0xff) == (magic & 0xff) {
            return Err(DatasetError::UnsupportedType { path: cur.path.to_string(), code: (found >> 8) as u8 });
        }
        return Err(DatasetError::BadMagic { path: cur.path.to_string(), expected: magic, found });
    }
    let ndims = (magic & 0xff) as usize;
    (0..ndims).map(|_| cur.u32_be().map(|d| d as usize)).collect()
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages, DatasetError> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let name = path.display().to_string();
    let mut cur = Cursor { path: &name, bytes: &bytes, offset: 0 };
    let dims = parse_header(&mut cur, IMAGE_MAGIC)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let pixels = cur.take(count * rows * cols)?.to_vec();
    Ok(IdxImages { count, rows, cols, pixels })
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>, DatasetError> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let name = path.display().to_string();
    let mut cur = Cursor { path: &name, bytes: &bytes, offset: 0 };
    let dims = parse_header(&mut cur, LABEL_MAGIC)?;
    Ok(cur.take(dims[0])?.to_vec())
}

/// Loads an image/label IDX pair. Pixels are scaled by 1/255 and images are
/// flattened row-major. The class count is `max(label) + 1`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let images = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if images.count != labels.len() {
        return Err(DatasetError::CountMismatch { images: images.count, labels: labels.len() });
    }
    let features = images.pixels.iter().map(|&p| f32::from(p) / 255.0).collect();
    let labels: Vec<u32> = labels.into_iter().map(u32::from).collect();
    let class_count = labels.iter().max().map_or(0, |&m| m as usize + 1);
    Dataset::new(features, images.rows * images.cols, labels, class_count, Split::Train)
}

pub fn write_idx_images(mut w: impl Write, images: &IdxImages) -> std::io::Result<()> {
    w.write_all(&IMAGE_MAGIC.to_be_bytes())?;
    for d in [images.count, images.rows, images.cols] {
        w.write_all(&(d as u32).to_be_bytes())?;
    }
    w.write_all(&images.pixels)
}

pub fn write_idx_labels(mut w: impl Write, labels: &[u8]) -> std::io::Result<()> {
    w.write_all(&LABEL_MAGIC.to_be_bytes())?;
    w.write_all(&(labels.len() as u32).to_be_bytes())?;
    w.write_all(labels)
}
