//! `NGACT1` activation snapshots, little-endian:
//!
//! ```text
//! "NGACT1"                6 bytes
//! rows, cols              u32, u32
//! layer_count             u32
//! layer_offsets           (layer_count + 1) u32
//! class_count             u32
//! labels                  rows u32
//! values                  rows * cols f32, row-major
//! ```

use std::io::{Read, Write};

use super::{ActivationError, ActivationMatrix};

pub const ACTIVATION_MAGIC: &[u8; 6] = b"NGACT1";

pub fn write_activations(mut w: impl Write, f: &ActivationMatrix) -> Result<(), ActivationError> {
    let mut buf = Vec::with_capacity(32 + 4 * (f.rows + f.values.len()));
    buf.extend_from_slice(ACTIVATION_MAGIC);
    for v in [f.rows, f.cols, f.layer_count()] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for &o in &f.layer_offsets {
        buf.extend_from_slice(&(o as u32).to_le_bytes());
    }
    buf.extend_from_slice(&(f.class_count as u32).to_le_bytes());
    for &l in &f.labels {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    for &v in &f.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_activations(mut r: impl Read) -> Result<ActivationMatrix, ActivationError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if !bytes.starts_with(ACTIVATION_MAGIC) {
        return Err(ActivationError::Invalid("missing NGACT1 magic".into()));
    }
    let mut words = bytes[6..].chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]);
    let mut next = || words.next().ok_or_else(|| ActivationError::Invalid("truncated activation snapshot".into()));
    let rows = u32::from_le_bytes(next()?) as usize;
    let cols = u32::from_le_bytes(next()?) as usize;
    let layers = u32::from_le_bytes(next()?) as usize;
    let offsets = (0..=layers).map(|_| Ok(u32::from_le_bytes(next()?) as usize)).collect::<Result<Vec<_>, ActivationError>>()?;
    let class_count = u32::from_le_bytes(next()?) as usize;
    let labels = (0..rows).map(|_| Ok(u32::from_le_bytes(next()?))).collect::<Result<Vec<_>, ActivationError>>()?;
    let values = (0..rows * cols).map(|_| Ok(f32::from_le_bytes(next()?))).collect::<Result<Vec<_>, ActivationError>>()?;
    if next().is_ok() || (bytes.len() - 6) % 4 != 0 {
        return Err(ActivationError::Invalid("trailing bytes after activation values".into()));
    }
    if offsets.last() != Some(&cols) {
        return Err(ActivationError::Invalid(format!("layer offsets {offsets:?} do not end at {cols} columns")));
    }
    ActivationMatrix::new(values, offsets, labels, class_count)
}
