//! `NGMDL1` model checkpoints, all integers and floats little-endian:
//!
//! ```text
//! "NGMDL1"                       6 bytes
//! seed                           u64
//! dropout_rate                   f32
//! layer_count                    u32
//! (fan_out, fan_in) per layer    u32, u32
//! per layer: weights row-major   fan_out * fan_in f32
//!            bias                fan_out f32
//! ```

use std::io::{Read, Write};

use ndarray::{Array1, Array2};

use super::{Architecture, DenseLayer, MlpError, Model};

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"NGMDL1";

pub fn write_checkpoint(mut w: impl Write, model: &Model) -> Result<(), MlpError> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&model.seed().to_le_bytes())?;
    w.write_all(&(model.architecture().dropout_rate as f32).to_le_bytes())?;
    w.write_all(&(model.layers().len() as u32).to_le_bytes())?;
    for layer in model.layers() {
        let (out, inp) = layer.weights.dim();
        w.write_all(&(out as u32).to_le_bytes())?;
        w.write_all(&(inp as u32).to_le_bytes())?;
    }
    let mut buf = Vec::new();
    for layer in model.layers() {
        buf.clear();
        for &v in layer.weights.iter().chain(layer.bias.iter()) {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N], MlpError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => MlpError::Checkpoint("truncated checkpoint".into()),
        _ => MlpError::Io(e),
    })?;
    Ok(b)
}

fn read_u32(r: &mut impl Read) -> Result<usize, MlpError> {
    Ok(u32::from_le_bytes(read_array(r)?) as usize)
}

fn read_f32s(r: &mut impl Read, n: usize) -> Result<Vec<f64>, MlpError> {
    (0..n).map(|_| Ok(f64::from(f32::from_le_bytes(read_array(r)?)))).collect()
}

pub fn read_checkpoint(mut r: impl Read) -> Result<Model, MlpError> {
    let magic: [u8; 6] = read_array(&mut r)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(MlpError::Checkpoint(format!("bad magic {:?}", String::from_utf8_lossy(&magic))));
    }
    let seed = u64::from_le_bytes(read_array(&mut r)?);
    let dropout_rate = f64::from(f32::from_le_bytes(read_array(&mut r)?));
    let layer_count = read_u32(&mut r)?;
    if layer_count < 2 {
        return Err(MlpError::Checkpoint(format!("{layer_count} layers; need at least 2")));
    }
    let shapes = (0..layer_count).map(|_| Ok((read_u32(&mut r)?, read_u32(&mut r)?))).collect::<Result<Vec<_>, MlpError>>()?;
    for pair in shapes.windows(2) {
        if pair[1].1 != pair[0].0 {
            return Err(MlpError::Checkpoint(format!("layer shapes {:?} and {:?} do not chain", pair[0], pair[1])));
        }
    }
    let mut layers = Vec::with_capacity(layer_count);
    for &(out, inp) in &shapes {
        let weights = Array2::from_shape_vec((out, inp), read_f32s(&mut r, out * inp)?).expect("length checked");
        let bias = Array1::from(read_f32s(&mut r, out)?);
        layers.push(DenseLayer { weights, bias });
    }
    let arch = Architecture {
        input_dim: shapes[0].1,
        hidden_sizes: shapes[..layer_count - 1].iter().map(|s| s.0).collect(),
        output_classes: shapes[layer_count - 1].0,
        dropout_rate,
    };
    Model::from_layers(arch, layers, seed)
}
