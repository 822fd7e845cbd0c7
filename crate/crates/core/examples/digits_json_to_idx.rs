//! Converts per-digit JSON files (`0.json` .. `9.json`, each `{"data": [...]}`
//! holding concatenated 28x28 images with pixels scaled to [0, 1]) into
//! gzip-compressed IDX files. The first 80% of every digit goes to the
//! training split and the rest to the test split.
//!
//! ```text
//! cargo run --release -p neurograph --example digits_json_to_idx -- <digits dir> <out dir>
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use flate2::write::GzEncoder;
use flate2::Compression;
use neurograph::dataset::{write_idx_images, write_idx_labels, IdxImages};
use serde::Deserialize;

const SIDE: usize = 28;

#[derive(Deserialize)]
struct Digits {
    data: Vec<f64>,
}

fn write_split(out: &Path, prefix: &str, pixels: Vec<u8>, labels: Vec<u8>) -> std::io::Result<()> {
    let images = IdxImages { count: labels.len(), rows: SIDE, cols: SIDE, pixels };
    let gz = |name: String| File::create(out.join(name)).map(|f| GzEncoder::new(BufWriter::new(f), Compression::default()));
    let mut w = gz(format!("{prefix}-images-idx3-ubyte.gz"))?;
    write_idx_images(&mut w, &images)?;
    w.finish()?;
    let mut w = gz(format!("{prefix}-labels-idx1-ubyte.gz"))?;
    write_idx_labels(&mut w, &labels)?;
    w.finish()?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let [_, src, out] = &args[..] else {
        return Err("usage: digits_json_to_idx <digits dir> <out dir>".into());
    };
    let (src, out) = (Path::new(src), Path::new(out));
    std::fs::create_dir_all(out)?;
    let (mut train_px, mut train_y, mut test_px, mut test_y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for digit in 0u8..10 {
        let file = File::open(src.join(format!("{digit}.json")))?;
        let digits: Digits = serde_json::from_reader(std::io::BufReader::new(file))?;
        if !digits.data.len().is_multiple_of(SIDE * SIDE) {
            return Err(format!("{digit}.json: {} values is not a whole number of images", digits.data.len()).into());
        }
        let images: Vec<&[f64]> = digits.data.chunks(SIDE * SIDE).collect();
        let n_train = images.len() * 4 / 5;
        for (i, img) in images.iter().enumerate() {
            let (px, y) = if i < n_train { (&mut train_px, &mut train_y) } else { (&mut test_px, &mut test_y) };
            px.extend(img.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
            y.push(digit);
        }
    }
    println!("train {} test {}", train_y.len(), test_y.len());
    write_split(out, "train", train_px, train_y)?;
    write_split(out, "t10k", test_px, test_y)?;
    Ok(())
}
