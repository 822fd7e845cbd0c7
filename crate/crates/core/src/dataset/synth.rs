use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Dataset, Split};

/// Gaussian blobs around seeded class means on the unit sphere.
///
/// Each sample is `mean_c + spread * N(0, I)`. The first 80% of every
/// class's samples (rounded) go to the training split, the rest to the test
/// split; both splits are then shuffled with the same seeded stream.
///
/// # Panics
/// If `class_count < 2` or `dim == 0`.
pub fn synth_blobs(class_count: usize, per_class: usize, dim: usize, spread: f64, seed: u64) -> (Dataset, Dataset) {
    assert!(class_count >= 2, "synthetic data needs at least two classes");
    assert!(dim > 0, "synthetic data needs a positive dimension");
    let mut rng = crate::seed::rng(seed);
    let means: Vec<Vec<f64>> = (0..class_count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-9 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect();
    let n_train = (per_class * 4 + 2) / 5;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mean) in means.iter().enumerate() {
        for i in 0..per_class {
            let x: Vec<f32> = mean.iter().map(|&m| (m + spread * rng.sample::<f64, _>(StandardNormal)) as f32).collect();
            if i < n_train { &mut train } else { &mut test }.push((x, class as u32));
        }
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    let build = |rows: Vec<(Vec<f32>, u32)>, split| {
        let labels = rows.iter().map(|r| r.1).collect();
        let features = rows.into_iter().flat_map(|r| r.0).collect();
        Dataset::new(features, dim, labels, class_count, split).expect("synthetic rows are consistent")
    };
    (build(train, Split::Train), build(test, Split::Test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_arithmetic() {
        let (train, test) = synth_blobs(3, 10, 5, 0.1, 1);
        assert_eq!(train.len(), 24);
        assert_eq!(test.len(), 6);
        assert_eq!(train.class_histogram(), vec![8, 8, 8]);
        assert_eq!(test.class_histogram(), vec![2, 2, 2]);
        assert_eq!(train.split(), Split::Train);
        assert_eq!(test.split(), Split::Test);
    }

    #[test]
    fn deterministic() {
        assert_eq!(synth_blobs(4, 20, 3, 0.5, 7), synth_blobs(4, 20, 3, 0.5, 7));
        assert_ne!(synth_blobs(4, 20, 3, 0.5, 7).0, synth_blobs(4, 20, 3, 0.5, 8).0);
    }

    #[test]
    fn zero_spread_puts_samples_on_means() {
        let (train, _) = synth_blobs(3, 5, 4, 0.0, 3);
        for r in 0..train.len() {
            let norm: f32 = train.sample(r).iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-5);
        }
    }
}
