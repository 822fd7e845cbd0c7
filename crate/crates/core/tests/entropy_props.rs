use neurograph::activation::normalize_columns;
use neurograph::entropy::{class_entropy, model_entropy};
use neurograph::{ActivationMatrix, EntropyConfig, LogBase};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = (usize, Vec<f32>, Vec<u32>)> {
    (1usize..30, 1usize..6).prop_flat_map(|(rows, cols)| {
        (
            Just(cols),
            proptest::collection::vec(prop_oneof![1 => Just(0.0f32), 2 => 0.0f32..8.0], rows * cols),
            proptest::collection::vec(0u32..3, rows),
        )
    })
}

fn build(cols: usize, values: Vec<f32>, labels: Vec<u32>) -> ActivationMatrix {
    ActivationMatrix::new(values, vec![0, cols], labels, 3).unwrap()
}

proptest! {
    #[test]
    fn bounded_by_log_bins((cols, values, labels) in matrix(), bins in 2usize..40) {
        let cfg = EntropyConfig::new(bins, LogBase::E).unwrap();
        let r = model_entropy(&normalize_columns(&build(cols, values, labels)), &cfg);
        for e in &r.per_neuron {
            prop_assert!(*e >= 0.0 && *e <= (bins as f64).ln() + 1e-12);
        }
        prop_assert!((r.total - r.per_neuron.iter().sum::<f64>()).abs() <= 1e-9);
    }

    #[test]
    fn row_order_does_not_matter((cols, values, labels) in matrix(), seed in any::<u64>()) {
        let rows = labels.len();
        let mut order: Vec<usize> = (0..rows).collect();
        let mut state = seed;
        for i in (1..rows).rev() {
            state = neurograph::seed::splitmix64(state);
            order.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let f = build(cols, values, labels);
        let cfg = EntropyConfig::default();
        let a = model_entropy(&normalize_columns(&f), &cfg);
        let b = model_entropy(&normalize_columns(&f.select_rows(&order)), &cfg);
        prop_assert_eq!(a.dead, b.dead);
        for (x, y) in a.per_neuron.iter().zip(&b.per_neuron) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn column_scaling_does_not_matter((cols, values, labels) in matrix(), power in -6i32..6) {
        // Powers of two keep the f32 values exact.
        let scale = 2f32.powi(power);
        let scaled: Vec<f32> = values.iter().map(|v| v * scale).collect();
        let cfg = EntropyConfig::default();
        let a = model_entropy(&normalize_columns(&build(cols, values, labels.clone())), &cfg);
        let b = model_entropy(&normalize_columns(&build(cols, scaled, labels)), &cfg);
        for (x, y) in a.per_neuron.iter().zip(&b.per_neuron) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn class_entropy_is_entropy_of_the_filtered_rows((cols, values, labels) in matrix(), class in 0usize..3) {
        let f = build(cols, values.clone(), labels.clone());
        let cfg = EntropyConfig::default();
        let kept: Vec<f32> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l as usize == class)
            .flat_map(|(r, _)| values[r * cols..(r + 1) * cols].iter().copied())
            .collect();
        let kept_labels: Vec<u32> = labels.iter().copied().filter(|&l| l as usize == class).collect();
        match class_entropy(&f, class, &cfg) {
            Ok(r) => {
                let oracle = model_entropy(&normalize_columns(&build(cols, kept, kept_labels)), &cfg);
                prop_assert_eq!(r, oracle);
            }
            Err(_) => prop_assert!(kept_labels.is_empty()),
        }
    }
}
