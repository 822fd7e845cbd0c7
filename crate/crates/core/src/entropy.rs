//! Activation pattern entropy.
//!
//! A neuron's nonzero normalized activations are binned into `R` equal-width
//! bins spanning `[min_nz, max_nz]` of that neuron (last bin right-closed);
//! its entropy is the Shannon entropy of the bin frequencies. The model
//! entropy is the sum over neurons, dead neurons contributing zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activation::{normalize_columns, ActivationMatrix, NormalizedActivations};

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("at least 2 bins are required, got {0}")]
    TooFewBins(usize),
    #[error("series normalization needs at least 2 values, got {0}")]
    SeriesTooShort(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub bins: usize,
    pub log_base: LogBase,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self { bins: 10, log_base: LogBase::Two }
    }
}

impl EntropyConfig {
    pub fn new(bins: usize, log_base: LogBase) -> Result<Self, EntropyError> {
        if bins < 2 {
            return Err(EntropyError::TooFewBins(bins));
        }
        Ok(Self { bins, log_base })
    }

    fn log(&self, x: f64) -> f64 {
        match self.log_base {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }

    /// `log(R)` in the configured base.
    pub fn max_entropy(&self) -> f64 {
        self.log(self.bins as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyResult {
    pub per_neuron: Vec<f64>,
    pub total: f64,
    pub dead: Vec<usize>,
}

/// Histogram counts of the nonzero entries, or `None` if there are none.
pub fn histogram(column: &[f64], bins: usize) -> Option<Vec<usize>> {
    let (lo, hi) = column.iter().filter(|&&v| v != 0.0).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    let mut counts = vec![0; bins];
    let width = hi - lo;
    for &v in column.iter().filter(|&&v| v != 0.0) {
        let idx = if width > 0.0 { (((v - lo) / width) * bins as f64).floor() as usize } else { 0 };
        counts[idx.min(bins - 1)] += 1;
    }
    Some(counts)
}

/// Shannon entropy of a count vector, `0 · log 0 = 0`.
pub fn shannon_entropy(counts: &[usize], config: &EntropyConfig) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * config.log(p)
        })
        .sum();
    h.max(0.0)
}

/// `(E_j, dead)` for one column of the normalized matrix.
pub fn neuron_entropy(column: &[f64], config: &EntropyConfig) -> (f64, bool) {
    match histogram(column, config.bins) {
        None => (0.0, true),
        Some(counts) => (shannon_entropy(&counts, config), false),
    }
}

pub fn model_entropy(normalized: &NormalizedActivations, config: &EntropyConfig) -> EntropyResult {
    let columns: Vec<usize> = (0..normalized.cols()).collect();
    let entropy_of = |&c: &usize| neuron_entropy(&normalized.column(c), config);
    #[cfg(feature = "parallel")]
    let results: Vec<(f64, bool)> = {
        use rayon::prelude::*;
        columns.par_iter().map(entropy_of).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(f64, bool)> = columns.iter().map(entropy_of).collect();
    let dead = results.iter().enumerate().filter(|(_, r)| r.1).map(|(c, _)| c).collect();
    let per_neuron: Vec<f64> = results.into_iter().map(|r| r.0).collect();
    EntropyResult { total: per_neuron.iter().sum(), per_neuron, dead }
}

/// Entropy over the rows of one class, normalized within that class.
pub fn class_entropy(f: &ActivationMatrix, class: usize, config: &EntropyConfig) -> Result<EntropyResult, EntropyError> {
    let rows = f.class_rows(class);
    if rows.is_empty() {
        return Err(EntropyError::EmptyClass(class));
    }
    Ok(model_entropy(&normalize_columns(&f.select_rows(&rows)), config))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub values: Vec<f64>,
    /// Set when the input was constant and every value was mapped to 0.5.
    pub constant: bool,
}

/// Min-max normalization over a snapshot series.
pub fn normalize_series(values: &[f64]) -> Result<NormalizedSeries, EntropyError> {
    if values.len() < 2 {
        return Err(EntropyError::SeriesTooShort(values.len()));
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi == lo {
        return Ok(NormalizedSeries { values: vec![0.5; values.len()], constant: true });
    }
    Ok(NormalizedSeries { values: values.iter().map(|v| (v - lo) / (hi - lo)).collect(), constant: false })
}
