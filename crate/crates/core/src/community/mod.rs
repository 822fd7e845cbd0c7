//! Disjoint community detection on weighted graphs.

mod kernighan_lin;
mod louvain;

pub use kernighan_lin::{cut_weight, kernighan_lin_bisect, kernighan_lin_trace, BisectionTrace};
pub use louvain::{louvain, louvain_trace, LouvainTrace};

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CommunityError {
    #[error("community ids must be dense from 0: {0}")]
    NotDense(String),
    #[error("bisection needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("resolution must be positive and finite, got {0}")]
    BadResolution(f64),
}

/// One community id per node, ids dense in `0..count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: Vec<usize>,
    count: usize,
    resolution: Option<f64>,
}

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Result<Self, CommunityError> {
        let count = assignment.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; count];
        for &c in &assignment {
            seen[c] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(CommunityError::NotDense(format!("id {missing} unused among {count}")));
        }
        Ok(Self { assignment, count, resolution: None })
    }

    /// Relabels arbitrary ids densely in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { assignment, count: map.len(), resolution: None }
    }

    pub fn singletons(n: usize) -> Self {
        Self { assignment: (0..n).collect(), count: n, resolution: None }
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = Some(resolution);
        self
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community(&self, v: usize) -> usize {
        self.assignment[v]
    }

    /// Number of communities.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn resolution(&self) -> Option<f64> {
        self.resolution
    }

    /// Writes `node,community` rows, naming nodes by `labels[v]`.
    pub fn write_csv(&self, labels: &[usize], mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "node,community")?;
        for (v, &c) in self.assignment.iter().enumerate() {
            writeln!(w, "{},{}", labels[v], c)?;
        }
        Ok(())
    }
}

/// Community cardinalities, largest first.
pub fn community_sizes(partition: &Partition) -> Vec<usize> {
    let mut sizes = vec![0; partition.count()];
    for &c in partition.assignment() {
        sizes[c] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(community_sizes(&Partition::new(vec![0, 0, 1]).unwrap()), vec![2, 1]);
        assert_eq!(community_sizes(&Partition::new(vec![1, 0, 1, 1]).unwrap()), vec![3, 1]);
        assert_eq!(community_sizes(&Partition::singletons(4)), vec![1; 4]);
    }

    #[test]
    fn dense_ids_required() {
        assert!(Partition::new(vec![0, 2]).is_err());
        let p = Partition::from_labels(&[7, 3, 7, 9]);
        assert_eq!(p.assignment(), &[0, 1, 0, 2]);
        assert_eq!(p.count(), 3);
    }

    #[test]
    fn csv_export() {
        let mut out = Vec::new();
        Partition::new(vec![0, 1]).unwrap().write_csv(&[10, 20], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "node,community\n10,0\n20,1\n");
    }
}
