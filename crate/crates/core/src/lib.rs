//! Activation-pattern analysis for fully-connected classifiers.
//!
//! The crate trains small ReLU networks with deterministic snapshots, records
//! hidden-layer activations for every snapshot, and derives two families of
//! training-progress signals from them:
//!
//! * **Activation pattern graphs.** Per layer, the most active neurons of each
//!   class become nodes; edges count how often two neurons fire above their
//!   class mean on the same sample. Community structure on these graphs is
//!   scored with disjoint and overlapping modularity ([`quality`]) and
//!   detected with Louvain and Kernighan–Lin ([`community`]).
//! * **Activation pattern entropy.** A per-neuron histogram entropy over the
//!   column-normalized activation matrix ([`entropy`]).
//!
//! [`experiment`] wires everything into a reproducible pipeline that writes
//! CSV reports and correlates every signal against accuracy
//! ([`correlation`]).

pub mod activation;
pub mod community;
pub mod correlation;
pub mod dataset;
pub mod entropy;
pub mod experiment;
pub mod graph;
pub mod mlp;
pub mod pattern_graph;
pub mod quality;
pub mod seed;

pub use activation::{ActivationMatrix, ClassMeanActivations, NormalizedActivations};
pub use community::{community_sizes, kernighan_lin_bisect, louvain, Partition};
pub use correlation::{pearson, rank, spearman, CorrelationError};
pub use dataset::{Dataset, Split};
pub use entropy::{EntropyConfig, EntropyResult, LogBase};
pub use experiment::{run_experiment, ExperimentConfig, MetricReport};
pub use graph::WeightedGraph;
pub use mlp::{Architecture, Model, SnapshotSeries, TrainConfig};
pub use pattern_graph::{PatternGraph, RepresentativeSets, UniqueNeuronMatrix};
pub use quality::Cover;
