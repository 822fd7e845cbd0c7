use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{write_text, ExperimentConfig, ExperimentError, SnapshotAnalysis};
use crate::correlation::{pearson, spearman};
use crate::entropy::normalize_series;

/// Columns of `community_sizes.csv`.
pub const TOP_COMMUNITIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerMetric {
    Klb,
    NoOverlap,
    UnweightedOverlap,
    WeightedOverlap,
    LouvainQ,
    LouvainCommunities,
    AvgCommunitySize,
    Nodes,
    Edges,
}

impl LayerMetric {
    pub const ALL: [LayerMetric; 9] = [
        LayerMetric::Klb,
        LayerMetric::NoOverlap,
        LayerMetric::UnweightedOverlap,
        LayerMetric::WeightedOverlap,
        LayerMetric::LouvainQ,
        LayerMetric::LouvainCommunities,
        LayerMetric::AvgCommunitySize,
        LayerMetric::Nodes,
        LayerMetric::Edges,
    ];

    /// The four quality measures compared against each other.
    pub const METHODS: [LayerMetric; 4] = [LayerMetric::Klb, LayerMetric::NoOverlap, LayerMetric::UnweightedOverlap, LayerMetric::WeightedOverlap];

    pub fn name(self) -> &'static str {
        match self {
            LayerMetric::Klb => "klb",
            LayerMetric::NoOverlap => "no_overlap",
            LayerMetric::UnweightedOverlap => "unweighted_overlap",
            LayerMetric::WeightedOverlap => "weighted_overlap",
            LayerMetric::LouvainQ => "louvain_q",
            LayerMetric::LouvainCommunities => "louvain_communities",
            LayerMetric::AvgCommunitySize => "avg_community_size",
            LayerMetric::Nodes => "nodes",
            LayerMetric::Edges => "edges",
        }
    }

    fn value(self, a: &super::LayerAnalysis) -> Option<f64> {
        match self {
            LayerMetric::Klb => a.klb,
            LayerMetric::NoOverlap => a.no_overlap,
            LayerMetric::UnweightedOverlap => a.unweighted_overlap,
            LayerMetric::WeightedOverlap => a.weighted_overlap,
            LayerMetric::LouvainQ => a.louvain_q,
            LayerMetric::LouvainCommunities => a.louvain_communities.map(|c| c as f64),
            LayerMetric::AvgCommunitySize => a.avg_community_size,
            LayerMetric::Nodes => Some(a.node_count as f64),
            LayerMetric::Edges => Some(a.edge_count as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Versus {
    Train,
    Test,
}

impl Versus {
    pub fn name(self) -> &'static str {
        match self {
            Versus::Train => "train_accuracy",
            Versus::Test => "test_accuracy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub metric: String,
    pub scope: String,
    pub versus: Versus,
    pub pcc: Option<f64>,
    pub scc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table5Row {
    pub method: LayerMetric,
    /// 1-based.
    pub layer: usize,
    pub pcc: Option<f64>,
    pub scc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table5 {
    pub rows: Vec<Table5Row>,
}

impl Table5 {
    pub fn get(&self, method: LayerMetric, layer: usize) -> Option<&Table5Row> {
        self.rows.iter().find(|r| r.method == method && r.layer == layer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table3Row {
    /// 1-based.
    pub layer: usize,
    /// Largest Louvain communities, zero-padded to [`TOP_COMMUNITIES`].
    pub first: Vec<usize>,
    pub last: Vec<usize>,
    /// Pearson correlation of mean community size with training accuracy.
    pub pcc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table3 {
    pub rows: Vec<Table3Row>,
}

/// All per-snapshot measurements of a run. Every derived table is a pure
/// function of these.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub layer_count: usize,
    pub class_count: usize,
    pub iterations: Vec<usize>,
    pub train_accuracy: Vec<f64>,
    pub test_accuracy: Vec<f64>,
    pub analyses: Vec<SnapshotAnalysis>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn correlate(xs: &[Option<f64>], ys: &[f64]) -> (Option<f64>, Option<f64>) {
    let Some(xs) = xs.iter().copied().collect::<Option<Vec<f64>>>() else { return (None, None) };
    (pearson(&xs, ys).ok(), spearman(&xs, ys).ok())
}

fn top_sizes(sizes: &[usize]) -> Vec<usize> {
    (0..TOP_COMMUNITIES).map(|i| sizes.get(i).copied().unwrap_or(0)).collect()
}

impl MetricReport {
    pub fn snapshot_count(&self) -> usize {
        self.analyses.len()
    }

    pub fn accuracy(&self, versus: Versus) -> &[f64] {
        match versus {
            Versus::Train => &self.train_accuracy,
            Versus::Test => &self.test_accuracy,
        }
    }

    /// Series of `metric` on 0-based `layer` across snapshots.
    pub fn layer_series(&self, layer: usize, metric: LayerMetric) -> Vec<Option<f64>> {
        self.analyses.iter().map(|a| metric.value(&a.layers[layer])).collect()
    }

    pub fn model_entropy_series(&self) -> Vec<Option<f64>> {
        self.analyses.iter().map(|a| a.model_entropy).collect()
    }

    pub fn class_entropy_series(&self, class: usize) -> Vec<Option<f64>> {
        self.analyses.iter().map(|a| a.class_entropy.get(class).copied().flatten()).collect()
    }

    /// Min-max normalized model entropy and whether the series was constant.
    pub fn normalized_entropy(&self) -> Option<(Vec<f64>, bool)> {
        let raw = self.model_entropy_series().into_iter().collect::<Option<Vec<f64>>>()?;
        normalize_series(&raw).ok().map(|s| (s.values, s.constant))
    }

    pub fn correlations(&self) -> Vec<CorrelationRow> {
        let mut series: Vec<(String, String, Vec<Option<f64>>)> = Vec::new();
        for layer in 0..self.layer_count {
            for m in LayerMetric::ALL {
                series.push((m.name().to_string(), format!("layer_{}", layer + 1), self.layer_series(layer, m)));
            }
        }
        series.push(("entropy".into(), "model".into(), self.model_entropy_series()));
        for c in 0..self.class_count {
            series.push(("entropy".into(), format!("class_{c}"), self.class_entropy_series(c)));
        }
        let mut rows = Vec::new();
        for (metric, scope, xs) in series {
            for versus in [Versus::Train, Versus::Test] {
                let (pcc, scc) = correlate(&xs, self.accuracy(versus));
                rows.push(CorrelationRow { metric: metric.clone(), scope: scope.clone(), versus, pcc, scc });
            }
        }
        rows
    }

    pub fn table5(&self) -> Table5 {
        let mut rows = Vec::new();
        for method in LayerMetric::METHODS {
            for layer in 0..self.layer_count {
                let (pcc, scc) = correlate(&self.layer_series(layer, method), &self.train_accuracy);
                rows.push(Table5Row { method, layer: layer + 1, pcc, scc });
            }
        }
        Table5 { rows }
    }

    pub fn table3(&self) -> Table3 {
        let rows = (0..self.layer_count)
            .map(|layer| {
                let sizes = |a: Option<&SnapshotAnalysis>| top_sizes(a.map_or(&[][..], |a| &a.layers[layer].community_sizes));
                Table3Row {
                    layer: layer + 1,
                    first: sizes(self.analyses.first()),
                    last: sizes(self.analyses.last()),
                    pcc: correlate(&self.layer_series(layer, LayerMetric::AvgCommunitySize), &self.train_accuracy).0,
                }
            })
            .collect();
        Table3 { rows }
    }

    pub fn accuracy_csv(&self) -> String {
        let mut s = String::from("snapshot,iteration,train_accuracy,test_accuracy\n");
        for k in 0..self.snapshot_count() {
            writeln!(s, "{},{},{},{}", k + 1, self.iterations[k], self.train_accuracy[k], self.test_accuracy[k]).unwrap();
        }
        s
    }

    pub fn modularity_csv(&self) -> String {
        let mut s = String::from("snapshot,layer,metric,value\n");
        for (k, a) in self.analyses.iter().enumerate() {
            for (l, la) in a.layers.iter().enumerate() {
                for m in LayerMetric::ALL {
                    writeln!(s, "{},{},{},{}", k + 1, l + 1, m.name(), fmt_opt(m.value(la))).unwrap();
                }
            }
        }
        s
    }

    pub fn entropy_csv(&self) -> String {
        let mut s = String::from("snapshot,scope,entropy\n");
        for (k, a) in self.analyses.iter().enumerate() {
            writeln!(s, "{},model,{}", k + 1, fmt_opt(a.model_entropy)).unwrap();
            for (c, e) in a.class_entropy.iter().enumerate() {
                writeln!(s, "{},class_{c},{}", k + 1, fmt_opt(*e)).unwrap();
            }
        }
        s
    }

    pub fn correlations_csv(&self) -> String {
        let mut s = String::from("metric,scope,versus,pcc,scc\n");
        for r in self.correlations() {
            writeln!(s, "{},{},{},{},{}", r.metric, r.scope, r.versus.name(), fmt_opt(r.pcc), fmt_opt(r.scc)).unwrap();
        }
        s
    }

    fn unique_csv(&self, a: Option<&SnapshotAnalysis>) -> String {
        let mut buf = b"layer,class_i,class_j,count\n".to_vec();
        if let Some(a) = a {
            for (l, la) in a.layers.iter().enumerate() {
                la.unique.write_csv(l + 1, &mut buf).expect("writing to memory");
            }
        }
        String::from_utf8(buf).expect("ascii")
    }

    pub fn community_sizes_csv(&self) -> String {
        let mut s = String::from("layer,snapshot");
        (1..=TOP_COMMUNITIES).for_each(|i| write!(s, ",c{i}").unwrap());
        s.push_str(",pcc_avg_size_vs_train\n");
        let last = self.snapshot_count();
        for row in self.table3().rows {
            for (k, sizes) in [(1, &row.first), (last, &row.last)] {
                write!(s, "{},{}", row.layer, k).unwrap();
                sizes.iter().for_each(|c| write!(s, ",{c}").unwrap());
                writeln!(s, ",{}", fmt_opt(row.pcc)).unwrap();
            }
        }
        s
    }

    pub fn table5_csv(&self) -> String {
        let mut s = String::from("method,layer,pcc,scc\n");
        for r in self.table5().rows {
            writeln!(s, "{},{},{},{}", r.method.name(), r.layer, fmt_opt(r.pcc), fmt_opt(r.scc)).unwrap();
        }
        s
    }

    fn plot_json(&self) -> String {
        #[derive(Serialize)]
        struct Point {
            snapshot: usize,
            iteration: usize,
            normalized_entropy: Option<f64>,
            train_accuracy: f64,
            test_accuracy: f64,
        }
        #[derive(Serialize)]
        struct Plot {
            entropy_constant: bool,
            points: Vec<Point>,
        }
        let normalized = self.normalized_entropy();
        let points = (0..self.snapshot_count())
            .map(|k| Point {
                snapshot: k + 1,
                iteration: self.iterations[k],
                normalized_entropy: normalized.as_ref().map(|(v, _)| v[k]),
                train_accuracy: self.train_accuracy[k],
                test_accuracy: self.test_accuracy[k],
            })
            .collect();
        let plot = Plot { entropy_constant: normalized.is_some_and(|(_, c)| c), points };
        serde_json::to_string_pretty(&plot).expect("plot serializes")
    }

    fn metadata_json(&self, config: &ExperimentConfig) -> String {
        #[derive(Serialize)]
        struct Metadata<'a> {
            schema: &'static str,
            snapshots: usize,
            correlation_points: usize,
            layers: usize,
            classes: usize,
            dead_neurons: Vec<usize>,
            config: &'a ExperimentConfig,
        }
        let meta = Metadata {
            schema: "neurograph.report/v1",
            snapshots: self.snapshot_count(),
            correlation_points: self.snapshot_count(),
            layers: self.layer_count,
            classes: self.class_count,
            dead_neurons: self.analyses.iter().map(|a| a.dead_neurons).collect(),
            config,
        };
        serde_json::to_string_pretty(&meta).expect("metadata serializes")
    }

    /// Writes every report file into `out`.
    pub fn write_all(&self, config: &ExperimentConfig, out: &Path) -> Result<(), ExperimentError> {
        let files = [
            ("accuracy.csv", self.accuracy_csv()),
            ("modularity.csv", self.modularity_csv()),
            ("entropy.csv", self.entropy_csv()),
            ("correlations.csv", self.correlations_csv()),
            ("unique_neurons_first.csv", self.unique_csv(self.analyses.first())),
            ("unique_neurons_last.csv", self.unique_csv(self.analyses.last())),
            ("community_sizes.csv", self.community_sizes_csv()),
            ("table5.csv", self.table5_csv()),
            ("plotdata.json", self.plot_json()),
            ("metadata.json", self.metadata_json(config)),
        ];
        for (name, body) in files {
            write_text(&out.join(name), &body)?;
        }
        Ok(())
    }
}
