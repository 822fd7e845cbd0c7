//! Undirected weighted graph stored as symmetric adjacency lists.
//!
//! Entries follow adjacency-matrix conventions: an edge `{u, v}` with
//! `u != v` appears in both lists, a self-loop `A_vv` appears once in `v`'s
//! list, and the weighted degree is the row sum `k_v = Σ_w A_vw`. With this
//! convention `2m = Σ_v k_v` and modularity is preserved exactly when
//! communities are collapsed into super-nodes.

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
    total: f64,
}

impl WeightedGraph {
    /// Builds a graph from undirected edges; parallel edges are merged and
    /// non-positive weights dropped.
    ///
    /// # Panics
    /// If an endpoint is `>= nodes` or a weight is not finite.
    pub fn from_edges(nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut dense: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); nodes];
        for (u, v, w) in edges {
            assert!(u < nodes && v < nodes, "edge ({u}, {v}) outside {nodes} nodes");
            assert!(w.is_finite(), "edge weight must be finite");
            if w <= 0.0 {
                continue;
            }
            *dense[u].entry(v).or_default() += w;
            if u != v {
                *dense[v].entry(u).or_default() += w;
            }
        }
        Self::from_lists(dense.into_iter().map(|m| m.into_iter().collect()).collect())
    }

    /// Builds a graph from a dense symmetric matrix given row-major.
    ///
    /// # Panics
    /// If `matrix.len() != nodes * nodes`.
    pub fn from_dense(nodes: usize, matrix: &[f64]) -> Self {
        assert_eq!(matrix.len(), nodes * nodes);
        let lists = (0..nodes)
            .map(|u| (0..nodes).map(|v| (v, matrix[u * nodes + v])).filter(|&(_, w)| w > 0.0).collect())
            .collect();
        Self::from_lists(lists)
    }

    fn from_lists(adjacency: Vec<Vec<(usize, f64)>>) -> Self {
        let degrees: Vec<f64> = adjacency.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
        let total = degrees.iter().sum();
        Self { adjacency, degrees, total }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Neighbours of `v` with weights, ascending by neighbour id.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `2m`, the sum of all weighted degrees.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adjacency[u].binary_search_by_key(&v, |&(n, _)| n).map_or(0.0, |i| self.adjacency[u][i].1)
    }

    /// Edges `(u, v, w)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&(v, _)| v >= u).map(move |&(v, w)| (u, v, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Row-major dense adjacency matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut m = vec![0.0; n * n];
        for (u, l) in self.adjacency.iter().enumerate() {
            for &(v, w) in l {
                m[u * n + v] = w;
            }
        }
        m
    }

    /// Same topology with every weight set to 1.
    pub fn binarized(&self) -> Self {
        Self::from_lists(self.adjacency.iter().map(|l| l.iter().map(|&(v, _)| (v, 1.0)).collect()).collect())
    }

    /// Collapses nodes into communities. The self-loop of community `c`
    /// carries `Σ_{u,v ∈ c} A_uv` over ordered pairs.
    pub fn aggregate(&self, assignment: &[usize], communities: usize) -> Self {
        let mut lists: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); communities];
        for (u, l) in self.adjacency.iter().enumerate() {
            for &(v, w) in l {
                *lists[assignment[u]].entry(assignment[v]).or_default() += w;
            }
        }
        Self::from_lists(lists.into_iter().map(|m| m.into_iter().collect()).collect())
    }
}
