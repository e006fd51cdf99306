//! Simple undirected graphs with stable, lexicographically ordered labels.
//!
//! Nodes are addressed by their index into the sorted label list, so index
//! order and label order coincide. Every tie-break in this crate that is
//! specified "by label" can therefore be implemented on indices.

mod community;
mod metrics;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use community::{girvan_newman, modularity, CommunityPartition, DendrogramLevel};
pub use metrics::{
    betweenness_all, clustering_all, clustering_coefficient, connected_components, node_metrics, NodeMetrics,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Undirected simple graph.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    labels: Vec<String>,
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("nodes", &self.labels)
            .field("edges", &self.edge_labels().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for Graph {
    fn default() -> Self {
        Graph::empty()
    }
}

impl Graph {
    pub fn empty() -> Self {
        Graph {
            labels: Vec::new(),
            adj: Vec::new(),
            edge_count: 0,
        }
    }

    /// Builds a graph from node labels and label pairs.
    ///
    /// Duplicate nodes and duplicate (or reversed) edges collapse. Edges must
    /// reference listed nodes.
    pub fn from_edges<N, E, S, T>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = S>,
        S: Into<String>,
        E: IntoIterator<Item = (T, T)>,
        T: AsRef<str>,
    {
        let labels: BTreeSet<String> = nodes.into_iter().map(Into::into).collect();
        let labels: Vec<String> = labels.into_iter().collect();
        let mut graph = Graph {
            adj: vec![Vec::new(); labels.len()],
            labels,
            edge_count: 0,
        };
        let mut pairs = Vec::new();
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let u = graph
                .index_of(a)
                .ok_or_else(|| GraphError::UnknownNode(a.to_string()))?;
            let v = graph
                .index_of(b)
                .ok_or_else(|| GraphError::UnknownNode(b.to_string()))?;
            if u == v {
                return Err(GraphError::SelfLoop(a.to_string()));
            }
            pairs.push((u, v));
        }
        graph.set_edges(pairs);
        Ok(graph)
    }

    /// Graph on `n` nodes labelled `0..n`, zero-padded so that label order
    /// matches numeric order.
    pub fn with_node_count(n: usize) -> Self {
        Graph::from_index_edges(numeric_labels(n), std::iter::empty())
    }

    /// Builds from already sorted, distinct labels and index pairs.
    ///
    /// Panics if labels are not strictly increasing or an index pair is a
    /// self-loop or out of range; callers inside the crate guarantee both.
    pub(crate) fn from_index_edges<I>(labels: Vec<String>, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        let mut graph = Graph {
            adj: vec![Vec::new(); labels.len()],
            labels,
            edge_count: 0,
        };
        graph.set_edges(edges);
        graph
    }

    fn set_edges<I>(&mut self, edges: I)
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        for (u, v) in edges {
            assert!(u != v, "self-loop on node index {u}");
            self.adj[u].push(v);
            self.adj[v].push(u);
        }
        for list in &mut self.adj {
            list.sort_unstable();
            list.dedup();
        }
        self.edge_count = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|probe| probe.as_str().cmp(label)).ok()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    /// Sorted neighbor indices of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub(crate) fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Number of neighbors of the node with this label.
    pub fn degree(&self, label: &str) -> Result<usize, GraphError> {
        let node = self.require(label)?;
        Ok(self.adj[node].len())
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub(crate) fn require(&self, label: &str) -> Result<usize, GraphError> {
        self.index_of(label)
            .ok_or_else(|| GraphError::UnknownNode(label.to_string()))
    }

    /// Edges as index pairs `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn edge_labels(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges()
            .map(|(u, v)| (self.labels[u].as_str(), self.labels[v].as_str()))
    }

    pub fn labels_of(&self, nodes: &[usize]) -> Vec<String> {
        nodes.iter().map(|&n| self.labels[n].clone()).collect()
    }

    /// Subgraph induced by the given labels; labels absent from the graph are skipped.
    pub fn induced_by_labels<'a, I>(&self, labels: I) -> Graph
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut keep: Vec<usize> = labels.into_iter().filter_map(|label| self.index_of(label)).collect();
        keep.sort_unstable();
        keep.dedup();
        self.induced(&keep)
    }

    /// Subgraph induced by a set of node indices.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut keep: Vec<usize> = nodes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut new_index = vec![usize::MAX; self.node_count()];
        for (i, &n) in keep.iter().enumerate() {
            new_index[n] = i;
        }
        let labels = keep.iter().map(|&n| self.labels[n].clone()).collect();
        let edges: Vec<(usize, usize)> = self
            .edges()
            .filter(|&(u, v)| new_index[u] != usize::MAX && new_index[v] != usize::MAX)
            .map(|(u, v)| (new_index[u], new_index[v]))
            .collect();
        Graph::from_index_edges(labels, edges)
    }

    /// Same graph with degree-zero nodes dropped.
    pub fn without_isolated(&self) -> Graph {
        let keep: Vec<usize> = (0..self.node_count()).filter(|&n| !self.adj[n].is_empty()).collect();
        self.induced(&keep)
    }
}

/// Zero-padded decimal labels `0..n` whose lexicographic order is numeric.
pub fn numeric_labels(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{i:0width$}")).collect()
}
