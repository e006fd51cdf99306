use std::collections::BTreeMap;

use super::metrics::{canonical_order, components_of, edge_betweenness};
use super::{Graph, GraphError};

const TIE_TOLERANCE: f64 = 1e-12;

/// One level of the divisive dendrogram.
#[derive(Debug, Clone, PartialEq)]
pub struct DendrogramLevel {
    /// Edges removed since the previous level; the last one caused the split.
    pub removed_edges: Vec<(usize, usize)>,
    pub communities: Vec<Vec<usize>>,
    pub modularity: f64,
}

/// Result of Girvan–Newman community detection.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPartition {
    /// Communities at the modularity-maximizing level, canonical order.
    pub communities: Vec<Vec<usize>>,
    pub modularity_q: f64,
    /// Level 0 is the connected-component partition; every later level
    /// refines its predecessor by exactly one split.
    pub dendrogram: Vec<DendrogramLevel>,
    pub best_level: usize,
}

impl CommunityPartition {
    /// Community id per node index.
    pub fn membership(&self, node_count: usize) -> Vec<usize> {
        let mut of = vec![usize::MAX; node_count];
        for (id, community) in self.communities.iter().enumerate() {
            for &n in community {
                of[n] = id;
            }
        }
        of
    }
}

/// Newman–Girvan modularity `Q = Σ_c (e_cc − a_c²)` of a node partition.
///
/// The partition must cover every node exactly once. Graphs without edges
/// have modularity 0.
pub fn modularity(graph: &Graph, partition: &[Vec<usize>]) -> Result<f64, GraphError> {
    let n = graph.node_count();
    let mut community_of = vec![usize::MAX; n];
    for (c, members) in partition.iter().enumerate() {
        for &v in members {
            if v >= n {
                return Err(GraphError::InvalidPartition(format!("node index {v} out of range")));
            }
            if community_of[v] != usize::MAX {
                return Err(GraphError::InvalidPartition(format!(
                    "node `{}` appears in more than one community",
                    graph.label(v)
                )));
            }
            community_of[v] = c;
        }
    }
    if let Some(v) = community_of.iter().position(|&c| c == usize::MAX) {
        return Err(GraphError::InvalidPartition(format!(
            "node `{}` is not covered",
            graph.label(v)
        )));
    }
    Ok(modularity_unchecked(graph, &community_of, partition.len()))
}

fn modularity_unchecked(graph: &Graph, community_of: &[usize], count: usize) -> f64 {
    let m = graph.edge_count();
    if m == 0 {
        return 0.0;
    }
    let mut inside = vec![0usize; count];
    let mut ends = vec![0usize; count];
    for (u, v) in graph.edges() {
        let (cu, cv) = (community_of[u], community_of[v]);
        ends[cu] += 1;
        ends[cv] += 1;
        if cu == cv {
            inside[cu] += 1;
        }
    }
    let m = m as f64;
    inside
        .iter()
        .zip(&ends)
        .map(|(&e, &a)| e as f64 / m - (a as f64 / (2.0 * m)).powi(2))
        .sum()
}

/// Divisive community detection by repeated removal of the edge with the
/// highest edge betweenness, recomputed after every removal.
///
/// Edge betweenness ties within `1e-12` remove the edge with the smallest
/// endpoint labels. The returned communities are the dendrogram level with
/// maximal modularity; among equal levels the coarser one wins.
pub fn girvan_newman(graph: &Graph) -> CommunityPartition {
    let n = graph.node_count();
    let mut adj: Vec<Vec<usize>> = graph.adjacency().to_vec();
    let mut components = components_of(&adj);
    let mut component_of = vec![0usize; n];
    for (c, members) in components.iter().enumerate() {
        for &v in members {
            component_of[v] = c;
        }
    }

    let mut scores: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for members in &components {
        scores.extend(edge_betweenness(&adj, members));
    }

    let mut levels = vec![level(graph, Vec::new(), components.clone())];
    let mut removed = Vec::new();

    while let Some(edge) = pick_edge(&scores) {
        let (u, v) = edge;
        adj[u].retain(|&w| w != v);
        adj[v].retain(|&w| w != u);
        removed.push(edge);

        let old = component_of[u];
        let old_members = std::mem::take(&mut components[old]);
        for &w in &old_members {
            for &x in &adj[w] {
                if w < x {
                    scores.remove(&(w, x));
                }
            }
        }
        scores.remove(&edge);

        let reached = reachable(&adj, u);
        if reached.binary_search(&v).is_ok() {
            components[old] = old_members;
            scores.extend(edge_betweenness(&adj, &components[old]));
            continue;
        }

        let rest: Vec<usize> = old_members
            .into_iter()
            .filter(|w| reached.binary_search(w).is_err())
            .collect();
        let new_id = components.len();
        for &w in &rest {
            component_of[w] = new_id;
        }
        scores.extend(edge_betweenness(&adj, &reached));
        scores.extend(edge_betweenness(&adj, &rest));
        components[old] = reached;
        components.push(rest);

        let mut snapshot = components.clone();
        canonical_order(&mut snapshot);
        levels.push(level(graph, std::mem::take(&mut removed), snapshot));
    }

    let mut best_level = 0;
    for (i, lvl) in levels.iter().enumerate() {
        if lvl.modularity > levels[best_level].modularity + TIE_TOLERANCE {
            best_level = i;
        }
    }
    CommunityPartition {
        communities: levels[best_level].communities.clone(),
        modularity_q: levels[best_level].modularity,
        dendrogram: levels,
        best_level,
    }
}

fn level(graph: &Graph, removed_edges: Vec<(usize, usize)>, communities: Vec<Vec<usize>>) -> DendrogramLevel {
    let mut of = vec![0usize; graph.node_count()];
    for (c, members) in communities.iter().enumerate() {
        for &v in members {
            of[v] = c;
        }
    }
    DendrogramLevel {
        modularity: modularity_unchecked(graph, &of, communities.len()),
        removed_edges,
        communities,
    }
}

fn pick_edge(scores: &BTreeMap<(usize, usize), f64>) -> Option<(usize, usize)> {
    let max = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    // BTreeMap iterates in lexicographic edge order
    scores
        .iter()
        .find(|(_, &value)| value >= max - TIE_TOLERANCE)
        .map(|(&edge, _)| edge)
}

fn reachable(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut out = Vec::new();
    while let Some(v) = stack.pop() {
        out.push(v);
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    out.sort_unstable();
    out
}
