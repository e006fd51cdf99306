use std::collections::{BTreeMap, VecDeque};

use super::{Graph, GraphError};

/// Per-node topology summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeMetrics {
    pub degree: usize,
    pub clustering: f64,
    pub betweenness: f64,
    /// Edges among the node's neighbors.
    pub neighbor_edge_count: usize,
}

/// Degree, clustering and betweenness for every node, indexed like the graph.
pub fn node_metrics(graph: &Graph) -> Vec<NodeMetrics> {
    let betweenness = betweenness_all(graph);
    (0..graph.node_count())
        .map(|node| {
            let degree = graph.neighbors(node).len();
            let links = neighbor_edge_count(graph, node);
            NodeMetrics {
                degree,
                clustering: clustering_from_counts(degree, links),
                betweenness: betweenness[node],
                neighbor_edge_count: links,
            }
        })
        .collect()
}

fn neighbor_edge_count(graph: &Graph, node: usize) -> usize {
    let hood = graph.neighbors(node);
    let mut links = 0;
    for &u in hood {
        // count each neighbor pair once via w > u
        links += sorted_intersection_above(graph.neighbors(u), hood, u);
    }
    links
}

fn sorted_intersection_above(a: &[usize], b: &[usize], floor: usize) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i] > floor {
                    count += 1;
                }
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn clustering_from_counts(degree: usize, links: usize) -> f64 {
    if degree < 2 {
        0.0
    } else {
        2.0 * links as f64 / (degree * (degree - 1)) as f64
    }
}

/// Watts–Strogatz local clustering; zero for nodes of degree below two.
pub fn clustering_coefficient(graph: &Graph, node: &str) -> Result<f64, GraphError> {
    let idx = graph.require(node)?;
    Ok(clustering_from_counts(
        graph.neighbors(idx).len(),
        neighbor_edge_count(graph, idx),
    ))
}

pub fn clustering_all(graph: &Graph) -> Vec<f64> {
    (0..graph.node_count())
        .map(|n| clustering_from_counts(graph.neighbors(n).len(), neighbor_edge_count(graph, n)))
        .collect()
}

/// Scratch buffers for single-source shortest-path accumulation.
struct Brandes {
    dist: Vec<i64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Brandes {
    fn new(n: usize) -> Self {
        Brandes {
            dist: vec![-1; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            queue: VecDeque::with_capacity(n),
        }
    }

    /// BFS from `source`, filling `order` with nodes by nondecreasing distance.
    fn explore(&mut self, adj: &[Vec<usize>], source: usize) {
        for &v in &self.order {
            self.dist[v] = -1;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
        }
        self.order.clear();
        self.dist[source] = 0;
        self.sigma[source] = 1.0;
        self.delta[source] = 0.0;
        self.queue.push_back(source);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            let next = self.dist[v] + 1;
            for &w in &adj[v] {
                if self.dist[w] < 0 {
                    self.dist[w] = next;
                    self.sigma[w] = 0.0;
                    self.delta[w] = 0.0;
                    self.queue.push_back(w);
                }
                if self.dist[w] == next {
                    self.sigma[w] += self.sigma[v];
                }
            }
        }
    }
}

/// Freeman betweenness over unordered pairs, endpoints excluded, without
/// normalization. Indexed like the graph.
pub fn betweenness_all(graph: &Graph) -> Vec<f64> {
    let n = graph.node_count();
    let adj = graph.adjacency();
    let mut scores = vec![0.0; n];
    let mut work = Brandes::new(n);
    for source in 0..n {
        work.explore(adj, source);
        for &w in work.order.iter().rev() {
            for &v in &adj[w] {
                if work.dist[v] == work.dist[w] - 1 {
                    work.delta[v] += work.sigma[v] / work.sigma[w] * (1.0 + work.delta[w]);
                }
            }
            if w != source {
                scores[w] += work.delta[w];
            }
        }
    }
    // every unordered pair was visited from both ends
    for s in &mut scores {
        *s /= 2.0;
    }
    scores
}

/// Edge betweenness restricted to the sources given, keyed by `(u, v)` with `u < v`.
///
/// With `sources` equal to a whole component, the values are the unordered
/// pair counts for every edge inside that component.
pub(crate) fn edge_betweenness(adj: &[Vec<usize>], sources: &[usize]) -> BTreeMap<(usize, usize), f64> {
    let mut scores = BTreeMap::new();
    for &s in sources {
        for &t in &adj[s] {
            if s < t {
                scores.insert((s, t), 0.0);
            }
        }
    }
    let mut work = Brandes::new(adj.len());
    for &source in sources {
        work.explore(adj, source);
        for &w in work.order.iter().rev() {
            for &v in &adj[w] {
                if work.dist[v] == work.dist[w] - 1 {
                    let share = work.sigma[v] / work.sigma[w] * (1.0 + work.delta[w]);
                    *scores.get_mut(&(v.min(w), v.max(w))).expect("edge in component") += share;
                    work.delta[v] += share;
                }
            }
        }
    }
    for value in scores.values_mut() {
        *value /= 2.0;
    }
    scores
}

/// Connected components as sorted index lists, largest first, ties broken by
/// smallest label.
pub fn connected_components(graph: &Graph) -> Vec<Vec<usize>> {
    components_of(graph.adjacency())
}

pub(crate) fn components_of(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(v) = stack.pop() {
            members.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    canonical_order(&mut components);
    components
}

pub(crate) fn canonical_order(groups: &mut [Vec<usize>]) {
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
}
