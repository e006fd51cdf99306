//! Slow reference implementations used to check the library.

#![allow(dead_code)]

use coselect::Graph;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adjacency matrix of a graph.
pub fn matrix(graph: &Graph) -> Vec<Vec<bool>> {
    let n = graph.node_count();
    let mut m = vec![vec![false; n]; n];
    for (u, v) in graph.edges() {
        m[u][v] = true;
        m[v][u] = true;
    }
    m
}

/// Every simple path from `s` to `t`, as node lists.
fn simple_paths(adj: &[Vec<bool>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(adj: &[Vec<bool>], t: usize, path: &mut Vec<usize>, seen: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let here = *path.last().unwrap();
        if here == t {
            out.push(path.clone());
            return;
        }
        for next in 0..adj.len() {
            if adj[here][next] && !seen[next] {
                seen[next] = true;
                path.push(next);
                walk(adj, t, path, seen, out);
                path.pop();
                seen[next] = false;
            }
        }
    }
    let mut seen = vec![false; adj.len()];
    seen[s] = true;
    let mut out = Vec::new();
    walk(adj, t, &mut vec![s], &mut seen, &mut out);
    out
}

/// Betweenness by listing every geodesic of every unordered pair.
pub fn betweenness(graph: &Graph) -> Vec<f64> {
    let adj = matrix(graph);
    let n = adj.len();
    let mut scores = vec![0.0; n];
    for s in 0..n {
        for t in (s + 1)..n {
            let paths = simple_paths(&adj, s, t);
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let geodesics: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            for (i, score) in scores.iter_mut().enumerate() {
                if i == s || i == t {
                    continue;
                }
                let through = geodesics.iter().filter(|p| p.contains(&i)).count();
                *score += through as f64 / geodesics.len() as f64;
            }
        }
    }
    scores
}

/// Clustering by checking every pair of neighbors.
pub fn clustering(graph: &Graph) -> Vec<f64> {
    let adj = matrix(graph);
    let n = adj.len();
    (0..n)
        .map(|i| {
            let nbrs: Vec<usize> = (0..n).filter(|&j| adj[i][j]).collect();
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            let mut linked = 0;
            for a in 0..k {
                for b in (a + 1)..k {
                    if adj[nbrs[a]][nbrs[b]] {
                        linked += 1;
                    }
                }
            }
            linked as f64 / (k * (k - 1) / 2) as f64
        })
        .collect()
}

/// Average ranks, 1-based, computed per element.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let below = values.iter().filter(|&&w| w < v).count();
            let equal = values.iter().filter(|&&w| w == v).count();
            below as f64 + (equal as f64 + 1.0) / 2.0
        })
        .collect()
}

/// Tau-b from explicit counts over all index pairs.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            if x[i] == x[j] {
                tied_x += 1;
            }
            if y[i] == y[j] {
                tied_y += 1;
            }
            if x[i] == x[j] || y[i] == y[j] {
                continue;
            }
            if (x[i] < x[j]) == (y[i] < y[j]) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let total = (n * (n - 1) / 2) as i64;
    (concordant - discordant) as f64 / (((total - tied_x) * (total - tied_y)) as f64).sqrt()
}

/// Random graph on `n` nodes, each pair present with probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = coselect::graph::numeric_labels(n);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((labels[u].clone(), labels[v].clone()));
            }
        }
    }
    Graph::from_edges(labels.clone(), edges).unwrap()
}

/// Two `k`-cliques joined by one edge between their last and first nodes.
pub fn two_cliques_with_bridge(k: usize) -> Graph {
    let labels = coselect::graph::numeric_labels(2 * k);
    let mut edges = Vec::new();
    for offset in [0, k] {
        for u in 0..k {
            for v in (u + 1)..k {
                edges.push((labels[offset + u].clone(), labels[offset + v].clone()));
            }
        }
    }
    edges.push((labels[k - 1].clone(), labels[k].clone()));
    Graph::from_edges(labels.clone(), edges).unwrap()
}

/// Modularity from the definition over all ordered node pairs.
pub fn modularity(graph: &Graph, membership: &[usize]) -> f64 {
    let adj = matrix(graph);
    let degrees = graph.degrees();
    let two_m = 2.0 * graph.edge_count() as f64;
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..adj.len() {
        for j in 0..adj.len() {
            if membership[i] == membership[j] {
                let a = if adj[i][j] { 1.0 } else { 0.0 };
                q += a - (degrees[i] * degrees[j]) as f64 / two_m;
            }
        }
    }
    q / two_m
}
