//! Randomized graph families: Erdős–Rényi `G(n, m)`, degree-preserving switch
//! randomization and random geometric graphs in the unit square.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{numeric_labels, Graph};

/// Default number of successful swaps per edge.
pub const DEFAULT_SWAP_MULTIPLIER: f64 = 10.0;
/// Point sets evaluated per calibration probe.
pub const CALIBRATION_SAMPLES: usize = 200;
/// Relative edge-count error at which radius bisection stops.
pub const CALIBRATION_TOLERANCE: f64 = 0.01;
pub const CALIBRATION_STEPS: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NullModelError {
    #[error("invalid argument: {m} edges requested but {n} nodes allow at most {max}")]
    TooManyEdges { n: usize, m: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidParameter(String),
}

/// Reproducible source of independent random streams.
///
/// A stream is identified by a replicate index; [`SeededRng::derive`] yields a
/// new family of streams for a different purpose (model, stage, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededRng {
    pub base_seed: u64,
}

impl SeededRng {
    pub fn new(base_seed: u64) -> Self {
        SeededRng { base_seed }
    }

    /// Sub-family keyed by `key`, decorrelated by a SplitMix64 finalizer.
    pub fn derive(&self, key: u64) -> SeededRng {
        let mut z = self
            .base_seed
            .wrapping_add(key.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        SeededRng::new(z ^ (z >> 31))
    }

    /// Stream for one replicate.
    pub fn replicate(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(index);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NullModelKind {
    #[serde(rename = "ER")]
    Er,
    #[serde(rename = "DEGSEQ")]
    Degseq,
    #[serde(rename = "GRG")]
    Grg,
}

impl NullModelKind {
    pub const ALL: [NullModelKind; 3] = [NullModelKind::Er, NullModelKind::Degseq, NullModelKind::Grg];

    pub fn name(self) -> &'static str {
        match self {
            NullModelKind::Er => "ER",
            NullModelKind::Degseq => "DEGSEQ",
            NullModelKind::Grg => "GRG",
        }
    }
}

impl fmt::Display for NullModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NullModelKind {
    type Err = NullModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "er" => Ok(NullModelKind::Er),
            "degseq" => Ok(NullModelKind::Degseq),
            "grg" => Ok(NullModelKind::Grg),
            other => Err(NullModelError::InvalidParameter(format!(
                "unknown null model `{other}`"
            ))),
        }
    }
}

/// Fully parameterized null model.
#[derive(Debug, Clone, PartialEq)]
pub enum NullModelSpec {
    ErdosRenyi { n: usize, m: usize },
    DegreeSequence { source: Graph, swap_multiplier: f64 },
    Geometric { n: usize, radius: f64 },
}

impl NullModelSpec {
    /// Null model matched to `graph`: node and edge count for ER, the degree
    /// sequence for DEGSEQ, node count plus a radius calibrated to the edge
    /// count for GRG.
    pub fn for_graph(
        kind: NullModelKind,
        graph: &Graph,
        swap_multiplier: f64,
        calibration: &SeededRng,
    ) -> Result<Self, NullModelError> {
        let spec = match kind {
            NullModelKind::Er => NullModelSpec::ErdosRenyi {
                n: graph.node_count(),
                m: graph.edge_count(),
            },
            NullModelKind::Degseq => NullModelSpec::DegreeSequence {
                source: graph.clone(),
                swap_multiplier,
            },
            NullModelKind::Grg => NullModelSpec::Geometric {
                n: graph.node_count(),
                radius: calibrate_radius(graph.node_count(), graph.edge_count(), calibration)?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> NullModelKind {
        match self {
            NullModelSpec::ErdosRenyi { .. } => NullModelKind::Er,
            NullModelSpec::DegreeSequence { .. } => NullModelKind::Degseq,
            NullModelSpec::Geometric { .. } => NullModelKind::Grg,
        }
    }

    pub fn validate(&self) -> Result<(), NullModelError> {
        match *self {
            NullModelSpec::ErdosRenyi { n, m } => check_edge_count(n, m),
            NullModelSpec::DegreeSequence { swap_multiplier, .. } => {
                if swap_multiplier > 0.0 && swap_multiplier.is_finite() {
                    Ok(())
                } else {
                    Err(NullModelError::InvalidParameter(format!(
                        "swap multiplier must be positive, got {swap_multiplier}"
                    )))
                }
            }
            NullModelSpec::Geometric { radius, .. } => check_radius(radius),
        }
    }

    /// Draws one graph.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph, NullModelError> {
        match self {
            NullModelSpec::ErdosRenyi { n, m } => er_gnm(*n, *m, rng),
            NullModelSpec::DegreeSequence {
                source,
                swap_multiplier,
            } => {
                self.validate()?;
                Ok(switch_randomize(source, *swap_multiplier, rng))
            }
            NullModelSpec::Geometric { n, radius } => Ok(random_geometric(*n, *radius, rng)?.graph),
        }
    }
}

fn max_edges(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn check_edge_count(n: usize, m: usize) -> Result<(), NullModelError> {
    let max = max_edges(n);
    if m > max {
        Err(NullModelError::TooManyEdges { n, m, max })
    } else {
        Ok(())
    }
}

fn check_radius(radius: f64) -> Result<(), NullModelError> {
    if radius >= 0.0 {
        Ok(())
    } else {
        Err(NullModelError::InvalidParameter(format!(
            "radius must be nonnegative, got {radius}"
        )))
    }
}

/// Maps a linear index in `0..n(n-1)/2` to the pair `(u, v)`, `u < v`, in row order.
fn pair_at(mut k: usize, n: usize) -> (usize, usize) {
    let mut u = 0;
    loop {
        let row = n - 1 - u;
        if k < row {
            return (u, u + 1 + k);
        }
        k -= row;
        u += 1;
    }
}

/// Uniform simple graph with exactly `n` nodes and `m` edges.
pub fn er_gnm<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph, NullModelError> {
    check_edge_count(n, m)?;
    let picks = index::sample(rng, max_edges(n), m);
    let edges: Vec<(usize, usize)> = picks.into_iter().map(|k| pair_at(k, n)).collect();
    Ok(Graph::from_index_edges(numeric_labels(n), edges))
}

/// Counts reported by [`switch_randomize_counted`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchStats {
    pub target_swaps: usize,
    pub swaps: usize,
    pub attempts: usize,
}

/// Degree-preserving randomization by `⌈multiplier · m⌉` successful double-edge swaps.
pub fn switch_randomize<R: Rng + ?Sized>(graph: &Graph, swap_multiplier: f64, rng: &mut R) -> Graph {
    switch_randomize_counted(graph, swap_multiplier, rng).0
}

/// [`switch_randomize`] plus swap statistics.
///
/// A swap picks edges `(a, b)` and `(c, d)` with four distinct endpoints and
/// rewires them to `(a, d)`, `(c, b)` when neither exists. Graphs whose degree
/// class admits no swap at all are returned unchanged.
///
/// Graphs with more than half of all possible edges are randomized through
/// their complement: a swap of two non-edges is a swap of two edges of the
/// graph, so the chain is unchanged while far fewer proposals are rejected.
pub fn switch_randomize_counted<R: Rng + ?Sized>(
    graph: &Graph,
    swap_multiplier: f64,
    rng: &mut R,
) -> (Graph, SwitchStats) {
    let m = graph.edge_count();
    let n = graph.node_count();
    let target = (swap_multiplier * m as f64).ceil().max(0.0) as usize;
    let mut stats = SwitchStats {
        target_swaps: target,
        swaps: 0,
        attempts: 0,
    };
    if m < 2 || target == 0 {
        return (graph.clone(), stats);
    }
    let dense = 2 * m > max_edges(n);
    let edges: Vec<(usize, usize)> = if dense {
        complement_edges(graph)
    } else {
        graph.edges().collect()
    };
    let edges = swap_chain(edges, target, rng, &mut stats);
    let edges = if dense {
        complement_edges(&Graph::from_index_edges(graph.labels().to_vec(), edges))
    } else {
        edges
    };
    (Graph::from_index_edges(graph.labels().to_vec(), edges), stats)
}

fn complement_edges(graph: &Graph) -> Vec<(usize, usize)> {
    let n = graph.node_count();
    let mut out = Vec::with_capacity(max_edges(n) - graph.edge_count());
    for u in 0..n {
        for v in u + 1..n {
            if !graph.has_edge(u, v) {
                out.push((u, v));
            }
        }
    }
    out
}

fn swap_chain<R: Rng + ?Sized>(
    mut edges: Vec<(usize, usize)>,
    target: usize,
    rng: &mut R,
    stats: &mut SwitchStats,
) -> Vec<(usize, usize)> {
    let m = edges.len();
    if m < 2 {
        return edges;
    }
    let mut present: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let attempt_limit = target.saturating_mul(1000).max(100_000);
    let mut failures_in_a_row = 0usize;
    let mut checked_swappable = false;

    while stats.swaps < target && stats.attempts < attempt_limit {
        stats.attempts += 1;
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[j];
        if rng.random_bool(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        let distinct = a != c && a != d && b != c && b != d;
        let ad = ordered(a, d);
        let cb = ordered(c, b);
        if distinct && !present.contains(&ad) && !present.contains(&cb) {
            present.remove(&edges[i]);
            present.remove(&edges[j]);
            present.insert(ad);
            present.insert(cb);
            edges[i] = ad;
            edges[j] = cb;
            stats.swaps += 1;
            failures_in_a_row = 0;
        } else {
            failures_in_a_row += 1;
            // the swap graph of a degree class is connected, so a graph with
            // no legal swap is the only member of its class
            if !checked_swappable && failures_in_a_row >= 64 {
                checked_swappable = true;
                if !has_legal_swap(&edges, &present) {
                    break;
                }
            }
        }
    }
    edges
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn has_legal_swap(edges: &[(usize, usize)], present: &HashSet<(usize, usize)>) -> bool {
    for (i, &(a, b)) in edges.iter().enumerate() {
        for &(c0, d0) in &edges[i + 1..] {
            for (c, d) in [(c0, d0), (d0, c0)] {
                if a != c
                    && a != d
                    && b != c
                    && b != d
                    && !present.contains(&ordered(a, d))
                    && !present.contains(&ordered(c, b))
                {
                    return true;
                }
            }
        }
    }
    false
}

/// Random geometric graph together with the node positions it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricGraph {
    pub graph: Graph,
    pub positions: Vec<[f64; 2]>,
    pub radius: f64,
}

fn within(p: [f64; 2], q: [f64; 2], radius: f64) -> bool {
    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
    dx * dx + dy * dy <= radius * radius
}

/// `n` uniform points in the unit square, joined when at Euclidean distance at most `radius`.
pub fn random_geometric<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Result<GeometricGraph, NullModelError> {
    check_radius(radius)?;
    let positions = sample_points(n, rng);
    Ok(geometric_from_positions(positions, radius))
}

fn sample_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

/// Geometric graph over fixed positions.
pub fn geometric_from_positions(positions: Vec<[f64; 2]>, radius: f64) -> GeometricGraph {
    let n = positions.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if within(positions[u], positions[v], radius) {
                edges.push((u, v));
            }
        }
    }
    GeometricGraph {
        graph: Graph::from_index_edges(numeric_labels(n), edges),
        positions,
        radius,
    }
}

/// Radius whose expected geometric-graph edge count matches `target_m`.
///
/// Bisects on `[0, √2]` using the mean edge count over a fixed set of
/// [`CALIBRATION_SAMPLES`] point sets, so the probed function is monotone.
/// Stops once the mean is within [`CALIBRATION_TOLERANCE`] of the target or
/// after [`CALIBRATION_STEPS`] steps, returning the closest probe.
pub fn calibrate_radius(n: usize, target_m: usize, rng: &SeededRng) -> Result<f64, NullModelError> {
    check_edge_count(n, target_m)?;
    if target_m == 0 {
        return Ok(0.0);
    }
    if target_m == max_edges(n) {
        return Ok(std::f64::consts::SQRT_2);
    }
    let samples: Vec<Vec<f64>> = (0..CALIBRATION_SAMPLES)
        .map(|i| {
            let points = sample_points(n, &mut rng.replicate(i as u64));
            let mut d2 = Vec::with_capacity(max_edges(n));
            for u in 0..n {
                for v in (u + 1)..n {
                    let (dx, dy) = (points[u][0] - points[v][0], points[u][1] - points[v][1]);
                    d2.push(dx * dx + dy * dy);
                }
            }
            d2.sort_by(f64::total_cmp);
            d2
        })
        .collect();
    let mean_edges = |radius: f64| {
        let r2 = radius * radius;
        let total: usize = samples.iter().map(|d2| d2.partition_point(|&x| x <= r2)).sum();
        total as f64 / samples.len() as f64
    };

    let target = target_m as f64;
    let (mut lo, mut hi) = (0.0, std::f64::consts::SQRT_2);
    let mut best = (f64::INFINITY, hi);
    for _ in 0..CALIBRATION_STEPS {
        let mid = 0.5 * (lo + hi);
        let mean = mean_edges(mid);
        let error = (mean - target).abs();
        if error < best.0 {
            best = (error, mid);
        }
        if error <= CALIBRATION_TOLERANCE * target {
            break;
        }
        if mean < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}
