//! Pairwise association rules (support, lift) and co-selection graph construction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::ingest::{ProductionRecord, TransactionSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MiningError {
    #[error("invalid argument: transaction set is empty")]
    EmptyTransactions,
    #[error("invalid argument: pair support needs two distinct items, got `{0}` twice")]
    SameItem(String),
    #[error("lift of `{0}` and `{1}` is undefined: an item never occurs")]
    UndefinedLift(String, String),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
}

/// Edge criterion for [`build_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningThresholds {
    pub min_support: f64,
    pub min_lift: f64,
}

impl Default for MiningThresholds {
    fn default() -> Self {
        MiningThresholds {
            min_support: 0.0,
            min_lift: 1.0,
        }
    }
}

impl MiningThresholds {
    pub fn validate(&self) -> Result<(), MiningError> {
        if !(0.0..=1.0).contains(&self.min_support) {
            return Err(MiningError::InvalidThreshold(format!(
                "min_support must lie in [0, 1], got {}",
                self.min_support
            )));
        }
        if !self.min_lift.is_finite() {
            return Err(MiningError::InvalidThreshold(format!(
                "min_lift must be finite, got {}",
                self.min_lift
            )));
        }
        Ok(())
    }
}

/// Symmetric rule `{item_a} <-> {item_b}` with `item_a < item_b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleStats {
    pub item_a: String,
    pub item_b: String,
    pub support_a: f64,
    pub support_b: f64,
    pub support_pair: f64,
    pub lift: f64,
}

/// Fraction of transactions containing `item`.
pub fn support_single(item: &str, transactions: &TransactionSet) -> Result<f64, MiningError> {
    if transactions.is_empty() {
        return Err(MiningError::EmptyTransactions);
    }
    let hits = transactions
        .transactions
        .iter()
        .filter(|t| t.items.contains(item))
        .count();
    Ok(hits as f64 / transactions.len() as f64)
}

fn pair_count(a: &str, b: &str, transactions: &TransactionSet) -> usize {
    transactions
        .transactions
        .iter()
        .filter(|t| t.items.contains(a) && t.items.contains(b))
        .count()
}

/// Fraction of transactions containing both items.
pub fn support_pair(item_a: &str, item_b: &str, transactions: &TransactionSet) -> Result<f64, MiningError> {
    if item_a == item_b {
        return Err(MiningError::SameItem(item_a.to_string()));
    }
    if transactions.is_empty() {
        return Err(MiningError::EmptyTransactions);
    }
    Ok(pair_count(item_a, item_b, transactions) as f64 / transactions.len() as f64)
}

/// `support(a, b) / (support(a) · support(b))`.
pub fn lift(item_a: &str, item_b: &str, transactions: &TransactionSet) -> Result<f64, MiningError> {
    if item_a == item_b {
        return Err(MiningError::SameItem(item_a.to_string()));
    }
    if transactions.is_empty() {
        return Err(MiningError::EmptyTransactions);
    }
    let count = |item: &str| {
        transactions
            .transactions
            .iter()
            .filter(|t| t.items.contains(item))
            .count()
    };
    let (ca, cb) = (count(item_a), count(item_b));
    if ca == 0 || cb == 0 {
        return Err(MiningError::UndefinedLift(item_a.to_string(), item_b.to_string()));
    }
    Ok(lift_from_counts(
        pair_count(item_a, item_b, transactions),
        ca,
        cb,
        transactions.len(),
    ))
}

// Counts instead of fractions so that exact independence gives exactly 1.
fn lift_from_counts(pair: usize, a: usize, b: usize, total: usize) -> f64 {
    (pair as f64 * total as f64) / (a as f64 * b as f64)
}

struct Counts<'a> {
    total: usize,
    items: BTreeMap<&'a str, usize>,
    pairs: HashMap<(&'a str, &'a str), usize>,
}

fn count_all(transactions: &TransactionSet) -> Counts<'_> {
    let mut items = BTreeMap::new();
    let mut pairs = HashMap::new();
    for t in &transactions.transactions {
        let members: Vec<&str> = t.items.iter().map(String::as_str).collect();
        for (i, &a) in members.iter().enumerate() {
            *items.entry(a).or_insert(0) += 1;
            for &b in &members[i + 1..] {
                *pairs.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    Counts {
        total: transactions.len(),
        items,
        pairs,
    }
}

/// Every pair of items that co-occurs at least once, sorted by `(item_a, item_b)`.
pub fn pair_rules(transactions: &TransactionSet) -> Vec<RuleStats> {
    let counts = count_all(transactions);
    let n = counts.total as f64;
    let mut rules: Vec<RuleStats> = counts
        .pairs
        .iter()
        .map(|(&(a, b), &c)| {
            let (ca, cb) = (counts.items[a], counts.items[b]);
            RuleStats {
                item_a: a.to_string(),
                item_b: b.to_string(),
                support_a: ca as f64 / n,
                support_b: cb as f64 / n,
                support_pair: c as f64 / n,
                lift: lift_from_counts(c, ca, cb, counts.total),
            }
        })
        .collect();
    rules.sort_by(|x, y| (&x.item_a, &x.item_b).cmp(&(&y.item_a, &y.item_b)));
    rules
}

/// Undirected graph of frequently co-selected items.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoSelectionGraph {
    #[serde(skip)]
    pub graph: Graph,
    /// Lift per edge, keyed by sorted label pair.
    pub edge_lift: BTreeMap<(String, String), f64>,
    /// Mean of each numeric attribute over the item's records.
    pub node_attributes: BTreeMap<String, BTreeMap<String, f64>>,
    pub thresholds: MiningThresholds,
}

impl CoSelectionGraph {
    pub fn empty(thresholds: MiningThresholds) -> Self {
        CoSelectionGraph {
            graph: Graph::empty(),
            edge_lift: BTreeMap::new(),
            node_attributes: BTreeMap::new(),
            thresholds,
        }
    }

    pub fn lift_of(&self, a: &str, b: &str) -> Option<f64> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.edge_lift.get(&(key.0.to_string(), key.1.to_string())).copied()
    }
}

/// Per-item means of every numeric attribute.
pub fn attribute_means(records: &[ProductionRecord]) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut sums: BTreeMap<&str, BTreeMap<&str, (f64, usize)>> = BTreeMap::new();
    for r in records {
        let entry = sums.entry(r.item.as_str()).or_default();
        for (name, &value) in &r.attributes {
            let slot = entry.entry(name.as_str()).or_insert((0.0, 0));
            slot.0 += value;
            slot.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(item, attrs)| {
            let means = attrs
                .into_iter()
                .map(|(name, (sum, n))| (name.to_string(), sum / n as f64))
                .collect();
            (item.to_string(), means)
        })
        .collect()
}

/// Builds the co-selection graph.
///
/// Nodes are items that occur with support at least `min_support`; an edge
/// joins two items that co-occur at least once with pair support at least
/// `min_support` and lift at least `min_lift`. Topology ignores lift, which is
/// kept only as an edge attribute.
pub fn build_graph(
    transactions: &TransactionSet,
    records: &[ProductionRecord],
    thresholds: MiningThresholds,
) -> Result<CoSelectionGraph, MiningError> {
    thresholds.validate()?;
    if transactions.is_empty() {
        return Ok(CoSelectionGraph::empty(thresholds));
    }
    let counts = count_all(transactions);
    let n = counts.total as f64;
    let nodes: Vec<&str> = counts
        .items
        .iter()
        .filter(|(_, &c)| c >= 1 && c as f64 / n >= thresholds.min_support)
        .map(|(&item, _)| item)
        .collect();

    let mut edge_lift = BTreeMap::new();
    for (&(a, b), &c) in &counts.pairs {
        let lift = lift_from_counts(c, counts.items[a], counts.items[b], counts.total);
        if c as f64 / n >= thresholds.min_support && lift >= thresholds.min_lift {
            edge_lift.insert((a.to_string(), b.to_string()), lift);
        }
    }
    let graph = Graph::from_edges(
        nodes.iter().copied(),
        edge_lift.keys().map(|(a, b)| (a.as_str(), b.as_str())),
    )
    .expect("edge endpoints pass the node criterion");

    let mut node_attributes = attribute_means(records);
    node_attributes.retain(|item, _| graph.contains(item));
    Ok(CoSelectionGraph {
        graph,
        edge_lift,
        node_attributes,
        thresholds,
    })
}
