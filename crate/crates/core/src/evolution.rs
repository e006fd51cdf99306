//! Cumulative-window stage networks, node age and group summaries.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::ingest::{ProductionRecord, TransactionSet, WindowAssignment};
use crate::mining::{build_graph, CoSelectionGraph, MiningError, MiningThresholds};

/// Default slab-frequency floor used to prune peripheral groups.
pub const DEFAULT_PRUNE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Mining(#[from] MiningError),
}

/// Stage `s` is built from windows `0..=s`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSeries {
    pub stages: Vec<CoSelectionGraph>,
    pub windows: WindowAssignment,
}

impl StageSeries {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn final_stage(&self) -> Option<&CoSelectionGraph> {
        self.stages.last()
    }
}

/// First stage index at which each item appears.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NodeAge {
    pub age_of: BTreeMap<String, usize>,
}

/// Production contribution and attribute profile of a node group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub items: Vec<String>,
    pub item_count: usize,
    /// Fraction of all records whose item is in the group.
    pub slab_frequency: f64,
    /// Fraction of campaigns containing at least one group item.
    pub campaign_frequency: f64,
    /// Attribute means over the group's records.
    pub attribute_means: BTreeMap<String, f64>,
}

/// Builds one co-selection graph per cumulative window prefix.
pub fn stage_networks(
    records: &[ProductionRecord],
    transactions: &TransactionSet,
    windows: &WindowAssignment,
    thresholds: MiningThresholds,
) -> Result<StageSeries, EvolutionError> {
    if windows.by_position.len() != transactions.len() {
        return Err(EvolutionError::InvalidArgument(format!(
            "window assignment covers {} campaigns but there are {}",
            windows.by_position.len(),
            transactions.len()
        )));
    }
    thresholds.validate()?;
    let stages = (0..windows.window_count)
        .into_par_iter()
        .map(|stage| {
            let (stage_records, stage_transactions) = stage_slice(records, transactions, windows, stage);
            build_graph(&stage_transactions, &stage_records, thresholds)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StageSeries {
        stages,
        windows: windows.clone(),
    })
}

/// Records and transactions of windows `0..=stage`.
pub fn stage_slice(
    records: &[ProductionRecord],
    transactions: &TransactionSet,
    windows: &WindowAssignment,
    stage: usize,
) -> (Vec<ProductionRecord>, TransactionSet) {
    let stage_transactions = transactions.filter_by_position(|i| windows.by_position[i] <= stage);
    let stage_records = records
        .iter()
        .filter(|r| windows.window_of.get(&r.campaign_id).is_some_and(|&w| w <= stage))
        .cloned()
        .collect();
    (stage_records, stage_transactions)
}

/// First-appearance stage for every node of the final stage.
pub fn node_age(series: &StageSeries) -> NodeAge {
    let Some(last) = series.final_stage() else {
        return NodeAge::default();
    };
    let age_of = last
        .graph
        .labels()
        .iter()
        .map(|label| {
            let age = series
                .stages
                .iter()
                .position(|stage| stage.graph.contains(label))
                .expect("final stage contains the label");
            (label.clone(), age)
        })
        .collect();
    NodeAge { age_of }
}

/// Summarizes disjoint item groups against the full record and campaign set.
pub fn group_summary(
    groups: &[Vec<String>],
    records: &[ProductionRecord],
    transactions: &TransactionSet,
) -> Result<Vec<GroupSummary>, EvolutionError> {
    let mut group_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (g, group) in groups.iter().enumerate() {
        for item in group {
            if !transactions.item_universe.contains(item) {
                return Err(EvolutionError::InvalidArgument(format!("unknown item `{item}`")));
            }
            if group_of.insert(item.as_str(), g).is_some_and(|prev| prev != g) {
                return Err(EvolutionError::InvalidArgument(format!(
                    "item `{item}` belongs to more than one group"
                )));
            }
        }
    }

    let mut slabs = vec![0usize; groups.len()];
    let mut sums: Vec<BTreeMap<&str, (f64, usize)>> = vec![BTreeMap::new(); groups.len()];
    for r in records {
        if let Some(&g) = group_of.get(r.item.as_str()) {
            slabs[g] += 1;
            for (name, &value) in &r.attributes {
                let slot = sums[g].entry(name.as_str()).or_insert((0.0, 0));
                slot.0 += value;
                slot.1 += 1;
            }
        }
    }
    let mut campaigns = vec![0usize; groups.len()];
    for t in &transactions.transactions {
        let hit: BTreeSet<usize> = t
            .items
            .iter()
            .filter_map(|i| group_of.get(i.as_str()).copied())
            .collect();
        for g in hit {
            campaigns[g] += 1;
        }
    }

    let fraction = |count: usize, total: usize| if total == 0 { 0.0 } else { count as f64 / total as f64 };
    Ok(groups
        .iter()
        .enumerate()
        .map(|(g, group)| {
            let mut items = group.clone();
            items.sort();
            items.dedup();
            GroupSummary {
                item_count: items.len(),
                items,
                slab_frequency: fraction(slabs[g], records.len()),
                campaign_frequency: fraction(campaigns[g], transactions.len()),
                attribute_means: sums[g]
                    .iter()
                    .map(|(&name, &(sum, n))| (name.to_string(), sum / n as f64))
                    .collect(),
            }
        })
        .collect())
}

/// Keeps the nodes of groups whose slab frequency reaches `floor`.
pub fn prune_minor_groups(graph: &Graph, groups: &[GroupSummary], floor: f64) -> Result<Graph, EvolutionError> {
    if !(0.0..=1.0).contains(&floor) {
        return Err(EvolutionError::InvalidArgument(format!(
            "slab-frequency floor {floor} is outside [0, 1]"
        )));
    }
    let covered: BTreeSet<&str> = groups.iter().flat_map(|g| g.items.iter().map(String::as_str)).collect();
    if let Some(missing) = graph.labels().iter().find(|l| !covered.contains(l.as_str())) {
        return Err(EvolutionError::InvalidArgument(format!(
            "node `{missing}` is not covered by the partition"
        )));
    }
    let keep = groups
        .iter()
        .filter(|g| g.slab_frequency >= floor)
        .flat_map(|g| g.items.iter().map(String::as_str));
    Ok(graph.induced_by_labels(keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{assign_windows, group_campaigns, parse_records};

    const TWO_CAMPAIGNS: &str = "\
campaign,grade,width_mm,thickness_mm,carbon,manganese,silicon
A,1,1800,55,0.010,0.010,0.005
A,2,1750,65,0.010,0.020,0.015
B,3,1800,65,0.020,0.020,0.010
B,4,1750,70,0.020,0.010,0.025
";

    fn two_campaigns() -> (Vec<ProductionRecord>, TransactionSet) {
        let records = parse_records(TWO_CAMPAIGNS, "grade", &["carbon", "manganese"]).unwrap();
        let ts = group_campaigns(&records);
        (records, ts)
    }

    fn series(windows: usize) -> StageSeries {
        let (records, ts) = two_campaigns();
        let w = assign_windows(&ts, windows).unwrap();
        stage_networks(&records, &ts, &w, MiningThresholds::default()).unwrap()
    }

    fn edges(g: &CoSelectionGraph) -> Vec<(String, String)> {
        g.graph
            .edge_labels()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn single_window_is_full_network() {
        let (records, ts) = two_campaigns();
        let s = series(1);
        assert_eq!(s.len(), 1);
        let full = build_graph(&ts, &records, MiningThresholds::default()).unwrap();
        assert_eq!(s.stages[0], full);
        assert!(node_age(&s).age_of.values().all(|&a| a == 0));
    }

    #[test]
    fn two_windows_two_campaigns() {
        let s = series(2);
        assert_eq!(edges(&s.stages[0]), vec![pair("1", "2")]);
        assert_eq!(edges(&s.stages[1]), vec![pair("1", "2"), pair("3", "4")]);
        let ages = node_age(&s).age_of;
        assert_eq!(ages["1"], 0);
        assert_eq!(ages["2"], 0);
        assert_eq!(ages["3"], 1);
        assert_eq!(ages["4"], 1);
    }

    #[test]
    fn strict_thresholds_give_edgeless_stages() {
        let (records, ts) = two_campaigns();
        let w = assign_windows(&ts, 2).unwrap();
        let strict = MiningThresholds {
            min_support: 0.0,
            min_lift: 1e9,
        };
        let s = stage_networks(&records, &ts, &w, strict).unwrap();
        assert_eq!(s.stages[0].graph.node_count(), 2);
        assert_eq!(s.stages[1].graph.node_count(), 4);
        assert!(s.stages.iter().all(|g| g.graph.edge_count() == 0));
    }

    #[test]
    fn mismatched_windows_rejected() {
        let (records, ts) = two_campaigns();
        let mut w = assign_windows(&ts, 2).unwrap();
        w.by_position.pop();
        assert!(matches!(
            stage_networks(&records, &ts, &w, MiningThresholds::default()),
            Err(EvolutionError::InvalidArgument(_))
        ));
    }

    #[test]
    fn empty_series_has_no_ages() {
        let s = StageSeries {
            stages: vec![],
            windows: WindowAssignment {
                window_count: 0,
                window_of: BTreeMap::new(),
                by_position: vec![],
            },
        };
        assert!(node_age(&s).age_of.is_empty());
    }

    #[test]
    fn two_campaigns_group_summaries() {
        let (records, ts) = two_campaigns();
        let groups = vec![
            vec!["1".to_string(), "2".to_string()],
            vec!["3".to_string(), "4".to_string()],
        ];
        let s = group_summary(&groups, &records, &ts).unwrap();
        assert_eq!(s[0].item_count, 2);
        assert_eq!(s[0].slab_frequency, 0.5);
        assert_eq!(s[0].campaign_frequency, 0.5);
        assert!((s[0].attribute_means["carbon"] - 0.010).abs() < 1e-15);
        assert!((s[1].attribute_means["carbon"] - 0.020).abs() < 1e-15);
        assert!((s[0].attribute_means["manganese"] - 0.015).abs() < 1e-15);
    }

    #[test]
    fn covering_group_has_unit_frequencies() {
        let (records, ts) = two_campaigns();
        let all: Vec<String> = ts.item_universe.iter().cloned().collect();
        let s = group_summary(&[all], &records, &ts).unwrap();
        assert_eq!(s[0].slab_frequency, 1.0);
        assert_eq!(s[0].campaign_frequency, 1.0);
        assert!(group_summary(&[], &records, &ts).unwrap().is_empty());
    }

    #[test]
    fn unknown_or_overlapping_items_rejected() {
        let (records, ts) = two_campaigns();
        let unknown = vec![vec!["9".to_string()]];
        assert!(group_summary(&unknown, &records, &ts).is_err());
        let overlap = vec![vec!["1".to_string()], vec!["1".to_string(), "2".to_string()]];
        assert!(group_summary(&overlap, &records, &ts).is_err());
    }

    fn weighted_fixture() -> (Graph, Vec<GroupSummary>) {
        // Slab counts 5600 / 32 / 4368 give frequencies 0.56 / 0.0032 / 0.4368.
        let mut records = Vec::new();
        let mut baskets = Vec::new();
        let plan = [("a", 5600), ("b", 32), ("c", 4368)];
        for (g, &(prefix, count)) in plan.iter().enumerate() {
            for i in 0..count {
                let item = format!("{prefix}{}", i % 2);
                records.push(ProductionRecord {
                    sequence_index: records.len(),
                    campaign_id: format!("{g}-{}", i / 2),
                    item: item.clone(),
                    attributes: BTreeMap::new(),
                });
            }
            for c in 0..count / 2 {
                baskets.push((format!("{g}-{c}"), vec![format!("{prefix}0"), format!("{prefix}1")]));
            }
        }
        let ts = TransactionSet::from_baskets(baskets);
        let groups: Vec<Vec<String>> = ["a", "b", "c"]
            .iter()
            .map(|p| vec![format!("{p}0"), format!("{p}1")])
            .collect();
        let summaries = group_summary(&groups, &records, &ts).unwrap();
        let graph = build_graph(&ts, &records, MiningThresholds::default()).unwrap().graph;
        (graph, summaries)
    }

    #[test]
    fn minor_group_pruned() {
        let (graph, summaries) = weighted_fixture();
        assert!((summaries[0].slab_frequency - 0.56).abs() < 1e-12);
        assert!((summaries[1].slab_frequency - 0.0032).abs() < 1e-12);
        let total: f64 = summaries.iter().map(|s| s.slab_frequency).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let pruned = prune_minor_groups(&graph, &summaries, DEFAULT_PRUNE_FLOOR).unwrap();
        assert_eq!(pruned.labels(), ["a0", "a1", "c0", "c1"]);
        assert_eq!(pruned.edge_count(), 2);
    }

    #[test]
    fn prune_floor_extremes() {
        let (graph, summaries) = weighted_fixture();
        assert_eq!(prune_minor_groups(&graph, &summaries, 0.0).unwrap(), graph);
        assert!(prune_minor_groups(&graph, &summaries, 1.0).unwrap().is_empty());
        assert!(prune_minor_groups(&graph, &summaries, 1.5).is_err());
        assert!(prune_minor_groups(&graph, &summaries, -0.1).is_err());
        assert!(prune_minor_groups(&graph, &summaries[..1], 0.0).is_err());
    }
}
