//! Co-selection network analysis of production-campaign records.
//!
//! The crate turns campaign records into market-basket transactions, mines
//! pairwise lift rules into an undirected co-selection graph and measures how
//! far its topology departs from randomized reference graphs across
//! cumulative observation windows.
//!
//! The pipeline is split into small modules that can be used independently:
//!
//! * [`ingest`] parses CSV records, groups campaigns and assigns windows.
//! * [`mining`] computes support and lift and builds a [`mining::CoSelectionGraph`].
//! * [`graph`] holds the [`graph::Graph`] type plus degree, clustering,
//!   betweenness, components, Girvan–Newman communities and modularity.
//! * [`null_models`] generates seeded randomized graphs.
//! * [`stats`] provides Pearson/Spearman/Kendall correlations and ensemble z-scores.
//! * [`evolution`] builds stage networks, node ages and group summaries.
//! * [`synth`] emits synthetic planner data with planted selection rules.
//! * [`export`] reads and writes GraphML, DOT and CSV artifacts.
//! * [`pipeline`] wires everything into the `mine` and `analyze` runs.

pub mod evolution;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod mining;
pub mod null_models;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub use graph::Graph;
pub use ingest::{ProductionRecord, TransactionSet, WindowAssignment};
pub use mining::{CoSelectionGraph, MiningThresholds};
pub use null_models::{NullModelKind, NullModelSpec, SeededRng};
pub use stats::{CorrelationKind, CorrelationResult, EnsembleSummary, Statistic};
