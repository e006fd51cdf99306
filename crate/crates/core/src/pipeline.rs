//! End-to-end `mine` and `analyze` runs and their file artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::evolution::{
    group_summary, node_age, prune_minor_groups, stage_networks, stage_slice, EvolutionError, GroupSummary,
    DEFAULT_PRUNE_FLOOR,
};
use crate::export::{
    write_campaign_diversity_csv, write_dot, write_edges_csv, write_graphml, write_slabs_per_item_csv, write_table_csv,
    AttrValue, ExportError, NetworkExport,
};
use crate::graph::{connected_components, girvan_newman, Graph};
use crate::ingest::{
    assign_windows, campaign_diversity_histogram, detect_attribute_columns, group_campaigns, parse_records,
    slabs_per_item_histogram, IngestError, ProductionRecord, TransactionSet, DEFAULT_ITEM_COLUMN,
};
use crate::mining::{build_graph, CoSelectionGraph, MiningError, MiningThresholds};
use crate::null_models::{NullModelKind, NullModelSpec, SeededRng, DEFAULT_SWAP_MULTIPLIER};
use crate::stats::{
    ensemble_zscores, node_metric_correlations, CorrelationKind, CorrelationResult, Statistic, StatsError,
};

pub const DEFAULT_WINDOWS: usize = 10;
pub const DEFAULT_ENSEMBLE: usize = 1000;

pub const REPORT_FILE: &str = "report.json";
pub const GRAPHML_FILE: &str = "network.graphml";
pub const DOT_FILE: &str = "network.dot";
pub const EDGES_FILE: &str = "edges.csv";
pub const DIVERSITY_FILE: &str = "hist_campaign_diversity.csv";
pub const SLABS_FILE: &str = "hist_slabs_per_grade.csv";
pub const ZSCORES_FILE: &str = "zscores.csv";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl PipelineError {
    /// Process exit code: 1 usage or validation, 2 data or schema, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::InvalidConfig(_)
            | PipelineError::Ingest(IngestError::InvalidArgument(_))
            | PipelineError::Mining(MiningError::InvalidThreshold(_)) => 1,
            PipelineError::Ingest(_) => 2,
            PipelineError::Evolution(EvolutionError::Mining(MiningError::InvalidThreshold(_))) => 1,
            _ => 3,
        }
    }
}

/// Which final-stage component is analyzed against null models.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ComponentSelection {
    #[default]
    Largest,
    /// Component with the lowest record-weighted mean of the attribute.
    Lowest(String),
    /// Component with the highest record-weighted mean of the attribute.
    Highest(String),
}

impl ComponentSelection {
    /// Index into `components`, or `None` when there are none.
    pub fn select(&self, components: &[GroupSummary]) -> Result<Option<usize>, PipelineError> {
        if components.is_empty() {
            return Ok(None);
        }
        let (attribute, lowest) = match self {
            ComponentSelection::Largest => {
                let best = (0..components.len())
                    .max_by(|&a, &b| components[a].item_count.cmp(&components[b].item_count).then(b.cmp(&a)))
                    .expect("non-empty");
                return Ok(Some(best));
            }
            ComponentSelection::Lowest(a) => (a, true),
            ComponentSelection::Highest(a) => (a, false),
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in components.iter().enumerate() {
            let Some(&mean) = c.attribute_means.get(attribute) else {
                return Err(PipelineError::InvalidConfig(format!(
                    "attribute `{attribute}` is not available for component selection"
                )));
            };
            let better = match best {
                None => true,
                Some((_, b)) if lowest => mean < b,
                Some((_, b)) => mean > b,
            };
            if better {
                best = Some((i, mean));
            }
        }
        Ok(best.map(|(i, _)| i))
    }
}

impl fmt::Display for ComponentSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentSelection::Largest => f.write_str("largest"),
            ComponentSelection::Lowest(a) => write!(f, "lowest:{a}"),
            ComponentSelection::Highest(a) => write!(f, "highest:{a}"),
        }
    }
}

impl FromStr for ComponentSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("largest") {
            return Ok(ComponentSelection::Largest);
        }
        match s.split_once(':') {
            Some((rule, attr)) if !attr.trim().is_empty() => match rule.trim().to_ascii_lowercase().as_str() {
                "lowest" => Ok(ComponentSelection::Lowest(attr.trim().to_string())),
                "highest" => Ok(ComponentSelection::Highest(attr.trim().to_string())),
                _ => Err(format!("unknown component rule `{s}`")),
            },
            _ => Err(format!(
                "unknown component rule `{s}`; expected `largest`, `lowest:ATTR` or `highest:ATTR`"
            )),
        }
    }
}

impl TryFrom<String> for ComponentSelection {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ComponentSelection> for String {
    fn from(c: ComponentSelection) -> String {
        c.to_string()
    }
}

/// Settings shared by `mine` and `analyze`; also the schema of preset files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub item_column: String,
    /// `None` selects every canonical attribute column present in the header.
    pub attribute_columns: Option<Vec<String>>,
    pub thresholds: MiningThresholds,
    pub windows: usize,
    pub ensemble: usize,
    pub models: Vec<NullModelKind>,
    pub correlation: CorrelationKind,
    pub seed: u64,
    pub prune_floor: f64,
    pub swap_multiplier: f64,
    pub component: ComponentSelection,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            item_column: DEFAULT_ITEM_COLUMN.to_string(),
            attribute_columns: None,
            thresholds: MiningThresholds::default(),
            windows: DEFAULT_WINDOWS,
            ensemble: DEFAULT_ENSEMBLE,
            models: NullModelKind::ALL.to_vec(),
            correlation: CorrelationKind::Spearman,
            seed: 0,
            prune_floor: DEFAULT_PRUNE_FLOOR,
            swap_multiplier: DEFAULT_SWAP_MULTIPLIER,
            component: ComponentSelection::Largest,
        }
    }
}

impl AnalyzeConfig {
    pub fn from_json(text: &str) -> Result<AnalyzeConfig, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let invalid = |m: String| Err(PipelineError::InvalidConfig(m));
        self.thresholds.validate()?;
        if self.item_column.is_empty() {
            return invalid("item column must not be empty".into());
        }
        if self.windows == 0 {
            return invalid("window count must be at least 1".into());
        }
        if self.ensemble < 2 {
            return invalid(format!("ensemble size must be at least 2, got {}", self.ensemble));
        }
        if self.models.is_empty() {
            return invalid("at least one null model is required".into());
        }
        if !(0.0..=1.0).contains(&self.prune_floor) {
            return invalid(format!("prune floor {} is outside [0, 1]", self.prune_floor));
        }
        if !(self.swap_multiplier.is_finite() && self.swap_multiplier > 0.0) {
            return invalid(format!(
                "swap multiplier must be positive, got {}",
                self.swap_multiplier
            ));
        }
        Ok(())
    }

    fn model_list(&self) -> Vec<NullModelKind> {
        let set: BTreeSet<NullModelKind> = self.models.iter().copied().collect();
        set.into_iter().collect()
    }
}

/// Parsed input with its digest.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub digest: InputDigest,
    pub attribute_columns: Vec<String>,
    pub records: Vec<ProductionRecord>,
    pub transactions: TransactionSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub sha256: String,
    pub rows: usize,
    pub campaigns: usize,
    pub items: usize,
}

impl Dataset {
    pub fn load(
        csv_text: &str,
        item_column: &str,
        attribute_columns: Option<&[String]>,
    ) -> Result<Dataset, PipelineError> {
        let attribute_columns = match attribute_columns {
            Some(cols) => cols.to_vec(),
            None => detect_attribute_columns(csv_text, item_column)?,
        };
        let names: Vec<&str> = attribute_columns.iter().map(String::as_str).collect();
        let records = parse_records(csv_text, item_column, &names)?;
        let transactions = group_campaigns(&records);
        let digest = InputDigest {
            sha256: hex::encode(Sha256::digest(csv_text.as_bytes())),
            rows: records.len(),
            campaigns: transactions.len(),
            items: transactions.item_universe.len(),
        };
        Ok(Dataset {
            digest,
            attribute_columns,
            records,
            transactions,
        })
    }
}

fn label_groups(graph: &Graph, groups: &[Vec<usize>]) -> Vec<Vec<String>> {
    groups.iter().map(|g| graph.labels_of(g)).collect()
}

fn group_ids(groups: &[Vec<String>]) -> BTreeMap<&str, usize> {
    groups
        .iter()
        .enumerate()
        .flat_map(|(i, g)| g.iter().map(move |l| (l.as_str(), i)))
        .collect()
}

/// Node attributes: attribute means, component id, community id and
/// optionally age. Edges carry their lift.
fn network_export(
    network: &CoSelectionGraph,
    components: &[Vec<String>],
    communities: &[Vec<String>],
    ages: Option<&BTreeMap<String, usize>>,
) -> NetworkExport {
    let component_of = group_ids(components);
    let community_of = group_ids(communities);
    let nodes = network
        .graph
        .labels()
        .iter()
        .map(|label| {
            let mut attrs: BTreeMap<String, AttrValue> = network
                .node_attributes
                .get(label)
                .into_iter()
                .flatten()
                .map(|(k, &v)| (k.clone(), AttrValue::Number(v)))
                .collect();
            attrs.insert(
                "component".into(),
                AttrValue::Integer(component_of[label.as_str()] as i64),
            );
            attrs.insert(
                "community".into(),
                AttrValue::Integer(community_of[label.as_str()] as i64),
            );
            if let Some(&age) = ages.and_then(|a| a.get(label)) {
                attrs.insert("age".into(), AttrValue::Integer(age as i64));
            }
            (label.clone(), attrs)
        })
        .collect();
    let edges = network
        .edge_lift
        .iter()
        .map(|((a, b), &lift)| {
            (
                a.clone(),
                b.clone(),
                BTreeMap::from([("lift".to_string(), AttrValue::Number(lift))]),
            )
        })
        .collect();
    NetworkExport { nodes, edges }
}

/// Output of a `mine` run.
#[derive(Debug, Clone)]
pub struct MineOutput {
    pub dataset: Dataset,
    pub network: CoSelectionGraph,
    pub components: Vec<Vec<String>>,
    pub communities: Vec<Vec<String>>,
    pub modularity: f64,
    pub export: NetworkExport,
    pub campaign_diversity: BTreeMap<usize, usize>,
    pub slabs_per_item: BTreeMap<String, usize>,
    pub item_column: String,
}

impl MineOutput {
    /// File name and content of every artifact, in write order.
    pub fn artifacts(&self) -> Result<Vec<(&'static str, String)>, PipelineError> {
        Ok(vec![
            (EDGES_FILE, write_edges_csv(&self.export)?),
            (GRAPHML_FILE, write_graphml(&self.export)),
            (DOT_FILE, write_dot(&self.export)),
            (DIVERSITY_FILE, write_campaign_diversity_csv(&self.campaign_diversity)?),
            (
                SLABS_FILE,
                write_slabs_per_item_csv(&self.slabs_per_item, &self.item_column)?,
            ),
        ])
    }
}

/// Steps 1 and 2: histograms and the full-data co-selection graph with
/// components and communities.
pub fn mine(
    csv_text: &str,
    item_column: &str,
    attribute_columns: Option<&[String]>,
    thresholds: MiningThresholds,
) -> Result<MineOutput, PipelineError> {
    thresholds.validate()?;
    let dataset = Dataset::load(csv_text, item_column, attribute_columns)?;
    let network = build_graph(&dataset.transactions, &dataset.records, thresholds)?;
    let components = label_groups(&network.graph, &connected_components(&network.graph));
    let partition = girvan_newman(&network.graph);
    let communities = label_groups(&network.graph, &partition.communities);
    let export = network_export(&network, &components, &communities, None);
    Ok(MineOutput {
        campaign_diversity: campaign_diversity_histogram(&dataset.transactions),
        slabs_per_item: slabs_per_item_histogram(&dataset.records),
        dataset,
        network,
        components,
        communities,
        modularity: partition.modularity_q,
        export,
        item_column: item_column.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// The selected component.
    Full,
    /// The selected component after pruning minor communities.
    Core,
}

impl Scope {
    pub const ALL: [Scope; 2] = [Scope::Full, Scope::Core];

    pub fn name(self) -> &'static str {
        match self {
            Scope::Full => "full",
            Scope::Core => "core",
        }
    }

    fn key(self) -> u64 {
        match self {
            Scope::Full => 0,
            Scope::Core => 1,
        }
    }
}

fn model_key(kind: NullModelKind) -> u64 {
    match kind {
        NullModelKind::Er => 0,
        NullModelKind::Degseq => 1,
        NullModelKind::Grg => 2,
    }
}

/// A correlation value or the reason it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCell {
    pub value: Option<f64>,
    pub p_value: Option<f64>,
    pub sample_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CorrelationCell {
    fn from_result(r: &Result<CorrelationResult, StatsError>) -> Self {
        match r {
            Ok(c) => CorrelationCell {
                value: Some(c.value),
                p_value: Some(c.p_value),
                sample_size: Some(c.sample_size),
                reason: None,
            },
            Err(e) => CorrelationCell::undefined(e.to_string()),
        }
    }

    fn undefined(reason: String) -> Self {
        CorrelationCell {
            value: None,
            p_value: None,
            sample_size: None,
            reason: Some(reason),
        }
    }
}

/// Degree and clustering against betweenness for one graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationPair {
    #[serde(rename = "COR_D_BC")]
    pub d_bc: CorrelationCell,
    #[serde(rename = "COR_CC_BC")]
    pub cc_bc: CorrelationCell,
}

impl CorrelationPair {
    fn of(graph: &Graph, kind: CorrelationKind) -> Self {
        match node_metric_correlations(graph, kind) {
            Ok(c) => CorrelationPair {
                d_bc: CorrelationCell::from_result(&c.d_bc),
                cc_bc: CorrelationCell::from_result(&c.cc_bc),
            },
            Err(e) => CorrelationPair {
                d_bc: CorrelationCell::undefined(e.to_string()),
                cc_bc: CorrelationCell::undefined(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopeCorrelations {
    pub full: CorrelationPair,
    pub core: CorrelationPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityReport {
    pub modularity: f64,
    pub best_level: usize,
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: usize,
    pub campaigns: usize,
    pub records: usize,
    pub node_count: usize,
    pub edge_count: usize,
    /// Frequencies are relative to the stage's own records and campaigns.
    pub components: Vec<GroupSummary>,
    pub communities: CommunityReport,
    /// Node metrics restricted to the selected component and its core.
    pub correlations: ScopeCorrelations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub rule: String,
    /// Index among the final-stage components, if any exist.
    pub component: Option<usize>,
    pub items: Vec<String>,
    /// Communities of the selected component over the full data.
    pub communities: CommunityReport,
    pub core_items: Vec<String>,
    pub pruned_items: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub first_stage: ScopeCorrelations,
    pub final_stage: ScopeCorrelations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Undefined,
}

/// One (scope, stage, model, statistic) ensemble result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZScoreCell {
    pub scope: Scope,
    pub stage: usize,
    pub model: NullModelKind,
    pub statistic: Statistic,
    pub status: CellStatus,
    pub empirical: Option<f64>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub z: Option<f64>,
    pub replicates: usize,
    pub dropped: Option<usize>,
    /// Base seed of the replicate streams.
    pub seed: u64,
    /// Base seed of the radius calibration (GRG only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub input: InputDigest,
    pub config: AnalyzeConfig,
    pub attribute_columns: Vec<String>,
    pub stage_count: usize,
    pub window_sizes: Vec<usize>,
    pub stages: Vec<StageReport>,
    pub selection: SelectionReport,
    pub correlation_table: CorrelationTable,
    pub zscores: Vec<ZScoreCell>,
    pub node_ages: BTreeMap<String, usize>,
}

/// Output of an `analyze` run.
#[derive(Debug, Clone)]
pub struct AnalyzeOutput {
    pub report: RunReport,
    pub export: NetworkExport,
    pub campaign_diversity: BTreeMap<usize, usize>,
    pub slabs_per_item: BTreeMap<String, usize>,
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl AnalyzeOutput {
    pub fn report_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.report).expect("report serializes");
        text.push('\n');
        text
    }

    /// Tidy z-score table, one row per cell.
    pub fn zscores_csv(&self) -> Result<String, PipelineError> {
        let header = [
            "scope",
            "stage",
            "model",
            "statistic",
            "status",
            "empirical",
            "mean",
            "std",
            "z",
            "replicates",
            "dropped",
            "reason",
        ];
        let rows: Vec<Vec<String>> = self
            .report
            .zscores
            .iter()
            .map(|c| {
                vec![
                    c.scope.name().to_string(),
                    c.stage.to_string(),
                    c.model.name().to_string(),
                    c.statistic.name().to_string(),
                    match c.status {
                        CellStatus::Ok => "ok".to_string(),
                        CellStatus::Undefined => "undefined".to_string(),
                    },
                    opt_num(c.empirical),
                    opt_num(c.mean),
                    opt_num(c.std),
                    opt_num(c.z),
                    c.replicates.to_string(),
                    c.dropped.map(|d| d.to_string()).unwrap_or_default(),
                    c.reason.clone().unwrap_or_default(),
                ]
            })
            .collect();
        Ok(write_table_csv(&header, &rows)?)
    }

    /// File name and content of every artifact, in write order.
    pub fn artifacts(&self) -> Result<Vec<(&'static str, String)>, PipelineError> {
        Ok(vec![
            (REPORT_FILE, self.report_json()),
            (EDGES_FILE, write_edges_csv(&self.export)?),
            (GRAPHML_FILE, write_graphml(&self.export)),
            (DOT_FILE, write_dot(&self.export)),
            (DIVERSITY_FILE, write_campaign_diversity_csv(&self.campaign_diversity)?),
            (
                SLABS_FILE,
                write_slabs_per_item_csv(&self.slabs_per_item, &self.report.config.item_column)?,
            ),
            (ZSCORES_FILE, self.zscores_csv()?),
        ])
    }
}

struct CellJob<'a> {
    scope: Scope,
    stage: usize,
    model: NullModelKind,
    graph: &'a Graph,
}

fn undefined_cell(
    job: &CellJob<'_>,
    statistic: Statistic,
    seed: u64,
    calibration: Option<u64>,
    reason: String,
) -> ZScoreCell {
    ZScoreCell {
        scope: job.scope,
        stage: job.stage,
        model: job.model,
        statistic,
        status: CellStatus::Undefined,
        empirical: None,
        mean: None,
        std: None,
        z: None,
        replicates: 0,
        dropped: None,
        seed,
        calibration_seed: calibration,
        reason: Some(reason),
    }
}

fn run_cell(job: &CellJob<'_>, config: &AnalyzeConfig, root: &SeededRng) -> Vec<ZScoreCell> {
    let cell_rng = root
        .derive(job.scope.key())
        .derive(job.stage as u64)
        .derive(model_key(job.model));
    let calibration = cell_rng.derive(0);
    let replicates = cell_rng.derive(1);
    let calibration_seed = (job.model == NullModelKind::Grg).then_some(calibration.base_seed);
    let undefined_all = |reason: String| {
        Statistic::ALL
            .iter()
            .map(|&s| undefined_cell(job, s, replicates.base_seed, calibration_seed, reason.clone()))
            .collect()
    };
    if job.graph.node_count() < 3 {
        return undefined_all(StatsError::InsufficientData(job.graph.node_count()).to_string());
    }
    let spec = match NullModelSpec::for_graph(job.model, job.graph, config.swap_multiplier, &calibration) {
        Ok(spec) => spec,
        Err(e) => return undefined_all(e.to_string()),
    };
    let outcomes = match ensemble_zscores(job.graph, &spec, config.ensemble, config.correlation, &replicates) {
        Ok(o) => o,
        Err(e) => return undefined_all(e.to_string()),
    };
    outcomes
        .into_iter()
        .map(|outcome| match outcome.result {
            Ok(s) => ZScoreCell {
                scope: job.scope,
                stage: job.stage,
                model: job.model,
                statistic: outcome.statistic,
                status: if s.z.is_some() {
                    CellStatus::Ok
                } else {
                    CellStatus::Undefined
                },
                empirical: Some(s.empirical),
                mean: Some(s.mean),
                std: Some(s.std),
                z: s.z,
                replicates: s.replicates,
                dropped: Some(s.dropped),
                seed: replicates.base_seed,
                calibration_seed,
                reason: s.z.is_none().then(|| StatsError::UndefinedZ.to_string()),
            },
            Err(e) => undefined_cell(
                job,
                outcome.statistic,
                replicates.base_seed,
                calibration_seed,
                e.to_string(),
            ),
        })
        .collect()
}

/// Steps 1 to 6 over cumulative windows.
pub fn analyze(csv_text: &str, config: &AnalyzeConfig) -> Result<AnalyzeOutput, PipelineError> {
    config.validate()?;
    let data = Dataset::load(csv_text, &config.item_column, config.attribute_columns.as_deref())?;
    let windows = assign_windows(&data.transactions, config.windows)?;
    let series = stage_networks(&data.records, &data.transactions, &windows, config.thresholds)?;
    let ages = node_age(&series).age_of;
    let final_stage = series.final_stage().expect("at least one window");

    let final_components = label_groups(&final_stage.graph, &connected_components(&final_stage.graph));
    let final_partition = girvan_newman(&final_stage.graph);
    let final_communities = label_groups(&final_stage.graph, &final_partition.communities);
    let component_summaries = group_summary(&final_components, &data.records, &data.transactions)?;
    let selected = config.component.select(&component_summaries)?;
    let selected_items: Vec<String> = selected.map(|i| final_components[i].clone()).unwrap_or_default();

    let component_graph = final_stage
        .graph
        .induced_by_labels(selected_items.iter().map(String::as_str));
    let component_partition = girvan_newman(&component_graph);
    let component_groups = label_groups(&component_graph, &component_partition.communities);
    let community_summaries = group_summary(&component_groups, &data.records, &data.transactions)?;
    let core_graph = prune_minor_groups(&component_graph, &community_summaries, config.prune_floor)?;
    let core_items: Vec<String> = core_graph.labels().to_vec();
    let pruned_items: Vec<String> = selected_items
        .iter()
        .filter(|i| !core_graph.contains(i))
        .cloned()
        .collect();

    let scope_graphs: Vec<[Graph; 2]> = series
        .stages
        .iter()
        .map(|stage| {
            let restrict = |items: &[String]| {
                stage
                    .graph
                    .induced_by_labels(items.iter().map(String::as_str))
                    .without_isolated()
            };
            [restrict(&selected_items), restrict(&core_items)]
        })
        .collect();

    let stages: Vec<StageReport> = series
        .stages
        .par_iter()
        .enumerate()
        .map(|(s, stage)| {
            let (records, transactions) = stage_slice(&data.records, &data.transactions, &windows, s);
            let components = label_groups(&stage.graph, &connected_components(&stage.graph));
            let partition = girvan_newman(&stage.graph);
            let communities = label_groups(&stage.graph, &partition.communities);
            Ok(StageReport {
                stage: s,
                campaigns: transactions.len(),
                records: records.len(),
                node_count: stage.graph.node_count(),
                edge_count: stage.graph.edge_count(),
                components: group_summary(&components, &records, &transactions)?,
                communities: CommunityReport {
                    modularity: partition.modularity_q,
                    best_level: partition.best_level,
                    groups: group_summary(&communities, &records, &transactions)?,
                },
                correlations: ScopeCorrelations {
                    full: CorrelationPair::of(&scope_graphs[s][0], config.correlation),
                    core: CorrelationPair::of(&scope_graphs[s][1], config.correlation),
                },
            })
        })
        .collect::<Result<_, EvolutionError>>()?;

    let root = SeededRng::new(config.seed);
    let models = config.model_list();
    let mut jobs = Vec::new();
    for scope in Scope::ALL {
        for (s, graphs) in scope_graphs.iter().enumerate() {
            for &model in &models {
                jobs.push(CellJob {
                    scope,
                    stage: s,
                    model,
                    graph: &graphs[scope.key() as usize],
                });
            }
        }
    }
    let zscores: Vec<ZScoreCell> = jobs
        .par_iter()
        .map(|job| run_cell(job, config, &root))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let correlation_table = CorrelationTable {
        first_stage: stages[0].correlations.clone(),
        final_stage: stages[stages.len() - 1].correlations.clone(),
    };
    let export = network_export(final_stage, &final_components, &final_communities, Some(&ages));
    let report = RunReport {
        input: data.digest.clone(),
        config: config.clone(),
        attribute_columns: data.attribute_columns.clone(),
        stage_count: series.len(),
        window_sizes: windows.window_sizes(),
        stages,
        selection: SelectionReport {
            rule: config.component.to_string(),
            component: selected,
            items: selected_items,
            communities: CommunityReport {
                modularity: component_partition.modularity_q,
                best_level: component_partition.best_level,
                groups: community_summaries,
            },
            core_items,
            pruned_items,
        },
        correlation_table,
        zscores,
        node_ages: ages,
    };
    Ok(AnalyzeOutput {
        report,
        export,
        campaign_diversity: campaign_diversity_histogram(&data.transactions),
        slabs_per_item: slabs_per_item_histogram(&data.records),
    })
}
