use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::correlation::{correlate, CorrelationKind, CorrelationResult};
use super::StatsError;
use crate::graph::{node_metrics, Graph};
use crate::null_models::{NullModelKind, NullModelSpec, SeededRng};

/// Ensembles with more undefined replicates than this fraction are rejected.
pub const MAX_DROPPED_FRACTION: f64 = 0.5;

/// Node-metric correlation tracked across ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Statistic {
    /// Degree vs. betweenness.
    #[serde(rename = "COR_D_BC")]
    CorDBc,
    /// Clustering coefficient vs. betweenness.
    #[serde(rename = "COR_CC_BC")]
    CorCcBc,
}

impl Statistic {
    pub const ALL: [Statistic; 2] = [Statistic::CorDBc, Statistic::CorCcBc];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::CorDBc => "COR_D_BC",
            Statistic::CorCcBc => "COR_CC_BC",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Both node-metric correlations of one graph; each may be undefined on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetricCorrelations {
    pub d_bc: Result<CorrelationResult, StatsError>,
    pub cc_bc: Result<CorrelationResult, StatsError>,
}

impl NodeMetricCorrelations {
    pub fn get(&self, statistic: Statistic) -> &Result<CorrelationResult, StatsError> {
        match statistic {
            Statistic::CorDBc => &self.d_bc,
            Statistic::CorCcBc => &self.cc_bc,
        }
    }
}

/// Correlates degree and clustering with betweenness over non-isolated nodes.
pub fn node_metric_correlations(graph: &Graph, kind: CorrelationKind) -> Result<NodeMetricCorrelations, StatsError> {
    let metrics: Vec<_> = node_metrics(graph).into_iter().filter(|m| m.degree > 0).collect();
    if metrics.len() < 3 {
        return Err(StatsError::InsufficientData(metrics.len()));
    }
    let degree: Vec<f64> = metrics.iter().map(|m| m.degree as f64).collect();
    let clustering: Vec<f64> = metrics.iter().map(|m| m.clustering).collect();
    let betweenness: Vec<f64> = metrics.iter().map(|m| m.betweenness).collect();
    Ok(NodeMetricCorrelations {
        d_bc: correlate(kind, &degree, &betweenness),
        cc_bc: correlate(kind, &clustering, &betweenness),
    })
}

/// Mean and population standard deviation.
pub fn population_mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `(x − μ) / σ` over the finite replicates, with population σ.
pub fn zscore(x: f64, replicates: &[f64]) -> Result<f64, StatsError> {
    let finite: Vec<f64> = replicates.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return Err(StatsError::TooFewReplicates(finite.len()));
    }
    let (mean, std) = population_mean_std(&finite);
    if std == 0.0 || finite.iter().all(|&v| v == finite[0]) {
        return Err(StatsError::UndefinedZ);
    }
    Ok((x - mean) / std)
}

/// Empirical statistic against one null-model ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub statistic: Statistic,
    pub model: NullModelKind,
    pub empirical: f64,
    /// One value per replicate, `NaN` where the statistic was undefined.
    #[serde(skip)]
    pub replicate_values: Vec<f64>,
    pub replicates: usize,
    pub dropped: usize,
    pub mean: f64,
    pub std: f64,
    /// `None` when σ = 0.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutcome {
    pub statistic: Statistic,
    pub result: Result<EnsembleSummary, StatsError>,
}

/// Z-scores of both node-metric correlations of `graph` against `replicates`
/// draws from `spec`.
///
/// Replicate `i` uses stream `i` of `rng`, so results do not depend on thread
/// count. Undefined replicate values are dropped and counted; more than
/// [`MAX_DROPPED_FRACTION`] dropped makes that statistic degenerate.
pub fn ensemble_zscores(
    graph: &Graph,
    spec: &NullModelSpec,
    replicates: usize,
    kind: CorrelationKind,
    rng: &SeededRng,
) -> Result<Vec<EnsembleOutcome>, StatsError> {
    if replicates < 2 {
        return Err(StatsError::TooFewReplicates(replicates));
    }
    spec.validate()?;
    let empirical = node_metric_correlations(graph, kind);

    let draws: Vec<[f64; 2]> = (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.replicate(i);
            let sample = spec.sample(&mut stream).expect("validated spec");
            match node_metric_correlations(&sample, kind) {
                Ok(c) => [value_or_nan(&c.d_bc), value_or_nan(&c.cc_bc)],
                Err(_) => [f64::NAN; 2],
            }
        })
        .collect();

    let outcomes = Statistic::ALL
        .iter()
        .enumerate()
        .map(|(slot, &statistic)| {
            let values: Vec<f64> = draws.iter().map(|d| d[slot]).collect();
            let result = summarize(statistic, spec.kind(), &empirical, values);
            EnsembleOutcome { statistic, result }
        })
        .collect();
    Ok(outcomes)
}

fn value_or_nan(r: &Result<CorrelationResult, StatsError>) -> f64 {
    r.as_ref().map(|c| c.value).unwrap_or(f64::NAN)
}

fn summarize(
    statistic: Statistic,
    model: NullModelKind,
    empirical: &Result<NodeMetricCorrelations, StatsError>,
    values: Vec<f64>,
) -> Result<EnsembleSummary, StatsError> {
    let x = match empirical {
        Ok(c) => c.get(statistic).clone().map(|r| r.value),
        Err(e) => Err(e.clone()),
    }
    .map_err(|e| StatsError::EmpiricalUndefined {
        statistic,
        reason: e.to_string(),
    })?;

    let total = values.len();
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let dropped = total - finite.len();
    if dropped as f64 > MAX_DROPPED_FRACTION * total as f64 {
        return Err(StatsError::EnsembleDegenerate {
            statistic,
            dropped,
            total,
        });
    }
    let z = match zscore(x, &finite) {
        Ok(z) => Some(z),
        Err(StatsError::UndefinedZ) => None,
        Err(e) => return Err(e),
    };
    let (mean, std) = population_mean_std(&finite);
    Ok(EnsembleSummary {
        statistic,
        model,
        empirical: x,
        replicate_values: values,
        replicates: total,
        dropped,
        mean,
        std,
        z,
    })
}
