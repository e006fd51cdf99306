//! Correlation coefficients, node-metric correlations and ensemble z-scores.

mod correlation;
mod ensemble;

use thiserror::Error;

pub use correlation::{correlate, kendall, midranks, pearson, spearman, CorrelationKind, CorrelationResult};
pub use ensemble::{
    ensemble_zscores, node_metric_correlations, population_mean_std, zscore, EnsembleOutcome, EnsembleSummary,
    NodeMetricCorrelations, Statistic, MAX_DROPPED_FRACTION,
};

use crate::null_models::NullModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("invalid argument: sequences have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid argument: need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("undefined correlation: a sequence has zero variance")]
    ZeroVariance,
    #[error("undefined correlation: a sequence is entirely tied")]
    AllTied,
    #[error("insufficient data: {0} non-isolated nodes, need at least 3")]
    InsufficientData(usize),
    #[error("undefined z-score: replicate standard deviation is zero")]
    UndefinedZ,
    #[error("need at least 2 finite replicates, got {0}")]
    TooFewReplicates(usize),
    #[error("ensemble degenerate for {statistic}: {dropped} of {total} replicates undefined")]
    EnsembleDegenerate {
        statistic: Statistic,
        dropped: usize,
        total: usize,
    },
    #[error("empirical {statistic} undefined: {reason}")]
    EmpiricalUndefined { statistic: Statistic, reason: String },
    #[error(transparent)]
    NullModel(#[from] NullModelError),
}
