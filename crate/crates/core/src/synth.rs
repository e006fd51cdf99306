//! Synthetic production records from a planner with planted selection rules.
//!
//! Each campaign picks a home band uniformly, then draws its items from that
//! band by popularity weight. With probability `cross_band_rate` one item from
//! another band is added. Late items stay unavailable before their activation
//! campaign.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample_weighted;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{validate_attribute, ProductionRecord};

pub const DEFAULT_CAMPAIGN_SIZE: (usize, usize) = (2, 5);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid planner config: {0}")]
    InvalidConfig(String),
    #[error("campaign {campaign}: band {band} has no eligible items")]
    NoEligibleItems { campaign: usize, band: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    pub bands: Vec<Band>,
    pub campaign_count: usize,
    /// Inclusive `(min, max)` number of distinct items per campaign.
    #[serde(default = "default_campaign_size")]
    pub campaign_size: (usize, usize),
    #[serde(default)]
    pub cross_band_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub late_items: Option<LateItems>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub attribute: String,
    /// Closed interval of the band attribute.
    pub interval: (f64, f64),
    pub items: Vec<BandItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandItem {
    pub item: String,
    pub attributes: BTreeMap<String, f64>,
    /// Popularity weight; defaults to `1 / (rank + 1)` by position in the band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LateItems {
    pub items: Vec<String>,
    /// First campaign index at which the items may be selected.
    pub from_campaign: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Popularity {
    Uniform,
    HeavyTailed,
}

fn default_campaign_size() -> (usize, usize) {
    DEFAULT_CAMPAIGN_SIZE
}

impl Band {
    fn weight(&self, rank: usize) -> f64 {
        self.items[rank].weight.unwrap_or(1.0 / (rank + 1) as f64)
    }
}

impl PlannerConfig {
    /// Carbon bands with `items_per_band` items spread evenly inside each
    /// interval. Items are named `G001`, `G002`, ... across bands.
    pub fn carbon_bands(
        intervals: &[(f64, f64)],
        items_per_band: usize,
        campaign_count: usize,
        popularity: Popularity,
    ) -> PlannerConfig {
        let total = intervals.len() * items_per_band;
        let width = total.to_string().len().max(3);
        let bands = intervals
            .iter()
            .enumerate()
            .map(|(b, &(lo, hi))| Band {
                attribute: "carbon".to_string(),
                interval: (lo, hi),
                items: (0..items_per_band)
                    .map(|j| {
                        let idx = b * items_per_band + j;
                        let carbon = lo + (hi - lo) * (j as f64 + 0.5) / items_per_band as f64;
                        let attributes = BTreeMap::from([
                            ("width_mm".to_string(), 1500.0 + 25.0 * (idx % 12) as f64),
                            ("thickness_mm".to_string(), 200.0 + 10.0 * (idx % 5) as f64),
                            ("carbon".to_string(), carbon),
                            ("manganese".to_string(), 0.5 + 0.01 * (idx % 10) as f64),
                            ("silicon".to_string(), 0.02 + 0.005 * (idx % 7) as f64),
                            ("titanium".to_string(), 0.001 * (idx % 4) as f64),
                        ]);
                        BandItem {
                            item: format!("G{:0width$}", idx + 1),
                            attributes,
                            weight: match popularity {
                                Popularity::Uniform => Some(1.0),
                                Popularity::HeavyTailed => None,
                            },
                        }
                    })
                    .collect(),
            })
            .collect();
        PlannerConfig {
            bands,
            campaign_count,
            campaign_size: DEFAULT_CAMPAIGN_SIZE,
            cross_band_rate: 0.0,
            late_items: None,
        }
    }

    pub fn from_json(text: &str) -> Result<PlannerConfig, SynthError> {
        let config: PlannerConfig = serde_json::from_str(text).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.campaign_count == 0 {
            return invalid("campaign_count must be at least 1".into());
        }
        if self.bands.is_empty() {
            return invalid("at least one band is required".into());
        }
        let (min, max) = self.campaign_size;
        if min == 0 || min > max {
            return invalid(format!("campaign_size ({min}, {max}) must satisfy 1 <= min <= max"));
        }
        if !(0.0..=1.0).contains(&self.cross_band_rate) {
            return invalid(format!("cross_band_rate {} is outside [0, 1]", self.cross_band_rate));
        }

        let mut names = BTreeSet::new();
        let mut keys: Option<BTreeSet<&str>> = None;
        for (b, band) in self.bands.iter().enumerate() {
            let (lo, hi) = band.interval;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return invalid(format!(
                    "band {b}: interval ({lo}, {hi}) is not a finite closed interval"
                ));
            }
            if band.items.is_empty() {
                return invalid(format!("band {b} has no items"));
            }
            for (rank, item) in band.items.iter().enumerate() {
                if item.item.is_empty() {
                    return invalid(format!("band {b}: empty item name"));
                }
                if !names.insert(item.item.as_str()) {
                    return invalid(format!("item `{}` is listed more than once", item.item));
                }
                let w = band.weight(rank);
                if !(w.is_finite() && w > 0.0) {
                    return invalid(format!("item `{}`: weight {w} must be positive", item.item));
                }
                for (name, &value) in &item.attributes {
                    validate_attribute(name, value)
                        .map_err(|e| SynthError::InvalidConfig(format!("item `{}`: {e}", item.item)))?;
                }
                match item.attributes.get(&band.attribute) {
                    Some(&v) if lo <= v && v <= hi => {}
                    Some(&v) => {
                        return invalid(format!(
                            "item `{}`: {} = {v} lies outside band interval [{lo}, {hi}]",
                            item.item, band.attribute
                        ))
                    }
                    None => {
                        return invalid(format!(
                            "item `{}` lacks band attribute `{}`",
                            item.item, band.attribute
                        ))
                    }
                }
                let item_keys: BTreeSet<&str> = item.attributes.keys().map(String::as_str).collect();
                match &keys {
                    None => keys = Some(item_keys),
                    Some(k) if *k == item_keys => {}
                    Some(_) => return invalid(format!("item `{}` has a different attribute set", item.item)),
                }
            }
        }
        for (i, a) in self.bands.iter().enumerate() {
            for b in &self.bands[i + 1..] {
                if a.attribute == b.attribute && a.interval.0 <= b.interval.1 && b.interval.0 <= a.interval.1 {
                    return invalid(format!(
                        "band intervals [{}, {}] and [{}, {}] on `{}` overlap",
                        a.interval.0, a.interval.1, b.interval.0, b.interval.1, a.attribute
                    ));
                }
            }
        }
        if let Some(late) = &self.late_items {
            if let Some(unknown) = late.items.iter().find(|i| !names.contains(i.as_str())) {
                return invalid(format!("late item `{unknown}` is not a band item"));
            }
        }
        Ok(())
    }
}

/// Generates records campaign by campaign; one record per selected item.
pub fn generate<R: Rng + ?Sized>(config: &PlannerConfig, rng: &mut R) -> Result<Vec<ProductionRecord>, SynthError> {
    config.validate()?;
    let late: BTreeSet<&str> = config
        .late_items
        .iter()
        .flat_map(|l| l.items.iter().map(String::as_str))
        .collect();
    let activation = config.late_items.as_ref().map_or(0, |l| l.from_campaign);
    let width = config.campaign_count.to_string().len().max(5);
    let band_count = config.bands.len();

    let mut records = Vec::new();
    for campaign in 0..config.campaign_count {
        let eligible = |band: usize| -> Result<Vec<usize>, SynthError> {
            let ranks: Vec<usize> = (0..config.bands[band].items.len())
                .filter(|&r| campaign >= activation || !late.contains(config.bands[band].items[r].item.as_str()))
                .collect();
            if ranks.is_empty() {
                Err(SynthError::NoEligibleItems { campaign, band })
            } else {
                Ok(ranks)
            }
        };
        let draw = |rng: &mut R, band: usize, ranks: &[usize], amount: usize| -> Result<Vec<usize>, SynthError> {
            let b = &config.bands[band];
            let picked = sample_weighted(rng, ranks.len(), |i| b.weight(ranks[i]), amount)
                .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
            let mut picked: Vec<usize> = picked.into_iter().map(|i| ranks[i]).collect();
            picked.sort_unstable();
            Ok(picked)
        };

        let home = rng.random_range(0..band_count);
        let ranks = eligible(home)?;
        let size = rng.random_range(config.campaign_size.0..=config.campaign_size.1);
        let mut picks: Vec<(usize, usize)> = draw(rng, home, &ranks, size.min(ranks.len()))?
            .into_iter()
            .map(|r| (home, r))
            .collect();
        if band_count > 1 && config.cross_band_rate > 0.0 && rng.random_bool(config.cross_band_rate) {
            let mut other = rng.random_range(0..band_count - 1);
            if other >= home {
                other += 1;
            }
            let ranks = eligible(other)?;
            picks.extend(draw(rng, other, &ranks, 1)?.into_iter().map(|r| (other, r)));
        }

        let campaign_id = format!("C{campaign:0width$}");
        for (band, rank) in picks {
            let item = &config.bands[band].items[rank];
            records.push(ProductionRecord {
                sequence_index: records.len(),
                campaign_id: campaign_id.clone(),
                item: item.item.clone(),
                attributes: item.attributes.clone(),
            });
        }
    }
    Ok(records)
}
