//! CSV ingestion, campaign grouping, observation windows and descriptive histograms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

/// Column holding the campaign identifier.
pub const CAMPAIGN_COLUMN: &str = "campaign";
/// Default item column (steel grade).
pub const DEFAULT_ITEM_COLUMN: &str = "grade";
/// Numeric columns of the canonical schema, in header order.
pub const DEFAULT_ATTRIBUTE_COLUMNS: [&str; 6] =
    ["width_mm", "thickness_mm", "carbon", "manganese", "silicon", "titanium"];
/// Attributes that must be strictly positive when present.
const DIMENSION_COLUMNS: [&str; 2] = ["width_mm", "thickness_mm"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// One production row (slab / order).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductionRecord {
    /// 0-based position in file order.
    pub sequence_index: usize,
    pub campaign_id: String,
    pub item: String,
    pub attributes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transaction {
    pub campaign_id: String,
    pub items: BTreeSet<String>,
}

/// Campaigns viewed as market-basket transactions, in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransactionSet {
    pub transactions: Vec<Transaction>,
    pub item_universe: BTreeSet<String>,
}

impl TransactionSet {
    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Builds from `(campaign, items)` pairs; empty item lists are skipped.
    pub fn from_baskets<C, I, S>(baskets: impl IntoIterator<Item = (C, I)>) -> Self
    where
        C: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = TransactionSet::default();
        for (campaign, items) in baskets {
            let items: BTreeSet<String> = items.into_iter().map(Into::into).collect();
            if items.is_empty() {
                continue;
            }
            set.item_universe.extend(items.iter().cloned());
            set.transactions.push(Transaction {
                campaign_id: campaign.into(),
                items,
            });
        }
        set
    }

    /// Transactions whose position satisfies `keep`.
    pub fn filter_by_position(&self, mut keep: impl FnMut(usize) -> bool) -> TransactionSet {
        TransactionSet::from_baskets(
            self.transactions
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, t)| (t.campaign_id.clone(), t.items.iter().cloned().collect::<Vec<_>>())),
        )
    }
}

/// Chronological window per campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowAssignment {
    pub window_count: usize,
    pub window_of: BTreeMap<String, usize>,
    /// Window index per transaction position.
    pub by_position: Vec<usize>,
}

impl WindowAssignment {
    /// Campaigns per window, in window order.
    pub fn window_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.window_count];
        for &w in &self.by_position {
            sizes[w] += 1;
        }
        sizes
    }
}

/// Parses records from CSV text with a header row.
///
/// The header must contain [`CAMPAIGN_COLUMN`], `item_column` and every
/// attribute column; other columns are ignored.
pub fn parse_records(
    csv_text: &str,
    item_column: &str,
    attribute_columns: &[&str],
) -> Result<Vec<ProductionRecord>, IngestError> {
    if csv_text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers().map_err(|e| IngestError::Csv(e.to_string()))?.clone();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let campaign_at = position(CAMPAIGN_COLUMN)?;
    let item_at = position(item_column)?;
    let attribute_at = attribute_columns
        .iter()
        .map(|name| position(name).map(|i| (*name, i)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::new();
    for (index, row) in reader.records().enumerate() {
        // 1-based data row number, header excluded
        let row_number = index + 1;
        let row = row.map_err(|e| IngestError::Parse {
            row: row_number,
            message: e.to_string(),
        })?;
        let cell = |i: usize| row.get(i).unwrap_or("");
        let campaign_id = cell(campaign_at);
        let item = cell(item_at);
        if campaign_id.is_empty() {
            return Err(IngestError::Parse {
                row: row_number,
                message: format!("empty `{CAMPAIGN_COLUMN}` cell"),
            });
        }
        if item.is_empty() {
            return Err(IngestError::Parse {
                row: row_number,
                message: format!("empty `{item_column}` cell"),
            });
        }
        let mut attributes = BTreeMap::new();
        for &(name, i) in &attribute_at {
            let value = parse_attribute(name, cell(i)).map_err(|message| IngestError::Parse {
                row: row_number,
                message,
            })?;
            attributes.insert(name.to_string(), value);
        }
        records.push(ProductionRecord {
            sequence_index: index,
            campaign_id: campaign_id.to_string(),
            item: item.to_string(),
            attributes,
        });
    }
    Ok(records)
}

fn parse_attribute(name: &str, raw: &str) -> Result<f64, String> {
    let value: f64 = raw
        .parse()
        .map_err(|_| format!("non-numeric value `{raw}` in column `{name}`"))?;
    validate_attribute(name, value)?;
    Ok(value)
}

/// Checks a numeric attribute value: finite, nonnegative, and strictly
/// positive for the dimension columns.
pub fn validate_attribute(name: &str, value: f64) -> Result<(), String> {
    if !value.is_finite() {
        return Err(format!("non-finite value `{value}` in column `{name}`"));
    }
    if DIMENSION_COLUMNS.contains(&name) {
        if value <= 0.0 {
            return Err(format!("`{name}` must be positive, got {value}"));
        }
    } else if value < 0.0 {
        return Err(format!("`{name}` must be nonnegative, got {value}"));
    }
    Ok(())
}

/// Attribute columns of the canonical schema that appear in the header,
/// excluding the item column.
pub fn detect_attribute_columns(csv_text: &str, item_column: &str) -> Result<Vec<String>, IngestError> {
    if csv_text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers().map_err(|e| IngestError::Csv(e.to_string()))?;
    Ok(DEFAULT_ATTRIBUTE_COLUMNS
        .iter()
        .filter(|&&name| name != item_column && headers.iter().any(|h| h == name))
        .map(|name| name.to_string())
        .collect())
}

/// One transaction per distinct campaign, in order of first appearance.
pub fn group_campaigns(records: &[ProductionRecord]) -> TransactionSet {
    let mut order: Vec<&str> = Vec::new();
    let mut items: HashMap<&str, BTreeSet<String>> = HashMap::new();
    for record in records {
        let entry = items.entry(record.campaign_id.as_str()).or_insert_with(|| {
            order.push(record.campaign_id.as_str());
            BTreeSet::new()
        });
        entry.insert(record.item.clone());
    }
    TransactionSet::from_baskets(order.into_iter().map(|c| (c, items.remove(c).unwrap())))
}

/// Splits campaigns into `window_count` contiguous, balanced blocks.
///
/// With `N = q·W + r` campaigns the first `r` windows hold `q + 1`.
pub fn assign_windows(transactions: &TransactionSet, window_count: usize) -> Result<WindowAssignment, IngestError> {
    let n = transactions.len();
    if window_count == 0 {
        return Err(IngestError::InvalidArgument("window count must be at least 1".into()));
    }
    if window_count > n {
        return Err(IngestError::InvalidArgument(format!(
            "window count {window_count} exceeds the {n} available campaigns"
        )));
    }
    let (q, r) = (n / window_count, n % window_count);
    let mut by_position = Vec::with_capacity(n);
    for w in 0..window_count {
        let size = if w < r { q + 1 } else { q };
        by_position.extend(std::iter::repeat_n(w, size));
    }
    let window_of = transactions
        .transactions
        .iter()
        .zip(&by_position)
        .map(|(t, &w)| (t.campaign_id.clone(), w))
        .collect();
    Ok(WindowAssignment {
        window_count,
        window_of,
        by_position,
    })
}

/// Number of campaigns per distinct-item count.
pub fn campaign_diversity_histogram(transactions: &TransactionSet) -> BTreeMap<usize, usize> {
    let mut histogram = BTreeMap::new();
    for t in &transactions.transactions {
        *histogram.entry(t.items.len()).or_insert(0) += 1;
    }
    histogram
}

/// Number of records per item.
pub fn slabs_per_item_histogram(records: &[ProductionRecord]) -> BTreeMap<String, usize> {
    let mut histogram = BTreeMap::new();
    for record in records {
        *histogram.entry(record.item.clone()).or_insert(0) += 1;
    }
    histogram
}

/// Writes records in the ingest schema: campaign, item, then attributes with
/// canonical columns first and any others in name order.
pub fn write_records_csv(records: &[ProductionRecord], item_column: &str) -> Result<String, IngestError> {
    let names: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.attributes.keys().map(String::as_str))
        .collect();
    let mut columns: Vec<&str> = DEFAULT_ATTRIBUTE_COLUMNS
        .iter()
        .copied()
        .filter(|c| names.contains(c))
        .collect();
    columns.extend(names.iter().copied().filter(|n| !DEFAULT_ATTRIBUTE_COLUMNS.contains(n)));

    let csv_error = |e: csv::Error| IngestError::Csv(e.to_string());
    let mut writer = csv::Writer::from_writer(Vec::new());
    let header = [CAMPAIGN_COLUMN, item_column]
        .into_iter()
        .chain(columns.iter().copied());
    writer.write_record(header).map_err(csv_error)?;
    for r in records {
        let mut row = vec![r.campaign_id.clone(), r.item.clone()];
        for &c in &columns {
            let value = r.attributes.get(c).ok_or_else(|| {
                IngestError::InvalidArgument(format!("record {} lacks attribute `{c}`", r.sequence_index))
            })?;
            row.push(value.to_string());
        }
        writer.write_record(&row).map_err(csv_error)?;
    }
    let bytes = writer.into_inner().map_err(|e| IngestError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
