//! Dataset ingestion, schema handling and stratified fold planning.
//!
//! Datasets are tabular: every feature is either binary (already encoded
//! {0,1}) or numeric. Numeric columns are min-max normalized to [0,1] at
//! construction; fold evaluation re-derives ranges from each training split
//! (see [`Dataset::numeric_ranges`] and [`Dataset::renormalize`]).

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable identifier of an instance, preserved through sampling operations.
pub type RowId = usize;

/// Kind of a feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Values restricted to {0,1}.
    Binary,
    /// Real-valued; normalized to [0,1].
    Numeric,
}

/// Feature layout, protected-feature declarations and class encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    /// Feature names in column order.
    pub feature_names: Vec<String>,
    /// Kind of each feature, aligned with `feature_names`.
    pub feature_kinds: Vec<FeatureKind>,
    /// Names of protected features, in declaration order. Each must be a
    /// binary feature with both values present in the data.
    pub protected_features: Vec<String>,
    /// Name of the class column.
    pub class_name: String,
    /// Raw class value mapped to label 1.
    pub positive_class_value: String,
}

impl Schema {
    /// Index of a feature by name.
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Column indices of the protected features, in declaration order.
    pub fn protected_indices(&self) -> Vec<usize> {
        self.protected_features
            .iter()
            .map(|n| self.feature_index(n).expect("validated at construction"))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.feature_names.len() != self.feature_kinds.len() {
            return Err(Error::Schema("feature names/kinds length mismatch".into()));
        }
        let mut seen = BTreeSet::new();
        for name in &self.feature_names {
            if !seen.insert(name.clone()) {
                return Err(Error::Schema(format!("duplicate feature '{name}'")));
            }
        }
        if self.feature_names.iter().any(|n| *n == self.class_name) {
            return Err(Error::Schema(format!(
                "class column '{}' also declared as a feature",
                self.class_name
            )));
        }
        for p in &self.protected_features {
            match self.feature_index(p) {
                None => {
                    return Err(Error::Schema(format!(
                        "protected feature '{p}' is not a declared feature"
                    )))
                }
                Some(idx) => {
                    if self.feature_kinds[idx] != FeatureKind::Binary {
                        return Err(Error::Schema(format!(
                            "protected feature '{p}' must be binary"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// JSON schema configuration, as accepted by the CLI.
///
/// ```json
/// {
///   "class": "outcome",
///   "positive_value": "1",
///   "protected": ["race", "sex"],
///   "binary": ["race", "sex", "charge_degree"],
///   "numeric": ["age", "priors"]
/// }
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub class: String,
    pub positive_value: serde_json::Value,
    pub protected: Vec<String>,
    #[serde(default)]
    pub binary: Vec<String>,
    #[serde(default)]
    pub numeric: Vec<String>,
}

impl SchemaConfig {
    /// Read a schema configuration from a JSON file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn positive_value_str(&self) -> Result<String> {
        match &self.positive_value {
            serde_json::Value::String(s) => Ok(s.clone()),
            serde_json::Value::Number(n) => Ok(n.to_string()),
            other => Err(Error::Config(format!(
                "positive_value must be a string or number, got {other}"
            ))),
        }
    }
}

/// An encoded tabular dataset with protected-feature and class schema.
///
/// Rows are stored in a dense row-major matrix; labels live in a separate
/// vector. Row ids are stable across [`Dataset::filter_ids`] and
/// [`Dataset::select_positions`], so sampling bookkeeping can always be
/// traced back to the original instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    n_cols: usize,
    values: Vec<f64>,
    labels: Vec<u8>,
    row_ids: Vec<RowId>,
    /// Raw class strings for labels 0 and 1, used when writing CSV.
    class_values: [String; 2],
}

impl Dataset {
    /// Build a dataset from raw rows and {0,1} labels, validating the schema
    /// invariants and min-max normalizing numeric columns to [0,1].
    pub fn new(schema: Schema, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        Self::with_class_values(schema, rows, labels, ["0".into(), "1".into()])
    }

    fn with_class_values(
        schema: Schema,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
        class_values: [String; 2],
    ) -> Result<Self> {
        schema.validate()?;
        let n_cols = schema.feature_names.len();
        if rows.len() != labels.len() {
            return Err(Error::Validation(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Validation(format!(
                    "row {i} has {} values, expected {n_cols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        for (i, &l) in labels.iter().enumerate() {
            if l > 1 {
                return Err(Error::Validation(format!("label {l} at row {i} is not 0/1")));
            }
        }
        let row_ids = (0..rows.len()).collect();
        let mut ds = Dataset {
            schema,
            n_cols,
            values,
            labels,
            row_ids,
            class_values,
        };
        ds.check_binary_columns()?;
        let ranges = ds.numeric_ranges();
        ds.apply_ranges(&ranges, false);
        Ok(ds)
    }

    fn check_binary_columns(&self) -> Result<()> {
        for (col, kind) in self.schema.feature_kinds.iter().enumerate() {
            if *kind != FeatureKind::Binary {
                continue;
            }
            for row in 0..self.n_rows() {
                let v = self.value(row, col);
                if v != 0.0 && v != 1.0 {
                    return Err(Error::Validation(format!(
                        "binary column '{}' contains non-binary value {v} at row {row}",
                        self.schema.feature_names[col]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of instances.
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    /// Number of feature columns.
    pub fn n_features(&self) -> usize {
        self.n_cols
    }

    /// Feature vector of the instance at `position`.
    pub fn row(&self, position: usize) -> &[f64] {
        &self.values[position * self.n_cols..(position + 1) * self.n_cols]
    }

    /// Single cell access.
    pub fn value(&self, position: usize, column: usize) -> f64 {
        self.values[position * self.n_cols + column]
    }

    /// Labels in {0,1}, aligned with row positions.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Stable row ids, aligned with row positions.
    pub fn row_ids(&self) -> &[RowId] {
        &self.row_ids
    }

    /// The dataset schema.
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Position of the row with the given stable id, if present.
    pub fn position_of(&self, id: RowId) -> Option<usize> {
        self.row_ids.iter().position(|&r| r == id)
    }

    /// Values of one protected feature as {0,1}, aligned with row positions.
    pub fn protected_values(&self, feature: &str) -> Result<Vec<u8>> {
        let idx = self
            .schema
            .feature_index(feature)
            .ok_or_else(|| Error::Schema(format!("unknown feature '{feature}'")))?;
        Ok((0..self.n_rows()).map(|r| self.value(r, idx) as u8).collect())
    }

    /// Per-column (min, max) of numeric columns; `None` for binary columns.
    pub fn numeric_ranges(&self) -> Vec<Option<(f64, f64)>> {
        (0..self.n_cols)
            .map(|col| {
                if self.schema.feature_kinds[col] != FeatureKind::Numeric {
                    return None;
                }
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for row in 0..self.n_rows() {
                    let v = self.value(row, col);
                    min = min.min(v);
                    max = max.max(v);
                }
                Some((min, max))
            })
            .collect()
    }

    fn apply_ranges(&mut self, ranges: &[Option<(f64, f64)>], clamp: bool) {
        for col in 0..self.n_cols {
            let Some((min, max)) = ranges[col] else { continue };
            for row in 0..self.n_rows() {
                let idx = row * self.n_cols + col;
                let raw = self.values[idx];
                // Constant columns map to 0.0.
                let mut v = if max > min { (raw - min) / (max - min) } else { 0.0 };
                if clamp {
                    v = v.clamp(0.0, 1.0);
                }
                self.values[idx] = v;
            }
        }
    }

    /// Affinely rescale numeric columns with externally supplied ranges
    /// (typically a training split's), clamping to [0,1] when asked.
    pub fn renormalize(&self, ranges: &[Option<(f64, f64)>], clamp: bool) -> Dataset {
        let mut out = self.clone();
        out.apply_ranges(ranges, clamp);
        out
    }

    /// Subset by row positions, preserving order and row ids.
    pub fn select_positions(&self, positions: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(positions.len() * self.n_cols);
        let mut labels = Vec::with_capacity(positions.len());
        let mut row_ids = Vec::with_capacity(positions.len());
        for &p in positions {
            values.extend_from_slice(self.row(p));
            labels.push(self.labels[p]);
            row_ids.push(self.row_ids[p]);
        }
        Dataset {
            schema: self.schema.clone(),
            n_cols: self.n_cols,
            values,
            labels,
            row_ids,
            class_values: self.class_values.clone(),
        }
    }

    /// Keep only the rows whose stable id is in `keep`, preserving order.
    pub fn filter_ids(&self, keep: &BTreeSet<RowId>) -> Dataset {
        let positions: Vec<usize> = (0..self.n_rows())
            .filter(|&p| keep.contains(&self.row_ids[p]))
            .collect();
        self.select_positions(&positions)
    }

    /// Append synthetic rows (values already in [0,1]) with fresh row ids.
    pub fn with_appended(&self, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Dataset> {
        let mut out = self.clone();
        let mut next_id = self.row_ids.iter().copied().max().map_or(0, |m| m + 1);
        for (row, label) in rows.into_iter().zip(labels) {
            if row.len() != self.n_cols {
                return Err(Error::Validation(format!(
                    "appended row has {} values, expected {}",
                    row.len(),
                    self.n_cols
                )));
            }
            out.values.extend_from_slice(&row);
            out.labels.push(label);
            out.row_ids.push(next_id);
            next_id += 1;
        }
        Ok(out)
    }

    /// Write the dataset as CSV (header, features then class column).
    ///
    /// Values are written with round-trip precision, so loading the file
    /// back with the same schema yields an identical matrix.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.schema.feature_names.iter().map(|s| s.as_str()).collect();
        header.push(&self.schema.class_name);
        w.write_record(&header)?;
        for row in 0..self.n_rows() {
            let mut record: Vec<String> = self.row(row).iter().map(|v| v.to_string()).collect();
            record.push(self.class_values[self.labels[row] as usize].clone());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Load a CSV dataset against a schema configuration.
///
/// The header must consist of exactly the declared features plus the class
/// column. Binary (and protected) columns must contain only 0/1; numeric
/// columns are min-max normalized to [0,1] per column. Row order is
/// preserved and row ids are assigned 0..n in file order.
pub fn load_csv(path: impl AsRef<Path>, cfg: &SchemaConfig) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();

    let positive_value = cfg.positive_value_str()?;
    let mut binary: BTreeSet<&str> = cfg.binary.iter().map(|s| s.as_str()).collect();
    for p in &cfg.protected {
        binary.insert(p);
    }
    let numeric: BTreeSet<&str> = cfg.numeric.iter().map(|s| s.as_str()).collect();
    if let Some(both) = binary.iter().find(|n| numeric.contains(**n)) {
        return Err(Error::Schema(format!(
            "feature '{both}' declared both binary/protected and numeric"
        )));
    }

    let class_col = header
        .iter()
        .position(|c| *c == cfg.class)
        .ok_or_else(|| Error::Schema(format!("class column '{}' not found in header", cfg.class)))?;

    // Feature order follows the CSV header.
    let mut feature_names = Vec::new();
    let mut feature_kinds = Vec::new();
    let mut feature_cols = Vec::new();
    for (col, name) in header.iter().enumerate() {
        if col == class_col {
            continue;
        }
        let kind = if binary.contains(name.as_str()) {
            FeatureKind::Binary
        } else if numeric.contains(name.as_str()) {
            FeatureKind::Numeric
        } else {
            return Err(Error::Schema(format!(
                "column '{name}' is not declared in the schema"
            )));
        };
        feature_names.push(name.clone());
        feature_kinds.push(kind);
        feature_cols.push(col);
    }
    for declared in binary.iter().chain(numeric.iter()) {
        if !feature_names.iter().any(|n| n == declared) {
            return Err(Error::Schema(format!("declared column '{declared}' missing from header")));
        }
    }

    let schema = Schema {
        feature_names,
        feature_kinds,
        protected_features: cfg.protected.clone(),
        class_name: cfg.class.clone(),
        positive_class_value: positive_value.clone(),
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    let mut class_strings: Vec<String> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(feature_cols.len());
        for (feat_idx, &col) in feature_cols.iter().enumerate() {
            let cell = record.get(col).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|e| Error::Parse {
                row: row_idx,
                column: schema.feature_names[feat_idx].clone(),
                message: format!("'{cell}': {e}"),
            })?;
            row.push(v);
        }
        let class_cell = record.get(class_col).unwrap_or("").trim().to_string();
        if !class_strings.contains(&class_cell) {
            class_strings.push(class_cell.clone());
        }
        labels.push(u8::from(class_cell == positive_value));
        rows.push(row);
    }

    if class_strings.len() > 2 {
        return Err(Error::Validation(format!(
            "class column '{}' has {} distinct values, expected 2",
            cfg.class,
            class_strings.len()
        )));
    }
    if !class_strings.iter().any(|s| *s == positive_value) {
        return Err(Error::Validation(format!(
            "positive class value '{positive_value}' not present in column '{}'",
            cfg.class
        )));
    }
    let negative_value = class_strings
        .iter()
        .find(|s| **s != positive_value)
        .cloned()
        .unwrap_or_else(|| "0".to_string());

    let ds = Dataset::with_class_values(schema, rows, labels, [negative_value, positive_value])?;

    // Protected features must carry both values in the data.
    for p in &cfg.protected {
        let vals = ds.protected_values(p)?;
        if !vals.contains(&0) || !vals.contains(&1) {
            return Err(Error::Validation(format!(
                "protected feature '{p}' does not take both values 0 and 1"
            )));
        }
    }
    Ok(ds)
}

/// Assignment of every row to one of `k` stratified folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index in [0,k) per row position.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Row positions of the test split of `fold`.
    pub fn test_positions(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Row positions of the training split of `fold`.
    pub fn train_positions(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Deterministic stratified k-fold assignment: per-fold class counts differ
/// by at most one from the proportional share.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("fold count {k} must be at least 2")));
    }
    let mut per_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (pos, &label) in ds.labels().iter().enumerate() {
        per_class[label as usize].push(pos);
    }
    for (label, positions) in per_class.iter().enumerate() {
        if !positions.is_empty() && positions.len() < k {
            return Err(Error::Infeasible(format!(
                "class {label} has {} instances, fewer than {k} folds",
                positions.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; ds.n_rows()];
    for positions in per_class.iter_mut() {
        positions.shuffle(&mut rng);
        for (i, &pos) in positions.iter().enumerate() {
            assignments[pos] = i % k;
        }
    }
    Ok(FoldPlan { k, assignments })
}
