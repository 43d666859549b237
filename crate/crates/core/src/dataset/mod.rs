//! Binary feature datasets: CSV ingestion, quantile binarization and
//! stratified fold assignment.

mod binarize;
mod folds;
mod table;

pub use binarize::{binarize, quantile, Binarizer};
pub use folds::{stratified_folds, FoldPlan};
pub use table::{
    load_csv, ColumnKind, ColumnSpec, ColumnValues, LabelSpec, RawColumn, RawTable, Schema,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a binary feature column came from.
///
/// The list of origins for a dataset is its provenance; it is enough to
/// rebuild the feature matrix from raw values and to print rules against the
/// original column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureOrigin {
    /// The constant always-true column.
    Pad,
    /// `column <= threshold`, or `column > threshold` when `above`.
    Threshold {
        column: String,
        threshold: f64,
        above: bool,
    },
    /// A 0/1 source column, or its complement when `negated`.
    Flag { column: String, negated: bool },
    /// `column == value`, or `column != value` when `negated`.
    Category {
        column: String,
        value: String,
        negated: bool,
    },
}

impl FeatureOrigin {
    /// The origin describing the complement of this feature, if it has one.
    pub fn negation(&self) -> Option<FeatureOrigin> {
        match self {
            FeatureOrigin::Pad => None,
            FeatureOrigin::Threshold {
                column,
                threshold,
                above,
            } => Some(FeatureOrigin::Threshold {
                column: column.clone(),
                threshold: *threshold,
                above: !above,
            }),
            FeatureOrigin::Flag { column, negated } => Some(FeatureOrigin::Flag {
                column: column.clone(),
                negated: !negated,
            }),
            FeatureOrigin::Category {
                column,
                value,
                negated,
            } => Some(FeatureOrigin::Category {
                column: column.clone(),
                value: value.clone(),
                negated: !negated,
            }),
        }
    }

    pub fn source_column(&self) -> Option<&str> {
        match self {
            FeatureOrigin::Pad => None,
            FeatureOrigin::Threshold { column, .. }
            | FeatureOrigin::Flag { column, .. }
            | FeatureOrigin::Category { column, .. } => Some(column),
        }
    }

    /// Human-readable condition, e.g. `age <= 40` or `NOT smoker`.
    pub fn describe(&self) -> String {
        match self {
            FeatureOrigin::Pad => "TRUE".to_string(),
            FeatureOrigin::Threshold {
                column,
                threshold,
                above,
            } => {
                let op = if *above { ">" } else { "<=" };
                format!("{column} {op} {}", format_threshold(*threshold))
            }
            FeatureOrigin::Flag { column, negated } => {
                if *negated {
                    format!("NOT {column}")
                } else {
                    column.clone()
                }
            }
            FeatureOrigin::Category {
                column,
                value,
                negated,
            } => {
                let op = if *negated { "!=" } else { "==" };
                format!("{column} {op} {value}")
            }
        }
    }
}

/// Thresholds are printed with four significant digits.
fn format_threshold(t: f64) -> String {
    if t == 0.0 || !t.is_finite() {
        return format!("{t}");
    }
    let digits = 4 - 1 - t.abs().log10().floor() as i32;
    if digits > 0 {
        let s = format!("{:.*}", digits as usize, t);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        let scale = 10f64.powi(-digits);
        format!("{}", (t / scale).round() * scale)
    }
}

/// Binary samples with the always-true column at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    width: usize,
    features: Vec<u8>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    provenance: Vec<FeatureOrigin>,
}

impl BinaryDataset {
    /// Assemble a dataset from rows that already include the pad column.
    pub fn from_parts(
        rows: Vec<Vec<u8>>,
        labels: Vec<u8>,
        provenance: Vec<FeatureOrigin>,
    ) -> Result<Self> {
        let width = provenance.len();
        if width == 0 || provenance[0] != FeatureOrigin::Pad {
            return Err(Error::InvalidArgument(
                "column 0 must be the always-true pad".into(),
            ));
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        let mut features = Vec::with_capacity(rows.len() * width);
        for row in &rows {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            if row[0] != 1 || row.iter().any(|&v| v > 1) {
                return Err(Error::InvalidArgument(
                    "features must be 0/1 with a[i][0] = 1".into(),
                ));
            }
            features.extend_from_slice(row);
        }
        if labels.iter().any(|&v| v > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        let feature_names = provenance.iter().map(FeatureOrigin::describe).collect();
        Ok(BinaryDataset {
            width,
            features,
            labels,
            feature_names,
            provenance,
        })
    }

    /// Build a dataset from raw binary features `x` (without pad), adding the
    /// pad column and a negation for every feature. Features are named
    /// `x1..xd` unless `names` is given.
    pub fn from_binary_features(x: &[Vec<u8>], y: &[u8], names: Option<&[String]>) -> Result<Self> {
        let d = x.first().map_or(0, Vec::len);
        let names: Vec<String> = match names {
            Some(n) if n.len() == d => n.to_vec(),
            Some(n) => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: n.len(),
                })
            }
            None => (1..=d).map(|j| format!("x{j}")).collect(),
        };
        let mut provenance = vec![FeatureOrigin::Pad];
        for name in &names {
            for negated in [false, true] {
                provenance.push(FeatureOrigin::Flag {
                    column: name.clone(),
                    negated,
                });
            }
        }
        let rows = x
            .iter()
            .map(|row| {
                if row.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: row.len(),
                    });
                }
                let mut out = Vec::with_capacity(2 * d + 1);
                out.push(1);
                for &v in row {
                    out.push(u8::from(v != 0));
                    out.push(u8::from(v == 0));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(rows, y.to_vec(), provenance)
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    /// Number of columns including the pad (d + 1).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.features[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.features.chunks_exact(self.width.max(1))
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn provenance(&self) -> &[FeatureOrigin] {
        &self.provenance
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    /// For every column, the index of its complement column if present.
    pub fn negation_partners(&self) -> Vec<Option<usize>> {
        negation_partners(&self.provenance)
    }

    /// Same features with every label flipped.
    pub fn with_complemented_labels(&self) -> BinaryDataset {
        BinaryDataset {
            labels: self.labels.iter().map(|&y| 1 - y).collect(),
            ..self.clone()
        }
    }

    /// Rows restricted to `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<BinaryDataset> {
        let n = self.n_samples();
        let mut seen = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate sample index {i}"
                )));
            }
        }
        let mut features = Vec::with_capacity(indices.len() * self.width);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Ok(BinaryDataset {
            width: self.width,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
        })
    }
}

/// Pair every column with its complement column by provenance.
pub fn negation_partners(provenance: &[FeatureOrigin]) -> Vec<Option<usize>> {
    provenance
        .iter()
        .map(|origin| {
            let neg = origin.negation()?;
            provenance.iter().position(|o| *o == neg)
        })
        .collect()
}
