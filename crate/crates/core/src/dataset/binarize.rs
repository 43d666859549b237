use serde::{Deserialize, Serialize};

use super::table::{categories, ColumnKind, ColumnSpec, ColumnValues, RawTable};
use super::{BinaryDataset, FeatureOrigin};
use crate::error::{Error, Result};

/// Empirical quantile of sorted values with linear interpolation between
/// order statistics (position `p * (n - 1)`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// The mapping from raw columns to binary features, fitted on one table and
/// applicable to any table with the same source columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binarizer {
    features: Vec<FeatureOrigin>,
}

impl Binarizer {
    pub fn from_provenance(features: Vec<FeatureOrigin>) -> Result<Self> {
        if features.first() != Some(&FeatureOrigin::Pad) {
            return Err(Error::InvalidArgument(
                "provenance must start with the pad column".into(),
            ));
        }
        Ok(Binarizer { features })
    }

    /// Choose thresholds and category indicators from `table`.
    pub fn fit(table: &RawTable, num_thresholds: usize) -> Result<Self> {
        if num_thresholds < 1 {
            return Err(Error::InvalidArgument(
                "num_thresholds must be at least 1".into(),
            ));
        }
        if table.n_rows() == 0 {
            return Err(Error::EmptyTable);
        }
        let mut features = vec![FeatureOrigin::Pad];
        let mut push_pair = |origin: FeatureOrigin| {
            let neg = origin.negation().expect("non-pad feature");
            features.push(origin);
            features.push(neg);
        };
        for column in table.columns() {
            let name = &column.name;
            match &column.values {
                ColumnValues::Continuous(values) => {
                    for threshold in thresholds(values, num_thresholds) {
                        push_pair(FeatureOrigin::Threshold {
                            column: name.clone(),
                            threshold,
                            above: false,
                        });
                    }
                }
                ColumnValues::Binary(values) => {
                    if values.iter().any(|&v| v) && values.iter().any(|&v| !v) {
                        push_pair(FeatureOrigin::Flag {
                            column: name.clone(),
                            negated: false,
                        });
                    }
                }
                ColumnValues::Categorical(values) => {
                    let cats = categories(values);
                    if cats.len() > 1 {
                        for value in cats {
                            push_pair(FeatureOrigin::Category {
                                column: name.clone(),
                                value,
                                negated: false,
                            });
                        }
                    }
                }
            }
        }
        Ok(Binarizer { features })
    }

    pub fn features(&self) -> &[FeatureOrigin] {
        &self.features
    }

    /// Source columns the mapping reads, with the kind each must be loaded as.
    pub fn input_columns(&self) -> Vec<ColumnSpec> {
        let mut out: Vec<ColumnSpec> = Vec::new();
        for origin in &self.features {
            let (name, kind) = match origin {
                FeatureOrigin::Pad => continue,
                FeatureOrigin::Threshold { column, .. } => (column, ColumnKind::Continuous),
                FeatureOrigin::Flag { column, .. } => (column, ColumnKind::Binary),
                FeatureOrigin::Category { column, .. } => (column, ColumnKind::Categorical),
            };
            if !out.iter().any(|c| &c.name == name) {
                out.push(ColumnSpec {
                    name: name.clone(),
                    kind,
                });
            }
        }
        out
    }

    /// Binary feature rows (pad included) for every row of `table`.
    pub fn transform_rows(&self, table: &RawTable) -> Result<Vec<Vec<u8>>> {
        let n = table.n_rows();
        let mut rows = vec![Vec::with_capacity(self.features.len()); n];
        for origin in &self.features {
            let column = match origin.source_column() {
                None => {
                    rows.iter_mut().for_each(|r| r.push(1));
                    continue;
                }
                Some(name) => table
                    .column(name)
                    .ok_or_else(|| Error::UnknownColumn(name.to_string()))?,
            };
            let mismatch = || {
                Error::InvalidArgument(format!(
                    "column {:?} has kind {:?}, which does not match the rule",
                    column.name,
                    column.values.kind()
                ))
            };
            match (origin, &column.values) {
                (
                    FeatureOrigin::Threshold {
                        threshold, above, ..
                    },
                    ColumnValues::Continuous(values),
                ) => {
                    for (row, &v) in rows.iter_mut().zip(values) {
                        row.push(u8::from((v > *threshold) == *above));
                    }
                }
                (FeatureOrigin::Flag { negated, .. }, ColumnValues::Binary(values)) => {
                    for (row, &v) in rows.iter_mut().zip(values) {
                        row.push(u8::from(v != *negated));
                    }
                }
                (
                    FeatureOrigin::Category { value, negated, .. },
                    ColumnValues::Categorical(values),
                ) => {
                    for (row, v) in rows.iter_mut().zip(values) {
                        row.push(u8::from((v == value) != *negated));
                    }
                }
                _ => return Err(mismatch()),
            }
        }
        Ok(rows)
    }

    /// Apply the mapping to a labelled table.
    pub fn transform(&self, table: &RawTable) -> Result<BinaryDataset> {
        let labels = table
            .labels()
            .ok_or_else(|| Error::InvalidArgument("table has no label column".into()))?
            .to_vec();
        BinaryDataset::from_parts(self.transform_rows(table)?, labels, self.features.clone())
    }
}

/// Distinct non-degenerate quantile thresholds of `values`.
fn thresholds(values: &[f64], num_thresholds: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let max = *sorted.last().expect("non-empty column");
    let mut out: Vec<f64> = Vec::with_capacity(num_thresholds);
    for q in 1..=num_thresholds {
        let t = quantile(&sorted, q as f64 / (num_thresholds + 1) as f64);
        // `v <= max` holds for every value, so such a test is constant.
        if t >= max || out.last() == Some(&t) {
            continue;
        }
        out.push(t);
    }
    out
}

/// Fit thresholds on `table` and binarize it.
pub fn binarize(table: &RawTable, num_thresholds: usize) -> Result<BinaryDataset> {
    Binarizer::fit(table, num_thresholds)?.transform(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RawColumn;

    fn table(columns: Vec<RawColumn>, n: usize) -> RawTable {
        RawTable::new(columns, Some((0..n).map(|i| (i % 2) as u8).collect())).unwrap()
    }

    /// Order-statistic interpolation written out directly: the p-quantile
    /// lies a fraction `p` of the way through the n - 1 gaps.
    fn interpolated(values: &[f64], p: f64) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let gaps = (v.len() - 1) as f64;
        let target = p * gaps;
        let k = target as usize;
        if k + 1 >= v.len() {
            return v[v.len() - 1];
        }
        v[k] * (1.0 - (target - k as f64)) + v[k + 1] * (target - k as f64)
    }

    #[test]
    fn hundred_values_three_thresholds() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        for (p, expected) in [(0.25, 25.75), (0.5, 50.5), (0.75, 75.25)] {
            assert_eq!(interpolated(&values, p), expected);
        }
        let t = table(
            vec![RawColumn {
                name: "c".into(),
                values: ColumnValues::Continuous(values.clone()),
            }],
            100,
        );
        let data = binarize(&t, 3).unwrap();
        assert_eq!(data.width(), 7);
        let found: Vec<f64> = data
            .provenance()
            .iter()
            .filter_map(|o| match o {
                FeatureOrigin::Threshold {
                    threshold,
                    above: false,
                    ..
                } => Some(*threshold),
                _ => None,
            })
            .collect();
        assert_eq!(found, vec![25.75, 50.5, 75.25]);
        // value 26 is the first above 25.75
        assert_eq!(data.row(24)[1], 1);
        assert_eq!(data.row(25)[1], 0);
        assert_eq!(data.row(25)[2], 1);
        assert_eq!(data.feature_names()[1], "c <= 25.75");
        assert_eq!(data.feature_names()[2], "c > 25.75");
    }

    #[test]
    fn constant_column_emits_nothing() {
        let t = table(
            vec![RawColumn {
                name: "k".into(),
                values: ColumnValues::Continuous(vec![5.0; 8]),
            }],
            8,
        );
        let data = binarize(&t, 10).unwrap();
        assert_eq!(data.width(), 1);
    }

    #[test]
    fn tied_values_deduplicate_thresholds() {
        let t = table(
            vec![RawColumn {
                name: "c".into(),
                values: ColumnValues::Continuous(vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 3.0]),
            }],
            8,
        );
        let b = Binarizer::fit(&t, 10).unwrap();
        let ts: Vec<f64> = b
            .features()
            .iter()
            .filter_map(|o| match o {
                FeatureOrigin::Threshold {
                    threshold,
                    above: false,
                    ..
                } => Some(*threshold),
                _ => None,
            })
            .collect();
        assert!(ts.windows(2).all(|w| w[0] < w[1]), "{ts:?}");
        assert!(ts.iter().all(|&t| t < 3.0));
        assert_eq!(ts[0], 1.0);
    }

    #[test]
    fn binary_column_passes_through_with_negation() {
        let t = table(
            vec![RawColumn {
                name: "b".into(),
                values: ColumnValues::Binary(vec![true, false, true]),
            }],
            3,
        );
        let data = binarize(&t, 10).unwrap();
        assert_eq!(data.width(), 3);
        let col = |j: usize| -> Vec<u8> { data.rows().map(|r| r[j]).collect() };
        assert_eq!(col(1), vec![1, 0, 1]);
        assert_eq!(col(2), vec![0, 1, 0]);
    }

    #[test]
    fn categorical_one_vs_rest() {
        let t = table(
            vec![RawColumn {
                name: "color".into(),
                values: ColumnValues::Categorical(vec![
                    "red".into(),
                    "blue".into(),
                    "green".into(),
                ]),
            }],
            3,
        );
        let data = binarize(&t, 10).unwrap();
        assert_eq!(data.width(), 7);
        assert_eq!(data.feature_names()[1], "color == blue");
        assert_eq!(data.row(1), &[1, 1, 0, 0, 1, 0, 1]);
    }

    #[test]
    fn thresholds_from_one_table_apply_to_another() {
        let train = table(
            vec![RawColumn {
                name: "c".into(),
                values: ColumnValues::Continuous(vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            }],
            5,
        );
        let b = Binarizer::fit(&train, 1).unwrap();
        let test = table(
            vec![RawColumn {
                name: "c".into(),
                values: ColumnValues::Continuous(vec![100.0, -3.0]),
            }],
            2,
        );
        let data = b.transform(&test).unwrap();
        assert_eq!(data.row(0), &[1, 0, 1]);
        assert_eq!(data.row(1), &[1, 1, 0]);

        let other = RawTable::new(
            vec![RawColumn {
                name: "z".into(),
                values: ColumnValues::Continuous(vec![1.0]),
            }],
            None,
        )
        .unwrap();
        assert!(matches!(
            b.transform_rows(&other),
            Err(Error::UnknownColumn(c)) if c == "c"
        ));
    }

    #[test]
    fn rejects_bad_arguments() {
        let t = table(
            vec![RawColumn {
                name: "c".into(),
                values: ColumnValues::Continuous(vec![1.0, 2.0]),
            }],
            2,
        );
        assert!(binarize(&t, 0).is_err());
        let empty = t.select_rows(&[]).unwrap();
        assert!(matches!(binarize(&empty, 3), Err(Error::EmptyTable)));
    }
}
