//! Typed tabular input loaded from CSV.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a source column is turned into binary features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Binary,
    Categorical,
}

impl ColumnKind {
    fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Continuous => "continuous",
            ColumnKind::Binary => "binary",
            ColumnKind::Categorical => "categorical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Names the label column and which of its values is the positive class.
///
/// When `negative` is `None`, any single other value is accepted as the
/// negative class; a third distinct value is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub column: String,
    pub positive: String,
    #[serde(default)]
    pub negative: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub label: Option<LabelSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>, label: Option<LabelSpec>) -> Self {
        Schema { columns, label }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Build a schema from a CSV header and contents.
    ///
    /// Columns listed in `explicit` keep their declared kind, columns in
    /// `ignore` and the label column are skipped, and every other column is
    /// typed from its values: only `0`/`1` gives binary, all-numeric gives
    /// continuous, anything else categorical.
    pub fn infer(
        path: &Path,
        label: Option<LabelSpec>,
        explicit: &[ColumnSpec],
        ignore: &[String],
    ) -> Result<Self> {
        let (header, rows) = read_records(path)?;
        let mut columns = Vec::new();
        for spec in explicit {
            if !header.iter().any(|h| h == &spec.name) {
                return Err(Error::UnknownColumn(spec.name.clone()));
            }
        }
        for (c, name) in header.iter().enumerate() {
            let is_label = label.as_ref().is_some_and(|l| &l.column == name);
            if is_label || ignore.iter().any(|i| i == name) {
                continue;
            }
            if let Some(spec) = explicit.iter().find(|s| &s.name == name) {
                columns.push(spec.clone());
                continue;
            }
            let mut numeric = true;
            let mut binary = true;
            for row in &rows {
                let cell = row.get(c).map(|s| s.trim()).unwrap_or("");
                if cell.is_empty() {
                    continue;
                }
                if cell != "0" && cell != "1" {
                    binary = false;
                }
                if cell.parse::<f64>().is_err() {
                    numeric = false;
                }
            }
            let kind = if binary {
                ColumnKind::Binary
            } else if numeric {
                ColumnKind::Continuous
            } else {
                ColumnKind::Categorical
            };
            columns.push(ColumnSpec {
                name: name.clone(),
                kind,
            });
        }
        Ok(Schema { columns, label })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Continuous(Vec<f64>),
    Binary(Vec<bool>),
    Categorical(Vec<String>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Continuous(v) => v.len(),
            ColumnValues::Binary(v) => v.len(),
            ColumnValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnValues::Continuous(_) => ColumnKind::Continuous,
            ColumnValues::Binary(_) => ColumnKind::Binary,
            ColumnValues::Categorical(_) => ColumnKind::Categorical,
        }
    }

    fn select(&self, rows: &[usize]) -> ColumnValues {
        match self {
            ColumnValues::Continuous(v) => {
                ColumnValues::Continuous(rows.iter().map(|&i| v[i]).collect())
            }
            ColumnValues::Binary(v) => ColumnValues::Binary(rows.iter().map(|&i| v[i]).collect()),
            ColumnValues::Categorical(v) => {
                ColumnValues::Categorical(rows.iter().map(|&i| v[i].clone()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub values: ColumnValues,
}

/// Typed rows with an optional 0/1 label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    columns: Vec<RawColumn>,
    labels: Option<Vec<u8>>,
    n_rows: usize,
}

impl RawTable {
    pub fn new(columns: Vec<RawColumn>, labels: Option<Vec<u8>>) -> Result<Self> {
        let n_rows = match (columns.first(), labels.as_ref()) {
            (Some(c), _) => c.values.len(),
            (None, Some(y)) => y.len(),
            (None, None) => 0,
        };
        for c in &columns {
            if c.values.len() != n_rows {
                return Err(Error::DimensionMismatch {
                    expected: n_rows,
                    found: c.values.len(),
                });
            }
        }
        if let Some(y) = &labels {
            if y.len() != n_rows {
                return Err(Error::DimensionMismatch {
                    expected: n_rows,
                    found: y.len(),
                });
            }
            if y.iter().any(|&v| v > 1) {
                return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
            }
        }
        Ok(RawTable {
            columns,
            labels,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[RawColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Rows restricted to `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<RawTable> {
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.n_rows) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.n_rows,
            });
        }
        Ok(RawTable {
            columns: self
                .columns
                .iter()
                .map(|c| RawColumn {
                    name: c.name.clone(),
                    values: c.values.select(rows),
                })
                .collect(),
            labels: self
                .labels
                .as_ref()
                .map(|y| rows.iter().map(|&i| y[i]).collect()),
            n_rows: rows.len(),
        })
    }
}

fn read_records(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);
    let header = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let rows = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn parse_binary(cell: &str) -> Option<bool> {
    match cell.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "t" | "y" => Some(true),
        "0" | "false" | "no" | "f" | "n" => Some(false),
        _ => None,
    }
}

/// Load a CSV file whose first row is a header.
///
/// Only the columns named in `schema` are read; others are ignored. Blank
/// cells are rejected.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<RawTable> {
    let (header, rows) = read_records(path)?;
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    };
    let cell = |row: usize, col: usize, name: &str| -> Result<String> {
        let value = rows[row].get(col).map(str::trim).unwrap_or("");
        if value.is_empty() {
            return Err(Error::MissingValue {
                row: row + 1,
                column: name.to_string(),
            });
        }
        Ok(value.to_string())
    };

    let mut columns = Vec::with_capacity(schema.columns.len());
    for spec in &schema.columns {
        let col = position(&spec.name)?;
        let parse_err = |row: usize, value: String| Error::Parse {
            row: row + 1,
            column: spec.name.clone(),
            value,
            kind: spec.kind.as_str(),
        };
        let values = match spec.kind {
            ColumnKind::Continuous => {
                let mut out = Vec::with_capacity(rows.len());
                for r in 0..rows.len() {
                    let raw = cell(r, col, &spec.name)?;
                    match raw.parse::<f64>() {
                        Ok(v) if v.is_finite() => out.push(v),
                        _ => return Err(parse_err(r, raw)),
                    }
                }
                ColumnValues::Continuous(out)
            }
            ColumnKind::Binary => {
                let mut out = Vec::with_capacity(rows.len());
                for r in 0..rows.len() {
                    let raw = cell(r, col, &spec.name)?;
                    out.push(parse_binary(&raw).ok_or_else(|| parse_err(r, raw))?);
                }
                ColumnValues::Binary(out)
            }
            ColumnKind::Categorical => ColumnValues::Categorical(
                (0..rows.len())
                    .map(|r| cell(r, col, &spec.name))
                    .collect::<Result<_>>()?,
            ),
        };
        columns.push(RawColumn {
            name: spec.name.clone(),
            values,
        });
    }

    let labels = match &schema.label {
        None => None,
        Some(label) => {
            let col = position(&label.column)?;
            let mut negative = label.negative.clone();
            let mut y = Vec::with_capacity(rows.len());
            for r in 0..rows.len() {
                let raw = cell(r, col, &label.column)?;
                if raw == label.positive {
                    y.push(1);
                    continue;
                }
                match &negative {
                    Some(neg) if *neg == raw => y.push(0),
                    Some(_) => {
                        return Err(Error::UnknownLabel {
                            column: label.column.clone(),
                            value: raw,
                        })
                    }
                    None => {
                        negative = Some(raw);
                        y.push(0);
                    }
                }
            }
            Some(y)
        }
    };

    RawTable::new(columns, labels)
}

/// Distinct category values of a column, sorted.
pub(crate) fn categories(values: &[String]) -> Vec<String> {
    values
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file
    }

    fn age_schema() -> Schema {
        Schema::new(
            vec![ColumnSpec {
                name: "age".into(),
                kind: ColumnKind::Continuous,
            }],
            Some(LabelSpec {
                column: "sick".into(),
                positive: "yes".into(),
                negative: None,
            }),
        )
    }

    #[test]
    fn loads_three_rows() {
        let file = write_csv("age,sick\n30,yes\n45,no\n61,yes\n");
        let table = load_csv(file.path(), &age_schema()).unwrap();
        assert_eq!(table.n_rows(), 3);
        assert_eq!(table.columns().len(), 1);
        assert_eq!(table.labels().unwrap(), &[1, 0, 1]);
        assert_eq!(
            table.columns()[0].values,
            ColumnValues::Continuous(vec![30.0, 45.0, 61.0])
        );
    }

    #[test]
    fn blank_cell_is_rejected() {
        let file = write_csv("age,sick\n30,yes\n,no\n");
        let err = load_csv(file.path(), &age_schema()).unwrap_err();
        assert_eq!(err.to_string(), "missing value at row 2, column age");
    }

    #[test]
    fn third_label_value_is_rejected() {
        let file = write_csv("age,sick\n30,yes\n45,no\n50,maybe\n");
        let err = load_csv(file.path(), &age_schema()).unwrap_err();
        assert!(err.to_string().contains("unknown label value"), "{err}");
    }

    #[test]
    fn explicit_negative_rejects_other_values() {
        let file = write_csv("age,sick\n30,maybe\n45,no\n");
        let mut schema = age_schema();
        schema.label.as_mut().unwrap().negative = Some("no".into());
        assert!(matches!(
            load_csv(file.path(), &schema),
            Err(Error::UnknownLabel { .. })
        ));
    }

    #[test]
    fn empty_table_and_missing_file() {
        let file = write_csv("age,sick\n");
        assert!(matches!(
            load_csv(file.path(), &age_schema()),
            Err(Error::EmptyTable)
        ));
        assert!(matches!(
            load_csv(Path::new("/nonexistent/data.csv"), &age_schema()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn unparseable_cell() {
        let file = write_csv("age,sick\nold,yes\n");
        let err = load_csv(file.path(), &age_schema()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }), "{err}");
    }

    #[test]
    fn quoted_fields() {
        let file = write_csv("\"age\",sick,city\n30,yes,\"New York, NY\"\n40,no,Boston\n");
        let mut schema = age_schema();
        schema.columns.push(ColumnSpec {
            name: "city".into(),
            kind: ColumnKind::Categorical,
        });
        let table = load_csv(file.path(), &schema).unwrap();
        assert_eq!(
            table.column("city").unwrap().values,
            ColumnValues::Categorical(vec!["New York, NY".into(), "Boston".into()])
        );
    }

    #[test]
    fn schema_inference() {
        let file = write_csv("a,b,c,y\n1.5,0,red,1\n2,1,blue,0\n");
        let schema = Schema::infer(
            file.path(),
            Some(LabelSpec {
                column: "y".into(),
                positive: "1".into(),
                negative: None,
            }),
            &[],
            &[],
        )
        .unwrap();
        let kinds: Vec<_> = schema.columns.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ColumnKind::Continuous,
                ColumnKind::Binary,
                ColumnKind::Categorical
            ]
        );
    }
}
