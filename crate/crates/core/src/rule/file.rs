//! Versioned JSON rule documents.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Polarity, RuleMatrix};
use crate::dataset::FeatureOrigin;
use crate::error::{Error, Result};

pub const RULE_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct RuleDocument {
    version: u32,
    polarity: Polarity,
    feature_names: Vec<String>,
    /// One list of 0/1 selection bits per clause.
    w: Vec<Vec<u8>>,
    provenance: Vec<FeatureOrigin>,
}

impl RuleMatrix {
    pub fn to_json(&self) -> Result<String> {
        let doc = RuleDocument {
            version: RULE_FILE_VERSION,
            polarity: self.polarity,
            feature_names: self.feature_names.clone(),
            w: self
                .clauses
                .iter()
                .map(|c| c.iter().map(|&b| u8::from(b)).collect())
                .collect(),
            provenance: self.provenance.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RuleDocument = serde_json::from_str(text)?;
        if doc.version != RULE_FILE_VERSION {
            return Err(Error::UnsupportedVersion(doc.version));
        }
        if doc.feature_names.len() != doc.provenance.len() {
            return Err(Error::DimensionMismatch {
                expected: doc.provenance.len(),
                found: doc.feature_names.len(),
            });
        }
        let mut clauses = Vec::with_capacity(doc.w.len());
        for column in doc.w {
            if column.iter().any(|&b| b > 1) {
                return Err(Error::InvalidArgument("rule entries must be 0 or 1".into()));
            }
            clauses.push(column.into_iter().map(|b| b == 1).collect());
        }
        let mut rule = RuleMatrix::new(doc.polarity, clauses, doc.provenance)?;
        rule.feature_names = doc.feature_names;
        Ok(rule)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> RuleMatrix {
        let provenance = vec![
            FeatureOrigin::Pad,
            FeatureOrigin::Threshold {
                column: "age".into(),
                threshold: 40.5,
                above: false,
            },
            FeatureOrigin::Threshold {
                column: "age".into(),
                threshold: 40.5,
                above: true,
            },
        ];
        RuleMatrix::new(
            Polarity::Dnf,
            vec![vec![false, true, false], vec![true, false, false]],
            provenance,
        )
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let r = rule();
        let text = r.to_json().unwrap();
        assert_eq!(RuleMatrix::from_json(&text).unwrap(), r);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["version"], 1);
        assert_eq!(value["polarity"], "dnf");
        assert_eq!(value["w"][0], serde_json::json!([0, 1, 0]));
        assert_eq!(value["provenance"][1]["kind"], "threshold");
    }

    #[test]
    fn rejects_other_versions() {
        let text = rule()
            .to_json()
            .unwrap()
            .replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            RuleMatrix::from_json(&text),
            Err(Error::UnsupportedVersion(9))
        ));
    }
}
