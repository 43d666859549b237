//! Two-level rules: the W selection matrix, evaluation, sparsity, De Morgan
//! duality, text rendering and the JSON rule file.

mod file;
mod format;

pub use file::RULE_FILE_VERSION;
pub use format::format_rule;

use serde::{Deserialize, Serialize};

use crate::dataset::{BinaryDataset, FeatureOrigin};
use crate::error::{Error, Result};

/// Connective structure of a two-level rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// AND of OR-clauses.
    Cnf,
    /// OR of AND-clauses.
    Dnf,
}

impl Polarity {
    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::Cnf => Polarity::Dnf,
            Polarity::Dnf => Polarity::Cnf,
        }
    }
}

/// A two-level Boolean rule over a fixed feature space.
///
/// `clauses[r][j]` is the selection bit `w[j][r]`. Feature 0 is the
/// always-true pad: selecting it disables the clause.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleMatrix {
    polarity: Polarity,
    clauses: Vec<Vec<bool>>,
    feature_names: Vec<String>,
    provenance: Vec<FeatureOrigin>,
}

impl RuleMatrix {
    pub fn new(
        polarity: Polarity,
        clauses: Vec<Vec<bool>>,
        provenance: Vec<FeatureOrigin>,
    ) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::InvalidArgument(
                "a rule needs at least one clause".into(),
            ));
        }
        let width = provenance.len();
        if let Some(bad) = clauses.iter().find(|c| c.len() != width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: bad.len(),
            });
        }
        let feature_names = provenance.iter().map(FeatureOrigin::describe).collect();
        Ok(RuleMatrix {
            polarity,
            clauses,
            feature_names,
            provenance,
        })
    }

    /// A rule with `r` clauses over `data`'s features.
    pub fn for_dataset(
        data: &BinaryDataset,
        polarity: Polarity,
        clauses: Vec<Vec<bool>>,
    ) -> Result<Self> {
        Self::new(polarity, clauses, data.provenance().to_vec())
    }

    /// `r` clauses that all select only the pad.
    pub fn all_disabled(data: &BinaryDataset, polarity: Polarity, r: usize) -> Result<Self> {
        let mut clause = vec![false; data.width()];
        clause[0] = true;
        Self::for_dataset(data, polarity, vec![clause; r])
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn width(&self) -> usize {
        self.provenance.len()
    }

    pub fn clause(&self, r: usize) -> &[bool] {
        &self.clauses[r]
    }

    pub fn clauses(&self) -> &[Vec<bool>] {
        &self.clauses
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn provenance(&self) -> &[FeatureOrigin] {
        &self.provenance
    }

    pub fn is_disabled(&self, r: usize) -> bool {
        self.clauses[r][0]
    }

    /// Selected non-pad features of clause `r`.
    pub fn selected(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.clauses[r]
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(j, &on)| on.then_some(j))
    }

    /// Replace clause `r`.
    pub fn set_clause(&mut self, r: usize, w: Vec<bool>) -> Result<()> {
        if w.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                found: w.len(),
            });
        }
        self.clauses[r] = w;
        Ok(())
    }

    pub(crate) fn check_width(&self, width: usize) -> Result<()> {
        if width != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                found: width,
            });
        }
        Ok(())
    }

    /// Output of clause `r` on one feature row, with the polarity's
    /// convention for disabled clauses.
    fn clause_value(&self, r: usize, row: &[u8]) -> bool {
        let w = &self.clauses[r];
        match self.polarity {
            Polarity::Cnf => w.iter().zip(row).any(|(&on, &a)| on && a == 1),
            Polarity::Dnf => !w[0] && w.iter().zip(row).skip(1).all(|(&on, &a)| !on || a == 1),
        }
    }

    fn label_for_row(&self, row: &[u8]) -> bool {
        let r_count = self.clauses.len();
        match self.polarity {
            Polarity::Cnf => (0..r_count).all(|r| self.clause_value(r, row)),
            Polarity::Dnf => (0..r_count).any(|r| self.clause_value(r, row)),
        }
    }

    /// Predicted labels for raw feature rows (pad included).
    pub fn predict_rows<'a, I>(&self, rows: I) -> Result<Vec<u8>>
    where
        I: IntoIterator<Item = &'a [u8]>,
    {
        rows.into_iter()
            .map(|row| {
                self.check_width(row.len())?;
                Ok(u8::from(self.label_for_row(row)))
            })
            .collect()
    }
}

/// OR over `j` of `a_row[j] * w_col[j]`.
pub fn clause_output(a_row: &[u8], w_col: &[bool]) -> Result<bool> {
    if a_row.len() != w_col.len() {
        return Err(Error::DimensionMismatch {
            expected: w_col.len(),
            found: a_row.len(),
        });
    }
    Ok(a_row.iter().zip(w_col).any(|(&a, &w)| w && a == 1))
}

/// Clause outputs and predicted labels for a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    /// `clause_outputs[i][r]`.
    pub clause_outputs: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
}

pub fn predict(data: &BinaryDataset, rule: &RuleMatrix) -> Result<Prediction> {
    rule.check_width(data.width())?;
    let mut clause_outputs = Vec::with_capacity(data.n_samples());
    let mut labels = Vec::with_capacity(data.n_samples());
    for row in data.rows().take(data.n_samples()) {
        let outputs: Vec<u8> = (0..rule.n_clauses())
            .map(|r| u8::from(rule.clause_value(r, row)))
            .collect();
        let label = match rule.polarity {
            Polarity::Cnf => outputs.iter().all(|&v| v == 1),
            Polarity::Dnf => outputs.contains(&1),
        };
        labels.push(u8::from(label));
        clause_outputs.push(outputs);
    }
    Ok(Prediction {
        clause_outputs,
        labels,
    })
}

/// Number of selected non-pad features over enabled clauses.
pub fn sparsity(rule: &RuleMatrix) -> usize {
    (0..rule.n_clauses())
        .filter(|&r| !rule.is_disabled(r))
        .map(|r| rule.selected(r).count())
        .sum()
}

/// The De Morgan dual: polarity flips and every selected non-pad feature is
/// replaced by its negation partner, so the dual predicts the complement.
pub fn demorgan_dual(rule: &RuleMatrix, negation_map: &[Option<usize>]) -> Result<RuleMatrix> {
    if negation_map.len() != rule.width() {
        return Err(Error::DimensionMismatch {
            expected: rule.width(),
            found: negation_map.len(),
        });
    }
    let mut clauses = Vec::with_capacity(rule.n_clauses());
    for w in &rule.clauses {
        let mut dual = vec![false; w.len()];
        dual[0] = w[0];
        for (j, _) in w.iter().enumerate().skip(1).filter(|(_, &on)| on) {
            let partner = negation_map[j].ok_or(Error::MissingNegation(j))?;
            dual[partner] = true;
        }
        clauses.push(dual);
    }
    Ok(RuleMatrix {
        polarity: rule.polarity.flipped(),
        clauses,
        feature_names: rule.feature_names.clone(),
        provenance: rule.provenance.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn data() -> BinaryDataset {
        BinaryDataset::from_binary_features(
            &[vec![1, 0, 1], vec![0, 1, 1], vec![0, 0, 0], vec![1, 1, 0]],
            &[1, 0, 0, 1],
            None,
        )
        .unwrap()
    }

    fn clause(width: usize, on: &[usize]) -> Vec<bool> {
        let mut w = vec![false; width];
        for &j in on {
            w[j] = true;
        }
        w
    }

    #[test]
    fn clause_output_examples() {
        let a = [1, 0, 1, 0];
        assert!(clause_output(&a, &[false, false, true, false]).unwrap());
        assert!(!clause_output(&a, &[false; 4]).unwrap());
        assert!(clause_output(&[1, 0, 0, 0], &[true, false, false, false]).unwrap());
        assert!(clause_output(&a, &[false; 3]).is_err());
    }

    #[test]
    fn constant_rules() {
        let data = data();
        let cnf = RuleMatrix::all_disabled(&data, Polarity::Cnf, 3).unwrap();
        assert_eq!(predict(&data, &cnf).unwrap().labels, vec![1; 4]);
        let dnf = RuleMatrix::all_disabled(&data, Polarity::Dnf, 3).unwrap();
        assert_eq!(predict(&data, &dnf).unwrap().labels, vec![0; 4]);
    }

    #[test]
    fn cnf_absorbing_zero() {
        let data = data();
        let w = data.width();
        // clause 0 disabled, clause 1 = x1
        let rule =
            RuleMatrix::for_dataset(&data, Polarity::Cnf, vec![clause(w, &[0]), clause(w, &[1])])
                .unwrap();
        let p = predict(&data, &rule).unwrap();
        assert_eq!(p.clause_outputs[1], vec![1, 0]);
        assert_eq!(p.labels, vec![1, 0, 0, 1]);
    }

    #[test]
    fn empty_enabled_clause() {
        let data = data();
        let w = data.width();
        let cnf = RuleMatrix::for_dataset(&data, Polarity::Cnf, vec![clause(w, &[])]).unwrap();
        assert_eq!(predict(&data, &cnf).unwrap().labels, vec![0; 4]);
        let dnf = RuleMatrix::for_dataset(&data, Polarity::Dnf, vec![clause(w, &[])]).unwrap();
        assert_eq!(predict(&data, &dnf).unwrap().labels, vec![1; 4]);
    }

    #[test]
    fn sparsity_counts() {
        let data = data();
        let w = data.width();
        let all_off = RuleMatrix::all_disabled(&data, Polarity::Dnf, 5).unwrap();
        assert_eq!(sparsity(&all_off), 0);
        let four =
            RuleMatrix::for_dataset(&data, Polarity::Cnf, vec![clause(w, &[1, 2, 3, 4])]).unwrap();
        assert_eq!(sparsity(&four), 4);
        let mixed = RuleMatrix::for_dataset(
            &data,
            Polarity::Cnf,
            vec![clause(w, &[0, 1, 3, 5]), clause(w, &[2, 6])],
        )
        .unwrap();
        assert_eq!(sparsity(&mixed), 2);
    }

    #[test]
    fn dual_of_small_cnf() {
        let data = data();
        let w = data.width();
        // features: 1=x1 2=¬x1 3=x2 4=¬x2 5=x3 6=¬x3
        let cnf = RuleMatrix::for_dataset(
            &data,
            Polarity::Cnf,
            vec![clause(w, &[1, 3]), clause(w, &[5])],
        )
        .unwrap();
        let dnf = demorgan_dual(&cnf, &data.negation_partners()).unwrap();
        assert_eq!(dnf.polarity(), Polarity::Dnf);
        assert_eq!(dnf.clause(0), clause(w, &[2, 4]).as_slice());
        assert_eq!(dnf.clause(1), clause(w, &[6]).as_slice());
        let a = predict(&data, &cnf).unwrap().labels;
        let b = predict(&data, &dnf).unwrap().labels;
        assert!(a.iter().zip(&b).all(|(x, y)| x + y == 1));
        assert_eq!(demorgan_dual(&dnf, &data.negation_partners()).unwrap(), cnf);
    }

    #[test]
    fn dual_needs_partners() {
        let data = data();
        let w = data.width();
        let cnf = RuleMatrix::for_dataset(&data, Polarity::Cnf, vec![clause(w, &[3])]).unwrap();
        let mut map = data.negation_partners();
        map[3] = None;
        assert!(matches!(
            demorgan_dual(&cnf, &map),
            Err(Error::MissingNegation(3))
        ));
    }

    fn random_case() -> impl Strategy<Value = (BinaryDataset, RuleMatrix)> {
        (1usize..5, 1usize..4, 1usize..8).prop_flat_map(|(d, r, n)| {
            let width = 2 * d + 1;
            (
                prop::collection::vec(prop::collection::vec(0u8..2, d), n),
                prop::collection::vec(0u8..2, n),
                prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.3), width), r),
                any::<bool>(),
            )
                .prop_map(|(x, y, clauses, cnf)| {
                    let data = BinaryDataset::from_binary_features(&x, &y, None).unwrap();
                    let polarity = if cnf { Polarity::Cnf } else { Polarity::Dnf };
                    let rule = RuleMatrix::for_dataset(&data, polarity, clauses).unwrap();
                    (data, rule)
                })
        })
    }

    proptest! {
        #[test]
        fn dual_complements_and_is_involution((data, rule) in random_case()) {
            let map = data.negation_partners();
            let dual = demorgan_dual(&rule, &map).unwrap();
            let a = predict(&data, &rule).unwrap().labels;
            let b = predict(&data, &dual).unwrap().labels;
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x + y == 1));
            prop_assert_eq!(demorgan_dual(&dual, &map).unwrap(), rule);
        }

        #[test]
        fn clause_output_is_monotone(a in prop::collection::vec(0u8..2, 6), w in prop::collection::vec(any::<bool>(), 6), j in 0usize..6) {
            let mut row = a.clone();
            row[0] = 1;
            let before = clause_output(&row, &w).unwrap();
            let mut more = w.clone();
            more[j] = true;
            prop_assert!(!before || clause_output(&row, &more).unwrap());
        }

        #[test]
        fn sparsity_zero_iff_nothing_enabled((_, rule) in random_case()) {
            let empty = (0..rule.n_clauses()).all(|r| rule.is_disabled(r) || rule.selected(r).next().is_none());
            prop_assert_eq!(sparsity(&rule) == 0, empty);
        }
    }
}
