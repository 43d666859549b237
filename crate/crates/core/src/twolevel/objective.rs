//! The regularized Hamming objective and the optimal ideal clause outputs.

use crate::clause::{ClauseSubproblem, ObjectiveParts, Penalty};
use crate::dataset::BinaryDataset;
use crate::error::{Error, Result};
use crate::rule::{demorgan_dual, Polarity, RuleMatrix};

/// `sums[i][r] = Σ_j a[i][j] w[j][r]`, pad included.
pub(crate) fn clause_sums(rule: &RuleMatrix, data: &BinaryDataset) -> Vec<Vec<u32>> {
    let selections: Vec<Vec<usize>> = rule
        .clauses()
        .iter()
        .map(|w| (0..w.len()).filter(|&j| w[j]).collect())
        .collect();
    data.rows()
        .take(data.n_samples())
        .map(|row| {
            selections
                .iter()
                .map(|on| on.iter().filter(|&&j| row[j] == 1).count() as u32)
                .collect()
        })
        .collect()
}

fn require_cnf(rule: &RuleMatrix) -> Result<()> {
    if rule.polarity() != Polarity::Cnf {
        return Err(Error::InvalidArgument(
            "expected a CNF rule; take the De Morgan dual first".into(),
        ));
    }
    Ok(())
}

fn cnf_parts(rule: &RuleMatrix, data: &BinaryDataset, labels: &[u8]) -> ObjectiveParts {
    let sums = clause_sums(rule, data);
    let mut loss = 0u64;
    for (s, &y) in sums.iter().zip(labels) {
        loss += if y == 1 {
            s.iter().filter(|&&v| v == 0).count() as u64
        } else {
            u64::from(*s.iter().min().expect("at least one clause"))
        };
    }
    let selected = (0..rule.n_clauses())
        .map(|r| rule.selected(r).count() as u64)
        .sum();
    let pads = (0..rule.n_clauses())
        .filter(|&r| rule.is_disabled(r))
        .count() as u64;
    ObjectiveParts {
        loss,
        selected,
        pads,
    }
}

/// Integer components of the objective with ideal outputs set optimally.
///
/// A DNF rule is scored as its CNF dual against complemented labels, which
/// is the problem it was trained on.
pub fn objective_parts(rule: &RuleMatrix, data: &BinaryDataset) -> Result<ObjectiveParts> {
    rule.check_width(data.width())?;
    match rule.polarity() {
        Polarity::Cnf => Ok(cnf_parts(rule, data, data.labels())),
        Polarity::Dnf => {
            let dual = demorgan_dual(rule, &data.negation_partners())?;
            let flipped: Vec<u8> = data.labels().iter().map(|&y| 1 - y).collect();
            Ok(cnf_parts(&dual, data, &flipped))
        }
    }
}

/// Hamming loss of `rule` on `data` plus the sparsity penalty.
pub fn objective(rule: &RuleMatrix, data: &BinaryDataset, penalty: &Penalty) -> Result<f64> {
    Ok(penalty.value(&objective_parts(rule, data)?))
}

/// One ideal clause output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ideal {
    Zero,
    One,
    DontCare,
}

/// Tie-breaking rule among clauses with the same minimal sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Smallest clause index.
    Plain,
    /// Nearest cluster center in ℓ1, then smallest index.
    Clustering,
}

/// The ternary `v` matrix: rows are samples, columns clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealAssignment {
    v: Vec<Vec<Ideal>>,
}

impl IdealAssignment {
    pub fn rows(&self) -> &[Vec<Ideal>] {
        &self.v
    }

    pub fn get(&self, i: usize, r: usize) -> Ideal {
        self.v[i][r]
    }

    /// The clause assigned to kill negative sample `i`.
    pub fn zero_clause(&self, i: usize) -> Option<usize> {
        self.v[i].iter().position(|&x| x == Ideal::Zero)
    }

    /// Samples that clause `r` is trained on, with their targets.
    pub fn clause_samples(&self, r: usize) -> Vec<(usize, u8)> {
        self.v
            .iter()
            .enumerate()
            .filter_map(|(i, row)| match row[r] {
                Ideal::One => Some((i, 1)),
                Ideal::Zero => Some((i, 0)),
                Ideal::DontCare => None,
            })
            .collect()
    }
}

/// Clauses achieving the minimal sum for each negative sample (empty for
/// positives).
pub fn minimizing_clauses(rule: &RuleMatrix, data: &BinaryDataset) -> Result<Vec<Vec<usize>>> {
    require_cnf(rule)?;
    rule.check_width(data.width())?;
    let sums = clause_sums(rule, data);
    Ok(sums
        .iter()
        .zip(data.labels())
        .map(|(s, &y)| {
            if y == 1 {
                return Vec::new();
            }
            let min = *s.iter().min().expect("at least one clause");
            (0..s.len()).filter(|&r| s[r] == min).collect()
        })
        .collect())
}

/// Ideal outputs minimizing the objective for a fixed CNF rule: positives
/// get all ones; each negative gets a single zero at a clause with minimal
/// sum and don't-care elsewhere.
pub fn assign_ideal(
    rule: &RuleMatrix,
    data: &BinaryDataset,
    tie_break: TieBreak,
) -> Result<IdealAssignment> {
    let minimal = minimizing_clauses(rule, data)?;
    let r_count = rule.n_clauses();
    let width = data.width();

    let centers: Option<Vec<Vec<f64>>> = (tie_break == TieBreak::Clustering).then(|| {
        let mut sum = vec![vec![0.0; width]; r_count];
        let mut count = vec![0usize; r_count];
        for (i, set) in minimal.iter().enumerate() {
            for &r in set {
                count[r] += 1;
                for (acc, &a) in sum[r].iter_mut().zip(data.row(i)) {
                    *acc += f64::from(a);
                }
            }
        }
        sum.into_iter()
            .zip(count)
            .map(|(s, c)| {
                let c = c.max(1) as f64;
                s.into_iter().map(|v| v / c).collect()
            })
            .collect()
    });

    let v = minimal
        .iter()
        .enumerate()
        .map(|(i, set)| {
            if data.labels()[i] == 1 {
                return vec![Ideal::One; r_count];
            }
            let chosen = match (&centers, set.len()) {
                (Some(centers), n) if n > 1 => {
                    let row = data.row(i);
                    let dist = |r: usize| -> f64 {
                        centers[r]
                            .iter()
                            .zip(row)
                            .map(|(c, &a)| (c - f64::from(a)).abs())
                            .sum()
                    };
                    let mut best = set[0];
                    let mut best_dist = dist(best);
                    for &r in &set[1..] {
                        let d = dist(r);
                        if d < best_dist - 1e-12 {
                            best = r;
                            best_dist = d;
                        }
                    }
                    best
                }
                _ => set[0],
            };
            let mut out = vec![Ideal::DontCare; r_count];
            out[chosen] = Ideal::Zero;
            out
        })
        .collect();
    Ok(IdealAssignment { v })
}

/// Subproblem for re-learning clause `r0` with the other clauses fixed:
/// every positive (target 1) plus the negatives that no other clause
/// already outputs 0 on (target 0).
pub fn bcd_subproblem(
    r0: usize,
    rule: &RuleMatrix,
    data: &BinaryDataset,
    penalty: Penalty,
) -> Result<ClauseSubproblem> {
    require_cnf(rule)?;
    rule.check_width(data.width())?;
    if r0 >= rule.n_clauses() {
        return Err(Error::InvalidArgument(format!(
            "clause index {r0} out of range for {} clauses",
            rule.n_clauses()
        )));
    }
    let sums = clause_sums(rule, data);
    let samples: Vec<(usize, u8)> = sums
        .iter()
        .zip(data.labels())
        .enumerate()
        .filter_map(|(i, (s, &y))| {
            if y == 1 {
                return Some((i, 1));
            }
            let covered_elsewhere = (0..s.len()).any(|r| r != r0 && s[r] == 0);
            (!covered_elsewhere).then_some((i, 0))
        })
        .collect();
    ClauseSubproblem::from_dataset(data, &samples, penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureOrigin;

    fn clause(width: usize, on: &[usize]) -> Vec<bool> {
        let mut w = vec![false; width];
        for &j in on {
            w[j] = true;
        }
        w
    }

    #[test]
    fn all_zero_rule_with_one_positive() {
        let data = BinaryDataset::from_binary_features(&[vec![1]], &[1], None).unwrap();
        let rule = RuleMatrix::for_dataset(&data, Polarity::Cnf, vec![vec![false; 3]; 2]).unwrap();
        // each of the two clauses misses the positive
        assert_eq!(objective(&rule, &data, &Penalty::new(1.0)).unwrap(), 2.0);
    }

    #[test]
    fn all_disabled_costs_one_per_negative() {
        let data = BinaryDataset::from_binary_features(
            &[vec![1, 0], vec![0, 0], vec![1, 1], vec![0, 1]],
            &[1, 0, 0, 1],
            None,
        )
        .unwrap();
        let rule = RuleMatrix::all_disabled(&data, Polarity::Cnf, 3).unwrap();
        let parts = objective_parts(&rule, &data).unwrap();
        assert_eq!(parts.loss, 2);
        assert_eq!(objective(&rule, &data, &Penalty::new(0.7)).unwrap(), 2.0);
    }

    #[test]
    fn negative_takes_minimal_clause() {
        // One negative with clause sums (2, 0).
        let data = BinaryDataset::from_binary_features(&[vec![1, 1]], &[0], None).unwrap();
        let w = data.width();
        let rule = RuleMatrix::for_dataset(
            &data,
            Polarity::Cnf,
            vec![clause(w, &[1, 3]), clause(w, &[2])],
        )
        .unwrap();
        let parts = objective_parts(&rule, &data).unwrap();
        assert_eq!(parts.loss, 0);
        let v = assign_ideal(&rule, &data, TieBreak::Plain).unwrap();
        assert_eq!(v.rows()[0], vec![Ideal::DontCare, Ideal::Zero]);
    }

    #[test]
    fn positives_get_all_ones() {
        let data = BinaryDataset::from_binary_features(&[vec![0], vec![1]], &[1, 1], None).unwrap();
        let rule = RuleMatrix::all_disabled(&data, Polarity::Cnf, 3).unwrap();
        let v = assign_ideal(&rule, &data, TieBreak::Clustering).unwrap();
        assert!(v.rows().iter().all(|row| row == &vec![Ideal::One; 3]));
    }

    #[test]
    fn unique_argmin() {
        // Sums (3, 1, 2) from a sample with three true features.
        let provenance = vec![
            FeatureOrigin::Pad,
            FeatureOrigin::Flag {
                column: "a".into(),
                negated: false,
            },
            FeatureOrigin::Flag {
                column: "b".into(),
                negated: false,
            },
            FeatureOrigin::Flag {
                column: "c".into(),
                negated: false,
            },
        ];
        let data = BinaryDataset::from_parts(vec![vec![1, 1, 1, 1]], vec![0], provenance).unwrap();
        let rule = RuleMatrix::for_dataset(
            &data,
            Polarity::Cnf,
            vec![clause(4, &[1, 2, 3]), clause(4, &[1]), clause(4, &[2, 3])],
        )
        .unwrap();
        let v = assign_ideal(&rule, &data, TieBreak::Plain).unwrap();
        assert_eq!(
            v.rows()[0],
            vec![Ideal::DontCare, Ideal::Zero, Ideal::DontCare]
        );
    }

    #[test]
    fn clustering_prefers_nearer_center() {
        // Clause 0 selects f1, clause 1 selects f2.
        //   t1     = (1,1,1,0): sums (1,1), tied
        //   t2     = (0,0,0,1): sums (0,0), tied
        //   anchor = (0,1,1,0): sums (0,1), clause 0 only
        // Centers over the pad-free features:
        //   c0 = mean(t1, t2, anchor) = (1/3, 2/3, 2/3, 1/3)
        //   c1 = mean(t1, t2)         = (1/2, 1/2, 1/2, 1/2)
        // ℓ1 distances: t1→c0 = 5/3 < t1→c1 = 2, t2→c0 = 7/3 > t2→c1 = 2.
        let provenance: Vec<FeatureOrigin> = std::iter::once(FeatureOrigin::Pad)
            .chain((1..=4).map(|j| FeatureOrigin::Flag {
                column: format!("f{j}"),
                negated: false,
            }))
            .collect();
        let rows = vec![
            vec![1, 1, 1, 1, 0],
            vec![1, 0, 0, 0, 1],
            vec![1, 0, 1, 1, 0],
        ];
        let data = BinaryDataset::from_parts(rows, vec![0, 0, 0], provenance).unwrap();
        let rule =
            RuleMatrix::for_dataset(&data, Polarity::Cnf, vec![clause(5, &[1]), clause(5, &[2])])
                .unwrap();
        assert_eq!(
            minimizing_clauses(&rule, &data).unwrap(),
            vec![vec![0, 1], vec![0, 1], vec![0]]
        );
        let plain = assign_ideal(&rule, &data, TieBreak::Plain).unwrap();
        let clustered = assign_ideal(&rule, &data, TieBreak::Clustering).unwrap();
        let zeros = |v: &IdealAssignment| {
            (0..3)
                .map(|i| v.zero_clause(i).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(zeros(&plain), vec![0, 0, 0]);
        assert_eq!(zeros(&clustered), vec![0, 1, 0]);
    }

    #[test]
    fn bcd_subproblem_membership() {
        // x1 only; clause 0 = {x1}, clause 1 = {¬x1}.
        let data = BinaryDataset::from_binary_features(
            &[vec![1], vec![0], vec![1], vec![0]],
            &[1, 0, 0, 1],
            None,
        )
        .unwrap();
        let w = data.width();
        let rule =
            RuleMatrix::for_dataset(&data, Polarity::Cnf, vec![clause(w, &[1]), clause(w, &[2])])
                .unwrap();
        let sub = bcd_subproblem(0, &rule, &data, Penalty::new(0.1)).unwrap();
        // Sample 1 (x1=0) is already killed by clause 0 itself, not by
        // clause 1, so it stays; sample 2 (x1=1) is killed by clause 1.
        assert_eq!(sub.target(), &[1, 0, 1]);
        assert_eq!(sub.row(1), data.row(1));
        let sub = bcd_subproblem(1, &rule, &data, Penalty::new(0.1)).unwrap();
        assert_eq!(sub.target(), &[1, 0, 1]);
        assert_eq!(sub.row(1), data.row(2));
        assert!(bcd_subproblem(2, &rule, &data, Penalty::new(0.1)).is_err());
    }
}
