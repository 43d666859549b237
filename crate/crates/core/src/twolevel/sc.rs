use super::LearnerConfig;
use crate::clause::{learn_clause, ClauseSubproblem};
use crate::dataset::BinaryDataset;
use crate::error::Result;
use crate::rule::{clause_output, Polarity, RuleMatrix};

/// Set covering in CNF form: each round learns an OR-clause that must hold
/// on every positive while rejecting the negatives no earlier clause has
/// rejected. Stops when no negatives remain, when a clause rejects nothing
/// new, or after R clauses; unused slots stay disabled.
///
/// Through De Morgan duality this is the usual DNF covering loop (each
/// AND-clause covers some of the remaining positives).
pub fn sc_fit(data: &BinaryDataset, cfg: &LearnerConfig) -> Result<RuleMatrix> {
    cfg.validate()?;
    let mut rule = RuleMatrix::all_disabled(data, Polarity::Cnf, cfg.clauses)?;
    let positives: Vec<usize> = (0..data.n_samples())
        .filter(|&i| data.labels()[i] == 1)
        .collect();
    let mut remaining: Vec<usize> = (0..data.n_samples())
        .filter(|&i| data.labels()[i] == 0)
        .collect();

    for r in 0..cfg.clauses {
        if remaining.is_empty() {
            break;
        }
        let samples: Vec<(usize, u8)> = positives
            .iter()
            .map(|&i| (i, 1))
            .chain(remaining.iter().map(|&i| (i, 0)))
            .collect();
        let sub = ClauseSubproblem::from_dataset(data, &samples, cfg.penalty())?;
        let clause = learn_clause(&sub, &cfg.solver)?;
        if clause.w[0] {
            break;
        }
        let mut survivors = Vec::with_capacity(remaining.len());
        for &i in &remaining {
            if clause_output(data.row(i), &clause.w)? {
                survivors.push(i);
            }
        }
        if survivors.len() == remaining.len() {
            break;
        }
        rule.set_clause(r, clause.w)?;
        remaining = survivors;
    }
    Ok(rule)
}
