use rayon::prelude::*;

use super::objective::{assign_ideal, objective, TieBreak};
use super::{check_init, FitTrace, LearnerConfig, StopReason};
use crate::clause::{learn_clause, Clause, ClauseSubproblem};
use crate::dataset::BinaryDataset;
use crate::error::Result;
use crate::rule::RuleMatrix;

/// Alternating minimization between ideal clause outputs and clauses.
///
/// The v-step assigns ideal outputs with the clustering tie-break; the
/// w-step re-learns every clause independently on its non-don't-care
/// samples. Iterates can get worse because the w-step rounds, so the best
/// iterate seen is returned.
pub fn am_fit(
    data: &BinaryDataset,
    cfg: &LearnerConfig,
    init: &RuleMatrix,
) -> Result<(RuleMatrix, FitTrace)> {
    cfg.validate()?;
    check_init(data, cfg, init)?;
    let penalty = cfg.penalty();
    let mut rule = init.clone();
    let mut best = rule.clone();
    let mut best_value = objective(&rule, data, &penalty)?;
    let mut trace = FitTrace::start(cfg, best_value);
    trace.reason = StopReason::MaxIterations;
    let mut stale = 0;

    for _ in 0..cfg.max_iters {
        let ideal = assign_ideal(&rule, data, TieBreak::Clustering)?;
        let clauses: Vec<Clause> = (0..rule.n_clauses())
            .into_par_iter()
            .map(|r| {
                let samples = ideal.clause_samples(r);
                let sub = ClauseSubproblem::from_dataset(data, &samples, penalty)?;
                if sub.n_samples() == 0 {
                    // Nothing constrains this clause; the empty clause is free.
                    let w = vec![false; data.width()];
                    return Ok(Clause {
                        objective_value: sub.objective(&w),
                        w,
                        lp_value: Some(0.0),
                        approximate: false,
                    });
                }
                learn_clause(&sub, &cfg.solver)
            })
            .collect::<Result<_>>()?;
        trace.iterations += 1;
        trace.approximate_clauses += clauses.iter().filter(|c| c.approximate).count();

        let mut next = rule.clone();
        for (r, clause) in clauses.into_iter().enumerate() {
            next.set_clause(r, clause.w)?;
        }
        let value = objective(&next, data, &penalty)?;
        trace.record(value);
        if cfg.improves(value, best_value) {
            best = next.clone();
            best_value = value;
            stale = 0;
        } else {
            stale += 1;
        }
        if next == rule {
            trace.reason = StopReason::FixedPoint;
            break;
        }
        rule = next;
        if stale >= cfg.am_patience {
            trace.reason = StopReason::Stalled;
            break;
        }
    }
    trace.final_objective = best_value;
    Ok((best, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause::{learn_clause, ClauseSubproblem};
    use crate::rule::{predict, Polarity};

    fn cfg(r: usize) -> LearnerConfig {
        LearnerConfig {
            clauses: r,
            theta: 0.1,
            polarity: Polarity::Cnf,
            algorithm: super::super::Algorithm::Am,
            ..LearnerConfig::default()
        }
    }

    #[test]
    fn all_positive_data_disables_every_clause() {
        let x = vec![vec![0, 1], vec![1, 1], vec![1, 0]];
        let data = BinaryDataset::from_binary_features(&x, &[1, 1, 1], None).unwrap();
        let init = RuleMatrix::for_dataset(&data, Polarity::Cnf, vec![vec![false; 5]; 3]).unwrap();
        let (rule, trace) = am_fit(&data, &cfg(3), &init).unwrap();
        assert!((0..3).all(|r| rule.is_disabled(r) && rule.selected(r).count() == 0));
        assert_eq!(trace.final_objective, 0.0);
    }

    #[test]
    fn single_clause_converges_to_clause_learner() {
        let x: Vec<Vec<u8>> = (0..8u8)
            .map(|k| vec![k & 1, (k >> 1) & 1, (k >> 2) & 1])
            .collect();
        let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] == 1 || r[2] == 1)).collect();
        let data = BinaryDataset::from_binary_features(&x, &y, None).unwrap();
        let init = RuleMatrix::all_disabled(&data, Polarity::Cnf, 1).unwrap();
        let (rule, _) = am_fit(&data, &cfg(1), &init).unwrap();
        let samples: Vec<(usize, u8)> = y.iter().copied().enumerate().collect();
        let sub = ClauseSubproblem::from_dataset(&data, &samples, cfg(1).penalty()).unwrap();
        let direct = learn_clause(&sub, &cfg(1).solver).unwrap();
        assert_eq!(rule.clause(0), direct.w.as_slice());
        assert_eq!(predict(&data, &rule).unwrap().labels, y);
    }

    #[test]
    fn best_objective_never_increases() {
        let x: Vec<Vec<u8>> = (0..32u8)
            .map(|k| (0..5).map(|b| (k >> b) & 1).collect())
            .collect();
        let y: Vec<u8> = x
            .iter()
            .map(|r| u8::from((r[0] ^ r[1]) == 1 || r[4] == 1))
            .collect();
        let data = BinaryDataset::from_binary_features(&x, &y, None).unwrap();
        let init = RuleMatrix::all_disabled(&data, Polarity::Cnf, 3).unwrap();
        let (rule, trace) = am_fit(&data, &cfg(3), &init).unwrap();
        assert!(trace.best_objectives.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(
            objective(&rule, &data, &cfg(3).penalty()).unwrap(),
            trace.final_objective
        );
        assert_eq!(
            trace.final_objective,
            *trace.best_objectives.last().unwrap()
        );
    }
}
