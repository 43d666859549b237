use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::objective::{bcd_subproblem, objective};
use super::{check_init, ClauseSelection, FitTrace, LearnerConfig, StopReason};
use crate::clause::{learn_clause, Clause};
use crate::dataset::BinaryDataset;
use crate::error::Result;
use crate::rule::RuleMatrix;

/// Block coordinate descent over clauses.
///
/// Each iteration re-learns the candidate clauses on their BCD subproblems,
/// scores every substitution with the full objective and accepts the best
/// one if it improves by more than the tolerance.
pub fn bcd_fit(
    data: &BinaryDataset,
    cfg: &LearnerConfig,
    init: &RuleMatrix,
) -> Result<(RuleMatrix, FitTrace)> {
    cfg.validate()?;
    check_init(data, cfg, init)?;
    let penalty = cfg.penalty();
    let mut rule = init.clone();
    let mut current = objective(&rule, data, &penalty)?;
    let mut trace = FitTrace::start(cfg, current);
    trace.reason = StopReason::MaxIterations;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r_count = rule.n_clauses();
    let mut stale = 0;

    for iter in 0..cfg.max_iters {
        let candidates: Vec<usize> = match cfg.selection {
            ClauseSelection::Greedy => (0..r_count).collect(),
            ClauseSelection::Cyclic => vec![iter % r_count],
            ClauseSelection::Random => vec![rng.gen_range(0..r_count)],
        };
        let learned: Vec<(usize, Clause)> = candidates
            .par_iter()
            .map(|&r| {
                let sub = bcd_subproblem(r, &rule, data, penalty)?;
                Ok((r, learn_clause(&sub, &cfg.solver)?))
            })
            .collect::<Result<_>>()?;
        trace.iterations += 1;
        trace.approximate_clauses += learned.iter().filter(|(_, c)| c.approximate).count();

        let mut best: Option<(usize, f64, RuleMatrix)> = None;
        for (r, clause) in learned {
            if clause.w.as_slice() == rule.clause(r) {
                continue;
            }
            let mut trial = rule.clone();
            trial.set_clause(r, clause.w)?;
            let value = objective(&trial, data, &penalty)?;
            if best.as_ref().is_none_or(|(_, b, _)| value < *b) {
                best = Some((r, value, trial));
            }
        }

        match best {
            Some((r, value, trial)) if cfg.improves(value, current) => {
                rule = trial;
                current = value;
                trace.accepted.push(r);
                trace.record(value);
                stale = 0;
            }
            _ => {
                stale += 1;
                // Non-greedy modes get one full pass over the clauses.
                let patience = match cfg.selection {
                    ClauseSelection::Greedy => 1,
                    ClauseSelection::Cyclic => r_count,
                    ClauseSelection::Random => 2 * r_count,
                };
                if stale >= patience {
                    trace.reason = StopReason::NoImprovement;
                    break;
                }
            }
        }
    }
    trace.final_objective = current;
    Ok((rule, trace))
}
