//! Single OR-clause learning: LP relaxation of the one-clause Hamming
//! objective followed by a threshold-sweep rounding.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::BinaryDataset;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, SolverOptions};

/// Sparsity weights: `theta` per selected non-pad feature, `pad_cost` per
/// selected pad (an infinite `pad_cost` forbids disabling clauses).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub theta: f64,
    pub pad_cost: f64,
}

impl Penalty {
    pub fn new(theta: f64) -> Self {
        Penalty {
            theta,
            pad_cost: 0.0,
        }
    }

    pub fn pad_allowed(&self) -> bool {
        self.pad_cost.is_finite()
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "theta must be finite and non-negative, got {}",
                self.theta
            )));
        }
        if !(self.pad_cost >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pad cost must be non-negative, got {}",
                self.pad_cost
            )));
        }
        Ok(())
    }

    /// Objective value from its integer parts.
    pub fn value(&self, parts: &ObjectiveParts) -> f64 {
        let pad = if parts.pads == 0 {
            0.0
        } else {
            self.pad_cost * parts.pads as f64
        };
        parts.loss as f64 + self.theta * parts.selected as f64 + pad
    }
}

/// An objective value split into its exact integer components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObjectiveParts {
    /// Hamming loss.
    pub loss: u64,
    /// Selected non-pad features (all clauses, disabled or not).
    pub selected: u64,
    /// Selected pad entries.
    pub pads: u64,
}

impl std::ops::Add for ObjectiveParts {
    type Output = ObjectiveParts;

    fn add(self, other: ObjectiveParts) -> ObjectiveParts {
        ObjectiveParts {
            loss: self.loss + other.loss,
            selected: self.selected + other.selected,
            pads: self.pads + other.pads,
        }
    }
}

/// Samples for one clause with 0/1 targets; don't-care samples are already
/// removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ClauseSubproblem {
    width: usize,
    a: Vec<u8>,
    target: Vec<u8>,
    penalty: Penalty,
}

impl ClauseSubproblem {
    pub fn new(rows: Vec<Vec<u8>>, target: Vec<u8>, penalty: Penalty) -> Result<Self> {
        penalty.validate()?;
        if rows.len() != target.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: target.len(),
            });
        }
        let width = rows.first().map_or(0, Vec::len);
        let mut a = Vec::with_capacity(rows.len() * width);
        for row in rows {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            a.extend(row);
        }
        if target.iter().any(|&t| t > 1) {
            return Err(Error::InvalidArgument("targets must be 0 or 1".into()));
        }
        Ok(ClauseSubproblem {
            width,
            a,
            target,
            penalty,
        })
    }

    /// Subproblem over `samples` of `data`, each paired with its target.
    pub fn from_dataset(
        data: &BinaryDataset,
        samples: &[(usize, u8)],
        penalty: Penalty,
    ) -> Result<Self> {
        penalty.validate()?;
        let width = data.width();
        let mut a = Vec::with_capacity(samples.len() * width);
        let mut target = Vec::with_capacity(samples.len());
        for &(i, t) in samples {
            if i >= data.n_samples() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: data.n_samples(),
                });
            }
            a.extend_from_slice(data.row(i));
            target.push(t);
        }
        Ok(ClauseSubproblem {
            width,
            a,
            target,
            penalty,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.target.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.a[i * self.width..(i + 1) * self.width]
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    /// Integer parts of the one-clause objective at a binary `w`.
    pub fn objective_parts(&self, w: &[bool]) -> ObjectiveParts {
        let on: Vec<usize> = (0..w.len()).filter(|&j| w[j]).collect();
        let mut loss = 0u64;
        for i in 0..self.n_samples() {
            let row = self.row(i);
            let hits = on.iter().filter(|&&j| row[j] == 1).count() as u64;
            loss += if self.target[i] == 1 {
                u64::from(hits == 0)
            } else {
                hits
            };
        }
        ObjectiveParts {
            loss,
            selected: on.iter().filter(|&&j| j > 0).count() as u64,
            pads: u64::from(w.first().copied().unwrap_or(false)),
        }
    }

    pub fn objective(&self, w: &[bool]) -> f64 {
        self.penalty.value(&self.objective_parts(w))
    }

    /// Per-column linear cost: negatives hit plus the sparsity weight.
    fn column_costs(&self) -> Vec<f64> {
        let mut cost = vec![0.0; self.width];
        for i in 0..self.n_samples() {
            if self.target[i] == 0 {
                for (c, &a) in cost.iter_mut().zip(self.row(i)) {
                    *c += f64::from(a);
                }
            }
        }
        for (j, c) in cost.iter_mut().enumerate() {
            *c += if j == 0 {
                self.penalty.pad_cost
            } else {
                self.penalty.theta
            };
        }
        cost
    }

    /// Continuous objective at a fractional `w`.
    pub fn relaxed_objective(&self, w: &[f64]) -> f64 {
        let cost = self.column_costs();
        let mut value: f64 = cost
            .iter()
            .zip(w)
            .filter(|(_, &v)| v != 0.0)
            .map(|(c, v)| c * v)
            .sum();
        for i in 0..self.n_samples() {
            if self.target[i] == 1 {
                let cover: f64 = self
                    .row(i)
                    .iter()
                    .zip(w)
                    .map(|(&a, v)| f64::from(a) * v)
                    .sum();
                value += (1.0 - cover).max(0.0);
            }
        }
        value
    }
}

/// The relaxation over `(w_0..w_d, ξ_i for target-1 samples)`: minimize
/// `Σ ξ + Σ_j cost_j w_j` subject to `ξ_i + Σ_j a_ij w_j ≥ 1`, all variables
/// in `[0, 1]` (`w_0` fixed at 0 when the pad is forbidden).
pub fn build_clause_lp(sub: &ClauseSubproblem) -> Result<LinearProgram> {
    if sub.n_samples() == 0 {
        return Err(Error::InvalidArgument("empty clause subproblem".into()));
    }
    let width = sub.width;
    let positives: Vec<usize> = (0..sub.n_samples())
        .filter(|&i| sub.target[i] == 1)
        .collect();
    let n_vars = width + positives.len();
    let mut cost = sub.column_costs();
    let mut bounds = vec![(0.0, 1.0); n_vars];
    if !sub.penalty.pad_allowed() {
        cost[0] = 0.0;
        bounds[0] = (0.0, 0.0);
    }
    cost.extend(std::iter::repeat_n(1.0, positives.len()));
    let mut lp = LinearProgram::new(cost, bounds);
    for (k, &i) in positives.iter().enumerate() {
        let mut g = vec![0.0; n_vars];
        for (gj, &a) in g.iter_mut().zip(sub.row(i)) {
            *gj = f64::from(a);
        }
        g[width + k] = 1.0;
        lp.add_constraint(g, Relation::Ge, 1.0);
    }
    Ok(lp)
}

/// Fractional clause and relaxation value.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    pub w: Vec<f64>,
    /// None when the solver stopped early.
    pub value: Option<f64>,
}

/// Solve the relaxation through its dual, which has one row per feature
/// instead of one per positive sample: maximize `Σ u_k − Σ t_j` subject to
/// `Σ_k a_kj u_k − t_j ≤ cost_j`, `0 ≤ u_k ≤ count_k`, with identical
/// positive rows merged into one `u_k` of multiplicity `count_k`. The clause
/// weights are the row multipliers. Falls back to the primal program if the
/// recovered point does not reproduce the dual value.
pub fn solve_relaxation(sub: &ClauseSubproblem, opts: &SolverOptions) -> Result<Relaxation> {
    if sub.n_samples() == 0 {
        return Err(Error::InvalidArgument("empty clause subproblem".into()));
    }
    let width = sub.width;
    let mut groups: HashMap<&[u8], usize> = HashMap::new();
    let mut order: Vec<&[u8]> = Vec::new();
    for i in 0..sub.n_samples() {
        if sub.target[i] == 1 {
            let row = sub.row(i);
            let count = groups.entry(row).or_insert_with(|| {
                order.push(row);
                0
            });
            *count += 1;
        }
    }
    let cost = sub.column_costs();
    let columns: Vec<usize> = (0..width)
        .filter(|&j| j > 0 || sub.penalty.pad_allowed())
        .collect();
    if order.is_empty() {
        // Nothing to cover: the empty clause is optimal.
        return Ok(Relaxation {
            w: vec![0.0; width],
            value: Some(0.0),
        });
    }
    let total: f64 = order.iter().map(|r| groups[r] as f64).sum();
    let n_u = order.len();
    let n_vars = n_u + columns.len();
    let mut objective = vec![-1.0; n_u];
    objective.extend(std::iter::repeat_n(1.0, columns.len()));
    let mut bounds: Vec<(f64, f64)> = order.iter().map(|r| (0.0, groups[r] as f64)).collect();
    bounds.extend(std::iter::repeat_n((0.0, total), columns.len()));
    let mut lp = LinearProgram::new(objective, bounds);
    for (c, &j) in columns.iter().enumerate() {
        let mut g = vec![0.0; n_vars];
        for (k, row) in order.iter().enumerate() {
            g[k] = f64::from(row[j]);
        }
        g[n_u + c] = -1.0;
        lp.add_constraint(g, Relation::Le, cost[j]);
    }
    let sol = solve_lp(&lp, opts)?;
    let mut w = vec![0.0; width];
    for (c, &j) in columns.iter().enumerate() {
        w[j] = (-sol.duals[c]).clamp(0.0, 1.0);
    }
    if sol.status != LpStatus::Optimal {
        return Ok(Relaxation { w, value: None });
    }
    let value = -sol.value;
    let primal = sub.relaxed_objective(&w);
    if (primal - value).abs() <= 1e-6 * (1.0 + value.abs()) {
        return Ok(Relaxation {
            w,
            value: Some(value),
        });
    }
    log::debug!("dual recovery gap {primal} vs {value}; solving the primal relaxation");
    solve_primal_relaxation(sub, opts)
}

/// Solve `build_clause_lp` directly.
pub fn solve_primal_relaxation(sub: &ClauseSubproblem, opts: &SolverOptions) -> Result<Relaxation> {
    let lp = build_clause_lp(sub)?;
    let sol = solve_lp(&lp, opts)?;
    let w = sol.x[..sub.width]
        .iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    let value = (sol.status == LpStatus::Optimal).then_some(sol.value);
    Ok(Relaxation { w, value })
}

/// A learned OR-clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub w: Vec<bool>,
    /// Exact one-clause objective at `w`.
    pub objective_value: f64,
    /// Relaxation optimum, when the solver finished.
    pub lp_value: Option<f64>,
    /// Set when the LP hit its iteration cap and `w` rounds a non-optimal
    /// point.
    pub approximate: bool,
}

const SNAP: f64 = 1e-9;

/// Threshold-sweep rounding: every distinct value `t` of the fractional
/// solution (and 1) yields the candidate `[w ≥ t]`; the all-zero and
/// pad-only clauses are always candidates. Returns the candidate with the
/// lowest exact objective, preferring fewer selections, then larger `t`.
pub fn round_lp(fractional_w: &[f64], sub: &ClauseSubproblem) -> Result<Clause> {
    let candidates = sweep_candidates(fractional_w, sub)?;
    Ok(pick_best(candidates, sub))
}

fn sweep_candidates(fractional_w: &[f64], sub: &ClauseSubproblem) -> Result<Vec<(f64, Vec<bool>)>> {
    if fractional_w.len() != sub.width {
        return Err(Error::DimensionMismatch {
            expected: sub.width,
            found: fractional_w.len(),
        });
    }
    let pad_allowed = sub.penalty.pad_allowed();
    let snapped: Vec<f64> = fractional_w
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            if j == 0 && !pad_allowed {
                return 0.0;
            }
            let r = v.round();
            if (v - r).abs() <= SNAP {
                r
            } else {
                v.clamp(0.0, 1.0)
            }
        })
        .collect();

    let mut levels: Vec<f64> = snapped.clone();
    levels.push(1.0);
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup_by(|a, b| (*a - *b).abs() <= SNAP);

    let mut candidates: Vec<(f64, Vec<bool>)> = vec![(f64::INFINITY, vec![false; sub.width])];
    for &t in &levels {
        let mut w: Vec<bool> = snapped.iter().map(|&v| v >= t - SNAP).collect();
        if !pad_allowed {
            w[0] = false;
        }
        candidates.push((t, w));
    }
    if pad_allowed && sub.width > 0 {
        let mut pad_only = vec![false; sub.width];
        pad_only[0] = true;
        candidates.push((f64::NEG_INFINITY, pad_only));
    }
    Ok(candidates)
}

fn pick_best(candidates: Vec<(f64, Vec<bool>)>, sub: &ClauseSubproblem) -> Clause {
    let mut best: Option<(f64, usize, f64, Vec<bool>)> = None;
    for (t, w) in candidates {
        let value = sub.objective(&w);
        let count = w.iter().filter(|&&b| b).count();
        let better = match &best {
            None => true,
            Some((bv, bc, bt, _)) => {
                let tie = (value - bv).abs() <= 1e-9 * (1.0 + bv.abs());
                if tie {
                    count < *bc || (count == *bc && t > *bt)
                } else {
                    value < *bv
                }
            }
        };
        if better {
            best = Some((value, count, t, w));
        }
    }
    let (objective_value, _, _, w) = best.expect("candidate set is never empty");
    Clause {
        w,
        objective_value,
        lp_value: None,
        approximate: false,
    }
}

/// Best-improvement single-bit local search on a binary clause.
///
/// Half-integral LP vertices are common on symmetric data and the threshold
/// sweep can only keep or drop all of the 0.5 entries together; flipping
/// single features afterwards recovers the cheaper integer neighbours.
pub fn polish(w: &[bool], sub: &ClauseSubproblem) -> Result<Vec<bool>> {
    if w.len() != sub.width {
        return Err(Error::DimensionMismatch {
            expected: sub.width,
            found: w.len(),
        });
    }
    let mut w = w.to_vec();
    if !sub.penalty.pad_allowed() {
        w[0] = false;
    }
    let m = sub.n_samples();
    let mut hits: Vec<u64> = (0..m)
        .map(|i| {
            let row = sub.row(i);
            (0..sub.width).filter(|&j| w[j] && row[j] == 1).count() as u64
        })
        .collect();
    let mut parts = sub.objective_parts(&w);
    let mut value = sub.penalty.value(&parts);

    loop {
        let mut best: Option<(usize, ObjectiveParts, f64)> = None;
        for j in 0..sub.width {
            if j == 0 && !sub.penalty.pad_allowed() {
                continue;
            }
            let adding = !w[j];
            let mut loss = parts.loss as i64;
            for i in 0..m {
                if sub.row(i)[j] == 0 {
                    continue;
                }
                loss += match (sub.target[i], adding) {
                    (0, true) => 1,
                    (0, false) => -1,
                    (_, true) => -i64::from(hits[i] == 0),
                    (_, false) => i64::from(hits[i] == 1),
                };
            }
            let mut trial = ObjectiveParts {
                loss: loss as u64,
                ..parts
            };
            match (j, adding) {
                (0, true) => trial.pads += 1,
                (0, false) => trial.pads -= 1,
                (_, true) => trial.selected += 1,
                (_, false) => trial.selected -= 1,
            }
            let v = sub.penalty.value(&trial);
            let threshold = best.as_ref().map_or(value, |b| b.2);
            if v < threshold - 1e-12 * (1.0 + threshold.abs()) {
                best = Some((j, trial, v));
            }
        }
        let Some((j, trial, v)) = best else { break };
        let adding = !w[j];
        w[j] = adding;
        for (i, h) in hits.iter_mut().enumerate() {
            if sub.row(i)[j] == 1 {
                if adding {
                    *h += 1;
                } else {
                    *h -= 1;
                }
            }
        }
        parts = trial;
        value = v;
    }
    Ok(w)
}

/// Learn one clause: relax, solve, polish every sweep candidate and keep
/// the best.
pub fn learn_clause(sub: &ClauseSubproblem, opts: &SolverOptions) -> Result<Clause> {
    let relaxation = solve_relaxation(sub, opts)?;
    let mut polished = Vec::new();
    for (t, w) in sweep_candidates(&relaxation.w, sub)? {
        let w = polish(&w, sub)?;
        if !polished.iter().any(|(_, p)| *p == w) {
            polished.push((t, w));
        }
    }
    let mut clause = pick_best(polished, sub);
    clause.lp_value = relaxation.value;
    clause.approximate = relaxation.value.is_none();
    if clause.approximate {
        log::warn!("clause LP hit its iteration limit; rounding the last iterate");
    }
    Ok(clause)
}
