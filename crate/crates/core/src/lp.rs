//! Bounded-variable primal simplex for small dense linear programs.
//!
//! Every variable has finite bounds. Each constraint row gets a logical
//! column (a slack for inequalities, an artificial pinned to zero for
//! equalities); rows whose slack cannot absorb the starting residual get an
//! extra artificial for phase one. The tableau is kept dense.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// minimize `objective · x` subject to the constraints and `lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, bounds: Vec<(f64, f64)>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds,
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.bounds.len(),
            });
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.coeffs.len(),
                });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite constraint data".into()));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "variable {j} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite objective".into()));
        }
        Ok(())
    }

    /// Objective value at `x`.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or constraint violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (&v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let gap = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

/// Plain-text dump: objective, one line per constraint, then bounds.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {} rows {}", self.n_vars(), self.constraints.len())?;
        write!(f, "min")?;
        for v in &self.objective {
            write!(f, " {v:>12.6}")?;
        }
        writeln!(f)?;
        for c in &self.constraints {
            write!(f, "row")?;
            for v in &c.coeffs {
                write!(f, " {v:>12.6}")?;
            }
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "==",
            };
            writeln!(f, " {rel} {:>12.6}", c.rhs)?;
        }
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            writeln!(f, "bound {j:>5} {lo:>12.6} {hi:>12.6}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    /// Only reachable through unbounded internal slacks; finite variable
    /// bounds rule it out for well-formed programs.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
    /// Row multipliers `y` with reduced costs `c - Gᵀy`.
    pub duals: Vec<f64>,
    /// Final status of every structural variable followed by every row's
    /// logical column; usable as a warm start.
    pub basis: Vec<VarStatus>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Primal feasibility and reduced-cost tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-7,
            max_iters: 100_000,
            bland_after: 50,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const REFRESH_EVERY: usize = 200;

pub fn solve_lp(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
    lp.validate()?;
    let mut tab = Tableau::cold(lp);
    Ok(tab.run(lp, opts, true))
}

/// Start from a previously optimal basis; falls back to a cold start when
/// the hinted basis is singular or not primal feasible.
pub fn solve_lp_warm(
    lp: &LinearProgram,
    opts: &SolverOptions,
    basis: &[VarStatus],
) -> Result<LpSolution> {
    lp.validate()?;
    let expected = lp.n_vars() + lp.constraints.len();
    if basis.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: basis.len(),
        });
    }
    match Tableau::warm(lp, basis, opts.tol) {
        Some(mut tab) => Ok(tab.run(lp, opts, false)),
        None => solve_lp(lp, opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
}

struct Tableau {
    m: usize,
    n_struct: usize,
    ncols: usize,
    /// Original columns, row-major `m × ncols`.
    a: Vec<f64>,
    rhs: Vec<f64>,
    /// `B⁻¹A`, row-major.
    t: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    logical_sign: Vec<f64>,
    n_artificial: usize,
    iterations: usize,
}

impl Tableau {
    fn layout(lp: &LinearProgram, extra: usize) -> Tableau {
        let m = lp.constraints.len();
        let n = lp.n_vars();
        let ncols = n + m + extra;
        let mut a = vec![0.0; m * ncols];
        let mut lo = vec![0.0; ncols];
        let mut hi = vec![f64::INFINITY; ncols];
        let mut logical_sign = vec![1.0; m];
        for (j, &(l, h)) in lp.bounds.iter().enumerate() {
            lo[j] = l;
            hi[j] = h;
        }
        for (k, c) in lp.constraints.iter().enumerate() {
            a[k * ncols..k * ncols + n].copy_from_slice(&c.coeffs);
            let sign = match c.relation {
                Relation::Le | Relation::Eq => 1.0,
                Relation::Ge => -1.0,
            };
            logical_sign[k] = sign;
            a[k * ncols + n + k] = sign;
            if c.relation == Relation::Eq {
                hi[n + k] = 0.0;
            }
        }
        Tableau {
            m,
            n_struct: n,
            ncols,
            a,
            rhs: lp.constraints.iter().map(|c| c.rhs).collect(),
            t: Vec::new(),
            xb: vec![0.0; m],
            basis: vec![0; m],
            state: vec![State::Lower; ncols],
            lo,
            hi,
            cost: vec![0.0; ncols],
            d: vec![0.0; ncols],
            logical_sign,
            n_artificial: 0,
            iterations: 0,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::Upper => self.hi[j],
            _ => self.lo[j],
        }
    }

    fn cold(lp: &LinearProgram) -> Tableau {
        let m = lp.constraints.len();
        let n = lp.n_vars();
        // Residual with every structural variable at its lower bound.
        let residual: Vec<f64> = lp
            .constraints
            .iter()
            .map(|c| {
                c.rhs
                    - c.coeffs
                        .iter()
                        .zip(&lp.bounds)
                        .map(|(g, (lo, _))| g * lo)
                        .sum::<f64>()
            })
            .collect();
        let needs_artificial: Vec<bool> = lp
            .constraints
            .iter()
            .zip(&residual)
            .map(|(c, &r)| match c.relation {
                Relation::Le => r < 0.0,
                Relation::Ge => r > 0.0,
                Relation::Eq => false,
            })
            .collect();
        let extra = needs_artificial.iter().filter(|&&b| b).count();
        let mut tab = Tableau::layout(lp, extra);
        let ncols = tab.ncols;
        let mut next_art = n + m;
        for k in 0..m {
            let r = residual[k];
            let col = if lp.constraints[k].relation == Relation::Eq {
                // The logical column doubles as the phase-one artificial.
                let sign = if r < 0.0 { -1.0 } else { 1.0 };
                tab.logical_sign[k] = sign;
                tab.a[k * ncols + n + k] = sign;
                tab.hi[n + k] = f64::INFINITY;
                tab.cost[n + k] = 1.0;
                n + k
            } else if needs_artificial[k] {
                let col = next_art;
                next_art += 1;
                tab.a[k * ncols + col] = r.signum();
                tab.cost[col] = 1.0;
                col
            } else {
                n + k
            };
            tab.basis[k] = col;
            tab.state[col] = State::Basic(k);
            tab.xb[k] = r.abs();
        }
        tab.n_artificial = extra
            + lp.constraints
                .iter()
                .filter(|c| c.relation == Relation::Eq)
                .count();
        // B is diagonal with ±1 entries, so B⁻¹A is a row scaling.
        tab.t = tab.a.clone();
        for k in 0..m {
            let col = tab.basis[k];
            let s = tab.a[k * ncols + col];
            if s < 0.0 {
                for v in &mut tab.t[k * ncols..(k + 1) * ncols] {
                    *v = -*v;
                }
            }
        }
        tab
    }

    fn warm(lp: &LinearProgram, hint: &[VarStatus], tol: f64) -> Option<Tableau> {
        let m = lp.constraints.len();
        let n = lp.n_vars();
        let mut tab = Tableau::layout(lp, 0);
        let ncols = tab.ncols;
        for k in 0..m {
            tab.basis[k] = n + k;
            tab.state[n + k] = State::Basic(k);
        }
        tab.t = tab.a.clone();
        for k in 0..m {
            if tab.logical_sign[k] < 0.0 {
                for v in &mut tab.t[k * ncols..(k + 1) * ncols] {
                    *v = -*v;
                }
            }
        }
        for (j, h) in hint.iter().enumerate() {
            if *h == VarStatus::AtUpper && tab.hi[j].is_finite() {
                tab.state[j] = State::Upper;
            }
        }
        let wanted: Vec<usize> = (0..hint.len())
            .filter(|&j| hint[j] == VarStatus::Basic)
            .collect();
        for &q in wanted.iter().filter(|&&q| q < n) {
            // Replace a logical that the hint does not keep basic.
            let row = (0..m)
                .filter(|&i| {
                    let b = tab.basis[i];
                    b >= n && hint[b] != VarStatus::Basic
                })
                .max_by(|&i, &k| {
                    tab.t[i * ncols + q]
                        .abs()
                        .total_cmp(&tab.t[k * ncols + q].abs())
                })?;
            if tab.t[row * ncols + q].abs() < 1e-7 {
                return None;
            }
            let leaving = tab.basis[row];
            tab.state[leaving] = match hint[leaving] {
                VarStatus::AtUpper if tab.hi[leaving].is_finite() => State::Upper,
                _ => State::Lower,
            };
            tab.basis[row] = q;
            tab.state[q] = State::Basic(row);
            tab.pivot(row, q);
        }
        tab.refresh_values();
        let feasible = (0..m).all(|i| {
            let b = tab.basis[i];
            tab.xb[i] >= tab.lo[b] - tol && tab.xb[i] <= tab.hi[b] + tol
        });
        feasible.then_some(tab)
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let ncols = self.ncols;
        let piv = self.t[p * ncols + q];
        for v in &mut self.t[p * ncols..(p + 1) * ncols] {
            *v /= piv;
        }
        let (before, rest) = self.t.split_at_mut(p * ncols);
        let (prow, after) = rest.split_at_mut(ncols);
        for other in before
            .chunks_exact_mut(ncols)
            .chain(after.chunks_exact_mut(ncols))
        {
            let f = other[q];
            if f != 0.0 {
                for (o, &pv) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * pv;
                }
                other[q] = 0.0;
            }
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for (dj, &pv) in self.d.iter_mut().zip(prow.iter()) {
                *dj -= dq * pv;
            }
            self.d[q] = 0.0;
        }
    }

    /// `B⁻¹[i][k]`, read off the logical column of row `k`.
    fn binv(&self, i: usize, k: usize) -> f64 {
        self.t[i * self.ncols + self.n_struct + k] / self.logical_sign[k]
    }

    /// Recompute basic values from the nonbasic ones to shed drift.
    fn refresh_values(&mut self) {
        let ncols = self.ncols;
        let mut r = self.rhs.clone();
        for j in 0..ncols {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for (k, rk) in r.iter_mut().enumerate() {
                    *rk -= self.a[k * ncols + j] * v;
                }
            }
        }
        for i in 0..self.m {
            self.xb[i] = (0..self.m).map(|k| self.binv(i, k) * r[k]).sum();
        }
    }

    fn refresh_reduced_costs(&mut self) {
        let ncols = self.ncols;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, &tij) in self.d.iter_mut().zip(&self.t[i * ncols..(i + 1) * ncols]) {
                    *dj -= cb * tij;
                }
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn phase_cost(&self, i: usize) -> f64 {
        self.cost[self.basis[i]] * self.xb[i]
    }

    /// Simplex iterations on the current cost vector.
    fn iterate(&mut self, opts: &SolverOptions) -> LpStatus {
        let ncols = self.ncols;
        let mut degenerate_streak = 0;
        loop {
            if self.iterations >= opts.max_iters {
                return LpStatus::IterationLimit;
            }
            let bland = degenerate_streak >= opts.bland_after;

            let mut entering: Option<usize> = None;
            let mut best = 0.0;
            for j in 0..ncols {
                let score = match self.state[j] {
                    State::Basic(_) => continue,
                    _ if self.hi[j] - self.lo[j] <= 0.0 => continue,
                    State::Lower if self.d[j] < -opts.tol => -self.d[j],
                    State::Upper if self.d[j] > opts.tol => self.d[j],
                    _ => continue,
                };
                if bland {
                    entering = Some(j);
                    break;
                }
                if score > best {
                    best = score;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                return LpStatus::Optimal;
            };
            let dir = if self.state[q] == State::Lower {
                1.0
            } else {
                -1.0
            };

            let mut step = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let alpha = dir * self.t[i * ncols + q];
                let b = self.basis[i];
                let ratio = if alpha > PIVOT_TOL {
                    (self.xb[i] - self.lo[b]) / alpha
                } else if alpha < -PIVOT_TOL && self.hi[b].is_finite() {
                    (self.hi[b] - self.xb[i]) / -alpha
                } else {
                    continue;
                };
                let ratio = ratio.max(0.0);
                let better = match leave {
                    None => ratio < step,
                    Some((p, _)) => {
                        if ratio < step - 1e-12 {
                            true
                        } else if ratio <= step + 1e-12 {
                            if bland {
                                b < self.basis[p]
                            } else {
                                alpha.abs() > (dir * self.t[p * ncols + q]).abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    step = ratio.min(step);
                    leave = Some((i, alpha));
                }
            }
            if !step.is_finite() {
                return LpStatus::Unbounded;
            }

            self.iterations += 1;
            if step <= 1e-12 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            if step != 0.0 {
                for i in 0..self.m {
                    self.xb[i] -= step * dir * self.t[i * ncols + q];
                }
            }
            match leave {
                None => {
                    self.state[q] = if dir > 0.0 {
                        State::Upper
                    } else {
                        State::Lower
                    };
                }
                Some((p, alpha)) => {
                    let entering_value = self.nonbasic_value(q) + dir * step;
                    let out = self.basis[p];
                    self.state[out] = if alpha > 0.0 {
                        State::Lower
                    } else {
                        State::Upper
                    };
                    self.basis[p] = q;
                    self.state[q] = State::Basic(p);
                    self.xb[p] = entering_value;
                    self.pivot(p, q);
                }
            }
            if self.iterations.is_multiple_of(REFRESH_EVERY) {
                self.refresh_values();
            }
        }
    }

    fn run(&mut self, lp: &LinearProgram, opts: &SolverOptions, phase_one: bool) -> LpSolution {
        let ncols = self.ncols;
        let n = self.n_struct;
        let m = self.m;
        if phase_one && self.n_artificial > 0 {
            self.refresh_reduced_costs();
            let status = self.iterate(opts);
            self.refresh_values();
            let infeasibility: f64 = (0..m).map(|i| self.phase_cost(i)).sum();
            let scale = 1.0
                + lp.constraints
                    .iter()
                    .map(|c| c.rhs.abs())
                    .fold(0.0, f64::max);
            if status == LpStatus::IterationLimit {
                return self.finish(lp, LpStatus::IterationLimit);
            }
            if infeasibility > opts.tol * scale {
                return self.finish(lp, LpStatus::Infeasible);
            }
        }
        // Pin artificials (and equality logicals) to zero for phase two.
        for j in n..ncols {
            let is_artificial = j >= n + m || lp.constraints[j - n].relation == Relation::Eq;
            if is_artificial {
                self.hi[j] = 0.0;
                if !matches!(self.state[j], State::Basic(_)) {
                    self.state[j] = State::Lower;
                }
            }
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if self.hi[b] == 0.0 && self.lo[b] == 0.0 {
                self.xb[i] = 0.0;
            }
        }
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..n].copy_from_slice(&lp.objective);
        self.refresh_reduced_costs();
        let status = self.iterate(opts);
        self.finish(lp, status)
    }

    fn finish(&mut self, lp: &LinearProgram, status: LpStatus) -> LpSolution {
        self.refresh_values();
        let n = self.n_struct;
        let mut x = vec![0.0; n];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = match self.state[j] {
                State::Basic(i) => self.xb[i].clamp(self.lo[j], self.hi[j]),
                _ => self.nonbasic_value(j),
            };
        }
        let duals = (0..self.m)
            .map(|k| {
                (0..self.m)
                    .map(|i| {
                        let b = self.basis[i];
                        let c = if b < n { lp.objective[b] } else { 0.0 };
                        c * self.binv(i, k)
                    })
                    .sum()
            })
            .collect();
        let basis = (0..n + self.m)
            .map(|j| match self.state[j] {
                State::Basic(_) => VarStatus::Basic,
                State::Lower => VarStatus::AtLower,
                State::Upper => VarStatus::AtUpper,
            })
            .collect();
        LpSolution {
            status,
            value: lp.value_at(&x),
            x,
            duals,
            basis,
            iterations: self.iterations,
        }
    }
}
