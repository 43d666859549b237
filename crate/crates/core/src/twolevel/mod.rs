//! Two-level rule learning over R clauses: set covering, block coordinate
//! descent and alternating minimization of the regularized Hamming
//! objective.
//!
//! All optimizers work on CNF rules. DNF rules are learned by fitting a CNF
//! to the complemented labels and taking its De Morgan dual.

mod am;
mod bcd;
mod objective;
mod sc;

pub use am::am_fit;
pub use bcd::bcd_fit;
pub use objective::{
    assign_ideal, bcd_subproblem, minimizing_clauses, objective, objective_parts, Ideal,
    IdealAssignment, TieBreak,
};
pub use sc::sc_fit;

use serde::{Deserialize, Serialize};

use crate::clause::Penalty;
use crate::dataset::BinaryDataset;
use crate::error::{Error, Result};
use crate::lp::SolverOptions;
use crate::rule::{demorgan_dual, Polarity, RuleMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Block coordinate descent from a set-covering start.
    Bcd,
    /// Alternating minimization from a set-covering start.
    Am,
    /// Set covering alone.
    Sc,
    /// One clause (BCD with R = 1).
    Ocrl,
}

/// Which clause a BCD iteration updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseSelection {
    /// Try every clause, keep the best substitution.
    Greedy,
    Cyclic,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Maximum number of clauses R.
    pub clauses: usize,
    pub theta: f64,
    pub pad_cost: f64,
    pub max_iters: usize,
    pub algorithm: Algorithm,
    pub polarity: Polarity,
    pub selection: ClauseSelection,
    pub seed: u64,
    /// Relative improvement threshold: a step must lower the objective by
    /// more than `rel_tol * (1 + objective)`.
    pub rel_tol: f64,
    /// AM stops after this many iterations without a new best.
    pub am_patience: usize,
    pub solver: SolverOptions,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            clauses: 5,
            theta: 0.01,
            pad_cost: 0.0,
            max_iters: 100,
            algorithm: Algorithm::Bcd,
            polarity: Polarity::Dnf,
            selection: ClauseSelection::Greedy,
            seed: 0,
            rel_tol: 1e-9,
            am_patience: 5,
            solver: SolverOptions::default(),
        }
    }
}

impl LearnerConfig {
    pub fn penalty(&self) -> Penalty {
        Penalty {
            theta: self.theta,
            pad_cost: self.pad_cost,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clauses < 1 {
            return Err(Error::InvalidArgument("R must be at least 1".into()));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "theta must be finite and non-negative, got {}",
                self.theta
            )));
        }
        if !(self.pad_cost >= 0.0) {
            return Err(Error::InvalidArgument(
                "pad cost must be non-negative".into(),
            ));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument(
                "max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn improves(&self, candidate: f64, current: f64) -> bool {
        candidate < current - self.rel_tol * (1.0 + current.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// No candidate substitution improved the objective.
    NoImprovement,
    MaxIterations,
    /// AM's best objective did not improve for the patience window.
    Stalled,
    /// AM reproduced its previous iterate.
    FixedPoint,
    /// Single-pass construction (set covering).
    Completed,
}

/// Objective history of one fit. Values are for the CNF problem the
/// optimizer saw (complemented labels for DNF rules).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub algorithm: Algorithm,
    pub polarity: Polarity,
    /// Objective of every iterate, starting with the initial rule.
    pub objectives: Vec<f64>,
    /// Running best of `objectives`.
    pub best_objectives: Vec<f64>,
    /// Clause replaced at each accepted BCD step.
    pub accepted: Vec<usize>,
    pub iterations: usize,
    pub reason: StopReason,
    pub final_objective: f64,
    /// Clause learns whose LP stopped at the iteration cap.
    pub approximate_clauses: usize,
}

impl FitTrace {
    pub(crate) fn start(cfg: &LearnerConfig, initial: f64) -> Self {
        FitTrace {
            algorithm: cfg.algorithm,
            polarity: Polarity::Cnf,
            objectives: vec![initial],
            best_objectives: vec![initial],
            accepted: Vec::new(),
            iterations: 0,
            reason: StopReason::Completed,
            final_objective: initial,
            approximate_clauses: 0,
        }
    }

    pub(crate) fn record(&mut self, value: f64) {
        let best = self.best_objectives.last().map_or(value, |b| b.min(value));
        self.objectives.push(value);
        self.best_objectives.push(best);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn check_init(
    data: &BinaryDataset,
    cfg: &LearnerConfig,
    init: &RuleMatrix,
) -> Result<()> {
    if init.polarity() != Polarity::Cnf {
        return Err(Error::InvalidArgument("initial rule must be CNF".into()));
    }
    init.check_width(data.width())?;
    if init.n_clauses() != cfg.clauses {
        return Err(Error::DimensionMismatch {
            expected: cfg.clauses,
            found: init.n_clauses(),
        });
    }
    Ok(())
}

/// Train a rule with the configured algorithm and polarity.
pub fn fit(data: &BinaryDataset, cfg: &LearnerConfig) -> Result<(RuleMatrix, FitTrace)> {
    cfg.validate()?;
    if data.n_samples() == 0 {
        return Err(Error::InvalidArgument(
            "cannot fit on an empty dataset".into(),
        ));
    }
    let train = match cfg.polarity {
        Polarity::Cnf => data.clone(),
        Polarity::Dnf => data.with_complemented_labels(),
    };
    let (cnf, mut trace) = match cfg.algorithm {
        Algorithm::Sc => {
            let rule = sc_fit(&train, cfg)?;
            let value = objective(&rule, &train, &cfg.penalty())?;
            (rule, FitTrace::start(cfg, value))
        }
        Algorithm::Bcd => {
            let init = sc_fit(&train, cfg)?;
            bcd_fit(&train, cfg, &init)?
        }
        Algorithm::Am => {
            let init = sc_fit(&train, cfg)?;
            am_fit(&train, cfg, &init)?
        }
        Algorithm::Ocrl => {
            let single = LearnerConfig {
                clauses: 1,
                ..cfg.clone()
            };
            let init = sc_fit(&train, &single)?;
            bcd_fit(&train, &single, &init)?
        }
    };
    trace.algorithm = cfg.algorithm;
    trace.polarity = cfg.polarity;
    let rule = match cfg.polarity {
        Polarity::Cnf => cnf,
        Polarity::Dnf => demorgan_dual(&cnf, &data.negation_partners())?,
    };
    Ok((rule, trace))
}
