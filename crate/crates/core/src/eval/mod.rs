//! Cross-validation with nested θ tuning and error/sparsity reporting.

mod grid;
mod report;

pub use grid::ThetaGrid;
pub use report::{CVReport, FoldResult};

use std::time::Instant;

use rayon::prelude::*;

use crate::dataset::{stratified_folds, Binarizer, BinaryDataset, RawTable};
use crate::error::{Error, Result};
use crate::rule::{predict, sparsity, RuleMatrix};
use crate::twolevel::{fit, LearnerConfig};

/// Fraction of positions where `pred` and `y` differ.
pub fn zero_one_error(pred: &[u8], y: &[u8]) -> Result<f64> {
    if pred.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: pred.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot score an empty prediction".into(),
        ));
    }
    let wrong = pred.iter().zip(y).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / y.len() as f64)
}

/// Per-fold θ: a fixed value or nested tuning over a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaChoice {
    Fixed(f64),
    Tune(ThetaGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub k: usize,
    pub inner_k: usize,
    pub theta: ThetaChoice,
    pub seed: u64,
    /// Thresholds per continuous column when binarizing a raw table.
    pub num_thresholds: usize,
    pub timings: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 10,
            inner_k: 5,
            theta: ThetaChoice::Tune(ThetaGrid::default()),
            seed: 0,
            num_thresholds: 10,
            timings: false,
        }
    }
}

impl CvOptions {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidArgument("k must be at least 2".into()));
        }
        if self.inner_k < 2 {
            return Err(Error::InvalidArgument("inner k must be at least 2".into()));
        }
        if let ThetaChoice::Fixed(t) = self.theta {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "theta must be finite and non-negative, got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Seed for the inner folds of outer fold `fold`.
fn inner_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Pick θ by stratified inner cross-validation on `train`.
///
/// Returns the grid value with the lowest mean validation error; ties go to
/// the larger θ. A single-class partition cannot be validated and yields
/// the largest θ.
pub fn tune_theta(
    train: &BinaryDataset,
    cfg: &LearnerConfig,
    grid: &ThetaGrid,
    inner_k: usize,
) -> Result<f64> {
    if inner_k < 2 {
        return Err(Error::InvalidArgument("inner k must be at least 2".into()));
    }
    let values = grid.values();
    let largest = *values.last().expect("grid is never empty");
    if values.len() == 1 {
        return Ok(largest);
    }
    let n_pos = train.n_positive();
    if n_pos == 0 || n_pos == train.n_samples() {
        log::warn!("training partition has a single class; using the largest theta {largest}");
        return Ok(largest);
    }
    let k = inner_k.min(train.n_samples());
    if k < inner_k {
        log::warn!(
            "only {} samples; inner cross-validation uses {k} folds",
            train.n_samples()
        );
    }
    let plan = stratified_folds(train.labels(), k, cfg.seed)?;
    let splits: Vec<(BinaryDataset, BinaryDataset)> = (0..k)
        .map(|f| {
            Ok((
                train.subset(&plan.train_indices(f))?,
                train.subset(&plan.test_indices(f))?,
            ))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|t| (0..k).map(move |f| (t, f)))
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(t, f)| {
            let (fit_on, check_on) = &splits[f];
            let cfg = LearnerConfig {
                theta: values[t],
                ..cfg.clone()
            };
            let (rule, _) = fit(fit_on, &cfg)?;
            zero_one_error(&predict(check_on, &rule)?.labels, check_on.labels())
        })
        .collect::<Result<_>>()?;

    let mut best = (f64::INFINITY, largest);
    for (t, &theta) in values.iter().enumerate() {
        let mean = errors[t * k..(t + 1) * k].iter().sum::<f64>() / k as f64;
        log::debug!("theta {theta}: inner error {mean:.4}");
        // Values ascend, so `<=` hands ties to the larger θ.
        if mean <= best.0 + 1e-12 {
            best = (mean, theta);
        }
    }
    Ok(best.1)
}

/// Outcome of one outer fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub rule: RuleMatrix,
    pub result: FoldResult,
}

enum Source<'a> {
    Binary(&'a BinaryDataset),
    Table(&'a RawTable, usize),
}

impl Source<'_> {
    fn labels(&self) -> Result<&[u8]> {
        match self {
            Source::Binary(d) => Ok(d.labels()),
            Source::Table(t, _) => t
                .labels()
                .ok_or_else(|| Error::InvalidArgument("table has no label column".into())),
        }
    }

    /// Training and test datasets; table thresholds come from the training
    /// rows only.
    fn split(&self, train: &[usize], test: &[usize]) -> Result<(BinaryDataset, BinaryDataset)> {
        match self {
            Source::Binary(d) => Ok((d.subset(train)?, d.subset(test)?)),
            Source::Table(t, q) => {
                let train_table = t.select_rows(train)?;
                let binarizer = Binarizer::fit(&train_table, *q)?;
                Ok((
                    binarizer.transform(&train_table)?,
                    binarizer.transform(&t.select_rows(test)?)?,
                ))
            }
        }
    }
}

fn run_fold(
    source: &Source<'_>,
    train: &[usize],
    test: &[usize],
    fold: usize,
    cfg: &LearnerConfig,
    opts: &CvOptions,
) -> Result<FoldOutcome> {
    let start = Instant::now();
    let (train_data, test_data) = source.split(train, test)?;
    let theta = match &opts.theta {
        ThetaChoice::Fixed(t) => *t,
        ThetaChoice::Tune(grid) => {
            let inner_cfg = LearnerConfig {
                seed: inner_seed(opts.seed, fold),
                ..cfg.clone()
            };
            tune_theta(&train_data, &inner_cfg, grid, opts.inner_k)?
        }
    };
    let cfg = LearnerConfig {
        theta,
        ..cfg.clone()
    };
    let (rule, _) = fit(&train_data, &cfg)?;
    let train_error = zero_one_error(&predict(&train_data, &rule)?.labels, train_data.labels())?;
    let test_error = zero_one_error(&predict(&test_data, &rule)?.labels, test_data.labels())?;
    let result = FoldResult {
        fold,
        theta,
        test_error,
        train_error,
        sparsity: sparsity(&rule),
        n_train: train.len(),
        n_test: test.len(),
        seconds: opts.timings.then(|| start.elapsed().as_secs_f64()),
    };
    log::info!(
        "fold {}: theta {theta}, test error {test_error:.4}, {} features",
        fold + 1,
        result.sparsity
    );
    Ok(FoldOutcome { rule, result })
}

fn cross_validate_source(
    source: Source<'_>,
    cfg: &LearnerConfig,
    opts: &CvOptions,
) -> Result<(CVReport, Vec<RuleMatrix>)> {
    opts.validate()?;
    cfg.validate()?;
    let plan = stratified_folds(source.labels()?, opts.k, opts.seed)?;
    let outcomes: Vec<FoldOutcome> = (0..opts.k)
        .into_par_iter()
        .map(|f| {
            run_fold(
                &source,
                &plan.train_indices(f),
                &plan.test_indices(f),
                f,
                cfg,
                opts,
            )
        })
        .collect::<Result<_>>()?;
    let (rules, folds): (Vec<_>, Vec<_>) = outcomes.into_iter().map(|o| (o.rule, o.result)).unzip();
    Ok((CVReport::new(cfg, opts, folds), rules))
}

/// Stratified k-fold cross-validation on an already binarized dataset.
pub fn cross_validate(
    data: &BinaryDataset,
    cfg: &LearnerConfig,
    opts: &CvOptions,
) -> Result<CVReport> {
    Ok(cross_validate_source(Source::Binary(data), cfg, opts)?.0)
}

/// Stratified k-fold cross-validation on a raw table, binarizing each
/// training partition separately. Also returns the rule fitted per fold.
pub fn cross_validate_table(
    table: &RawTable,
    cfg: &LearnerConfig,
    opts: &CvOptions,
) -> Result<(CVReport, Vec<RuleMatrix>)> {
    cross_validate_source(Source::Table(table, opts.num_thresholds), cfg, opts)
}
