use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CvOptions, ThetaChoice};
use crate::error::{Error, Result};
use crate::rule::Polarity;
use crate::twolevel::{Algorithm, LearnerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    /// Zero-based fold index.
    pub fold: usize,
    pub theta: f64,
    pub test_error: f64,
    pub train_error: f64,
    /// Selected features over enabled clauses.
    pub sparsity: usize,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub algorithm: Algorithm,
    pub polarity: Polarity,
    pub clauses: usize,
    pub k: usize,
    pub seed: u64,
    /// θ candidates searched per fold; empty when θ was fixed.
    pub grid: Vec<f64>,
    pub folds: Vec<FoldResult>,
    pub mean_error: f64,
    /// Sample standard deviation of fold errors over sqrt(k).
    pub sem: f64,
    pub mean_sparsity: f64,
}

impl CVReport {
    pub(crate) fn new(cfg: &LearnerConfig, opts: &CvOptions, folds: Vec<FoldResult>) -> Self {
        let k = folds.len() as f64;
        let mean_error = folds.iter().map(|f| f.test_error).sum::<f64>() / k;
        let var = if folds.len() > 1 {
            folds
                .iter()
                .map(|f| (f.test_error - mean_error).powi(2))
                .sum::<f64>()
                / (k - 1.0)
        } else {
            0.0
        };
        let mean_sparsity = folds.iter().map(|f| f.sparsity as f64).sum::<f64>() / k;
        CVReport {
            algorithm: cfg.algorithm,
            polarity: cfg.polarity,
            clauses: cfg.clauses,
            k: folds.len(),
            seed: opts.seed,
            grid: match &opts.theta {
                ThetaChoice::Fixed(_) => Vec::new(),
                ThetaChoice::Tune(g) => g.values().to_vec(),
            },
            folds,
            mean_error,
            sem: var.sqrt() / k.sqrt(),
            mean_sparsity,
        }
    }

    pub fn fold_errors(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.test_error).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Plain-text table: one row per fold, then the summary row with the
    /// mean error in percent and its standard error in parentheses.
    pub fn render_table(&self) -> String {
        let name = match self.algorithm {
            Algorithm::Bcd => "BCD",
            Algorithm::Am => "AM",
            Algorithm::Sc => "SC",
            Algorithm::Ocrl => "OCRL",
        };
        let polarity = match self.polarity {
            Polarity::Cnf => "CNF",
            Polarity::Dnf => "DNF",
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{name} {polarity}, R = {}, {}-fold cross-validation (seed {})",
            self.clauses, self.k, self.seed
        );
        let _ = writeln!(
            out,
            "{:>6}  {:>10}  {:>9}  {:>9}  {:>8}",
            "fold", "theta", "train %", "test %", "features"
        );
        for f in &self.folds {
            let _ = writeln!(
                out,
                "{:>6}  {:>10}  {:>9.1}  {:>9.1}  {:>8}",
                f.fold + 1,
                format_theta(f.theta),
                100.0 * f.train_error,
                100.0 * f.test_error,
                f.sparsity
            );
        }
        let summary = format!("{:.1}({:.1})", 100.0 * self.mean_error, 100.0 * self.sem);
        let _ = writeln!(
            out,
            "{:>6}  {:>10}  {:>9}  {:>9}  {:>8.1}",
            "mean", "", "", summary, self.mean_sparsity
        );
        out
    }
}

fn format_theta(t: f64) -> String {
    if t == 0.0 || t >= 0.01 {
        format!("{t:.4}")
    } else {
        format!("{t:.1e}")
    }
}
