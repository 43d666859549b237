use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Smallest and largest θ a grid may hold.
pub const THETA_MIN: f64 = 1e-4;
pub const THETA_MAX: f64 = 50.0;

/// Sorted, distinct candidate θ values within [1e-4, 50].
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGrid {
    values: Vec<f64>,
}

impl Default for ThetaGrid {
    /// Ten log-spaced values from 1e-4 to 50.
    fn default() -> Self {
        ThetaGrid::log(THETA_MIN, THETA_MAX, 10).expect("default grid is valid")
    }
}

impl ThetaGrid {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("theta grid is empty".into()));
        }
        // Allow for rounding at the log-spaced endpoints.
        let slack = 1e-12;
        if let Some(bad) = values
            .iter()
            .find(|v| !(**v >= THETA_MIN * (1.0 - slack) && **v <= THETA_MAX * (1.0 + slack)))
        {
            return Err(Error::InvalidArgument(format!(
                "theta grid value {bad} is outside [{THETA_MIN}, {THETA_MAX}]"
            )));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(ThetaGrid { values })
    }

    /// `n` values spaced evenly in log scale from `lo` to `hi`.
    pub fn log(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::spaced(lo, hi, n, true)
    }

    /// `n` values spaced evenly from `lo` to `hi`.
    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::spaced(lo, hi, n, false)
    }

    fn spaced(lo: f64, hi: f64, n: usize, log: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "theta grid needs at least one value".into(),
            ));
        }
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!(
                "theta grid bounds are reversed: {lo} > {hi}"
            )));
        }
        if n == 1 {
            return Self::new(vec![lo]);
        }
        let (a, b) = if log {
            if lo <= 0.0 {
                return Err(Error::InvalidArgument(
                    "log grid bounds must be positive".into(),
                ));
            }
            (lo.ln(), hi.ln())
        } else {
            (lo, hi)
        };
        let values = (0..n)
            .map(|i| {
                if i == 0 {
                    return lo;
                }
                if i == n - 1 {
                    return hi;
                }
                let x = a + (b - a) * i as f64 / (n - 1) as f64;
                if log {
                    x.exp()
                } else {
                    x
                }
            })
            .collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl FromStr for ThetaGrid {
    type Err = Error;

    /// Accepts `lo:hi:Nlog`, `lo:hi:Nlin` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse theta grid {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [lo, hi, spec] => {
                let spec = spec.trim();
                let (count, log) = if let Some(c) = spec.strip_suffix("log") {
                    (c, true)
                } else if let Some(c) = spec.strip_suffix("lin") {
                    (c, false)
                } else {
                    return Err(bad());
                };
                let n: usize = count.trim().parse().map_err(|_| bad())?;
                Self::spaced(num(lo)?, num(hi)?, n, log)
            }
            [list] => Self::new(list.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ThetaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.values.iter().map(|v| format!("{v:e}")).collect();
        write!(f, "{}", items.join(","))
    }
}
