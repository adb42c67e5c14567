use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::LogFactorial;

/// Response distribution of the observations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Counts with a log link.
    Poisson,
    /// Successes out of `denominators[i]` trials with a logit link.
    Binomial { denominators: Vec<i64> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Poisson => "poisson",
            Family::Binomial { .. } => "binomial",
        }
    }

    pub fn denominators(&self) -> Option<&[i64]> {
        match self {
            Family::Poisson => None,
            Family::Binomial { denominators } => Some(denominators),
        }
    }

    /// Per-cell upper bounds on the fiber (the denominators for binomial data).
    pub fn upper_bounds(&self) -> Option<&[i64]> {
        self.denominators()
    }

    pub fn check_observation(&self, y: &[i64]) -> Result<()> {
        if let Some(i) = y.iter().position(|&v| v < 0) {
            return Err(Error::Invalid(format!("run {}: negative count", i + 1)));
        }
        if let Family::Binomial { denominators } = self {
            if denominators.len() != y.len() {
                return Err(Error::Dimension(format!("{} denominators for {} runs", denominators.len(), y.len())));
            }
            if let Some(i) = y.iter().zip(denominators).position(|(a, n)| a > n) {
                return Err(Error::Invalid(format!("run {}: successes exceed denominator", i + 1)));
            }
        }
        Ok(())
    }

    /// Largest cell value any fiber point can take, if known from the
    /// family alone, plus a fallback from the observed total.
    pub(crate) fn factorial_table(&self, y: &[i64]) -> LogFactorial {
        let total: i64 = y.iter().sum();
        let max_n = self.denominators().and_then(|d| d.iter().max().copied()).unwrap_or(0);
        LogFactorial::new(total.max(max_n).clamp(0, 1 << 22) as usize)
    }

    /// Unnormalized log conditional weight of a single cell:
    /// `-ln y!` (Poisson) or `-ln y! - ln (n - y)!` (binomial).
    #[inline]
    pub fn cell_log_weight(&self, lf: &LogFactorial, cell: usize, value: i64) -> f64 {
        match self {
            Family::Poisson => -lf.get(value),
            Family::Binomial { denominators } => -lf.get(value) - lf.get(denominators[cell] - value),
        }
    }

    pub fn log_weight(&self, lf: &LogFactorial, y: &[i64]) -> f64 {
        y.iter().enumerate().map(|(i, &v)| self.cell_log_weight(lf, i, v)).sum()
    }
}
