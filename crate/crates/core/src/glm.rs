//! Null-model fitting by Newton-Raphson with canonical links, and the
//! goodness-of-fit statistics built on the fitted means.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::Family;

const MAX_ITERATIONS: usize = 100;
const SCORE_TOLERANCE: f64 = 1e-10;
const DEVIANCE_TOLERANCE: f64 = 1e-12;
const BOUNDARY: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub beta: Vec<f64>,
    /// Poisson means, or success probabilities for binomial data.
    pub mu: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub df: usize,
    pub deviance: f64,
    pub max_score: f64,
    pub warnings: Vec<String>,
}

impl FitResult {
    /// Expected counts `n_i * mu_i` (equal to `mu` for Poisson data).
    pub fn expected(&self, family: &Family) -> Vec<f64> {
        match family.denominators() {
            None => self.mu.clone(),
            Some(n) => self.mu.iter().zip(n).map(|(m, &n)| m * n as f64).collect(),
        }
    }
}

/// Goodness-of-fit statistic used for the test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
pub enum Statistic {
    #[default]
    LikelihoodRatio,
    Pearson,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::LikelihoodRatio => "G2",
            Statistic::Pearson => "X2",
        }
    }

    /// Contribution of one cell with count `y` and expected count `m`
    /// (`n` trials for binomial cells).
    #[inline]
    pub fn cell(self, y: i64, m: f64, n: Option<i64>) -> f64 {
        match (self, n) {
            (Statistic::LikelihoodRatio, None) => g2_term(y as f64, m),
            (Statistic::LikelihoodRatio, Some(n)) => g2_term(y as f64, m) + g2_term((n - y) as f64, n as f64 - m),
            (Statistic::Pearson, None) => (y as f64 - m).powi(2) / m,
            (Statistic::Pearson, Some(n)) => (y as f64 - m).powi(2) / (m * (1.0 - m / n as f64)),
        }
    }

    /// Value of the statistic; `fitted` holds expected counts.
    pub fn evaluate(self, y: &[i64], fitted: &[f64], family: &Family) -> f64 {
        let n = family.denominators();
        y.iter().enumerate().map(|(i, &v)| self.cell(v, fitted[i], n.map(|n| n[i]))).sum()
    }
}

/// `2 y log(y/m)` with `0 log 0 = 0`; summed over cells this is G² because
/// the `y - m` terms cancel when the model contains the intercept.
#[inline]
fn g2_term(y: f64, m: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        2.0 * y * (y / m).ln()
    }
}

/// Likelihood-ratio statistic `2 Σ y log(y/m)` (plus the complementary
/// cells for binomial data). `fitted` holds expected counts.
pub fn likelihood_ratio_stat(y: &[i64], fitted: &[f64], family: &Family) -> f64 {
    Statistic::LikelihoodRatio.evaluate(y, fitted, family)
}

/// Pearson statistic. Errors if some expected count is zero.
pub fn pearson_stat(y: &[i64], fitted: &[f64], family: &Family) -> Result<f64> {
    let n = family.denominators();
    for (i, &m) in fitted.iter().enumerate() {
        if m <= 0.0 || n.is_some_and(|n| m >= n[i] as f64) {
            return Err(Error::Numeric(format!("run {}: fitted value on the boundary", i + 1)));
        }
    }
    Ok(Statistic::Pearson.evaluate(y, fitted, family))
}

/// Full deviance, not relying on the intercept to cancel `y - m` terms.
pub fn deviance(y: &[i64], fitted: &[f64], family: &Family) -> f64 {
    let term = |y: f64, m: f64| g2_term(y, m) - 2.0 * (y - m);
    match family.denominators() {
        None => y.iter().zip(fitted).map(|(&y, &m)| term(y as f64, m)).sum(),
        Some(n) => y
            .iter()
            .zip(fitted)
            .zip(n)
            .map(|((&y, &m), &n)| term(y as f64, m) + term((n - y) as f64, n as f64 - m))
            .sum(),
    }
}

/// Log-likelihood (up to a constant) at linear predictor `eta`.
pub fn log_likelihood(y: &[i64], eta: &[f64], family: &Family) -> f64 {
    match family.denominators() {
        None => y.iter().zip(eta).map(|(&y, &e)| y as f64 * e - e.exp()).sum(),
        Some(n) => y.iter().zip(eta).zip(n).map(|((&y, &e), &n)| y as f64 * e - n as f64 * softplus(e)).sum(),
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Score vector `X'(y - E y)` at `beta`. `x` is runs × parameters.
pub fn score(x: &[Vec<f64>], y: &[i64], beta: &[f64], family: &Family) -> Vec<f64> {
    let (_, mean, _) = moments(x, beta, family);
    (0..beta.len()).map(|j| x.iter().zip(y).zip(&mean).map(|((row, &y), m)| row[j] * (y as f64 - m)).sum()).collect()
}

/// Linear predictor, expected counts and working weights.
fn moments(x: &[Vec<f64>], beta: &[f64], family: &Family) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let eta: Vec<f64> = x.iter().map(|row| row.iter().zip(beta).map(|(a, b)| a * b).sum()).collect();
    match family.denominators() {
        None => {
            let m: Vec<f64> = eta.iter().map(|e| e.exp()).collect();
            (eta, m.clone(), m)
        }
        Some(n) => {
            let p: Vec<f64> = eta.iter().map(|&e| logistic(e)).collect();
            let m = p.iter().zip(n).map(|(p, &n)| p * n as f64).collect();
            let w = p.iter().zip(n).map(|(p, &n)| n as f64 * p * (1.0 - p)).collect();
            (eta, m, w)
        }
    }
}

/// Maximum-likelihood fit of the null model. `x` holds one row per run.
pub fn fit(x: &[Vec<f64>], y: &[i64], family: &Family) -> Result<FitResult> {
    let k = x.len();
    let nu = x.first().map_or(0, Vec::len);
    if y.len() != k {
        return Err(Error::Dimension(format!("{} observations for {} runs", y.len(), k)));
    }
    if nu == 0 || x.iter().any(|r| r.len() != nu) {
        return Err(Error::Dimension("covariate matrix is empty or ragged".into()));
    }
    if nu > k {
        return Err(Error::Dimension(format!("{nu} parameters exceed {k} runs")));
    }
    family.check_observation(y)?;
    let xm = DMatrix::from_fn(k, nu, |i, j| x[i][j]);
    let scale = 1.0 + y.iter().map(|&v| v as f64).sum::<f64>();
    // Rounding in X'(y - m) grows with the counts.
    let score_tol = SCORE_TOLERANCE.max(64.0 * f64::EPSILON * scale);

    let mut beta = DVector::<f64>::zeros(nu);
    let mut ll = log_likelihood(y, &moments(x, beta.as_slice(), family).0, family);
    let mut dev_prev = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let (_, m, w) = moments(x, beta.as_slice(), family);
        let resid = DVector::from_fn(k, |i, _| y[i] as f64 - m[i]);
        let grad = xm.transpose() * &resid;
        let info = xm.transpose() * DMatrix::from_diagonal(&DVector::from_vec(w)) * &xm;
        let chol = info
            .cholesky()
            .ok_or_else(|| Error::Numeric("information matrix is not positive definite (covariates rank deficient?)".into()))?;
        let step = chol.solve(&grad);
        let mut t = 1.0;
        let mut candidate = &beta + &step;
        let mut ll_new = log_likelihood(y, &moments(x, candidate.as_slice(), family).0, family);
        // written so that a NaN log-likelihood also triggers halving
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        while !(ll_new >= ll - 1e-12 * ll.abs().max(1.0)) && t > 1e-10 {
            t /= 2.0;
            candidate = &beta + &step * t;
            ll_new = log_likelihood(y, &moments(x, candidate.as_slice(), family).0, family);
        }
        beta = candidate;
        ll = ll_new;
        let (_, m, _) = moments(x, beta.as_slice(), family);
        let dev = deviance(y, &m, family);
        let max_score = score(x, y, beta.as_slice(), family).iter().fold(0.0f64, |a, s| a.max(s.abs()));
        let rel = (dev - dev_prev).abs() / dev.abs().max(1.0);
        dev_prev = dev;
        if max_score < score_tol && rel < DEVIANCE_TOLERANCE {
            return Ok(finish(beta, m, it, dev, max_score, family, k - nu));
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS })
}

fn finish(beta: DVector<f64>, m: Vec<f64>, iterations: usize, deviance: f64, max_score: f64, family: &Family, df: usize) -> FitResult {
    let mut warnings = Vec::new();
    let mu: Vec<f64> = match family.denominators() {
        None => m,
        Some(n) => m.iter().zip(n).map(|(m, &n)| m / n as f64).collect(),
    };
    let near_boundary = match family {
        Family::Poisson => mu.iter().any(|&v| v < BOUNDARY),
        Family::Binomial { .. } => mu.iter().any(|&v| !(BOUNDARY..=1.0 - BOUNDARY).contains(&v)),
    };
    if near_boundary {
        warnings.push("fitted values at the boundary: possible quasi-complete separation".into());
    }
    FitResult { beta: beta.as_slice().to_vec(), mu, iterations, converged: true, df, deviance, max_score, warnings }
}
