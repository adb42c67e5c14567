//! Markov chain Monte Carlo estimation of the conditional p-value.
//!
//! Each step picks a move uniformly at random and resamples the position
//! along the line `y + n z` from its exact conditional distribution, so
//! no accept/reject step is needed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::Family;
use crate::fiber::{at_least, in_fiber};
use crate::glm::{fit, FitResult, Statistic};
use crate::model::{sufficient_statistic, CovariateMatrix};
use crate::moves::{Move, MoveSet};
use crate::special::{chisq_pdf, chisq_upper_tail, LogFactorial};

const CHECK_INTERVAL: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainConfig {
    pub seed: u64,
    pub burn_in: u64,
    pub samples: u64,
    pub batches: usize,
    pub bins: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { seed: 0, burn_in: 100_000, samples: 1_000_000, batches: 100, bins: 100 }
    }
}

impl ChainConfig {
    fn validate(&self) -> Result<()> {
        if self.batches < 2 || self.samples < self.batches as u64 {
            return Err(Error::Invalid(format!("need samples >= batches >= 2 (samples {}, batches {})", self.samples, self.batches)));
        }
        if self.bins == 0 {
            return Err(Error::Invalid("histogram needs at least one bin".into()));
        }
        Ok(())
    }
}

/// Everything fixed by the null hypothesis: the configuration, the fitted
/// expected counts (constant on the fiber) and the test statistic.
#[derive(Clone, Debug, Serialize)]
pub struct NullModel {
    pub matrix: Vec<Vec<i64>>,
    pub fitted: Vec<f64>,
    pub df: usize,
    pub family: Family,
    pub statistic: Statistic,
}

impl NullModel {
    /// Fits the model to `y` and packages the pieces the chain needs.
    pub fn fit(x0: &CovariateMatrix, y: &[i64], family: Family, statistic: Statistic) -> Result<(Self, FitResult)> {
        let f = fit(&x0.rows_f64(), y, &family)?;
        let fitted = f.expected(&family);
        let model = NullModel { matrix: x0.transpose_rows(), fitted, df: f.df, family, statistic };
        Ok((model, f))
    }

    pub fn statistic_of(&self, y: &[i64]) -> f64 {
        self.statistic.evaluate(y, &self.fitted, &self.family)
    }

    pub fn asymptotic_pvalue(&self, t: f64) -> Option<f64> {
        (self.df > 0).then(|| chisq_upper_tail(t, self.df))
    }
}

/// Range `[lo, hi]` of multiples `n` keeping `y + n z` within `0..=upper`.
/// Always contains 0 when `y` itself is feasible.
pub fn feasible_range(y: &[i64], z: &[i64], upper: Option<&[i64]>) -> (i64, i64) {
    let mut lo = i64::MIN;
    let mut hi = i64::MAX;
    for (i, (&yi, &zi)) in y.iter().zip(z).enumerate() {
        if zi == 0 {
            continue;
        }
        let room = upper.map(|u| u[i] - yi);
        if zi > 0 {
            lo = lo.max(-(yi / zi));
            if let Some(r) = room {
                hi = hi.min(r / zi);
            }
        } else {
            hi = hi.min(yi / -zi);
            if let Some(r) = room {
                lo = lo.max(-(r / -zi));
            }
        }
    }
    (lo, hi)
}

/// A move with its support listed for fast updates.
#[derive(Clone, Debug)]
struct SparseMove {
    idx: Vec<usize>,
    val: Vec<i64>,
}

impl SparseMove {
    fn new(m: &Move) -> Self {
        let (idx, val) = m.as_slice().iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, &v)| (i, v)).unzip();
        SparseMove { idx, val }
    }

    fn range(&self, y: &[i64], upper: Option<&[i64]>) -> (i64, i64) {
        let ys: Vec<i64> = self.idx.iter().map(|&i| y[i]).collect();
        let us: Option<Vec<i64>> = upper.map(|u| self.idx.iter().map(|&i| u[i]).collect());
        feasible_range(&ys, &self.val, us.as_deref())
    }
}

/// One Gibbs update along `z`: draws `n` from the feasible range with
/// probability proportional to the conditional weight of `y + n z`, applies
/// it in place and returns `(n, range length)`.
pub fn gibbs_step<R: Rng>(y: &mut [i64], z: &Move, family: &Family, lf: &LogFactorial, rng: &mut R) -> (i64, usize) {
    let sm = SparseMove::new(z);
    let mut buf = Vec::new();
    step_sparse(y, &sm, family, lf, &mut buf, rng)
}

fn step_sparse<R: Rng>(
    y: &mut [i64],
    z: &SparseMove,
    family: &Family,
    lf: &LogFactorial,
    buf: &mut Vec<f64>,
    rng: &mut R,
) -> (i64, usize) {
    let (lo, hi) = z.range(y, family.upper_bounds());
    let len = (hi - lo + 1) as usize;
    if len == 1 {
        return (0, 1);
    }
    buf.clear();
    let mut max = f64::NEG_INFINITY;
    for n in lo..=hi {
        let w: f64 = z.idx.iter().zip(&z.val).map(|(&i, &v)| family.cell_log_weight(lf, i, y[i] + n * v)).sum();
        max = max.max(w);
        buf.push(w);
    }
    let mut total = 0.0;
    for w in buf.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    let mut u = rng.gen::<f64>() * total;
    let mut pick = len - 1;
    for (j, w) in buf.iter().enumerate() {
        if u < *w {
            pick = j;
            break;
        }
        u -= w;
    }
    let n = lo + pick as i64;
    for (&i, &v) in z.idx.iter().zip(&z.val) {
        y[i] += n * v;
    }
    (n, len)
}

/// Binned recorded statistic values with the chi-square density at the
/// bin midpoints for overlay.
#[derive(Clone, Debug, Serialize)]
pub struct Histogram {
    pub lower: f64,
    pub width: f64,
    pub counts: Vec<u64>,
    pub chisq_density: Vec<f64>,
}

impl Histogram {
    fn build(values: &[f64], bins: usize, df: usize) -> Self {
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lower, span) = if values.is_empty() {
            (0.0, 1.0)
        } else if upper > lower {
            (lower, upper - lower)
        } else {
            (lower - 0.5, 1.0)
        };
        let width = span / bins as f64;
        let mut counts = vec![0u64; bins];
        for &v in values {
            let b = (((v - lower) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let chisq_density = (0..bins)
            .map(|b| if df > 0 { chisq_pdf(lower + (b as f64 + 0.5) * width, df) } else { 0.0 })
            .collect();
        Histogram { lower, width, counts, chisq_density }
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        self.lower + (bin as f64 + 0.5) * self.width
    }

    /// Empirical density of each bin.
    pub fn density(&self) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        self.counts.iter().map(|&c| c as f64 / (total.max(1) as f64 * self.width)).collect()
    }

    /// CSV with columns `midpoint,count,density,chisq_density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("midpoint,count,density,chisq_density\n");
        for (b, d) in self.density().iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", self.midpoint(b), self.counts[b], d, self.chisq_density[b]));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TestResult {
    pub statistic: Statistic,
    pub t_obs: f64,
    pub df: usize,
    pub p_asymptotic: Option<f64>,
    pub p_mcmc: f64,
    pub se_batch: f64,
    pub samples: u64,
    pub burn_in: u64,
    pub chains: usize,
    pub significant: u64,
    /// Fraction of steps whose feasible range had more than one point.
    pub mobility: f64,
    pub batch_means: Vec<f64>,
    pub histogram: Histogram,
}

struct ChainOutput {
    significant: u64,
    moving: u64,
    steps: u64,
    batch_means: Vec<f64>,
    values: Vec<f64>,
}

fn check_inputs(y0: &[i64], moves: &MoveSet, model: &NullModel) -> Result<()> {
    if moves.is_empty() {
        return Err(Error::EmptyMoveSet);
    }
    if !moves.is_bound_to(&model.matrix) {
        return Err(Error::Invalid("move set was built for a different configuration".into()));
    }
    if model.fitted.len() != y0.len() {
        return Err(Error::Dimension(format!("{} fitted values for {} cells", model.fitted.len(), y0.len())));
    }
    model.family.check_observation(y0)
}

fn chain<F: FnMut(&[i64])>(
    y0: &[i64],
    moves: &[SparseMove],
    model: &NullModel,
    cfg: &ChainConfig,
    stream: u64,
    mut observer: F,
) -> Result<ChainOutput> {
    let target = sufficient_statistic(&model.matrix, y0)?;
    let upper = model.family.upper_bounds();
    let lf = model.family.factorial_table(y0);
    let n = model.family.denominators();
    let cell = |i: usize, v: i64| model.statistic.cell(v, model.fitted[i], n.map(|n| n[i]));
    let t_obs = model.statistic_of(y0);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut y = y0.to_vec();
    let mut cells: Vec<f64> = y.iter().enumerate().map(|(i, &v)| cell(i, v)).collect();
    let mut buf = Vec::new();
    let total_steps = cfg.burn_in + cfg.samples;
    let mut out = ChainOutput {
        significant: 0,
        moving: 0,
        steps: total_steps,
        batch_means: Vec::with_capacity(cfg.batches),
        values: Vec::with_capacity(cfg.samples as usize),
    };
    let mut batch_hits = 0u64;
    let mut batch_end = cfg.samples / cfg.batches as u64;
    let mut batch_start = 0u64;
    for step in 0..total_steps {
        let z = &moves[rng.gen_range(0..moves.len())];
        let (shift, len) = step_sparse(&mut y, z, &model.family, &lf, &mut buf, &mut rng);
        if len > 1 {
            out.moving += 1;
        }
        if shift != 0 {
            for &i in &z.idx {
                cells[i] = cell(i, y[i]);
            }
        }
        observer(&y);
        if cfg!(debug_assertions) && (step + 1) % CHECK_INTERVAL == 0 && !in_fiber(&model.matrix, &target, upper, &y) {
            return Err(Error::NotInFiber(format!("chain left the fiber at step {}", step + 1)));
        }
        if step < cfg.burn_in {
            continue;
        }
        let r = step - cfg.burn_in;
        let t: f64 = cells.iter().sum();
        out.values.push(t);
        if at_least(t, t_obs) {
            out.significant += 1;
            batch_hits += 1;
        }
        if r + 1 == batch_end {
            out.batch_means.push(batch_hits as f64 / (batch_end - batch_start) as f64);
            batch_hits = 0;
            batch_start = batch_end;
            let b = out.batch_means.len() as u64 + 1;
            batch_end = cfg.samples * b / cfg.batches as u64;
        }
    }
    Ok(out)
}

fn summarize(outputs: Vec<ChainOutput>, t_obs: f64, model: &NullModel, cfg: &ChainConfig) -> TestResult {
    let chains = outputs.len();
    let samples = cfg.samples * chains as u64;
    let significant: u64 = outputs.iter().map(|o| o.significant).sum();
    let moving: u64 = outputs.iter().map(|o| o.moving).sum();
    let steps: u64 = outputs.iter().map(|o| o.steps).sum();
    let batch_means: Vec<f64> = outputs.iter().flat_map(|o| o.batch_means.iter().copied()).collect();
    let b = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<f64>() / b;
    let var = batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0);
    let values: Vec<f64> = outputs.iter().flat_map(|o| o.values.iter().copied()).collect();
    TestResult {
        statistic: model.statistic,
        t_obs,
        df: model.df,
        p_asymptotic: model.asymptotic_pvalue(t_obs),
        p_mcmc: significant as f64 / samples as f64,
        se_batch: (var / b).sqrt(),
        samples,
        burn_in: cfg.burn_in,
        chains,
        significant,
        mobility: moving as f64 / steps.max(1) as f64,
        batch_means,
        histogram: Histogram::build(&values, cfg.bins, model.df),
    }
}

/// Runs one chain from the observed table `y0`.
pub fn run_chain(y0: &[i64], moves: &MoveSet, model: &NullModel, cfg: &ChainConfig) -> Result<TestResult> {
    run_chain_observed(y0, moves, model, cfg, |_| {})
}

/// As [`run_chain`], calling `observer` with every visited state.
pub fn run_chain_observed<F: FnMut(&[i64])>(
    y0: &[i64],
    moves: &MoveSet,
    model: &NullModel,
    cfg: &ChainConfig,
    observer: F,
) -> Result<TestResult> {
    cfg.validate()?;
    check_inputs(y0, moves, model)?;
    let sparse: Vec<SparseMove> = moves.moves().iter().map(SparseMove::new).collect();
    let out = chain(y0, &sparse, model, cfg, 0, observer)?;
    Ok(summarize(vec![out], model.statistic_of(y0), model, cfg))
}

/// Runs `chains` independent chains on separate threads. Chain `c` uses
/// stream `c` of the generator seeded with `cfg.seed`; results pool the
/// batch means of all chains.
pub fn run_chains(y0: &[i64], moves: &MoveSet, model: &NullModel, cfg: &ChainConfig, chains: usize) -> Result<TestResult> {
    cfg.validate()?;
    check_inputs(y0, moves, model)?;
    if chains == 0 {
        return Err(Error::Invalid("need at least one chain".into()));
    }
    let sparse: Vec<SparseMove> = moves.moves().iter().map(SparseMove::new).collect();
    let outputs: Vec<Result<ChainOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..chains)
            .map(|c| {
                let sparse = &sparse;
                s.spawn(move || chain(y0, sparse, model, cfg, c as u64, |_| {}))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });
    let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarize(outputs, model.statistic_of(y0), model, cfg))
}
