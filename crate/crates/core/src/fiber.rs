//! Exhaustive enumeration of small fibers and exact conditional p-values.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::Family;

/// Relative tolerance used when comparing a statistic against its observed
/// value, so that floating-point noise does not break ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// `T(y) >= t_obs`, counting floating-point near-ties as ties.
#[inline]
pub fn at_least(value: f64, observed: f64) -> bool {
    value >= observed - TIE_TOLERANCE * observed.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_points: usize,
    pub max_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_points: 2_000_000, max_nodes: 200_000_000 }
    }
}

/// All nonnegative integer points `y` with `A y = t` (and `y <= upper`).
#[derive(Clone, Debug, Serialize)]
pub struct Fiber {
    matrix: Vec<Vec<i64>>,
    target: Vec<i64>,
    upper: Option<Vec<i64>>,
    points: Vec<Vec<i64>>,
}

impl Fiber {
    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn target(&self) -> &[i64] {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn upper(&self) -> Option<&[i64]> {
        self.upper.as_deref()
    }

    pub fn index_of(&self, y: &[i64]) -> Option<usize> {
        self.points.binary_search_by(|p| p.as_slice().cmp(y)).ok()
    }

    /// Whether `y` satisfies the fiber's defining constraints.
    pub fn admits(&self, y: &[i64]) -> bool {
        in_fiber(&self.matrix, &self.target, self.upper.as_deref(), y)
    }
}

pub fn in_fiber(matrix: &[Vec<i64>], target: &[i64], upper: Option<&[i64]>, y: &[i64]) -> bool {
    y.iter().all(|&v| v >= 0)
        && upper.is_none_or(|u| y.iter().zip(u).all(|(a, b)| a <= b))
        && matrix.iter().zip(target).all(|(row, &t)| row.iter().zip(y).map(|(a, b)| a * b).sum::<i64>() == t)
}

const INF: i128 = 1 << 100;

struct Search<'a> {
    rows: &'a [Vec<i64>],
    target: &'a [i64],
    order: Vec<usize>,
    budget: Budget,
    nodes: u64,
    points: Vec<Vec<i64>>,
}

impl Search<'_> {
    /// Tightens the box `[lo, hi]` until stable; false when infeasible.
    fn propagate(&self, lo: &mut [i128], hi: &mut [i128]) -> bool {
        loop {
            let mut changed = false;
            for (row, &t) in self.rows.iter().zip(self.target) {
                let t = i128::from(t);
                let mut fin_min = 0i128;
                let mut fin_max = 0i128;
                let mut neg_inf = 0usize;
                let mut pos_inf = 0usize;
                for (j, &a) in row.iter().enumerate() {
                    let a = i128::from(a);
                    if a > 0 {
                        fin_min += a * lo[j];
                        if hi[j] >= INF { pos_inf += 1 } else { fin_max += a * hi[j] }
                    } else if a < 0 {
                        fin_max += a * lo[j];
                        if hi[j] >= INF { neg_inf += 1 } else { fin_min += a * hi[j] }
                    }
                }
                if (neg_inf == 0 && fin_min > t) || (pos_inf == 0 && fin_max < t) {
                    return false;
                }
                for (j, &a) in row.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    let a = i128::from(a);
                    let j_inf = hi[j] >= INF;
                    // Contribution range of the other cells.
                    let (other_min, other_max) = if a > 0 {
                        let omin = (neg_inf == 0).then(|| fin_min - a * lo[j]);
                        let omax = (pos_inf - usize::from(j_inf) == 0).then(|| fin_max - if j_inf { 0 } else { a * hi[j] });
                        (omin, omax)
                    } else {
                        let omin = (neg_inf - usize::from(j_inf) == 0).then(|| fin_min - if j_inf { 0 } else { a * hi[j] });
                        let omax = (pos_inf == 0).then(|| fin_max - a * lo[j]);
                        (omin, omax)
                    };
                    // a*y_j in [t - other_max, t - other_min]
                    let (new_lo, new_hi) = if a > 0 {
                        (other_max.map(|m| div_ceil(t - m, a)), other_min.map(|m| div_floor(t - m, a)))
                    } else {
                        (other_min.map(|m| div_ceil(t - m, a)), other_max.map(|m| div_floor(t - m, a)))
                    };
                    if let Some(v) = new_lo {
                        if v > lo[j] {
                            lo[j] = v;
                            changed = true;
                        }
                    }
                    if let Some(v) = new_hi {
                        if v < hi[j] {
                            hi[j] = v;
                            changed = true;
                        }
                    }
                    if lo[j] > hi[j] {
                        return false;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn descend(&mut self, mut lo: Vec<i128>, mut hi: Vec<i128>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(Error::FiberTooLarge(format!("more than {} search nodes", self.budget.max_nodes)));
        }
        if !self.propagate(&mut lo, &mut hi) {
            return Ok(());
        }
        let Some(&cell) = self.order.iter().find(|&&j| lo[j] < hi[j]) else {
            // Every cell fixed and all rows satisfied.
            if self.points.len() >= self.budget.max_points {
                return Err(Error::FiberTooLarge(format!("more than {} points", self.budget.max_points)));
            }
            self.points.push(lo.iter().map(|&v| v as i64).collect());
            return Ok(());
        };
        if hi[cell] >= INF {
            return Err(Error::UnboundedFiber(cell));
        }
        for v in lo[cell]..=hi[cell] {
            let mut l = lo.clone();
            let mut h = hi.clone();
            l[cell] = v;
            h[cell] = v;
            self.descend(l, h)?;
        }
        Ok(())
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) { q - 1 } else { q }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) { q + 1 } else { q }
}

/// Depth-first enumeration with interval propagation. Cells are branched
/// in order of decreasing column infinity-norm. Points are returned sorted.
pub fn enumerate_fiber(matrix: &[Vec<i64>], target: &[i64], upper: Option<&[i64]>, budget: Budget) -> Result<Fiber> {
    if matrix.len() != target.len() {
        return Err(Error::Dimension(format!("{} rows but {} target entries", matrix.len(), target.len())));
    }
    let k = matrix.first().map_or_else(|| upper.map_or(0, <[i64]>::len), Vec::len);
    if matrix.iter().any(|r| r.len() != k) || upper.is_some_and(|u| u.len() != k) {
        return Err(Error::Dimension("ragged fiber constraints".into()));
    }
    let mut order: Vec<usize> = (0..k).collect();
    let norm = |j: usize| matrix.iter().map(|r| r[j].abs()).max().unwrap_or(0);
    order.sort_by_key(|&j| std::cmp::Reverse(norm(j)));
    let lo = vec![0i128; k];
    let hi: Vec<i128> = match upper {
        Some(u) => u.iter().map(|&v| i128::from(v)).collect(),
        None => vec![INF; k],
    };
    let mut search = Search { rows: matrix, target, order, budget, nodes: 0, points: Vec::new() };
    search.descend(lo, hi)?;
    let mut points = search.points;
    points.sort();
    Ok(Fiber { matrix: matrix.to_vec(), target: target.to_vec(), upper: upper.map(<[i64]>::to_vec), points })
}

/// Exact conditional probabilities of every fiber point, in point order.
pub fn exact_null_distribution(fiber: &Fiber, family: &Family) -> Vec<f64> {
    let Some(first) = fiber.points.first() else { return Vec::new() };
    let lf = family.factorial_table(first);
    let logw: Vec<f64> = fiber.points.iter().map(|y| family.log_weight(&lf, y)).collect();
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `sum_y f(y) 1(T(y) >= t_obs)` over the fiber.
pub fn exact_pvalue<T: Fn(&[i64]) -> f64>(fiber: &Fiber, family: &Family, statistic: T, t_obs: f64) -> f64 {
    let probs = exact_null_distribution(fiber, family);
    let p: f64 = fiber.points.iter().zip(&probs).filter(|(y, _)| at_least(statistic(y), t_obs)).map(|(_, p)| p).sum();
    p.min(1.0)
}
