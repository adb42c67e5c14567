//! Exact integer linear algebra over arbitrary-precision integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds from `i64` rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.as_ref().iter().map(|&v| BigInt::from(v))).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for l in 0..self.cols {
                    acc += self.get(i, l) * other.get(l, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `A * v` for an `i64` vector.
    pub fn apply(&self, v: &[i64]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, &x)| a * x).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Entries as `i64`, failing if any entry overflows.
    pub fn to_i64_rows(&self) -> Result<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|v| v.to_i64().ok_or_else(|| Error::Numeric(format!("entry {v} exceeds i64"))))
                    .collect()
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = -&*v;
        }
    }

    /// row[target] -= factor * row[source]
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let delta = factor * &self.data[source * self.cols + c];
            self.data[target * self.cols + c] -= delta;
        }
    }

    /// Replaces rows (a, b) with (s*a + t*b, u*a + v*b).
    fn combine_rows(&mut self, a: usize, b: usize, s: &BigInt, t: &BigInt, u: &BigInt, v: &BigInt) {
        for c in 0..self.cols {
            let x = self.data[a * self.cols + c].clone();
            let y = self.data[b * self.cols + c].clone();
            self.data[a * self.cols + c] = s * &x + t * &y;
            self.data[b * self.cols + c] = u * &x + v * &y;
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Row-style Hermite normal form with its unimodular transform.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Column index of the pivot of each nonzero row of `h`, in row order.
    pub pivots: Vec<usize>,
}

impl Hermite {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Computes `U * A = H` with `U` unimodular and `H` in row echelon form:
/// positive pivots, entries above each pivot reduced into `[0, pivot)`, and
/// zero rows at the bottom.
pub fn hermite_normal_form(a: &IntMatrix) -> Hermite {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.rows);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        // Move a nonzero entry of smallest magnitude to the pivot row first.
        let best = (r..a.rows)
            .filter(|&i| !h.get(i, c).is_zero())
            .min_by(|&i, &j| h.get(i, c).abs().cmp(&h.get(j, c).abs()));
        let Some(best) = best else { continue };
        h.swap_rows(r, best);
        u.swap_rows(r, best);
        for i in (r + 1)..a.rows {
            if h.get(i, c).is_zero() {
                continue;
            }
            let x = h.get(r, c).clone();
            let y = h.get(i, c).clone();
            let eg = x.extended_gcd(&y);
            let g = eg.gcd;
            // [s t; -y/g x/g] has determinant (s*x + t*y)/g = 1.
            let (s, t) = (eg.x, eg.y);
            let uu = -(&y / &g);
            let vv = &x / &g;
            h.combine_rows(r, i, &s, &t, &uu, &vv);
            u.combine_rows(r, i, &s, &t, &uu, &vv);
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let pivot = h.get(r, c).clone();
        for i in 0..r {
            let q = h.get(i, c).div_floor(&pivot);
            h.sub_row_multiple(i, r, &q);
            u.sub_row_multiple(i, r, &q);
        }
        pivots.push(c);
        r += 1;
    }
    Hermite { h, u, pivots }
}

pub fn rank(a: &IntMatrix) -> usize {
    hermite_normal_form(a).rank()
}

/// A basis of the saturated lattice `{z in Z^n : A z = 0}`.
///
/// Obtained from the HNF of `A^T`: rows of the unimodular transform that map
/// to zero rows span the integer kernel. The result is then size-reduced
/// pairwise so that entries stay small.
pub fn kernel_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let hnf = hermite_normal_form(&a.transpose());
    let rank = hnf.rank();
    let mut basis: Vec<Vec<BigInt>> = (rank..a.cols).map(|r| hnf.u.row(r).to_vec()).collect();
    size_reduce(&mut basis);
    basis
}

/// Kernel basis with `i64` entries.
pub fn kernel_basis_i64(a: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    kernel_basis(a)
        .into_iter()
        .map(|v| {
            v.iter()
                .map(|x| x.to_i64().ok_or_else(|| Error::Numeric(format!("kernel entry {x} exceeds i64"))))
                .collect()
        })
        .collect()
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pairwise size reduction: subtract the nearest-integer multiple of another
/// basis vector whenever that strictly shortens a vector, until no pair improves.
fn size_reduce(basis: &mut [Vec<BigInt>]) {
    let n = basis.len();
    let two = BigInt::from(2);
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let nj = dot(&basis[j], &basis[j]);
                if nj.is_zero() {
                    continue;
                }
                let ip = dot(&basis[i], &basis[j]);
                // nearest integer to ip / nj
                let mu = (&ip * &two + &nj).div_floor(&(&nj * &two));
                if mu.is_zero() {
                    continue;
                }
                let candidate: Vec<BigInt> = basis[i].iter().zip(&basis[j]).map(|(x, y)| x - &mu * y).collect();
                if dot(&candidate, &candidate) < dot(&basis[i], &basis[i]) {
                    basis[i] = candidate;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Whether `v` lies in the integer row lattice spanned by `generators`.
pub fn lattice_contains(generators: &[Vec<i64>], v: &[i64]) -> bool {
    if generators.is_empty() {
        return v.iter().all(|&x| x == 0);
    }
    let Ok(m) = IntMatrix::from_rows(generators) else { return false };
    if m.cols() != v.len() {
        return false;
    }
    let hnf = hermite_normal_form(&m);
    let mut rem: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
    for c in 0..v.len() {
        if rem[c].is_zero() {
            continue;
        }
        let Some(row) = hnf.pivots.iter().position(|&p| p == c) else { return false };
        let pivot = hnf.h.get(row, c);
        let (q, r) = rem[c].div_rem(pivot);
        if !r.is_zero() {
            return false;
        }
        for (k, x) in rem.iter_mut().enumerate() {
            *x -= &q * hnf.h.get(row, k);
        }
    }
    true
}
