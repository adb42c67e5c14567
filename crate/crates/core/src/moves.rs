//! Moves and move sets: integer kernel vectors used to walk a fiber.
//!
//! A computed move set is the Graver basis of the configuration: the
//! sign-compatibly irreducible (primitive) kernel vectors. It connects every
//! fiber, including the bounded fibers that arise from binomial data.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fiber::{enumerate_fiber, Budget};
use crate::formats::{parse_matrix, write_matrix};
use crate::lattice::{rank, IntMatrix};

/// A nonzero kernel vector stored with its first nonzero entry positive.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Move(Vec<i64>);

impl Move {
    /// Canonicalizes the sign; `None` for the zero vector.
    pub fn new(mut z: Vec<i64>) -> Option<Self> {
        let first = *z.iter().find(|&&v| v != 0)?;
        if first < 0 {
            z.iter_mut().for_each(|v| *v = -*v);
        }
        Some(Move(z))
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of the positive entries (equal to the negative part's sum when
    /// the configuration contains the intercept row).
    pub fn degree(&self) -> i64 {
        self.0.iter().filter(|&&v| v > 0).sum()
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }
}

impl fmt::Debug for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Move{:?}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Computed,
    Imported,
    Primitive,
}

/// A validated, duplicate-free set of moves bound to one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct MoveSet {
    moves: Vec<Move>,
    provenance: Provenance,
    fingerprint: String,
}

/// Short hex digest identifying a configuration matrix.
pub fn matrix_fingerprint(matrix: &[Vec<i64>]) -> String {
    let cols = matrix.first().map_or(0, Vec::len);
    let digest = Sha256::digest(write_matrix(matrix, cols).as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn apply_row(row: &[i64], z: &[i64]) -> i64 {
    row.iter().zip(z).map(|(a, b)| a * b).sum()
}

impl MoveSet {
    /// Validates kernel membership of every vector and removes duplicates
    /// up to sign. Errors report 1-based row numbers.
    pub fn new(matrix: &[Vec<i64>], vectors: Vec<Vec<i64>>, provenance: Provenance) -> Result<Self> {
        let cols = matrix.first().map_or(0, Vec::len);
        let mut seen = HashSet::new();
        let mut moves = Vec::with_capacity(vectors.len());
        for (i, z) in vectors.into_iter().enumerate() {
            if z.len() != cols {
                return Err(Error::Dimension(format!("move {} has length {}, configuration has {} columns", i + 1, z.len(), cols)));
            }
            if let Some(r) = matrix.iter().position(|row| apply_row(row, &z) != 0) {
                return Err(Error::InvalidMove { row: i + 1, reason: format!("not in the kernel (row {} of the matrix gives nonzero)", r + 1) });
            }
            let m = Move::new(z).ok_or_else(|| Error::InvalidMove { row: i + 1, reason: "zero vector".into() })?;
            if seen.insert(m.clone()) {
                moves.push(m);
            }
        }
        Ok(MoveSet { moves, provenance, fingerprint: matrix_fingerprint(matrix) })
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Length of each move (number of cells).
    pub fn cells(&self) -> Option<usize> {
        self.moves.first().map(Move::len)
    }

    pub fn is_bound_to(&self, matrix: &[Vec<i64>]) -> bool {
        self.fingerprint == matrix_fingerprint(matrix)
    }

    /// Basis file text: `count length` header then one move per line.
    pub fn to_text(&self) -> String {
        let rows: Vec<Vec<i64>> = self.moves.iter().map(|m| m.0.clone()).collect();
        write_matrix(&rows, self.cells().unwrap_or(0))
    }

    /// Keeps only the moves selected by `keep`; the result stays bound to the
    /// same configuration.
    pub fn filtered<F: FnMut(&Move) -> bool>(&self, mut keep: F) -> MoveSet {
        let moves = self.moves.iter().filter(|m| keep(m)).cloned().collect();
        MoveSet { moves, provenance: self.provenance, fingerprint: self.fingerprint.clone() }
    }

    /// Restricts each move to its first `cells` entries, e.g. the observed
    /// half of a Lawrence-lifted move. The result is bound to `matrix`.
    pub fn project(&self, matrix: &[Vec<i64>], cells: usize) -> Result<MoveSet> {
        let vectors = self.moves.iter().map(|m| m.0[..cells].to_vec()).collect();
        MoveSet::new(matrix, vectors, self.provenance)
    }
}

/// Parses a basis file and validates it against `matrix`.
pub fn import_basis(text: &str, matrix: &[Vec<i64>]) -> Result<MoveSet> {
    if text.trim().is_empty() {
        return Err(Error::parse(1, "empty basis file"));
    }
    let rows = parse_matrix(text)?;
    MoveSet::new(matrix, rows, Provenance::Imported)
}

/// Limits on the completion procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CompletionOptions {
    /// Abort once the working set holds more than this many vectors.
    pub max_elements: usize,
    /// Abort if a candidate's 1-norm exceeds this.
    pub max_norm: i64,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        CompletionOptions { max_elements: 100_000, max_norm: 1_000 }
    }
}

/// Packed vector with sign-support bitmasks for fast conformality checks.
#[derive(Clone)]
struct Elem {
    v: Vec<i64>,
    pos: Vec<u64>,
    neg: Vec<u64>,
    norm: i64,
}

impl Elem {
    fn new(v: Vec<i64>) -> Self {
        let words = v.len().div_ceil(64).max(1);
        let mut pos = vec![0u64; words];
        let mut neg = vec![0u64; words];
        for (i, &x) in v.iter().enumerate() {
            if x > 0 {
                pos[i / 64] |= 1 << (i % 64);
            } else if x < 0 {
                neg[i / 64] |= 1 << (i % 64);
            }
        }
        let norm = v.iter().map(|x| x.abs()).sum();
        Elem { v, pos, neg, norm }
    }

    fn negated(&self) -> Elem {
        Elem { v: self.v.iter().map(|x| -x).collect(), pos: self.neg.clone(), neg: self.pos.clone(), norm: self.norm }
    }

    /// `self ⊑ other`: same signs where nonzero and no larger in magnitude.
    fn conformal_le(&self, other: &Elem) -> bool {
        self.norm <= other.norm
            && self.pos.iter().zip(&other.pos).all(|(a, b)| a & !b == 0)
            && self.neg.iter().zip(&other.neg).all(|(a, b)| a & !b == 0)
            && self.v.iter().zip(&other.v).all(|(a, b)| a.abs() <= b.abs())
    }

    /// Whether the two vectors have opposite signs in some coordinate.
    fn cancels_with(&self, other: &Elem) -> bool {
        self.pos.iter().zip(&other.neg).any(|(a, b)| a & b != 0) || self.neg.iter().zip(&other.pos).any(|(a, b)| a & b != 0)
    }
}

/// Working set holding both signs of every element.
struct Pool {
    elems: Vec<Elem>,
}

impl Pool {
    /// Reduces `s` by sign-compatible subtraction until irreducible.
    fn normal_form(&self, mut s: Elem) -> Option<Elem> {
        'outer: loop {
            if s.norm == 0 {
                return None;
            }
            for g in &self.elems {
                if g.conformal_le(&s) {
                    let v: Vec<i64> = s.v.iter().zip(&g.v).map(|(a, b)| a - b).collect();
                    s = Elem::new(v);
                    continue 'outer;
                }
            }
            return Some(s);
        }
    }
}

/// Completes a lattice basis to the Graver basis.
///
/// Starting from `±basis`, sums `f + g` of working-set elements are reduced
/// by sign-compatible subtraction and any nonzero remainder joins the set;
/// candidate pairs are processed FIFO within buckets of increasing 1-norm.
/// At the fixpoint the inclusion-minimal elements under `⊑` are exactly
/// the primitive kernel vectors.
pub fn graver_completion(basis: &[Vec<i64>], options: CompletionOptions) -> Result<Vec<Move>> {
    let Some(n) = basis.first().map(Vec::len) else { return Ok(Vec::new()) };
    if basis.iter().any(|b| b.len() != n) {
        return Err(Error::Dimension("ragged lattice basis".into()));
    }
    let mut pool = Pool { elems: Vec::new() };
    // Canonical representatives; pool.elems[2i], [2i+1] are ±reps[i].
    let mut queue: BTreeMap<i64, VecDeque<(u32, u32)>> = BTreeMap::new();
    let push_pairs = |pool: &Pool, queue: &mut BTreeMap<i64, VecDeque<(u32, u32)>>, i: usize| {
        let f = &pool.elems[2 * i];
        for (j, g) in pool.elems.iter().enumerate() {
            if j / 2 == i || !f.cancels_with(g) {
                continue;
            }
            let norm: i64 = f.v.iter().zip(&g.v).map(|(a, b)| (a + b).abs()).sum();
            queue.entry(norm).or_default().push_back((i as u32, j as u32));
        }
    };
    for b in basis {
        let e = Elem::new(b.clone());
        if let Some(e) = pool.normal_form(e) {
            let idx = pool.elems.len() / 2;
            let neg = e.negated();
            pool.elems.push(e);
            pool.elems.push(neg);
            push_pairs(&pool, &mut queue, idx);
        }
    }
    while let Some(mut entry) = queue.first_entry() {
        let (i, j) = entry.get_mut().pop_front().expect("buckets are never left empty");
        if entry.get().is_empty() {
            entry.remove();
        }
        let (f, g) = (&pool.elems[2 * i as usize], &pool.elems[j as usize]);
        let sum = Elem::new(f.v.iter().zip(&g.v).map(|(a, b)| a + b).collect());
        if sum.norm > options.max_norm {
            return Err(Error::CompletionBudget(format!("candidate 1-norm {} exceeds {}", sum.norm, options.max_norm)));
        }
        if let Some(r) = pool.normal_form(sum) {
            let idx = pool.elems.len() / 2;
            if idx >= options.max_elements {
                return Err(Error::CompletionBudget(format!("more than {} vectors", options.max_elements)));
            }
            let neg = r.negated();
            pool.elems.push(r);
            pool.elems.push(neg);
            push_pairs(&pool, &mut queue, idx);
        }
    }
    // Keep the ⊑-minimal elements.
    let reps: Vec<&Elem> = pool.elems.iter().step_by(2).collect();
    let mut out: Vec<Move> = reps
        .iter()
        .enumerate()
        .filter(|(i, e)| {
            !pool.elems.iter().enumerate().any(|(j, g)| j / 2 != *i && g.conformal_le(e) && g.v != e.v)
        })
        .filter_map(|(_, e)| Move::new(e.v.clone()))
        .collect();
    out.sort_by(|a, b| a.l1_norm().cmp(&b.l1_norm()).then_with(|| b.cmp(a)));
    out.dedup();
    Ok(out)
}

/// Whether `v` is a sum of sign-compatible elements of `moves` (with either sign).
pub fn reduces_to_zero(v: &[i64], moves: &[Move]) -> bool {
    let mut pool = Pool { elems: Vec::with_capacity(2 * moves.len()) };
    for m in moves {
        let e = Elem::new(m.as_slice().to_vec());
        pool.elems.push(e.negated());
        pool.elems.push(e);
    }
    pool.normal_form(Elem::new(v.to_vec())).is_none()
}

/// Outcome of an exhaustive connectivity check on one fiber.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectivityReport {
    pub points: usize,
    pub components: usize,
    /// Two points in different components, when disconnected.
    pub witness: Option<(Vec<i64>, Vec<i64>)>,
}

impl ConnectivityReport {
    pub fn is_connected(&self) -> bool {
        self.components <= 1
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Connected components of the graph on `points` with edges `y ~ y ± z`.
pub fn components(points: &[Vec<i64>], moves: &[Move]) -> (usize, Vec<usize>) {
    let index: HashMap<&[i64], usize> = points.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let mut uf = UnionFind::new(points.len());
    let mut next = Vec::new();
    for (i, y) in points.iter().enumerate() {
        for m in moves {
            next.clear();
            next.extend(y.iter().zip(m.as_slice()).map(|(a, b)| a + b));
            if let Some(&j) = index.get(next.as_slice()) {
                uf.union(i, j);
            }
        }
    }
    let labels: Vec<usize> = (0..points.len()).map(|i| uf.find(i)).collect();
    let count = labels.iter().enumerate().filter(|(i, &l)| *i == l).count();
    (count, labels)
}

/// Enumerates the fiber `{y >= 0 : A y = t, y <= upper}` and checks that
/// `moves` connect it.
pub fn verify_connectivity(
    moves: &MoveSet,
    matrix: &[Vec<i64>],
    target: &[i64],
    upper: Option<&[i64]>,
    budget: Budget,
) -> Result<ConnectivityReport> {
    if let Some(c) = moves.cells() {
        if matrix.first().is_some_and(|r| r.len() != c) {
            return Err(Error::Dimension("move length differs from matrix columns".into()));
        }
    }
    let fiber = enumerate_fiber(matrix, target, upper, budget)?;
    let points = fiber.points();
    let (count, labels) = components(points, moves.moves());
    let witness = (count > 1).then(|| {
        let other = labels.iter().position(|&l| l != labels[0]).expect("more than one component");
        (points[0].clone(), points[other].clone())
    });
    Ok(ConnectivityReport { points: points.len(), components: count, witness })
}

/// Connectivity of every fiber whose points have a given total.
#[derive(Clone, Debug, Serialize)]
pub struct TotalSweep {
    pub total: i64,
    pub points: usize,
    pub fibers: usize,
    pub disconnected: usize,
    pub witness: Option<(Vec<i64>, Vec<i64>)>,
}

fn compositions(total: i64, cells: usize, out: &mut Vec<Vec<i64>>) {
    fn rec(left: i64, cell: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cell + 1 == cur.len() {
            cur[cell] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[cell] = v;
            rec(left - v, cell + 1, cur, out);
        }
    }
    let mut cur = vec![0; cells];
    if cells > 0 {
        rec(total, 0, &mut cur, out);
    }
}

fn binomial_count(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i + 1) as u128)
}

/// Checks every fiber of `matrix` with total `0..=max_total` at once: all
/// nonnegative vectors of each total are generated and split into fibers.
/// The all-ones vector must lie in the row space so that totals are fixed
/// on fibers.
pub fn connectivity_by_total(moves: &MoveSet, matrix: &[Vec<i64>], max_total: i64, budget: Budget) -> Result<Vec<TotalSweep>> {
    let cells = matrix.first().map_or(0, Vec::len);
    if cells == 0 {
        return Err(Error::Dimension("empty configuration".into()));
    }
    if moves.cells().is_some_and(|c| c != cells) {
        return Err(Error::Dimension("move length differs from matrix columns".into()));
    }
    let a = IntMatrix::from_rows(matrix)?;
    let mut with_ones = matrix.to_vec();
    with_ones.push(vec![1; cells]);
    if rank(&IntMatrix::from_rows(&with_ones)?) != rank(&a) {
        return Err(Error::Invalid("the total is not determined by the configuration".into()));
    }
    let mut out = Vec::new();
    for t in 0..=max_total.max(0) {
        let count = binomial_count(t as u64 + cells as u64 - 1, cells as u64 - 1);
        if count > budget.max_points as u128 {
            return Err(Error::FiberTooLarge(format!("{count} vectors of total {t} exceed the limit of {}", budget.max_points)));
        }
        let mut points = Vec::with_capacity(count as usize);
        compositions(t, cells, &mut points);
        let (_, labels) = components(&points, moves.moves());
        let mut fibers: HashMap<Vec<i64>, (usize, usize)> = HashMap::new();
        let mut disconnected = 0;
        let mut witness = None;
        for (i, y) in points.iter().enumerate() {
            let target: Vec<i64> = matrix.iter().map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
            match fibers.get_mut(&target) {
                None => {
                    fibers.insert(target, (i, 0));
                }
                Some((first, broken)) => {
                    if labels[i] != labels[*first] && *broken == 0 {
                        *broken = 1;
                        disconnected += 1;
                        if witness.is_none() {
                            witness = Some((points[*first].clone(), y.clone()));
                        }
                    }
                }
            }
        }
        out.push(TotalSweep { total: t, points: points.len(), fibers: fibers.len(), disconnected, witness });
    }
    Ok(out)
}
