//! Correspondence between fractional factorial null models and models for
//! `2^m` contingency tables, and degree-two move sets for decomposable
//! table models.
//!
//! Cells of a `2^m` table are indexed lexicographically with axis 1
//! slowest; level 1 of an axis is the `+1` level. With the basic factors
//! as axes this is exactly the run order of the design matrix.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::design::{build_design_matrix, expand_defining_contrast, DesignSpec, Word};
use crate::error::{Error, Result};
use crate::lattice::{rank, IntMatrix};
use crate::model::{build_covariate_matrix, lawrence_lift, ModelSpec};
use crate::moves::{MoveSet, Provenance};

/// Sum of cells with given levels on `conditioning`, split by the sign of
/// the `word` contrast. With empty `conditioning` this is the pair of
/// alternating sums, e.g. `y111+y122+y212+y221` and its complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ParityTerm {
    pub word: Word,
    pub conditioning: Word,
}

impl fmt::Display for ParityTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conditioning.is_identity() {
            write!(f, "({})", self.word)
        } else {
            write!(f, "({}|{})", self.word, self.conditioning)
        }
    }
}

/// A model for a `2^m` table: margins plus optional parity terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableModel {
    pub axes: usize,
    pub margins: Vec<Word>,
    pub extras: Vec<ParityTerm>,
}

impl TableModel {
    pub fn hierarchical(axes: usize, margins: Vec<Word>) -> Result<Self> {
        Self::new(axes, margins, Vec::new())
    }

    pub fn new(axes: usize, mut margins: Vec<Word>, mut extras: Vec<ParityTerm>) -> Result<Self> {
        if axes == 0 || axes > 16 {
            return Err(Error::Invalid(format!("tables with {axes} axes are not supported")));
        }
        let full = Word::from_bits((1u32 << axes) - 1);
        for w in margins.iter().chain(extras.iter().flat_map(|e| [&e.word, &e.conditioning])) {
            if !w.is_subword_of(full) {
                return Err(Error::Invalid(format!("{w} uses an axis beyond {axes}")));
            }
        }
        margins.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        margins.dedup();
        extras.sort();
        extras.dedup();
        Ok(TableModel { axes, margins, extras })
    }

    /// Parses `AB/AC + (ABC) + (ABC|D)`.
    pub fn parse(axes: usize, text: &str) -> Result<Self> {
        let mut parts = text.split('+').map(str::trim);
        let head = parts.next().unwrap_or("");
        let margins = if head.is_empty() || head == "1" {
            Vec::new()
        } else {
            head.split('/').map(|w| Word::parse(w.trim())).collect::<Result<_>>()?
        };
        let mut extras = Vec::new();
        for p in parts {
            let inner = p
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::Invalid(format!("extra term \"{p}\" must be parenthesized")))?;
            let (w, s) = inner.split_once('|').unwrap_or((inner, ""));
            let conditioning = if s.trim().is_empty() { Word::IDENTITY } else { Word::parse(s.trim())? };
            extras.push(ParityTerm { word: Word::parse(w.trim())?, conditioning });
        }
        TableModel::new(axes, margins, extras)
    }

    pub fn cells(&self) -> usize {
        1 << self.axes
    }

    pub fn is_hierarchical(&self) -> bool {
        self.extras.is_empty()
    }
}

impl fmt::Display for TableModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.margins.iter().map(Word::to_string).collect();
        f.write_str(if m.is_empty() { "1".into() } else { m.join("/") }.as_str())?;
        for e in &self.extras {
            write!(f, " + {e}")?;
        }
        Ok(())
    }
}

/// Level index (0 or 1) of `axis` in `cell`.
fn level(cell: usize, axis: usize, axes: usize) -> usize {
    (cell >> (axes - 1 - axis)) & 1
}

/// `+1`/`-1` value of the contrast `w` at `cell`.
fn character(w: Word, cell: usize, axes: usize) -> i64 {
    if w.factors().filter(|&a| level(cell, a, axes) == 1).count() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Index of the levels of the axes in `w` at `cell`, as a number in `0..2^|w|`.
fn margin_cell(w: Word, cell: usize, axes: usize) -> usize {
    w.factors().fold(0, |acc, a| acc * 2 + level(cell, a, axes))
}

/// Rows: one 0/1 indicator per cell of each margin, then for each parity
/// term the indicators of (conditioning levels, contrast sign).
pub fn table_model_matrix(tm: &TableModel) -> Vec<Vec<i64>> {
    let (m, cells) = (tm.axes, tm.cells());
    let mut rows = Vec::new();
    for &margin in &tm.margins {
        for target in 0..1usize << margin.len() {
            rows.push((0..cells).map(|c| i64::from(margin_cell(margin, c, m) == target)).collect());
        }
    }
    for e in &tm.extras {
        for target in 0..1usize << e.conditioning.len() {
            for sign in [1, -1] {
                rows.push(
                    (0..cells)
                        .map(|c| i64::from(margin_cell(e.conditioning, c, m) == target && character(e.word, c, m) == sign))
                        .collect(),
                );
            }
        }
    }
    rows
}

fn rank_of(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    rank(&IntMatrix::from_rows(rows).expect("rows have equal length"))
}

/// Whether the two matrices have the same row space over the rationals,
/// i.e. each statistic is an invertible linear function of the other.
pub fn equivalent_sufficient_statistics(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let cols = |m: &[Vec<i64>]| m.first().map(Vec::len);
    if let (Some(x), Some(y)) = (cols(a), cols(b)) {
        if x != y {
            return false;
        }
    }
    let ra = rank_of(a);
    let rb = rank_of(b);
    ra == rb && rank_of(&[a, b].concat()) == ra
}

/// All antichains of nonempty axis sets, i.e. generating classes of the
/// hierarchical models on `axes` axes (including the empty class).
pub fn hierarchical_models(axes: usize) -> Vec<Vec<Word>> {
    let subsets: Vec<Word> = (1..1u32 << axes).map(Word::from_bits).collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn extend(i: usize, subsets: &[Word], current: &mut Vec<Word>, out: &mut Vec<Vec<Word>>) {
        if i == subsets.len() {
            out.push(current.clone());
            return;
        }
        extend(i + 1, subsets, current, out);
        let w = subsets[i];
        if current.iter().all(|&c| !c.is_subword_of(w) && !w.is_subword_of(c)) {
            current.push(w);
            extend(i + 1, subsets, current, out);
            current.pop();
        }
    }
    extend(0, &subsets, &mut current, &mut out);
    out
}

/// Configuration of the null model with columns in table cell order.
/// For binomial data the lifted configuration is used and the success /
/// failure split becomes an extra, last axis.
pub fn null_model_configuration(spec: &DesignSpec, model: &ModelSpec, lifted: bool) -> Result<(usize, Vec<Vec<i64>>)> {
    let design = build_design_matrix(spec);
    let x0t = build_covariate_matrix(&design, model)?.transpose_int();
    let m = spec.basic_factors();
    if !lifted {
        return Ok((m, x0t.to_i64_rows()?));
    }
    let k = spec.runs();
    let lifted = lawrence_lift(&x0t).matrix().to_i64_rows()?;
    // lifted column `half * k + run` is table cell `2 * run + half`
    let rows = lifted
        .iter()
        .map(|r| (0..2 * k).map(|cell| r[(cell % 2) * k + cell / 2]).collect())
        .collect();
    Ok((m + 1, rows))
}

/// Contrasts whose `±1` rows lie in the row space of `matrix`.
fn contained_characters(matrix: &[Vec<i64>], axes: usize) -> (BTreeSet<Word>, usize) {
    let base = rank_of(matrix);
    let cells = 1usize << axes;
    let set = (0..1u32 << axes)
        .map(Word::from_bits)
        .filter(|&w| {
            let row: Vec<i64> = (0..cells).map(|c| character(w, c, axes)).collect();
            let mut ext = matrix.to_vec();
            ext.push(row);
            rank_of(&ext) == base
        })
        .collect();
    (set, base)
}

/// Outcome of the correspondence search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Correspondence {
    /// Equivalent to a hierarchical table model.
    Hierarchical(TableModel),
    /// Equivalent to a hierarchical model plus parity terms.
    WithExtras(TableModel),
    /// No equivalent table model of the searched forms.
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrespondenceReport {
    pub axes: usize,
    pub lifted: bool,
    pub verdict: Correspondence,
}

impl CorrespondenceReport {
    pub fn table_model(&self) -> Option<&TableModel> {
        match &self.verdict {
            Correspondence::Hierarchical(t) | Correspondence::WithExtras(t) => Some(t),
            Correspondence::None => None,
        }
    }
}

impl fmt::Display for CorrespondenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Correspondence::Hierarchical(t) => write!(f, "hierarchical model of the 2^{} table: {t}", self.axes),
            Correspondence::WithExtras(t) => write!(f, "model of the 2^{} table with parity terms: {t}", self.axes),
            Correspondence::None => write!(f, "no corresponding model of the 2^{} table", self.axes),
        }
    }
}

/// Searches every hierarchical model on `axes` axes for one with the same
/// row space as `matrix`.
pub fn find_hierarchical(matrix: &[Vec<i64>], axes: usize) -> Option<TableModel> {
    hierarchical_models(axes).into_iter().find_map(|margins| {
        let tm = TableModel::hierarchical(axes, margins).ok()?;
        equivalent_sufficient_statistics(matrix, &table_model_matrix(&tm)).then_some(tm)
    })
}

/// Hierarchical part of the row space plus one parity term `(w)` for each
/// remaining contrast, when the row space is spanned by contrasts.
fn with_parity_terms(matrix: &[Vec<i64>], axes: usize) -> Result<Option<TableModel>> {
    let (contained, r) = contained_characters(matrix, axes);
    if contained.len() != r {
        return Ok(None);
    }
    let closed: BTreeSet<Word> = contained
        .iter()
        .copied()
        .filter(|w| w.subwords().all(|s| contained.contains(&s)))
        .collect();
    let margins: Vec<Word> = closed
        .iter()
        .copied()
        .filter(|w| !w.is_identity() && !closed.iter().any(|o| o != w && w.is_subword_of(*o)))
        .collect();
    let extras = contained
        .difference(&closed)
        .map(|&word| ParityTerm { word, conditioning: Word::IDENTITY })
        .collect();
    TableModel::new(axes, margins, extras).map(Some)
}

/// The binomial counterpart of a table model: the response becomes a new
/// last axis, every margin and parity term is taken jointly with it, and
/// the margin of all original axes (the denominators) is added.
pub fn lift_table_model(tm: &TableModel) -> Result<TableModel> {
    let response = Word::single(tm.axes);
    let mut margins: Vec<Word> = tm.margins.iter().map(|&m| m * response).collect();
    margins.push(Word::from_bits((1u32 << tm.axes) - 1));
    let margins = margins.iter().copied().filter(|m| !margins.iter().any(|o| o != m && m.is_subword_of(*o))).collect();
    let extras = tm.extras.iter().map(|e| ParityTerm { word: e.word, conditioning: e.conditioning * response }).collect();
    TableModel::new(tm.axes + 1, margins, extras)
}

/// Maps a fractional-factorial null model to a table model with the same
/// sufficient statistic. Hierarchical models are searched exhaustively
/// (tables with at most 5 axes). Otherwise the largest hierarchical part is
/// completed with parity terms; for binomial data the Poisson answer is
/// lifted. Any candidate is confirmed by rank before it is reported.
pub fn correspondence_report(spec: &DesignSpec, model: &ModelSpec, lifted: bool) -> Result<CorrespondenceReport> {
    let (axes, matrix) = null_model_configuration(spec, model, lifted)?;
    if axes > 5 {
        return Err(Error::Invalid(format!("correspondence search supports at most 5 table axes, got {axes}")));
    }
    let report = |verdict| CorrespondenceReport { axes, lifted, verdict };
    if let Some(tm) = find_hierarchical(&matrix, axes) {
        return Ok(report(Correspondence::Hierarchical(tm)));
    }
    let candidate = if lifted {
        match correspondence_report(spec, model, false)?.table_model() {
            Some(tm) => Some(lift_table_model(tm)?),
            None => None,
        }
    } else {
        with_parity_terms(&matrix, axes)?
    };
    Ok(report(match candidate {
        Some(tm) if equivalent_sufficient_statistics(&matrix, &table_model_matrix(&tm)) => Correspondence::WithExtras(tm),
        _ => Correspondence::None,
    }))
}

/// Every model obtained by replacing each term with an alias of the same
/// length, e.g. `AB` by `CE` when `AB = CE` on the design.
pub fn alias_substitutions(spec: &DesignSpec, model: &ModelSpec) -> Result<Vec<ModelSpec>> {
    let sg = expand_defining_contrast(spec)?;
    let choices: Vec<Vec<Word>> = model
        .terms()
        .map(|t| {
            let mut c: Vec<Word> = sg.words().iter().map(|&w| t * w).filter(|a| a.len() == t.len()).collect();
            c.sort();
            c
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let terms: BTreeSet<Word> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        if terms.len() == choices.len() {
            seen.insert(terms);
        }
        let mut j = 0;
        while j < idx.len() && idx[j] + 1 == choices[j].len() {
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            break;
        }
        idx[j] += 1;
    }
    seen.into_iter().map(ModelSpec::explicit).collect()
}

/// Graph on the axes with an edge for each pair in a common margin.
fn interaction_graph(tm: &TableModel) -> Vec<u32> {
    let mut adj = vec![0u32; tm.axes];
    for m in &tm.margins {
        for a in m.factors() {
            adj[a] |= m.bits() & !(1 << a);
        }
    }
    adj
}

fn is_chordal(adj: &[u32]) -> bool {
    // repeatedly remove a simplicial vertex
    let mut alive: u32 = (1u32 << adj.len()) - 1;
    while alive != 0 {
        let simplicial = (0..adj.len()).filter(|&v| alive & (1 << v) != 0).find(|&v| {
            let nb = adj[v] & alive;
            (0..adj.len()).filter(|&u| nb & (1 << u) != 0).all(|u| nb & !(1 << u) & !adj[u] == 0)
        });
        match simplicial {
            Some(v) => alive &= !(1 << v),
            None => return false,
        }
    }
    true
}

fn is_clique(adj: &[u32], set: u32) -> bool {
    (0..adj.len()).filter(|&v| set & (1 << v) != 0).all(|v| set & !(1 << v) & !adj[v] == 0)
}

/// Degree-two moves for a decomposable model: for each edge of a junction
/// tree of the margins, the basic moves of the conditional independence of
/// the two sides given the separator.
pub fn primitive_moves_for_decomposable(tm: &TableModel) -> Result<MoveSet> {
    if !tm.is_hierarchical() {
        return Err(Error::NotDecomposable("model has parity terms".into()));
    }
    let covered = tm.margins.iter().fold(0u32, |acc, m| acc | m.bits());
    if covered != (1u32 << tm.axes) - 1 {
        return Err(Error::NotDecomposable("some axis is in no margin".into()));
    }
    let adj = interaction_graph(tm);
    // graphical: every clique of the graph lies in a margin
    let maximal_cliques: Vec<u32> = (1..1u32 << tm.axes)
        .filter(|&s| is_clique(&adj, s))
        .filter(|&s| !(1..1u32 << tm.axes).any(|t| t != s && t & s == s && is_clique(&adj, t)))
        .collect();
    if maximal_cliques.iter().any(|&c| !tm.margins.iter().any(|m| c & !m.bits() == 0)) {
        return Err(Error::NotDecomposable(format!("{tm} is not graphical")));
    }
    if !is_chordal(&adj) {
        return Err(Error::NotDecomposable(format!("{tm} is not chordal")));
    }
    // junction tree: repeatedly attach a leaf clique to a clique containing
    // its intersection with the rest
    let mut remaining: Vec<u32> = tm.margins.iter().map(|m| m.bits()).collect();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    while remaining.len() > 1 {
        let (i, j) = (0..remaining.len())
            .find_map(|i| {
                let rest = remaining.iter().enumerate().filter(|&(j, _)| j != i).fold(0, |a, (_, &c)| a | c);
                let sep = remaining[i] & rest;
                (0..remaining.len()).find(|&j| j != i && sep & !remaining[j] == 0).map(|j| (i, j))
            })
            .ok_or_else(|| Error::NotDecomposable(format!("{tm} has no junction tree")))?;
        edges.push((remaining[i], remaining[j]));
        remaining.remove(i);
    }
    // each tree edge splits the cliques into two sides
    let mut moves = Vec::new();
    let cells = tm.cells();
    let all: Vec<u32> = tm.margins.iter().map(|m| m.bits()).collect();
    for &(leaf, parent) in &edges {
        let side = tree_side(&edges, leaf, parent);
        let a_axes = all.iter().filter(|c| side.contains(c)).fold(0, |acc, c| acc | c);
        let b_axes = all.iter().filter(|c| !side.contains(c)).fold(0, |acc, c| acc | c);
        let sep = a_axes & b_axes;
        let (a_only, b_only) = (Word::from_bits(a_axes & !sep), Word::from_bits(b_axes & !sep));
        let s = Word::from_bits(sep);
        let m = tm.axes;
        let cell_of = |sv: usize, av: usize, bv: usize| {
            (0..cells)
                .find(|&c| margin_cell(s, c, m) == sv && margin_cell(a_only, c, m) == av && margin_cell(b_only, c, m) == bv)
                .expect("levels determine a cell")
        };
        for sv in 0..1usize << s.len() {
            for a1 in 0..1usize << a_only.len() {
                for a2 in a1 + 1..1usize << a_only.len() {
                    for b1 in 0..1usize << b_only.len() {
                        for b2 in b1 + 1..1usize << b_only.len() {
                            let mut z = vec![0i64; cells];
                            z[cell_of(sv, a1, b1)] += 1;
                            z[cell_of(sv, a2, b2)] += 1;
                            z[cell_of(sv, a1, b2)] -= 1;
                            z[cell_of(sv, a2, b1)] -= 1;
                            moves.push(z);
                        }
                    }
                }
            }
        }
    }
    MoveSet::new(&table_model_matrix(tm), moves, Provenance::Primitive)
}

/// Cliques on the `leaf` side after cutting the tree edge `leaf - parent`.
fn tree_side(edges: &[(u32, u32)], leaf: u32, parent: u32) -> Vec<u32> {
    let mut side = vec![leaf];
    let mut stack = vec![leaf];
    while let Some(c) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == c && !side.contains(&y) && !(x == leaf && y == parent) {
                    side.push(y);
                    stack.push(y);
                }
            }
        }
    }
    side
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm(axes: usize, s: &str) -> TableModel {
        TableModel::parse(axes, s).unwrap()
    }

    fn spec(s: &str) -> DesignSpec {
        DesignSpec::parse(s).unwrap()
    }

    fn model(s: &str) -> ModelSpec {
        ModelSpec::parse(s, true).unwrap()
    }

    #[test]
    fn matrix_rows() {
        assert_eq!(table_model_matrix(&tm(3, "AB/AC")).len(), 8);
        assert_eq!(table_model_matrix(&tm(3, "AB/AC/BC")).len(), 12);
        let rows = table_model_matrix(&tm(3, "AB/AC + (ABC)"));
        assert_eq!(rows.len(), 10);
        // y111 + y122 + y212 + y221
        assert_eq!(rows[8], vec![1, 0, 0, 1, 0, 1, 1, 0]);
        assert_eq!(rows[9], vec![0, 1, 1, 0, 1, 0, 0, 1]);
        // margin y_{12.}
        assert_eq!(rows[1], vec![0, 0, 1, 1, 0, 0, 0, 0]);
        let cond = table_model_matrix(&tm(4, "1 + (ABC|D)"));
        assert_eq!(cond.len(), 4);
        // y111l + y122l + y212l + y221l for l = 1
        assert_eq!(cond[0].iter().enumerate().filter(|(_, &v)| v == 1).map(|(i, _)| i).collect::<Vec<_>>(), vec![0, 6, 10, 12]);
    }

    #[test]
    fn dedekind_count() {
        // antichains of nonempty subsets: Dedekind number minus the class {∅}
        assert_eq!(hierarchical_models(2).len(), 5);
        assert_eq!(hierarchical_models(3).len(), 19);
        assert_eq!(hierarchical_models(4).len(), 167);
    }

    #[test]
    fn equivalence_examples() {
        let s = spec("5 2\nD=AB\nE=AC");
        let (_, main) = null_model_configuration(&s, &model("A/B/C/D/E"), false).unwrap();
        assert!(equivalent_sufficient_statistics(&main, &table_model_matrix(&tm(3, "AB/AC"))));
        let (_, bc) = null_model_configuration(&s, &model("A/BC/D/E"), false).unwrap();
        assert!(equivalent_sufficient_statistics(&bc, &table_model_matrix(&tm(3, "AB/AC/BC"))));
        let (_, be) = null_model_configuration(&s, &model("A/BE/C/D"), false).unwrap();
        assert!(!equivalent_sufficient_statistics(&be, &table_model_matrix(&tm(3, "AB/AC"))));
        assert!(equivalent_sufficient_statistics(&be, &table_model_matrix(&tm(3, "AB/AC + (ABC)"))));
    }

    #[test]
    fn eight_run_correspondences() {
        let cases = [
            ("4 1\nD=ABC", "A/B/C/D", "A/B/C + (ABC)", false),
            ("4 1\nD=ABC", "AB/C/D", "AB/C + (ABC)", false),
            ("4 1\nD=ABC", "AB/AC/D", "AB/AC + (ABC)", false),
            ("5 2\nD=AB\nE=AC", "A/B/C/D/E", "AB/AC", true),
            ("5 2\nD=AB\nE=AC", "A/BC/D/E", "AB/AC/BC", true),
            ("5 2\nD=AB\nE=AC", "A/BE/C/D", "AB/AC + (ABC)", false),
            ("6 3\nD=AB\nE=AC\nF=BC", "A/B/C/D/E/F", "AB/AC/BC", true),
        ];
        for (d, m, expected, hier) in cases {
            let r = correspondence_report(&spec(d), &model(m), false).unwrap();
            let want = tm(3, expected);
            match (&r.verdict, hier) {
                (Correspondence::Hierarchical(t), true) | (Correspondence::WithExtras(t), false) => assert_eq!(t, &want, "{m}"),
                (v, _) => panic!("{m}: {v:?}"),
            }
        }
    }

    #[test]
    fn lifted_correspondences() {
        let cases = [
            ("4 1\nD=ABC", "A/B/C/D", "ABC/AD/BD/CD + (ABC|D)"),
            ("4 1\nD=ABC", "AB/C/D", "ABC/ABD/CD + (ABC|D)"),
            ("4 1\nD=ABC", "AB/AC/D", "ABC/ABD/ACD + (ABC|D)"),
            ("5 2\nD=AB\nE=AC", "A/B/C/D/E", "ABC/ABD/ACD"),
            ("5 2\nD=AB\nE=AC", "A/BC/D/E", "ABC/ABD/ACD/BCD"),
            ("5 2\nD=AB\nE=AC", "A/BE/C/D", "ABC/ABD/ACD + (ABC|D)"),
            ("6 3\nD=AB\nE=AC\nF=BC", "A/B/C/D/E/F", "ABC/ABD/ACD/BCD"),
        ];
        for (d, m, expected) in cases {
            let r = correspondence_report(&spec(d), &model(m), true).unwrap();
            assert_eq!(r.axes, 4);
            assert_eq!(r.table_model().unwrap(), &tm(4, expected), "{m}");
            let (_, x) = null_model_configuration(&spec(d), &model(m), true).unwrap();
            assert!(equivalent_sufficient_statistics(&x, &table_model_matrix(&tm(4, expected))));
        }
    }

    #[test]
    fn sixteen_run_correspondences() {
        let cases = [
            ("6 2\nE=ABC\nF=ABD", "AB/AC/AD/BC/BD/E/F", "ABC/ABD"),
            ("6 2\nE=ABC\nF=ABD", "AB/AC/AD/BC/BD/CD/E/F", "ABC/ABD/CD"),
            ("7 3\nE=ABC\nF=ABD\nG=ACD", "AB/AC/AD/BC/BD/CD/E/F/G", "ABC/ABD/ACD"),
            ("8 4\nE=ABC\nF=ABD\nG=ACD\nH=BCD", "AB/AC/AD/BC/BD/CD/E/F/G/H", "ABC/ABD/ACD/BCD"),
        ];
        for (d, m, expected) in cases {
            let r = correspondence_report(&spec(d), &model(m), false).unwrap();
            assert_eq!(r.verdict, Correspondence::Hierarchical(tm(4, expected)), "{m}");
        }
        let r = correspondence_report(&spec("5 1\nE=ABCD"), &model("A/B/C/D/E"), false).unwrap();
        assert!(r.table_model().is_none_or(|t| !t.is_hierarchical()));
        let (_, x) = null_model_configuration(&spec("5 1\nE=ABCD"), &model("A/B/C/D/E"), false).unwrap();
        assert!(find_hierarchical(&x, 4).is_none());
    }

    #[test]
    fn alias_substitution_count() {
        let s = spec("6 2\nE=ABC\nF=ABD");
        let models = alias_substitutions(&s, &model("AB/AC/AD/BC/BD/E/F")).unwrap();
        assert_eq!(models.len(), 48);
        let target = table_model_matrix(&tm(4, "ABC/ABD"));
        for m in &models {
            let (_, x) = null_model_configuration(&s, m, false).unwrap();
            assert!(equivalent_sufficient_statistics(&x, &target), "{m}");
        }
    }

    fn support_notation(z: &[i64], axes: usize) -> String {
        let cell = |c: usize| (0..axes).map(|a| char::from(b'1' + level(c, a, axes) as u8)).collect::<String>();
        let plus: Vec<String> = (0..z.len()).filter(|&c| z[c] > 0).map(|c| format!("({})", cell(c))).collect();
        let minus: Vec<String> = (0..z.len()).filter(|&c| z[c] < 0).map(|c| format!("({})", cell(c))).collect();
        format!("{}-{}", plus.concat(), minus.concat())
    }

    #[test]
    fn primitive_moves_examples() {
        let ms = primitive_moves_for_decomposable(&tm(3, "AB/AC")).unwrap();
        let got: BTreeSet<String> = ms.moves().iter().map(|m| support_notation(m.as_slice(), 3)).collect();
        assert_eq!(got, ["(111)(122)-(112)(121)", "(211)(222)-(212)(221)"].map(String::from).into_iter().collect());

        let ms = primitive_moves_for_decomposable(&tm(4, "ABC/ABD")).unwrap();
        let got: BTreeSet<String> = ms.moves().iter().map(|m| support_notation(m.as_slice(), 4)).collect();
        let want = ["(1111)(1122)-(1112)(1121)", "(1211)(1222)-(1212)(1221)", "(2111)(2122)-(2112)(2121)", "(2211)(2222)-(2212)(2221)"];
        assert_eq!(got, want.map(String::from).into_iter().collect());

        let ms = primitive_moves_for_decomposable(&tm(2, "A/B")).unwrap();
        assert_eq!(ms.moves().len(), 1);
        assert_eq!(support_notation(ms.moves()[0].as_slice(), 2), "(11)(22)-(12)(21)");
    }

    #[test]
    fn non_decomposable_rejected() {
        assert!(matches!(primitive_moves_for_decomposable(&tm(3, "AB/AC/BC")), Err(Error::NotDecomposable(_))));
        assert!(primitive_moves_for_decomposable(&tm(4, "AB/BC/CD/AD")).is_err());
        assert!(primitive_moves_for_decomposable(&tm(3, "AB")).is_err());
        assert!(primitive_moves_for_decomposable(&tm(3, "AB/AC + (ABC)")).is_err());
    }

    #[test]
    fn primitive_moves_connect_small_fibers() {
        use crate::fiber::Budget;
        use crate::moves::verify_connectivity;
        for text in ["A/B/C", "AB/C", "AB/BC", "ABC/ABD", "AB/BC/CD"] {
            let axes = if text.contains('D') { 4 } else { 3 };
            let t = tm(axes, text);
            let ms = primitive_moves_for_decomposable(&t).unwrap();
            let a = table_model_matrix(&t);
            // a few fibers around small random tables
            for seed in 0..4u64 {
                let y: Vec<i64> = (0..t.cells()).map(|c| ((c as u64 * 7 + seed * 3) % 3) as i64).collect();
                let target: Vec<i64> = a.iter().map(|r| r.iter().zip(&y).map(|(p, q)| p * q).sum()).collect();
                let rep = verify_connectivity(&ms, &a, &target, None, Budget::default()).unwrap();
                assert!(rep.is_connected(), "{text}: {} components", rep.components);
            }
        }
    }
}
