//! Covariate matrices for hierarchical log-linear and logistic models.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::design::{aliases, DefiningSubgroup, DesignMatrix, Word};
use crate::error::{Error, Result};
use crate::lattice::IntMatrix;

/// A set of non-identity model terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelSpec {
    terms: BTreeSet<Word>,
    hierarchical: bool,
}

impl ModelSpec {
    /// Terms exactly as given.
    pub fn explicit<I: IntoIterator<Item = Word>>(terms: I) -> Result<Self> {
        let terms: BTreeSet<Word> = terms.into_iter().collect();
        if terms.contains(&Word::IDENTITY) {
            return Err(Error::Invalid("the identity is implicit (intercept) and cannot be a term".into()));
        }
        Ok(ModelSpec { terms, hierarchical: false })
    }

    /// Hierarchical model generated by `generators`: every nonempty subword
    /// of a generator is a term.
    pub fn hierarchical<I: IntoIterator<Item = Word>>(generators: I) -> Result<Self> {
        let mut terms = BTreeSet::new();
        for g in generators {
            if g.is_identity() {
                return Err(Error::Invalid("the identity cannot be a model generator".into()));
            }
            terms.extend(g.subwords());
        }
        Ok(ModelSpec { terms, hierarchical: true })
    }

    /// Parses slash-separated words such as `AC/BD/E/F/G`. With `closure`
    /// the words are generators of a hierarchical model; without it they
    /// are the literal term list. `1` or an empty string is the
    /// intercept-only model.
    pub fn parse(text: &str, closure: bool) -> Result<Self> {
        let text = text.trim();
        let words: Vec<Word> = if text.is_empty() || text == "1" {
            Vec::new()
        } else {
            text.split('/').map(|s| Word::parse(s.trim())).collect::<Result<_>>()?
        };
        if closure {
            ModelSpec::hierarchical(words)
        } else {
            ModelSpec::explicit(words)
        }
    }

    /// Terms in (length, lex) order.
    pub fn terms(&self) -> impl Iterator<Item = Word> + '_ {
        self.terms.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of parameters including the intercept.
    pub fn parameters(&self) -> usize {
        self.terms.len() + 1
    }

    pub fn is_closed(&self) -> bool {
        self.terms.iter().all(|t| t.subwords().all(|s| self.terms.contains(&s)))
    }

    pub fn built_hierarchically(&self) -> bool {
        self.hierarchical
    }

    /// Maximal terms, i.e. the generating class, joined with `/`.
    pub fn generating_class(&self) -> Vec<Word> {
        self.terms
            .iter()
            .copied()
            .filter(|&t| !self.terms.iter().any(|&u| u != t && t.is_subword_of(u)))
            .collect()
    }

    pub fn max_factor(&self) -> Option<usize> {
        self.terms.iter().filter_map(|t| t.max_factor()).max()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut words = if self.hierarchical { self.generating_class() } else { self.terms.iter().copied().collect() };
        // longest words first, as models are usually written
        words.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        if words.is_empty() {
            return f.write_str("1");
        }
        let s: Vec<String> = words.iter().map(Word::to_string).collect();
        f.write_str(&s.join("/"))
    }
}

/// Entrywise product of the design columns named by `w`.
pub fn column_for_term(design: &DesignMatrix, w: Word) -> Result<Vec<i32>> {
    if w.is_identity() {
        return Err(Error::Invalid("term must not be the identity".into()));
    }
    if w.max_factor().is_some_and(|m| m >= design.factors()) {
        return Err(Error::Invalid(format!("term {w} uses factors beyond the design's {}", design.factors())));
    }
    Ok(design.column_for_word(w))
}

/// The k x nu covariate matrix X0: intercept column then one +1/-1
/// column per term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CovariateMatrix {
    labels: Vec<Word>,
    columns: Vec<Vec<i32>>,
}

impl CovariateMatrix {
    pub fn runs(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Number of columns, including the intercept.
    pub fn parameters(&self) -> usize {
        self.columns.len()
    }

    /// Column labels; the intercept is labelled `I`.
    pub fn labels(&self) -> &[Word] {
        &self.labels
    }

    pub fn columns(&self) -> &[Vec<i32>] {
        &self.columns
    }

    pub fn entry(&self, run: usize, col: usize) -> i32 {
        self.columns[col][run]
    }

    /// X0' as `i64` rows (nu x k).
    pub fn transpose_rows(&self) -> Vec<Vec<i64>> {
        self.columns.iter().map(|c| c.iter().map(|&v| i64::from(v)).collect()).collect()
    }

    /// X0' as an exact integer matrix.
    pub fn transpose_int(&self) -> IntMatrix {
        IntMatrix::from_rows(&self.transpose_rows()).expect("columns have equal length")
    }

    /// Rows of X0 as `f64`, for model fitting.
    pub fn rows_f64(&self) -> Vec<Vec<f64>> {
        (0..self.runs()).map(|i| self.columns.iter().map(|c| f64::from(c[i])).collect()).collect()
    }

    /// Builds from explicit columns, one label each.
    pub fn from_columns(labels: Vec<Word>, columns: Vec<Vec<i32>>) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::Dimension("one label per column required".into()));
        }
        let k = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != k) {
            return Err(Error::Dimension("ragged covariate columns".into()));
        }
        Ok(CovariateMatrix { labels, columns })
    }
}

/// Intercept first, then term columns in (length, lex) order. Fails when a
/// term's column coincides (up to sign) with the intercept or another term.
pub fn build_covariate_matrix(design: &DesignMatrix, model: &ModelSpec) -> Result<CovariateMatrix> {
    let k = design.runs();
    let mut labels = vec![Word::IDENTITY];
    let mut columns = vec![vec![1i32; k]];
    for term in model.terms() {
        let col = column_for_term(design, term)?;
        let neg: Vec<i32> = col.iter().map(|v| -v).collect();
        if let Some(i) = columns.iter().position(|c| *c == col || *c == neg) {
            return Err(Error::AliasedTerms { first: labels[i], second: term });
        }
        labels.push(term);
        columns.push(col);
    }
    Ok(CovariateMatrix { labels, columns })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermAliases {
    pub term: Word,
    pub aliases: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EstimabilityReport {
    pub terms: Vec<TermAliases>,
    /// Pairs of terms that are aliased to each other; `(t, I)` when a term
    /// is aliased with the intercept.
    pub collisions: Vec<(Word, Word)>,
    pub parameters: usize,
    pub runs: usize,
}

impl EstimabilityReport {
    pub fn is_estimable(&self) -> bool {
        self.collisions.is_empty() && self.parameters <= self.runs
    }

    /// nu = k: estimable but leaves no degrees of freedom for a test.
    pub fn is_saturated(&self) -> bool {
        self.parameters == self.runs
    }

    pub fn is_overparameterized(&self) -> bool {
        self.parameters > self.runs
    }
}

impl fmt::Display for EstimabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            let a: Vec<String> = t.aliases.iter().map(Word::to_string).collect();
            writeln!(f, "  {} = {}", t.term, a.join(" = "))?;
        }
        for (a, b) in &self.collisions {
            writeln!(f, "  collision: {a} = {b}")?;
        }
        write!(f, "  parameters = {}, runs = {}", self.parameters, self.runs)?;
        if self.is_overparameterized() {
            write!(f, " (too many parameters: not estimable)")?;
        } else if self.is_saturated() {
            write!(f, " (saturated: not testable)")?;
        }
        Ok(())
    }
}

pub fn estimability_report(model: &ModelSpec, subgroup: &DefiningSubgroup, runs: usize) -> EstimabilityReport {
    let terms: Vec<Word> = model.terms().collect();
    let mut collisions = Vec::new();
    for (i, &a) in terms.iter().enumerate() {
        if subgroup.contains(a) {
            collisions.push((a, Word::IDENTITY));
        }
        for &b in &terms[i + 1..] {
            if subgroup.contains(a * b) {
                collisions.push((a, b));
            }
        }
    }
    EstimabilityReport {
        terms: terms.iter().map(|&t| TermAliases { term: t, aliases: aliases(t, subgroup) }).collect(),
        collisions,
        parameters: model.parameters(),
        runs,
    }
}

/// The Lawrence lifting `[[X0', 0], [I, I]]` of a nu x k configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedMatrix {
    matrix: IntMatrix,
    nu: usize,
    k: usize,
}

impl LiftedMatrix {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn base_rows(&self) -> usize {
        self.nu
    }

    pub fn cells(&self) -> usize {
        self.k
    }
}

pub fn lawrence_lift(x0t: &IntMatrix) -> LiftedMatrix {
    let (nu, k) = (x0t.rows(), x0t.cols());
    let mut m = IntMatrix::zeros(nu + k, 2 * k);
    for r in 0..nu {
        for c in 0..k {
            m.set(r, c, x0t.get(r, c).clone());
        }
    }
    for i in 0..k {
        m.set(nu + i, i, 1.into());
        m.set(nu + i, k + i, 1.into());
    }
    LiftedMatrix { matrix: m, nu, k }
}

/// `t = X0' y`.
pub fn sufficient_statistic(x0t: &[Vec<i64>], y: &[i64]) -> Result<Vec<i64>> {
    x0t.iter()
        .map(|row| {
            if row.len() != y.len() {
                return Err(Error::Dimension(format!("matrix has {} columns, data has {} cells", row.len(), y.len())));
            }
            Ok(row.iter().zip(y).map(|(a, b)| a * b).sum())
        })
        .collect()
}

/// The lifted observation `(y_1..y_k, n_1-y_1..n_k-y_k)`.
pub fn lift_observation(y: &[i64], denominators: &[i64]) -> Result<Vec<i64>> {
    if y.len() != denominators.len() {
        return Err(Error::Dimension("one denominator per run required".into()));
    }
    if let Some(i) = y.iter().zip(denominators).position(|(&a, &n)| a < 0 || a > n) {
        return Err(Error::Invalid(format!("run {}: need 0 <= y <= n, got y = {}, n = {}", i + 1, y[i], denominators[i])));
    }
    Ok(y.iter().copied().chain(y.iter().zip(denominators).map(|(a, n)| n - a)).collect())
}
