//! Two-level fractional factorial designs and their aliasing structure.
//!
//! Factors are named `A`, `B`, ... skipping `I`, which is reserved for the
//! identity word. A design with `p` factors and `q` generators has
//! `k = 2^(p-q)` runs laid out in Yates standard order over the first
//! `p - q` (basic) factors; every generated factor is the entrywise product
//! of the basic columns named by its generator word.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Factor letters in index order. `I` is skipped.
pub const FACTOR_LETTERS: &[u8; 24] = b"ABCDEFGHJKLMNOPQRSTUVWXY";

/// Largest supported number of factors.
pub const MAX_FACTORS: usize = FACTOR_LETTERS.len();

pub fn factor_letter(index: usize) -> char {
    FACTOR_LETTERS[index] as char
}

pub fn factor_index(letter: char) -> Option<usize> {
    FACTOR_LETTERS.iter().position(|&c| c as char == letter.to_ascii_uppercase())
}

/// An effect word: a set of factor indices. The empty set is the identity `I`.
///
/// Multiplication is symmetric difference, so every word is its own inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(u32);

impl Word {
    pub const IDENTITY: Word = Word(0);

    pub fn from_bits(bits: u32) -> Self {
        Word(bits)
    }

    pub fn single(factor: usize) -> Self {
        assert!(factor < MAX_FACTORS, "factor index {factor} out of range");
        Word(1 << factor)
    }

    pub fn from_factors<I: IntoIterator<Item = usize>>(factors: I) -> Self {
        factors.into_iter().fold(Word::IDENTITY, |w, f| w * Word::single(f))
    }

    /// Parses a word such as `ABDE`; `I` (or `1`) is the identity.
    /// Repeated letters cancel, as they would under word multiplication.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "I" || text == "1" {
            return Ok(Word::IDENTITY);
        }
        if text.is_empty() {
            return Err(Error::Invalid("empty word".into()));
        }
        let mut word = Word::IDENTITY;
        for c in text.chars() {
            let idx = factor_index(c)
                .ok_or_else(|| Error::Invalid(format!("unknown factor letter '{c}' in '{text}'")))?;
            word = word * Word::single(idx);
        }
        Ok(word)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.is_identity()
    }

    pub fn contains(self, factor: usize) -> bool {
        factor < 32 && self.0 & (1 << factor) != 0
    }

    /// Factor indices in increasing order.
    pub fn factors(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// Highest factor index used, if any.
    pub fn max_factor(self) -> Option<usize> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros() as usize)
    }

    pub fn is_subword_of(self, other: Word) -> bool {
        self.0 & !other.0 == 0
    }

    /// All non-identity subwords, including the word itself.
    pub fn subwords(self) -> impl Iterator<Item = Word> {
        let full = self.0;
        let mut sub = full;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = Word(sub);
            sub = (sub.wrapping_sub(1)) & full;
            if sub == 0 {
                done = true;
            }
            Some(out)
        })
    }
}

impl std::ops::Mul for Word {
    type Output = Word;
    // products of effect words cancel repeated letters
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Word) -> Word {
        Word(self.0 ^ rhs.0)
    }
}

impl Ord for Word {
    /// Shorter words first, then lexicographic on the letter sequence.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.factors().cmp(other.factors()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        for i in self.factors() {
            write!(f, "{}", factor_letter(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl std::str::FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

/// One design generator: `factor = word`, with `word` over basic factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub factor: usize,
    pub word: Word,
}

impl Generator {
    /// The defining word `word * factor`, which equals `I` on the design.
    pub fn defining_word(&self) -> Word {
        self.word * Word::single(self.factor)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", factor_letter(self.factor), self.word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpec {
    p: usize,
    generators: Vec<Generator>,
}

impl DesignSpec {
    /// Validates and builds a design. The first `p - q` factors are basic;
    /// each of the remaining factors must be assigned by exactly one generator.
    pub fn new(p: usize, mut generators: Vec<Generator>) -> Result<Self> {
        if p == 0 || p > MAX_FACTORS {
            return Err(Error::Invalid(format!("number of factors must be in 1..={MAX_FACTORS}, got {p}")));
        }
        let q = generators.len();
        if q >= p {
            return Err(Error::Invalid(format!("need at least one basic factor (p = {p}, q = {q})")));
        }
        let basic = p - q;
        let basic_mask = (1u32 << basic) - 1;
        let mut seen = vec![false; p];
        for g in &generators {
            if g.factor < basic || g.factor >= p {
                return Err(Error::Invalid(format!(
                    "generator {g} must assign one of the non-basic factors {}..{}",
                    factor_letter(basic),
                    factor_letter(p - 1)
                )));
            }
            if std::mem::replace(&mut seen[g.factor], true) {
                return Err(Error::Invalid(format!("factor {} assigned twice", factor_letter(g.factor))));
            }
            if g.word.is_identity() {
                return Err(Error::Invalid(format!("generator for {} is the identity", factor_letter(g.factor))));
            }
            if g.word.bits() & !basic_mask != 0 {
                return Err(Error::Invalid(format!("generator {g} uses non-basic factors")));
            }
        }
        generators.sort_by_key(|g| g.factor);
        Ok(DesignSpec { p, generators })
    }

    /// Full factorial in `p` factors.
    pub fn full_factorial(p: usize) -> Result<Self> {
        DesignSpec::new(p, Vec::new())
    }

    /// Parses the design file format: a `p q` header line followed by
    /// `q` lines of the form `E=ABC`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty design file"))?;
        let nums: Vec<&str> = header.split_whitespace().collect();
        if nums.len() != 2 {
            return Err(Error::parse(hline, "expected header \"p q\""));
        }
        let p: usize = nums[0].parse().map_err(|_| Error::parse(hline, "p is not an integer"))?;
        let q: usize = nums[1].parse().map_err(|_| Error::parse(hline, "q is not an integer"))?;
        let mut generators = Vec::with_capacity(q);
        for (lineno, line) in lines {
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, format!("expected X=WORD, got \"{line}\"")))?;
            let lhs = lhs.trim();
            let mut chars = lhs.chars();
            let factor = match (chars.next(), chars.next()) {
                (Some(c), None) => factor_index(c),
                _ => None,
            }
            .ok_or_else(|| Error::parse(lineno, format!("\"{lhs}\" is not a factor letter")))?;
            let word = Word::parse(rhs).map_err(|e| Error::parse(lineno, e.to_string()))?;
            generators.push(Generator { factor, word });
        }
        if generators.len() != q {
            return Err(Error::parse(hline, format!("header declares {q} generators, found {}", generators.len())));
        }
        DesignSpec::new(p, generators)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.generators.len()
    }

    pub fn basic_factors(&self) -> usize {
        self.p - self.q()
    }

    pub fn runs(&self) -> usize {
        1 << self.basic_factors()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn defining_words(&self) -> Vec<Word> {
        self.generators.iter().map(Generator::defining_word).collect()
    }

    /// Serializes back to the design file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.p, self.q());
        for g in &self.generators {
            out.push_str(&format!("{g}\n"));
        }
        out
    }

    /// Rewrites `word` in terms of basic factors only (its representative
    /// in the quotient by the defining contrast subgroup).
    pub fn reduce_to_basic(&self, word: Word) -> Word {
        self.generators.iter().fold(word, |w, g| {
            if w.contains(g.factor) {
                w * g.defining_word()
            } else {
                w
            }
        })
    }
}

/// The defining contrast subgroup: all words equal to `I` on the design,
/// sorted by (length, lexicographic) so that `I` comes first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefiningSubgroup {
    words: Vec<Word>,
}

impl DefiningSubgroup {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: Word) -> bool {
        self.words.binary_search(&w).is_ok()
    }

    /// Builds the subgroup generated by arbitrary defining words.
    pub fn generated_by(defining: &[Word]) -> Result<Self> {
        let q = defining.len();
        let expected = 1usize << q;
        let mut words: Vec<Word> = (0..expected)
            .map(|mask| {
                defining
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .fold(Word::IDENTITY, |acc, (_, &w)| acc * w)
            })
            .collect();
        words.sort();
        words.dedup();
        if words.len() != expected {
            return Err(Error::RankDeficientGenerators { found: words.len(), expected });
        }
        Ok(DefiningSubgroup { words })
    }
}

pub fn expand_defining_contrast(spec: &DesignSpec) -> Result<DefiningSubgroup> {
    DefiningSubgroup::generated_by(&spec.defining_words())
}

/// The alias coset of `w` without `w` itself, sorted by (length, lex).
pub fn aliases(w: Word, subgroup: &DefiningSubgroup) -> Vec<Word> {
    let mut out: Vec<Word> = subgroup.words.iter().map(|&g| w * g).filter(|&x| x != w).collect();
    out.sort();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Resolution {
    Finite(usize),
    /// Full factorial: no non-identity defining words.
    Unbounded,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Finite(r) => write!(f, "{r} ({})", roman(*r)),
            Resolution::Unbounded => f.write_str("unbounded (full factorial)"),
        }
    }
}

fn roman(n: usize) -> String {
    const TABLE: [(usize, &str); 9] =
        [(100, "C"), (90, "XC"), (50, "L"), (40, "XL"), (10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I")];
    let mut n = n;
    let mut s = String::new();
    for &(v, r) in &TABLE {
        while n >= v {
            s.push_str(r);
            n -= v;
        }
    }
    s
}

pub fn resolution(subgroup: &DefiningSubgroup) -> Resolution {
    subgroup
        .words
        .iter()
        .filter(|w| !w.is_identity())
        .map(|w| w.len())
        .min()
        .map_or(Resolution::Unbounded, Resolution::Finite)
}

/// Alias classes of the design: one entry per non-identity coset, each
/// sorted by (length, lex). Classes are ordered by their shortest word.
pub fn alias_classes(spec: &DesignSpec, subgroup: &DefiningSubgroup) -> Vec<Vec<Word>> {
    let basic = spec.basic_factors();
    let mut classes: Vec<Vec<Word>> = (1u32..(1 << basic))
        .map(|b| {
            let mut coset: Vec<Word> = subgroup.words.iter().map(|&g| Word(b) * g).collect();
            coset.sort();
            coset
        })
        .collect();
    classes.sort_by(|a, b| a[0].cmp(&b[0]));
    classes
}

/// A k x p matrix of +1/-1 levels. Paper-style level 1 maps to +1 and level 2 to -1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DesignMatrix {
    rows: Vec<Vec<i32>>,
    p: usize,
}

impl DesignMatrix {
    pub fn from_rows(rows: Vec<Vec<i32>>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p || r.iter().any(|&v| v != 1 && v != -1)) {
            return Err(Error::Invalid("design rows must be equal-length +1/-1 vectors".into()));
        }
        Ok(DesignMatrix { rows, p })
    }

    pub fn runs(&self) -> usize {
        self.rows.len()
    }

    pub fn factors(&self) -> usize {
        self.p
    }

    pub fn rows(&self) -> &[Vec<i32>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<i32> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Entrywise product of the columns named by `w` (all ones for `I`).
    pub fn column_for_word(&self, w: Word) -> Vec<i32> {
        self.rows.iter().map(|r| w.factors().map(|j| r[j]).product()).collect()
    }

    /// Finds `perm` with `other[i] == self.rows()[perm[i]]` for all runs.
    pub fn match_rows(&self, other: &[Vec<i32>]) -> Option<Vec<usize>> {
        if other.len() != self.rows.len() {
            return None;
        }
        let mut used = vec![false; self.rows.len()];
        other
            .iter()
            .map(|row| {
                let idx = self.rows.iter().enumerate().position(|(i, r)| !used[i] && r == row)?;
                used[idx] = true;
                Some(idx)
            })
            .collect()
    }
}

/// Lays out the basic factors in Yates order (first basic factor slowest,
/// starting at +1) and fills generated columns as products.
pub fn build_design_matrix(spec: &DesignSpec) -> DesignMatrix {
    let basic = spec.basic_factors();
    let k = spec.runs();
    let rows = (0..k)
        .map(|r| {
            let mut row = vec![0i32; spec.p()];
            for (j, cell) in row.iter_mut().enumerate().take(basic) {
                *cell = if (r >> (basic - 1 - j)) & 1 == 0 { 1 } else { -1 };
            }
            for g in spec.generators() {
                row[g.factor] = g.word.factors().map(|j| row[j]).product();
            }
            row
        })
        .collect();
    DesignMatrix { rows, p: spec.p() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn wave_solder() -> DesignSpec {
        DesignSpec::parse("7 3\nE=ABD\nF=ACD\nG=BCD\n").unwrap()
    }

    #[test]
    fn word_product_is_symmetric_difference() {
        assert_eq!(w("ABDE") * w("ACDF"), w("BCEF"));
        assert_eq!(w("ABC") * w("ABC"), Word::IDENTITY);
        assert_eq!(w("I"), Word::IDENTITY);
        assert_eq!(w("ABD").to_string(), "ABD");
        assert_eq!(Word::IDENTITY.to_string(), "I");
    }

    #[test]
    fn letters_skip_i() {
        assert_eq!(factor_letter(8), 'J');
        assert_eq!(factor_index('J'), Some(8));
        assert_eq!(factor_index('I'), None);
        assert!(Word::parse("AI").is_err());
    }

    #[test]
    fn word_order_is_length_then_lex() {
        let mut v = [w("BC"), w("A"), w("ABC"), w("AC"), w("AB"), w("D")];
        v.sort();
        let s: Vec<String> = v.iter().map(Word::to_string).collect();
        assert_eq!(s, ["A", "D", "AB", "AC", "BC", "ABC"]);
    }

    #[test]
    fn subwords_enumerates_all_nonempty() {
        let mut s: Vec<Word> = w("ABC").subwords().collect();
        s.sort();
        assert_eq!(s.len(), 7);
        assert_eq!(s[0], w("A"));
        assert_eq!(s[6], w("ABC"));
        assert_eq!(Word::IDENTITY.subwords().count(), 0);
    }

    #[test]
    fn wave_solder_subgroup() {
        let sg = expand_defining_contrast(&wave_solder()).unwrap();
        let got: Vec<String> = sg.words().iter().map(Word::to_string).collect();
        assert_eq!(got, ["I", "ABDE", "ABFG", "ACDF", "ACEG", "BCDG", "BCEF", "DEFG"]);
    }

    #[test]
    fn trivial_and_single_word_subgroups() {
        let sg = expand_defining_contrast(&DesignSpec::full_factorial(3).unwrap()).unwrap();
        assert_eq!(sg.words(), &[Word::IDENTITY]);
        assert_eq!(resolution(&sg), Resolution::Unbounded);

        let sg = expand_defining_contrast(&DesignSpec::parse("5 1\nE=ABCD").unwrap()).unwrap();
        assert_eq!(sg.words(), &[Word::IDENTITY, w("ABCDE")]);
        assert_eq!(resolution(&sg), Resolution::Finite(5));
    }

    #[test]
    fn rank_deficient_generators_detected() {
        let err = DefiningSubgroup::generated_by(&[w("ABC"), w("ABC")]).unwrap_err();
        assert!(matches!(err, Error::RankDeficientGenerators { found: 2, expected: 4 }));
    }

    #[test]
    fn alias_lists_match_wave_solder_display() {
        let sg = expand_defining_contrast(&wave_solder()).unwrap();
        let short = |x: &str| -> Vec<String> {
            aliases(w(x), &sg).into_iter().filter(|a| a.len() <= 4).map(|a| a.to_string()).collect()
        };
        assert_eq!(short("A"), ["BDE", "BFG", "CDF", "CEG"]);
        assert_eq!(short("AB")[..2], ["DE", "FG"]);
        assert_eq!(short("AC")[..2], ["DF", "EG"]);
        assert_eq!(short("ABC"), ["ADG", "AEF", "BDF", "BEG", "CDE", "CFG"]);
        let id: Vec<Word> = aliases(Word::IDENTITY, &sg);
        assert_eq!(id.len(), 7);
        assert!(!id.contains(&Word::IDENTITY));
    }

    #[test]
    fn resolutions_of_eight_run_designs() {
        let r = |t: &str| resolution(&expand_defining_contrast(&DesignSpec::parse(t).unwrap()).unwrap());
        assert_eq!(r("4 1\nD=ABC"), Resolution::Finite(4));
        assert_eq!(r("5 2\nD=AB\nE=AC"), Resolution::Finite(3));
        assert_eq!(r("6 2\nE=ABC\nF=ABD"), Resolution::Finite(4));
        assert_eq!(r("10 6\nE=ABC\nF=ABD\nG=ACD\nH=BCD\nJ=ABCD\nK=CD"), Resolution::Finite(3));
    }

    #[test]
    fn alias_classes_partition_non_subgroup_words() {
        let spec = wave_solder();
        let sg = expand_defining_contrast(&spec).unwrap();
        let classes = alias_classes(&spec, &sg);
        assert_eq!(classes.len(), 15);
        let mut all: Vec<Word> = classes.iter().flatten().copied().collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), (1 << 7) - 8);
        assert!(all.iter().all(|x| !sg.contains(*x)));
    }

    #[test]
    fn wave_solder_matrix_is_paper_order() {
        let d = build_design_matrix(&wave_solder());
        assert_eq!(d.runs(), 16);
        assert_eq!(d.rows()[0], vec![1; 7]);
        assert_eq!(d.rows()[1], vec![1, 1, 1, -1, -1, -1, -1]);
        assert_eq!(d.rows()[10], vec![-1, 1, -1, 1, -1, 1, -1]);
        assert_eq!(d.rows()[15], vec![-1; 7]);
    }

    #[test]
    fn one_basic_factor() {
        let d = build_design_matrix(&DesignSpec::parse("2 1\nB=A").unwrap());
        assert_eq!(d.column(0), vec![1, -1]);
        assert_eq!(d.column(1), vec![1, -1]);
    }

    #[test]
    fn defining_words_multiply_to_ones() {
        for text in ["7 3\nE=ABD\nF=ACD\nG=BCD", "6 3\nD=AB\nE=AC\nF=BC", "8 4\nE=ABC\nF=ABD\nG=ACD\nH=BCD"] {
            let spec = DesignSpec::parse(text).unwrap();
            let d = build_design_matrix(&spec);
            for word in expand_defining_contrast(&spec).unwrap().words() {
                assert!(d.column_for_word(*word).iter().all(|&v| v == 1), "{word}");
            }
            for j in 0..spec.p() {
                assert_eq!(d.column(j).iter().sum::<i32>(), 0);
            }
        }
    }

    #[test]
    fn design_file_errors() {
        assert!(DesignSpec::parse("").is_err());
        assert!(DesignSpec::parse("4 1\nD=ABC\nE=AB").is_err());
        assert!(DesignSpec::parse("4 1\nC=AB").is_err());
        assert!(DesignSpec::parse("5 2\nD=AB\nD=AC").is_err());
        assert!(DesignSpec::parse("5 2\nD=AB\nE=AD").is_err());
        assert!(DesignSpec::parse("4 1\nD=").is_err());
        assert!(DesignSpec::parse("25 0").is_err());
    }

    #[test]
    fn match_rows_finds_permutation() {
        let d = build_design_matrix(&DesignSpec::parse("3 1\nC=AB").unwrap());
        let mut rev: Vec<Vec<i32>> = d.rows().to_vec();
        rev.reverse();
        assert_eq!(d.match_rows(&rev), Some(vec![3, 2, 1, 0]));
        assert_eq!(d.match_rows(&rev[..2]), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_designs_are_consistent(basic in 2usize..5, raw in prop::collection::vec(1u32..16, 1..4)) {
            let mask = (1u32 << basic) - 1;
            prop_assume!(raw.iter().all(|w| w & mask != 0));
            let gens: Vec<Generator> = raw.iter().enumerate().map(|(i, &w)| Generator { factor: basic + i, word: Word::from_bits(w & mask) }).collect();
            let spec = DesignSpec::new(basic + gens.len(), gens).unwrap();
            let sub = expand_defining_contrast(&spec).unwrap();
            prop_assert_eq!(sub.len(), 1 << spec.q());
            let m = build_design_matrix(&spec);
            for &w in sub.words() {
                prop_assert!(m.column_for_word(w).iter().all(|&v| v == 1));
                for &v in sub.words() {
                    prop_assert!(sub.contains(w * v));
                }
            }
            let classes = alias_classes(&spec, &sub);
            prop_assert_eq!(classes.len(), spec.runs() - 1);
            let mut seen = std::collections::HashSet::new();
            for c in &classes {
                prop_assert_eq!(c.len(), sub.len());
                let col = m.column_for_word(c[0]);
                for &w in c {
                    prop_assert!(seen.insert(w));
                    prop_assert!(!sub.contains(w));
                    prop_assert_eq!(&m.column_for_word(w), &col);
                }
            }
        }
    }
}
