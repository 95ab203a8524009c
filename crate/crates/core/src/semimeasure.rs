//! Length-conditional semimeasures on finite string trees, stored as exact
//! leaf masses in lexicographic order. Node (prefix) masses are always
//! derived from the leaves.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Partial, Rational};

/// Upper bound on the number of stored leaves (or leaf pairs).
pub const MAX_LEAVES: usize = 1 << 24;

/// Symbol string of length at most the tree depth.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefix(pub Vec<u8>);

impl Prefix {
    pub fn empty() -> Self {
        Prefix(Vec::new())
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_word(s).map(Prefix)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(&self.0))
    }
}

impl From<&[u8]> for Prefix {
    fn from(s: &[u8]) -> Self {
        Prefix(s.to_vec())
    }
}

/// Which series is the target of a conditional or kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `P(x | y)`: x is the target, y the condition.
    #[serde(rename = "x_given_y")]
    XGivenY,
    /// `P(y | x)`.
    #[serde(rename = "y_given_x")]
    YGivenX,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::XGivenY => Side::YGivenX,
            Side::YGivenX => Side::XGivenY,
        }
    }
}

pub(crate) fn checked_pow(alphabet: usize, depth: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..depth {
        acc = acc
            .checked_mul(alphabet)
            .filter(|&v| v <= MAX_LEAVES)
            .ok_or_else(|| {
                Error::input(format!(
                    "tree with alphabet {alphabet} and depth {depth} exceeds {MAX_LEAVES} leaves"
                ))
            })?;
    }
    Ok(acc)
}

/// Lexicographic index of a word.
pub fn word_index(word: &[u8], alphabet: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * alphabet + s as usize)
}

/// Inverse of [`word_index`] for a fixed length.
pub fn word_at(mut index: usize, len: usize, alphabet: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % alphabet) as u8;
        index /= alphabet;
    }
    out
}

/// All words of a given length in lexicographic order.
pub fn words(len: usize, alphabet: usize) -> impl Iterator<Item = Vec<u8>> {
    let count = alphabet.pow(len as u32);
    (0..count).map(move |i| word_at(i, len, alphabet))
}

pub fn format_word(word: &[u8]) -> String {
    word.iter()
        .map(|&s| std::char::from_digit(s as u32, 36).unwrap_or('?'))
        .collect()
}

pub fn parse_word(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as u8)
                .ok_or_else(|| Error::input(format!("bad symbol {c:?} in word {s:?}")))
        })
        .collect()
}

fn check_word(word: &[u8], alphabet: usize) -> Result<()> {
    match word.iter().find(|&&s| s as usize >= alphabet) {
        Some(&s) => Err(Error::SymbolOutOfRange {
            symbol: s as usize,
            alphabet,
        }),
        None => Ok(()),
    }
}

fn validate_masses(masses: &[Rational]) -> Result<Rational> {
    let mut total = Rational::zero();
    for (index, m) in masses.iter().enumerate() {
        if m.is_negative() {
            return Err(Error::NegativeMass {
                index,
                mass: rational::format(m),
            });
        }
        total += m;
    }
    if total > Rational::one() {
        return Err(Error::MassAboveOne {
            total: rational::format(&total),
        });
    }
    Ok(total)
}

fn check_alphabet(alphabet: usize) -> Result<()> {
    if !(2..=36).contains(&alphabet) {
        return Err(Error::input(format!(
            "alphabet size {alphabet} outside 2..=36"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semimeasure {
    depth: usize,
    alphabet: usize,
    leaves: Vec<Rational>,
}

impl Semimeasure {
    pub fn new(depth: usize, alphabet: usize, leaves: Vec<Rational>) -> Result<Self> {
        check_alphabet(alphabet)?;
        let expected = checked_pow(alphabet, depth)?;
        if leaves.len() != expected {
            return Err(Error::input(format!(
                "expected {expected} leaves for depth {depth}, got {}",
                leaves.len()
            )));
        }
        validate_masses(&leaves)?;
        Ok(Semimeasure {
            depth,
            alphabet,
            leaves,
        })
    }

    /// Skips the mass check; callers guarantee the invariants.
    pub(crate) fn from_parts(depth: usize, alphabet: usize, leaves: Vec<Rational>) -> Self {
        debug_assert_eq!(leaves.len(), alphabet.pow(depth as u32));
        Semimeasure {
            depth,
            alphabet,
            leaves,
        }
    }

    pub fn uniform(depth: usize, alphabet: usize) -> Result<Self> {
        let count = checked_pow(alphabet, depth)?;
        let leaf = Rational::new(1.into(), count.into());
        Semimeasure::new(depth, alphabet, vec![leaf; count])
    }

    pub fn zero(depth: usize, alphabet: usize) -> Result<Self> {
        let count = checked_pow(alphabet, depth)?;
        Semimeasure::new(depth, alphabet, vec![Rational::zero(); count])
    }

    pub fn from_fn(
        depth: usize,
        alphabet: usize,
        mut f: impl FnMut(&[u8]) -> Rational,
    ) -> Result<Self> {
        let count = checked_pow(alphabet, depth)?;
        let leaves = (0..count).map(|i| f(&word_at(i, depth, alphabet))).collect();
        Semimeasure::new(depth, alphabet, leaves)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn leaves(&self) -> &[Rational] {
        &self.leaves
    }

    pub fn leaf(&self, word: &[u8]) -> Result<&Rational> {
        if word.len() != self.depth {
            return Err(Error::input(format!(
                "leaf word has length {}, depth is {}",
                word.len(),
                self.depth
            )));
        }
        check_word(word, self.alphabet)?;
        Ok(&self.leaves[word_index(word, self.alphabet)])
    }

    pub fn total(&self) -> Rational {
        rational::sum(&self.leaves)
    }

    /// Sum of the masses of all leaves extending `prefix`.
    pub fn prefix_mass(&self, prefix: &[u8]) -> Result<Rational> {
        if prefix.len() > self.depth {
            return Err(Error::PrefixTooLong {
                len: prefix.len(),
                depth: self.depth,
            });
        }
        check_word(prefix, self.alphabet)?;
        Ok(self.prefix_mass_unchecked(prefix))
    }

    pub(crate) fn prefix_mass_unchecked(&self, prefix: &[u8]) -> Rational {
        let block = self.alphabet.pow((self.depth - prefix.len()) as u32);
        let start = word_index(prefix, self.alphabet) * block;
        rational::sum(&self.leaves[start..start + block])
    }

    /// Restriction to depth `len`: leaf `w` of the result carries `P(w)`.
    pub fn restriction(&self, len: usize) -> Result<Semimeasure> {
        if len > self.depth {
            return Err(Error::PrefixTooLong {
                len,
                depth: self.depth,
            });
        }
        let block = self.alphabet.pow((self.depth - len) as u32);
        let leaves = self
            .leaves
            .chunks(block)
            .map(rational::sum)
            .collect();
        Ok(Semimeasure::from_parts(len, self.alphabet, leaves))
    }

    /// Pointwise scaling; errors if the result leaves the semimeasure set.
    pub fn scaled(&self, factor: &Rational) -> Result<Semimeasure> {
        let leaves = self.leaves.iter().map(|m| m * factor).collect();
        Semimeasure::new(self.depth, self.alphabet, leaves)
    }

    pub fn min_leaf(&self) -> Rational {
        self.leaves.iter().min().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.leaves.iter().all(|m| m.is_positive())
    }

    pub fn to_doc(&self) -> SemimeasureDoc {
        SemimeasureDoc {
            depth: self.depth,
            alphabet: self.alphabet,
            total_hint: self.total(),
            leaves: self.leaves.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("semimeasure serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SemimeasureDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

/// Wire form: `{"depth", "alphabet", "total_hint", "leaves"}` with `p/q` strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemimeasureDoc {
    pub depth: usize,
    #[serde(default = "default_alphabet")]
    pub alphabet: usize,
    #[serde(with = "rational::serde_str")]
    pub total_hint: Rational,
    #[serde(with = "rational::serde_vec")]
    pub leaves: Vec<Rational>,
}

fn default_alphabet() -> usize {
    2
}

impl TryFrom<SemimeasureDoc> for Semimeasure {
    type Error = Error;

    fn try_from(doc: SemimeasureDoc) -> Result<Self> {
        let p = Semimeasure::new(doc.depth, doc.alphabet, doc.leaves)?;
        if p.total() != doc.total_hint {
            return Err(Error::input(format!(
                "total_hint {} does not match leaf sum {}",
                rational::format(&doc.total_hint),
                rational::format(&p.total())
            )));
        }
        Ok(p)
    }
}

/// All prefix-pair masses `P(x^i, y^j)` of a bivariate semimeasure.
#[derive(Clone, Debug)]
pub struct PrefixTable {
    alphabet: usize,
    depth_y: usize,
    levels: Vec<Vec<Vec<Rational>>>,
}

impl PrefixTable {
    #[allow(clippy::needless_range_loop)]
    fn build(p: &BivariateSemimeasure) -> Self {
        let k = p.alphabet;
        let (nx, ny) = (p.depth_x, p.depth_y);
        let mut levels: Vec<Vec<Vec<Rational>>> = vec![vec![Vec::new(); ny + 1]; nx + 1];
        levels[nx][ny] = p.masses.clone();
        for j in (0..ny).rev() {
            let finer = &levels[nx][j + 1];
            let coarse: Vec<Rational> = finer.chunks(k).map(rational::sum).collect();
            levels[nx][j] = coarse;
        }
        for j in 0..=ny {
            let ky = k.pow(j as u32);
            for i in (0..nx).rev() {
                let finer = &levels[i + 1][j];
                let kx = k.pow(i as u32);
                let mut coarse = vec![Rational::zero(); kx * ky];
                for xi in 0..kx {
                    for a in 0..k {
                        let row = (xi * k + a) * ky;
                        for yj in 0..ky {
                            coarse[xi * ky + yj] += &finer[row + yj];
                        }
                    }
                }
                levels[i][j] = coarse;
            }
        }
        PrefixTable {
            alphabet: k,
            depth_y: ny,
            levels,
        }
    }

    /// `P(x^i, y^j)` for prefixes `xp`, `yp` (lengths within the depths).
    pub fn mass(&self, xp: &[u8], yp: &[u8]) -> &Rational {
        let k = self.alphabet;
        let ky = k.pow(yp.len() as u32);
        let idx = word_index(xp, k) * ky + word_index(yp, k);
        &self.levels[xp.len()][yp.len()][idx]
    }

    pub fn depth_y(&self) -> usize {
        self.depth_y
    }
}

/// Mass on pairs `(x, y)`; depths may differ (products), but the
/// factorization machinery requires equal depths.
#[derive(Debug)]
pub struct BivariateSemimeasure {
    depth_x: usize,
    depth_y: usize,
    alphabet: usize,
    masses: Vec<Rational>,
    table: OnceLock<PrefixTable>,
}

impl Clone for BivariateSemimeasure {
    fn clone(&self) -> Self {
        BivariateSemimeasure {
            depth_x: self.depth_x,
            depth_y: self.depth_y,
            alphabet: self.alphabet,
            masses: self.masses.clone(),
            table: OnceLock::new(),
        }
    }
}

impl PartialEq for BivariateSemimeasure {
    fn eq(&self, other: &Self) -> bool {
        self.depth_x == other.depth_x
            && self.depth_y == other.depth_y
            && self.alphabet == other.alphabet
            && self.masses == other.masses
    }
}

impl Eq for BivariateSemimeasure {}

impl BivariateSemimeasure {
    pub fn new(
        depth_x: usize,
        depth_y: usize,
        alphabet: usize,
        masses: Vec<Rational>,
    ) -> Result<Self> {
        check_alphabet(alphabet)?;
        let kx = checked_pow(alphabet, depth_x)?;
        let ky = checked_pow(alphabet, depth_y)?;
        let expected = kx
            .checked_mul(ky)
            .filter(|&v| v <= MAX_LEAVES)
            .ok_or_else(|| Error::input("bivariate table too large"))?;
        if masses.len() != expected {
            return Err(Error::input(format!(
                "expected {expected} pair masses, got {}",
                masses.len()
            )));
        }
        validate_masses(&masses)?;
        Ok(BivariateSemimeasure {
            depth_x,
            depth_y,
            alphabet,
            masses,
            table: OnceLock::new(),
        })
    }

    pub(crate) fn from_parts(depth: usize, alphabet: usize, masses: Vec<Rational>) -> Self {
        BivariateSemimeasure {
            depth_x: depth,
            depth_y: depth,
            alphabet,
            masses,
            table: OnceLock::new(),
        }
    }

    pub fn from_fn(
        depth: usize,
        alphabet: usize,
        mut f: impl FnMut(&[u8], &[u8]) -> Rational,
    ) -> Result<Self> {
        let side = checked_pow(alphabet, depth)?;
        let xs: Vec<Vec<u8>> = words(depth, alphabet).collect();
        let mut masses = Vec::with_capacity(side * side);
        for x in &xs {
            for y in &xs {
                masses.push(f(x, y));
            }
        }
        BivariateSemimeasure::new(depth, depth, alphabet, masses)
    }

    pub fn uniform(depth: usize, alphabet: usize) -> Result<Self> {
        let side = checked_pow(alphabet, depth)?;
        let count = side * side;
        let leaf = Rational::new(1.into(), count.into());
        BivariateSemimeasure::new(depth, depth, alphabet, vec![leaf; count])
    }

    pub fn depth_x(&self) -> usize {
        self.depth_x
    }

    pub fn depth_y(&self) -> usize {
        self.depth_y
    }

    /// Common depth; errors for unequal depths.
    pub fn depth(&self) -> Result<usize> {
        if self.depth_x != self.depth_y {
            return Err(Error::DepthMismatch {
                left: self.depth_x,
                right: self.depth_y,
            });
        }
        Ok(self.depth_x)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mass(&self, x: &[u8], y: &[u8]) -> Result<&Rational> {
        if x.len() != self.depth_x || y.len() != self.depth_y {
            return Err(Error::input("pair lengths do not match the depths"));
        }
        check_word(x, self.alphabet)?;
        check_word(y, self.alphabet)?;
        let ky = self.alphabet.pow(self.depth_y as u32);
        Ok(&self.masses[word_index(x, self.alphabet) * ky + word_index(y, self.alphabet)])
    }

    pub fn total(&self) -> Rational {
        rational::sum(&self.masses)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.masses.iter().all(|m| m.is_positive())
    }

    pub fn prefix_table(&self) -> &PrefixTable {
        self.table.get_or_init(|| PrefixTable::build(self))
    }

    /// `P(x^i, y^j)`: total mass of all pairs extending the two prefixes.
    pub fn prefix_mass(&self, xp: &[u8], yp: &[u8]) -> Result<Rational> {
        for (p, depth) in [(xp, self.depth_x), (yp, self.depth_y)] {
            if p.len() > depth {
                return Err(Error::PrefixTooLong {
                    len: p.len(),
                    depth,
                });
            }
            check_word(p, self.alphabet)?;
        }
        Ok(self.prefix_table().mass(xp, yp).clone())
    }

    /// `P(x^i, y^j | x^k, y^l) = P(x^i, y^j) / P(x^k, y^l)`, undefined on a zero denominator.
    pub fn conditional_prefix_ratio(
        &self,
        x: &[u8],
        y: &[u8],
        (i, j): (usize, usize),
        (k, l): (usize, usize),
    ) -> Result<Partial> {
        if k > i || l > j || i > x.len() || j > y.len() {
            return Err(Error::input(format!(
                "invalid prefix indices i={i}, j={j}, k={k}, l={l}"
            )));
        }
        let num = self.prefix_mass(&x[..i], &y[..j])?;
        let den = self.prefix_mass(&x[..k], &y[..l])?;
        Ok(Partial::quotient(&num, &den))
    }

    /// Swaps the roles of x and y.
    pub fn transpose(&self) -> BivariateSemimeasure {
        let k = self.alphabet;
        let kx = k.pow(self.depth_x as u32);
        let ky = k.pow(self.depth_y as u32);
        let mut masses = vec![Rational::zero(); kx * ky];
        for xi in 0..kx {
            for yi in 0..ky {
                masses[yi * kx + xi] = self.masses[xi * ky + yi].clone();
            }
        }
        BivariateSemimeasure {
            depth_x: self.depth_y,
            depth_y: self.depth_x,
            alphabet: k,
            masses,
            table: OnceLock::new(),
        }
    }

    pub fn marginal_x(&self) -> Semimeasure {
        let k = self.alphabet;
        let ky = k.pow(self.depth_y as u32);
        let leaves = self.masses.chunks(ky).map(rational::sum).collect();
        Semimeasure::from_parts(self.depth_x, k, leaves)
    }

    pub fn marginal_y(&self) -> Semimeasure {
        self.transpose().marginal_x()
    }

    pub fn to_doc(&self) -> BivariateDoc {
        BivariateDoc {
            depth_x: self.depth_x,
            depth_y: self.depth_y,
            alphabet: self.alphabet,
            total_hint: self.total(),
            masses: self.masses.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("bivariate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: BivariateDoc = serde_json::from_str(s)?;
        let p = BivariateSemimeasure::new(doc.depth_x, doc.depth_y, doc.alphabet, doc.masses)?;
        if p.total() != doc.total_hint {
            return Err(Error::input("total_hint does not match the mass sum"));
        }
        Ok(p)
    }
}

/// Wire form of a bivariate semimeasure; masses are x-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BivariateDoc {
    pub depth_x: usize,
    pub depth_y: usize,
    #[serde(default = "default_alphabet")]
    pub alphabet: usize,
    #[serde(with = "rational::serde_str")]
    pub total_hint: Rational,
    #[serde(with = "rational::serde_vec")]
    pub masses: Vec<Rational>,
}

/// Family of target semimeasures indexed by a condition word.
///
/// Points that were undefined where the family was derived (zero-mass
/// contexts) are stored as mass 0 and listed in `gaps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalSemimeasure {
    depth: usize,
    alphabet: usize,
    rows: Vec<Semimeasure>,
    gaps: Vec<(usize, usize)>,
}

impl ConditionalSemimeasure {
    pub fn new(depth: usize, alphabet: usize, rows: Vec<Semimeasure>) -> Result<Self> {
        ConditionalSemimeasure::with_gaps(depth, alphabet, rows, Vec::new())
    }

    pub fn with_gaps(
        depth: usize,
        alphabet: usize,
        rows: Vec<Semimeasure>,
        gaps: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let expected = checked_pow(alphabet, depth)?;
        if rows.len() != expected {
            return Err(Error::input(format!(
                "expected {expected} condition rows, got {}",
                rows.len()
            )));
        }
        for row in &rows {
            if row.depth() != depth || row.alphabet() != alphabet {
                return Err(Error::input("conditional row has the wrong shape"));
            }
        }
        Ok(ConditionalSemimeasure {
            depth,
            alphabet,
            rows,
            gaps,
        })
    }

    pub fn from_fn(
        depth: usize,
        alphabet: usize,
        mut f: impl FnMut(&[u8], &[u8]) -> Rational,
    ) -> Result<Self> {
        let rows = words(depth, alphabet)
            .map(|cond| Semimeasure::from_fn(depth, alphabet, |target| f(target, &cond)))
            .collect::<Result<Vec<_>>>()?;
        ConditionalSemimeasure::new(depth, alphabet, rows)
    }

    /// `P(x | y) = P(x, y) / P(y)` (or the transposed form); a condition
    /// with zero marginal yields an all-gap row.
    pub fn from_bivariate(p: &BivariateSemimeasure, side: Side) -> Result<Self> {
        let depth = p.depth()?;
        let k = p.alphabet();
        let oriented = match side {
            Side::XGivenY => p.transpose(),
            Side::YGivenX => p.clone(),
        };
        // `oriented` has the condition on its x axis.
        let side_len = k.pow(depth as u32);
        let mut rows = Vec::with_capacity(side_len);
        let mut gaps = Vec::new();
        for c in 0..side_len {
            let block = &oriented.masses[c * side_len..(c + 1) * side_len];
            let marginal = rational::sum(block);
            let leaves = if marginal.is_zero() {
                gaps.extend((0..side_len).map(|t| (c, t)));
                vec![Rational::zero(); side_len]
            } else {
                block.iter().map(|m| m / &marginal).collect()
            };
            rows.push(Semimeasure::from_parts(depth, k, leaves));
        }
        ConditionalSemimeasure::with_gaps(depth, k, rows, gaps)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn given(&self, condition: &[u8]) -> &Semimeasure {
        &self.rows[word_index(condition, self.alphabet)]
    }

    pub fn rows(&self) -> &[Semimeasure] {
        &self.rows
    }

    /// Mass of `target` given `condition`.
    pub fn mass(&self, target: &[u8], condition: &[u8]) -> &Rational {
        &self.given(condition).leaves()[word_index(target, self.alphabet)]
    }

    pub fn gaps(&self) -> &[(usize, usize)] {
        &self.gaps
    }
}

/// `mass(x, y) = P(x) Q(y)`.
pub fn product(p: &Semimeasure, q: &Semimeasure) -> Result<BivariateSemimeasure> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: p.alphabet(),
            right: q.alphabet(),
        });
    }
    let mut masses = Vec::with_capacity(p.leaves().len() * q.leaves().len());
    for a in p.leaves() {
        for b in q.leaves() {
            masses.push(a * b);
        }
    }
    BivariateSemimeasure::new(p.depth(), q.depth(), p.alphabet(), masses)
}

/// Maps `(x, y)` to `z = x1 y1 x2 y2 ... xn yn`.
pub fn interleave(p: &BivariateSemimeasure) -> Result<Semimeasure> {
    let n = p.depth()?;
    let k = p.alphabet();
    let side = k.pow(n as u32);
    let mut leaves = vec![Rational::zero(); side * side];
    let mut z = vec![0u8; 2 * n];
    for xi in 0..side {
        let x = word_at(xi, n, k);
        for yi in 0..side {
            let y = word_at(yi, n, k);
            for t in 0..n {
                z[2 * t] = x[t];
                z[2 * t + 1] = y[t];
            }
            leaves[word_index(&z, k)] = p.masses[xi * side + yi].clone();
        }
    }
    Ok(Semimeasure::from_parts(2 * n, k, leaves))
}

/// Inverse of [`interleave`]; the depth must be even.
pub fn deinterleave(p: &Semimeasure) -> Result<BivariateSemimeasure> {
    if !p.depth().is_multiple_of(2) {
        return Err(Error::input(format!(
            "cannot deinterleave odd depth {}",
            p.depth()
        )));
    }
    let n = p.depth() / 2;
    let k = p.alphabet();
    let side = k.pow(n as u32);
    let mut masses = vec![Rational::zero(); side * side];
    let mut x = vec![0u8; n];
    let mut y = vec![0u8; n];
    for (zi, m) in p.leaves().iter().enumerate() {
        let z = word_at(zi, 2 * n, k);
        for t in 0..n {
            x[t] = z[2 * t];
            y[t] = z[2 * t + 1];
        }
        masses[word_index(&x, k) * side + word_index(&y, k)] = m.clone();
    }
    Ok(BivariateSemimeasure::from_parts(n, k, masses))
}

/// Integer weights scaled to the requested total. Deterministic per seed.
fn random_leaves(
    rng: &mut ChaCha8Rng,
    count: usize,
    strictly_positive: bool,
    total: &Rational,
) -> Result<Vec<Rational>> {
    if total.is_negative() || total > &Rational::one() {
        return Err(Error::MassAboveOne {
            total: rational::format(total),
        });
    }
    if strictly_positive && total.is_zero() {
        return Err(Error::input("a strictly positive semimeasure needs total > 0"));
    }
    let low = if strictly_positive { 1 } else { 0 };
    let mut weights: Vec<u64> = (0..count).map(|_| rng.random_range(low..=16)).collect();
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let sum: u64 = weights.iter().sum();
    let scale = total / Rational::from_integer(sum.into());
    Ok(weights
        .into_iter()
        .map(|w| Rational::from_integer(w.into()) * &scale)
        .collect())
}

/// Seeded test-fixture semimeasure with the exact requested total.
pub fn random_semimeasure(
    seed: u64,
    depth: usize,
    alphabet: usize,
    strictly_positive: bool,
    total: &Rational,
) -> Result<Semimeasure> {
    check_alphabet(alphabet)?;
    let count = checked_pow(alphabet, depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaves = random_leaves(&mut rng, count, strictly_positive, total)?;
    Semimeasure::new(depth, alphabet, leaves)
}

/// Seeded bivariate fixture on equal depths.
pub fn random_bivariate(
    seed: u64,
    depth: usize,
    alphabet: usize,
    strictly_positive: bool,
    total: &Rational,
) -> Result<BivariateSemimeasure> {
    check_alphabet(alphabet)?;
    let side = checked_pow(alphabet, depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let masses = random_leaves(&mut rng, side * side, strictly_positive, total)?;
    BivariateSemimeasure::new(depth, depth, alphabet, masses)
}
