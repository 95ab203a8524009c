//! Causal and instantaneous-causal factorizations of bivariate
//! semimeasures, and the predicates built on them.
//!
//! A kernel stores, for every step `i` and every context, the next-symbol
//! masses `q_i(t_i | t^{i-1}, c^{i-1})` (causal) or `q_i(t_i | t^{i-1}, c^i)`
//! (instantaneous), where `t` is the target series and `c` the condition.
//! Contexts with zero prefix mass are undefined and are never replaced by a
//! numeric default.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Partial, Rational};
use crate::semimeasure::{
    checked_pow, format_word, parse_word, word_at, word_index, words, BivariateSemimeasure,
    ConditionalSemimeasure, PrefixTable, Semimeasure, Side,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Factors see the strict past of the condition.
    Causal,
    /// Factors also see the condition's current symbol.
    Instantaneous,
}

impl Mode {
    fn condition_len(self, step: usize) -> usize {
        match self {
            Mode::Causal => step,
            Mode::Instantaneous => step + 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalKernel {
    depth: usize,
    alphabet: usize,
    mode: Mode,
    side: Side,
    /// `steps[s][context]` holds the masses of target symbol `s` (0-based).
    steps: Vec<Vec<Option<Vec<Rational>>>>,
}

fn orient<'a>(side: Side, target: &'a [u8], condition: &'a [u8]) -> (&'a [u8], &'a [u8]) {
    match side {
        Side::XGivenY => (target, condition),
        Side::YGivenX => (condition, target),
    }
}

fn table_mass<'t>(
    table: &'t PrefixTable,
    side: Side,
    target: &[u8],
    condition: &[u8],
) -> &'t Rational {
    let (xp, yp) = orient(side, target, condition);
    table.mass(xp, yp)
}

impl CausalKernel {
    pub fn new(
        depth: usize,
        alphabet: usize,
        mode: Mode,
        side: Side,
        steps: Vec<Vec<Option<Vec<Rational>>>>,
    ) -> Result<Self> {
        if steps.len() != depth {
            return Err(Error::input(format!(
                "kernel of depth {depth} needs {depth} steps, got {}",
                steps.len()
            )));
        }
        for (s, contexts) in steps.iter().enumerate() {
            let expected = checked_pow(alphabet, s + mode.condition_len(s))?;
            if contexts.len() != expected {
                return Err(Error::input(format!(
                    "step {s} needs {expected} contexts, got {}",
                    contexts.len()
                )));
            }
            for row in contexts.iter().flatten() {
                if row.len() != alphabet {
                    return Err(Error::input("kernel row has the wrong length"));
                }
                if row.iter().any(|m| m.is_negative()) {
                    return Err(Error::input("negative kernel mass"));
                }
                let total = rational::sum(row);
                if total > Rational::one() {
                    return Err(Error::MassAboveOne {
                        total: rational::format(&total),
                    });
                }
            }
        }
        Ok(CausalKernel {
            depth,
            alphabet,
            mode,
            side,
            steps,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn context_index(&self, step: usize, target: &[u8], condition: &[u8]) -> usize {
        let c = self.mode.condition_len(step);
        word_index(&target[..step], self.alphabet) * self.alphabet.pow(c as u32)
            + word_index(&condition[..c], self.alphabet)
    }

    /// Next-symbol masses at the context `(t^step, c^{step or step+1})`.
    pub fn row(&self, step: usize, target: &[u8], condition: &[u8]) -> Option<&[Rational]> {
        let idx = self.context_index(step, target, condition);
        self.steps[step][idx].as_deref()
    }

    /// Product of the per-step conditionals at `(x, y)`; undefined when any
    /// factor's context is.
    pub fn evaluate(&self, x: &[u8], y: &[u8]) -> Result<Partial> {
        if x.len() != self.depth || y.len() != self.depth {
            return Err(Error::input(format!(
                "kernel of depth {} evaluated at lengths {} and {}",
                self.depth,
                x.len(),
                y.len()
            )));
        }
        if let Some(&s) = x.iter().chain(y).find(|&&s| s as usize >= self.alphabet) {
            return Err(Error::SymbolOutOfRange {
                symbol: s as usize,
                alphabet: self.alphabet,
            });
        }
        Ok(self.evaluate_unchecked(x, y))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[u8], y: &[u8]) -> Partial {
        let (target, condition) = match self.side {
            Side::XGivenY => (x, y),
            Side::YGivenX => (y, x),
        };
        let mut acc = Rational::one();
        for s in 0..self.depth {
            match self.row(s, target, condition) {
                Some(row) => acc *= &row[target[s] as usize],
                None => return Partial::Undefined,
            }
        }
        Partial::Defined(acc)
    }

    /// Multiplies the kernel out into a conditional over the target;
    /// undefined points become zero and are recorded as gaps.
    pub fn to_conditional(&self) -> Result<ConditionalSemimeasure> {
        let n = self.depth;
        let k = self.alphabet;
        let mut rows = Vec::new();
        let mut gaps = Vec::new();
        for (ci, condition) in words(n, k).enumerate() {
            let mut leaves = Vec::new();
            for (ti, target) in words(n, k).enumerate() {
                let (x, y) = orient(self.side, &target, &condition);
                match self.evaluate_unchecked(x, y) {
                    Partial::Defined(v) => leaves.push(v),
                    Partial::Undefined => {
                        gaps.push((ci, ti));
                        leaves.push(Rational::zero());
                    }
                }
            }
            rows.push(Semimeasure::new(n, k, leaves)?);
        }
        ConditionalSemimeasure::with_gaps(n, k, rows, gaps)
    }

    pub fn to_doc(&self) -> KernelDoc {
        let mut entries = Vec::new();
        let mut undefined_contexts = Vec::new();
        for (s, contexts) in self.steps.iter().enumerate() {
            let c = self.mode.condition_len(s);
            let ck = self.alphabet.pow(c as u32);
            for (idx, row) in contexts.iter().enumerate() {
                let context = format!(
                    "{}|{}",
                    format_word(&word_at(idx / ck, s, self.alphabet)),
                    format_word(&word_at(idx % ck, c, self.alphabet))
                );
                match row {
                    Some(masses) => entries.push(KernelEntry {
                        context,
                        symbol_masses: masses.clone(),
                    }),
                    None => undefined_contexts.push(context),
                }
            }
        }
        KernelDoc {
            depth: self.depth,
            alphabet: self.alphabet,
            mode: self.mode,
            side: self.side,
            entries,
            undefined_contexts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("kernel serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: KernelDoc = serde_json::from_str(s)?;
        let mut steps: Vec<Vec<Option<Vec<Rational>>>> = (0..doc.depth)
            .map(|s| {
                let count = doc.alphabet.pow((s + doc.mode.condition_len(s)) as u32);
                vec![None; count]
            })
            .collect();
        for entry in doc.entries {
            let (t, c) = entry
                .context
                .split_once('|')
                .ok_or_else(|| Error::input(format!("bad context {:?}", entry.context)))?;
            let (t, c) = (parse_word(t)?, parse_word(c)?);
            let s = t.len();
            if s >= doc.depth || c.len() != doc.mode.condition_len(s) {
                return Err(Error::input(format!("bad context {:?}", entry.context)));
            }
            let idx = word_index(&t, doc.alphabet) * doc.alphabet.pow(c.len() as u32)
                + word_index(&c, doc.alphabet);
            steps[s][idx] = Some(entry.symbol_masses);
        }
        CausalKernel::new(doc.depth, doc.alphabet, doc.mode, doc.side, steps)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelEntry {
    /// `target-prefix|condition-prefix`.
    pub context: String,
    #[serde(with = "rational::serde_vec")]
    pub symbol_masses: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelDoc {
    pub depth: usize,
    pub alphabet: usize,
    pub mode: Mode,
    pub side: Side,
    pub entries: Vec<KernelEntry>,
    pub undefined_contexts: Vec<String>,
}

/// Associated kernel of a bivariate semimeasure: every factor is a quotient
/// of prefix-pair masses.
pub fn causal_part(p: &BivariateSemimeasure, side: Side, mode: Mode) -> Result<CausalKernel> {
    let n = p.depth()?;
    let k = p.alphabet();
    let table = p.prefix_table();
    let mut steps = Vec::with_capacity(n);
    let mut extended = Vec::with_capacity(n);
    for s in 0..n {
        let c = mode.condition_len(s);
        let mut contexts = Vec::with_capacity(k.pow((s + c) as u32));
        for target in words(s, k) {
            extended.clear();
            extended.extend_from_slice(&target);
            extended.push(0);
            for condition in words(c, k) {
                let den = table_mass(table, side, &target, &condition);
                if den.is_zero() {
                    contexts.push(None);
                    continue;
                }
                let row = (0..k)
                    .map(|a| {
                        extended[s] = a as u8;
                        table_mass(table, side, &extended, &condition) / den
                    })
                    .collect();
                contexts.push(Some(row));
            }
        }
        steps.push(contexts);
    }
    Ok(CausalKernel {
        depth: n,
        alphabet: k,
        mode,
        side,
        steps,
    })
}

/// `mass(x, y) = marginal(c) * kernel(t | c)` where `c` is the kernel's
/// condition series.
pub fn compose(marginal: &Semimeasure, kernel: &CausalKernel) -> Result<BivariateSemimeasure> {
    if marginal.depth() != kernel.depth() || marginal.alphabet() != kernel.alphabet() {
        return Err(Error::input("marginal and kernel shapes differ"));
    }
    let (n, k) = (kernel.depth(), kernel.alphabet());
    let side = kernel.side();
    BivariateSemimeasure::from_fn(n, k, |x, y| {
        let condition = match side {
            Side::XGivenY => y,
            Side::YGivenX => x,
        };
        let weight = &marginal.leaves()[word_index(condition, k)];
        match kernel.evaluate_unchecked(x, y) {
            Partial::Defined(v) => weight * v,
            Partial::Undefined => Rational::zero(),
        }
    })
}

/// Seeded kernel whose every row is a probability vector.
pub fn random_kernel(
    seed: u64,
    depth: usize,
    alphabet: usize,
    mode: Mode,
    side: Side,
    strictly_positive: bool,
) -> Result<CausalKernel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
    let low = if strictly_positive { 1u64 } else { 0 };
    let mut steps = Vec::with_capacity(depth);
    for s in 0..depth {
        let count = checked_pow(alphabet, s + mode.condition_len(s))?;
        let contexts = (0..count)
            .map(|_| {
                let mut w: Vec<u64> = (0..alphabet).map(|_| rng.random_range(low..=8)).collect();
                if w.iter().all(|&v| v == 0) {
                    w[rng.random_range(0..alphabet)] = 1;
                }
                let total: u64 = w.iter().sum();
                Some(
                    w.into_iter()
                        .map(|v| Rational::new(v.into(), total.into()))
                        .collect(),
                )
            })
            .collect();
        steps.push(contexts);
    }
    CausalKernel::new(depth, alphabet, mode, side, steps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationCheck {
    pub holds: bool,
    pub checked: usize,
    pub skipped: usize,
    pub violation: Option<(Vec<u8>, Vec<u8>)>,
}

/// Checks `P(x, y) = P(ε, ε) P(x | y↑) P(y | x↑+)` at every pair where both
/// kernels are defined.
pub fn factorization_identity(p: &BivariateSemimeasure) -> Result<FactorizationCheck> {
    let n = p.depth()?;
    let k = p.alphabet();
    let causal = causal_part(p, Side::XGivenY, Mode::Causal)?;
    let inst = causal_part(p, Side::YGivenX, Mode::Instantaneous)?;
    let root = p.total();
    let side = k.pow(n as u32);
    let mut out = FactorizationCheck {
        holds: true,
        checked: 0,
        skipped: 0,
        violation: None,
    };
    for (xi, x) in words(n, k).enumerate() {
        for (yi, y) in words(n, k).enumerate() {
            let (a, b) = match (
                causal.evaluate_unchecked(&x, &y),
                inst.evaluate_unchecked(&x, &y),
            ) {
                (Partial::Defined(a), Partial::Defined(b)) => (a, b),
                _ => {
                    out.skipped += 1;
                    continue;
                }
            };
            out.checked += 1;
            if p.masses()[xi * side + yi] != &root * a * b {
                out.holds = false;
                out.violation.get_or_insert((x.clone(), y.clone()));
            }
        }
    }
    Ok(out)
}

/// `P(x|y↑) P(y|x↑+) = P(x|y↑+) P(y|x↑)` at every pair where all four
/// kernels are defined.
pub fn swap_identity(p: &BivariateSemimeasure) -> Result<bool> {
    let n = p.depth()?;
    let k = p.alphabet();
    let xc = causal_part(p, Side::XGivenY, Mode::Causal)?;
    let xi = causal_part(p, Side::XGivenY, Mode::Instantaneous)?;
    let yc = causal_part(p, Side::YGivenX, Mode::Causal)?;
    let yi = causal_part(p, Side::YGivenX, Mode::Instantaneous)?;
    for x in words(n, k) {
        for y in words(n, k) {
            let left = xc.evaluate_unchecked(&x, &y).mul(&yi.evaluate_unchecked(&x, &y));
            let right = xi.evaluate_unchecked(&x, &y).mul(&yc.evaluate_unchecked(&x, &y));
            if let (Partial::Defined(l), Partial::Defined(r)) = (left, right) {
                if l != r {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Whether a conditional equals its own associated (instantaneous-)causal
/// kernel at every defined point.
///
/// The association needs prefix masses of the target given condition
/// prefixes; these are taken under a uniform weighting of the condition's
/// unseen future, which leaves causal conditionals unchanged.
pub fn is_causal(conditional: &ConditionalSemimeasure, mode: Mode) -> Result<bool> {
    let n = conditional.depth();
    let k = conditional.alphabet();
    let side = checked_pow(k, n)?;
    let prior = Rational::new(1.into(), side.into());
    // condition on the x axis, target on the y axis
    let joint = BivariateSemimeasure::from_fn(n, k, |x, y| conditional.mass(y, x) * &prior)?;
    let kernel = causal_part(&joint, Side::YGivenX, mode)?;
    for condition in words(n, k) {
        for target in words(n, k) {
            if let Partial::Defined(v) = kernel.evaluate_unchecked(&condition, &target) {
                if &v != conditional.mass(&target, &condition) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// x is influence-free of y: `P(x | y↑) = P(x)` wherever the kernel is
/// defined. The marginal is normalized by `P(ε, ε)` so the comparison is
/// between conditionals; the two readings agree for probability measures.
pub fn influence_free(p: &BivariateSemimeasure) -> Result<bool> {
    let n = p.depth()?;
    let k = p.alphabet();
    let root = p.total();
    if root.is_zero() {
        return Ok(true);
    }
    let kernel = causal_part(p, Side::XGivenY, Mode::Causal)?;
    let table = p.prefix_table();
    for x in words(n, k) {
        let marginal = table.mass(&x, &[]) / &root;
        for y in words(n, k) {
            if let Partial::Defined(v) = kernel.evaluate_unchecked(&x, &y) {
                if v != marginal {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The five equivalent characterizations, each checked directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    /// `P(y | x)` is instantaneous causal.
    pub instantaneous_causal: bool,
    /// `P(y^i | x) = P(y^i | x^i)`.
    pub prefix_conditional: bool,
    /// `P(x | x^i, y^i) = P(x | x^i)`.
    pub future_independent: bool,
    /// `P(x_{i+1} | x^i, y^i) = P(x_{i+1} | x^i)`.
    pub next_symbol_independent: bool,
    /// x is influence-free of y.
    pub influence_free: bool,
}

impl EquivalenceReport {
    pub fn as_array(&self) -> [bool; 5] {
        [
            self.instantaneous_causal,
            self.prefix_conditional,
            self.future_independent,
            self.next_symbol_independent,
            self.influence_free,
        ]
    }

    pub fn all_agree(&self) -> bool {
        let a = self.as_array();
        a.iter().all(|&v| v == a[0])
    }
}

fn ratios_equal(a_num: &Rational, a_den: &Rational, b_num: &Rational, b_den: &Rational) -> bool {
    // a_num / a_den == b_num / b_den with both denominators nonzero
    a_num * b_den == b_num * a_den
}

pub fn equivalence_suite(p: &BivariateSemimeasure) -> Result<EquivalenceReport> {
    let n = p.depth()?;
    let k = p.alphabet();
    let table = p.prefix_table();
    let xs: Vec<Vec<u8>> = words(n, k).collect();

    // (i) P(y | x↑+) = P(x, y) / P(x)
    let inst = causal_part(p, Side::YGivenX, Mode::Instantaneous)?;
    let mut instantaneous_causal = true;
    'outer: for x in &xs {
        let px = table.mass(x, &[]);
        if px.is_zero() {
            continue;
        }
        for y in &xs {
            if let Partial::Defined(v) = inst.evaluate_unchecked(x, y) {
                if v * px != *table.mass(x, y) {
                    instantaneous_causal = false;
                    break 'outer;
                }
            }
        }
    }

    // (ii) P(x, y^i) / P(x) = P(x^i, y^i) / P(x^i)
    let mut prefix_conditional = true;
    'outer: for i in 0..=n {
        for x in &xs {
            let px = table.mass(x, &[]);
            let pxi = table.mass(&x[..i], &[]);
            if px.is_zero() || pxi.is_zero() {
                continue;
            }
            for yi in words(i, k) {
                if !ratios_equal(table.mass(x, &yi), px, table.mass(&x[..i], &yi), pxi) {
                    prefix_conditional = false;
                    break 'outer;
                }
            }
        }
    }

    // (iii) P(x, y^i) / P(x^i, y^i) = P(x) / P(x^i)
    let mut future_independent = true;
    'outer: for i in 0..=n {
        for x in &xs {
            let pxi = table.mass(&x[..i], &[]);
            if pxi.is_zero() {
                continue;
            }
            for yi in words(i, k) {
                let den = table.mass(&x[..i], &yi);
                if den.is_zero() {
                    continue;
                }
                if !ratios_equal(table.mass(x, &yi), den, table.mass(x, &[]), pxi) {
                    future_independent = false;
                    break 'outer;
                }
            }
        }
    }

    // (iv) P(x^{i+1}, y^i) / P(x^i, y^i) = P(x^{i+1}) / P(x^i)
    let mut next_symbol_independent = true;
    'outer: for i in 0..n {
        for x in words(i + 1, k) {
            let pxi = table.mass(&x[..i], &[]);
            if pxi.is_zero() {
                continue;
            }
            for yi in words(i, k) {
                let den = table.mass(&x[..i], &yi);
                if den.is_zero() {
                    continue;
                }
                if !ratios_equal(table.mass(&x, &yi), den, table.mass(&x, &[]), pxi) {
                    next_symbol_independent = false;
                    break 'outer;
                }
            }
        }
    }

    Ok(EquivalenceReport {
        instantaneous_causal,
        prefix_conditional,
        future_independent,
        next_symbol_independent,
        influence_free: influence_free(p)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassUniformity {
    pub uniform: bool,
    /// `Σ_x P(x | y)` per condition, gaps counted as zero.
    pub totals: Vec<Rational>,
    pub gap_count: usize,
}

impl MassUniformity {
    pub fn has_gaps(&self) -> bool {
        self.gap_count > 0
    }
}

/// Whether every condition carries the same total mass.
pub fn total_mass_uniformity(conditional: &ConditionalSemimeasure) -> MassUniformity {
    let totals: Vec<Rational> = conditional.rows().iter().map(Semimeasure::total).collect();
    let uniform = totals.windows(2).all(|w| w[0] == w[1]);
    MassUniformity {
        uniform,
        totals,
        gap_count: conditional.gaps().len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::semimeasure::{product, random_bivariate, random_semimeasure};

    /// x iid fair, y_1 = 0, y_2 = x_1.
    fn lag1_copy() -> BivariateSemimeasure {
        BivariateSemimeasure::from_fn(2, 2, |x, y| {
            if y[0] == 0 && y[1] == x[0] {
                rat(1, 4)
            } else {
                int(0)
            }
        })
        .unwrap()
    }

    fn copy(n: usize) -> BivariateSemimeasure {
        let leaf = Rational::new(1.into(), (1u64 << n).into());
        BivariateSemimeasure::from_fn(n, 2, |x, y| if x == y { leaf.clone() } else { int(0) })
            .unwrap()
    }

    /// x_1 fair; x_2 copies y_1; y iid fair.
    fn feedback() -> BivariateSemimeasure {
        BivariateSemimeasure::from_fn(2, 2, |x, y| {
            if x[1] == y[0] {
                rat(1, 8)
            } else {
                int(0)
            }
        })
        .unwrap()
    }

    #[test]
    fn uniform_causal_part() {
        let p = BivariateSemimeasure::uniform(1, 2).unwrap();
        let k = causal_part(&p, Side::XGivenY, Mode::Causal).unwrap();
        assert_eq!(k.evaluate(&[0], &[1]).unwrap(), Partial::Defined(rat(1, 2)));
    }

    #[test]
    fn product_causal_part_is_marginal_kernel() {
        let a = random_semimeasure(1, 3, 2, true, &rat(2, 3)).unwrap();
        let b = random_semimeasure(2, 3, 2, true, &rat(1, 2)).unwrap();
        let p = product(&a, &b).unwrap();
        for mode in [Mode::Causal, Mode::Instantaneous] {
            let k = causal_part(&p, Side::XGivenY, mode).unwrap();
            for x in words(3, 2) {
                for y in words(3, 2) {
                    for s in 0..3 {
                        let row = k.row(s, &x, &y).unwrap();
                        let den = a.prefix_mass(&x[..s]).unwrap();
                        let mut ext = x[..s].to_vec();
                        ext.push(x[s]);
                        assert_eq!(row[x[s] as usize], a.prefix_mass(&ext).unwrap() / den);
                    }
                }
            }
        }
    }

    #[test]
    fn lag1_copy_instantaneous_kernel() {
        let p = lag1_copy();
        let k = causal_part(&p, Side::YGivenX, Mode::Instantaneous).unwrap();
        for x in words(2, 2) {
            for y in words(2, 2) {
                if p.mass(&x, &y).unwrap().is_positive() {
                    assert_eq!(k.evaluate(&x, &y).unwrap(), Partial::Defined(int(1)));
                }
            }
        }
    }

    #[test]
    fn evaluate_edge_cases() {
        let p = BivariateSemimeasure::uniform(2, 2).unwrap();
        let k = causal_part(&p, Side::YGivenX, Mode::Causal).unwrap();
        for x in words(2, 2) {
            for y in words(2, 2) {
                assert_eq!(k.evaluate(&x, &y).unwrap(), Partial::Defined(rat(1, 4)));
            }
        }
        assert!(k.evaluate(&[0], &[0, 0]).is_err());

        let p0 = BivariateSemimeasure::uniform(0, 2).unwrap();
        let k0 = causal_part(&p0, Side::XGivenY, Mode::Causal).unwrap();
        assert_eq!(k0.evaluate(&[], &[]).unwrap(), Partial::Defined(int(1)));
    }

    #[test]
    fn kernel_matches_telescoping_quotient() {
        let p = random_bivariate(4, 3, 2, true, &rat(7, 8)).unwrap();
        let k = causal_part(&p, Side::XGivenY, Mode::Causal).unwrap();
        for x in words(3, 2) {
            for y in words(3, 2) {
                let mut brute = int(1);
                for i in 1..=3 {
                    brute *= p.prefix_mass(&x[..i], &y[..i - 1]).unwrap()
                        / p.prefix_mass(&x[..i - 1], &y[..i - 1]).unwrap();
                }
                assert_eq!(k.evaluate(&x, &y).unwrap(), Partial::Defined(brute));
            }
        }
    }

    #[test]
    fn factorization_small_cases() {
        let u = BivariateSemimeasure::uniform(1, 2).unwrap();
        assert!(factorization_identity(&u).unwrap().holds);

        let deficient = BivariateSemimeasure::new(1, 1, 2, vec![rat(1, 8); 4]).unwrap();
        let c = causal_part(&deficient, Side::XGivenY, Mode::Causal).unwrap();
        let i = causal_part(&deficient, Side::YGivenX, Mode::Instantaneous).unwrap();
        assert_eq!(c.evaluate(&[0], &[1]).unwrap(), Partial::Defined(rat(1, 2)));
        assert_eq!(i.evaluate(&[0], &[1]).unwrap(), Partial::Defined(rat(1, 2)));
        let check = factorization_identity(&deficient).unwrap();
        assert!(check.holds);
        assert_eq!(check.checked, 4);
    }

    #[test]
    fn factorization_exhaustive_depth3() {
        let p = random_bivariate(17, 3, 2, true, &rat(3, 5)).unwrap();
        let check = factorization_identity(&p).unwrap();
        assert!(check.holds);
        assert_eq!(check.checked, 64);
        assert!(swap_identity(&p).unwrap());
    }

    #[test]
    fn factorization_with_zeros_skips_undefined() {
        let check = factorization_identity(&lag1_copy()).unwrap();
        assert!(check.holds);
        assert!(check.skipped > 0);
    }

    #[test]
    fn kernel_built_conditional_is_causal() {
        for mode in [Mode::Causal, Mode::Instantaneous] {
            let k = random_kernel(3, 3, 2, mode, Side::YGivenX, true).unwrap();
            let c = k.to_conditional().unwrap();
            assert!(is_causal(&c, mode).unwrap(), "{mode:?}");
        }
    }

    #[test]
    fn instantaneous_copy_conditional() {
        for n in 1..=3 {
            let c = ConditionalSemimeasure::from_fn(n, 2, |t, cond| {
                if t == cond {
                    int(1)
                } else {
                    int(0)
                }
            })
            .unwrap();
            assert!(is_causal(&c, Mode::Instantaneous).unwrap());
            assert!(!is_causal(&c, Mode::Causal).unwrap());
        }
    }

    #[test]
    fn future_dependent_conditional_is_not_causal() {
        // target_1 copies condition_2
        let c = ConditionalSemimeasure::from_fn(2, 2, |t, cond| {
            if t[0] == cond[1] {
                rat(1, 2)
            } else {
                int(0)
            }
        })
        .unwrap();
        assert!(!is_causal(&c, Mode::Causal).unwrap());
        assert!(!is_causal(&c, Mode::Instantaneous).unwrap());
    }

    #[test]
    fn equivalence_on_constructed_cases() {
        let marginal = random_semimeasure(5, 3, 2, true, &int(1)).unwrap();
        let kernel = random_kernel(5, 3, 2, Mode::Instantaneous, Side::YGivenX, true).unwrap();
        let p = compose(&marginal, &kernel).unwrap();
        assert_eq!(equivalence_suite(&p).unwrap().as_array(), [true; 5]);

        let u = BivariateSemimeasure::uniform(2, 2).unwrap();
        assert_eq!(equivalence_suite(&u).unwrap().as_array(), [true; 5]);

        for seed in 0..10 {
            let g = random_bivariate(seed, 3, 2, true, &int(1)).unwrap();
            let r = equivalence_suite(&g).unwrap();
            assert!(r.all_agree(), "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn influence_free_examples() {
        let a = random_semimeasure(8, 3, 2, true, &rat(1, 2)).unwrap();
        let b = random_semimeasure(9, 3, 2, true, &rat(1, 3)).unwrap();
        assert!(influence_free(&product(&a, &b).unwrap()).unwrap());
        for n in 1..=3 {
            assert!(influence_free(&copy(n)).unwrap());
        }
        assert!(!influence_free(&feedback()).unwrap());
    }

    #[test]
    fn mass_uniformity() {
        let ones = ConditionalSemimeasure::from_fn(2, 2, |t, _| {
            if t == [0, 0] {
                int(1)
            } else {
                int(0)
            }
        })
        .unwrap();
        assert!(total_mass_uniformity(&ones).uniform);

        let uneven = ConditionalSemimeasure::from_fn(2, 2, |t, c| match (t, c) {
            ([0, 0], [0, 0]) => int(1),
            ([0, 0], _) => rat(1, 2),
            _ => int(0),
        })
        .unwrap();
        assert!(!total_mass_uniformity(&uneven).uniform);

        // associated kernel of the lag-1 copy has undefined contexts
        let k = causal_part(&lag1_copy(), Side::YGivenX, Mode::Causal).unwrap();
        let c = k.to_conditional().unwrap();
        let u = total_mass_uniformity(&c);
        assert!(u.has_gaps());
        let direct: Vec<Rational> = c.rows().iter().map(|r| rational::sum(r.leaves())).collect();
        assert_eq!(u.totals, direct);
    }

    #[test]
    fn kernel_json_round_trip() {
        let k = causal_part(&lag1_copy(), Side::YGivenX, Mode::Instantaneous).unwrap();
        let json = k.to_json();
        assert!(json.contains("\"undefined_contexts\""));
        assert_eq!(CausalKernel::from_json(&json).unwrap(), k);
    }
}
