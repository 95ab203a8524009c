//! Finite convex mixtures over testable families, the staged monotone
//! enumeration, and a sequential per-context mixture for long series.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{CausalKernel, Mode};
use crate::rational::{self, Rational};
use crate::semimeasure::{
    checked_pow, word_index, words, BivariateSemimeasure, ConditionalSemimeasure, Semimeasure,
    Side,
};

/// Default cap on the number of tables a family may enumerate.
pub const DEFAULT_FAMILY_CAP: u128 = 100_000;

/// Denominator exponent of the dyadic grid used for non-dyadic schemes.
const WEIGHT_BITS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    /// `a_i = 2^{-i}`, `i = 1, 2, ...`.
    Dyadic,
    /// `a_i ∝ 1 / ((i+1) lg²(i+1))`, normalized over the family and floored
    /// to multiples of `2^-64`.
    InverseIlogSquared,
    Explicit(Vec<Rational>),
}

impl WeightScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dyadic" => Ok(WeightScheme::Dyadic),
            "ilog2" | "inverse-ilog-squared" => Ok(WeightScheme::InverseIlogSquared),
            other => Err(Error::input(format!(
                "unknown weight scheme {other:?} (expected dyadic or ilog2)"
            ))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            WeightScheme::Dyadic => "dyadic",
            WeightScheme::InverseIlogSquared => "ilog2",
            WeightScheme::Explicit(_) => "explicit",
        }
    }

    pub fn weights(&self, count: usize) -> Result<Vec<Rational>> {
        if count == 0 {
            return Err(Error::input("empty family"));
        }
        match self {
            WeightScheme::Dyadic => Ok((1..=count).map(|i| rational::pow2(-(i as i64))).collect()),
            WeightScheme::InverseIlogSquared => ilog_weights(count),
            WeightScheme::Explicit(w) => {
                if w.len() != count {
                    return Err(Error::input(format!(
                        "{} explicit weights for {count} components",
                        w.len()
                    )));
                }
                Ok(w.clone())
            }
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

fn ilog_weights(count: usize) -> Result<Vec<Rational>> {
    let raw: Vec<f64> = (1..=count)
        .map(|i| {
            let j = (i + 1) as f64;
            1.0 / (j * j.log2().powi(2))
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let scale = (WEIGHT_BITS as f64).exp2();
    let mut numers: Vec<u128> = raw
        .iter()
        .map(|r| ((r / total) * scale).floor().max(1.0) as u128)
        .collect();
    let cap = 1u128 << WEIGHT_BITS;
    let sum: u128 = numers.iter().sum();
    if sum > cap {
        // float rounding overshoot; trim the largest weight
        numers[0] -= sum - cap;
    }
    if numers.iter().sum::<u128>() > cap || numers[0] == 0 {
        return Err(Error::input(format!(
            "family of {count} is too large for the ilog2 grid"
        )));
    }
    let den = Rational::from_integer(num_bigint::BigInt::from(cap));
    Ok(numers
        .into_iter()
        .map(|n| Rational::from_integer(n.into()) / &den)
        .collect())
}

/// Tables that can be mixed leaf by leaf.
pub trait Mixable: Clone {
    /// Components must agree on this to be mixed.
    fn shape(&self) -> Vec<usize>;
    fn values(&self) -> Vec<&Rational>;
    fn rebuild(&self, values: Vec<Rational>) -> Result<Self>;
}

impl Mixable for Semimeasure {
    fn shape(&self) -> Vec<usize> {
        vec![self.depth(), self.alphabet()]
    }

    fn values(&self) -> Vec<&Rational> {
        self.leaves().iter().collect()
    }

    fn rebuild(&self, values: Vec<Rational>) -> Result<Self> {
        Semimeasure::new(self.depth(), self.alphabet(), values)
    }
}

impl Mixable for BivariateSemimeasure {
    fn shape(&self) -> Vec<usize> {
        vec![self.depth_x(), self.depth_y(), self.alphabet()]
    }

    fn values(&self) -> Vec<&Rational> {
        self.masses().iter().collect()
    }

    fn rebuild(&self, values: Vec<Rational>) -> Result<Self> {
        BivariateSemimeasure::new(self.depth_x(), self.depth_y(), self.alphabet(), values)
    }
}

impl Mixable for ConditionalSemimeasure {
    fn shape(&self) -> Vec<usize> {
        vec![self.depth(), self.alphabet()]
    }

    fn values(&self) -> Vec<&Rational> {
        self.rows().iter().flat_map(|r| r.leaves()).collect()
    }

    fn rebuild(&self, values: Vec<Rational>) -> Result<Self> {
        let width = self.alphabet().pow(self.depth() as u32);
        let rows = values
            .chunks(width)
            .map(|c| Semimeasure::new(self.depth(), self.alphabet(), c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        ConditionalSemimeasure::new(self.depth(), self.alphabet(), rows)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixtureModel<C> {
    components: Vec<C>,
    weights: Vec<Rational>,
    scheme: WeightScheme,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominanceCertificate {
    pub holds: bool,
    pub checked: usize,
    /// First `(component, value index)` where `m < a_i P_i`.
    pub violation: Option<(usize, usize)>,
}

impl<C: Mixable> MixtureModel<C> {
    pub fn new(components: Vec<C>, weights: Vec<Rational>, scheme: WeightScheme) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::input("empty family"));
        }
        if weights.len() != components.len() {
            return Err(Error::input(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::input(format!("weight {i} is not positive")));
        }
        let total = rational::sum(&weights);
        if total > Rational::one() {
            return Err(Error::MassAboveOne {
                total: rational::format(&total),
            });
        }
        let shape = components[0].shape();
        if components.iter().any(|c| c.shape() != shape) {
            return Err(Error::input("mixture components have different shapes"));
        }
        Ok(MixtureModel {
            components,
            weights,
            scheme,
        })
    }

    pub fn build(components: Vec<C>, scheme: &WeightScheme) -> Result<Self> {
        let weights = scheme.weights(components.len())?;
        MixtureModel::new(components, weights, scheme.clone())
    }

    pub fn components(&self) -> &[C] {
        &self.components
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn scheme(&self) -> &WeightScheme {
        &self.scheme
    }

    /// `Σ_i a_i P_i` as a table of the components' kind.
    pub fn materialize(&self) -> Result<C> {
        let first = &self.components[0];
        let mut acc = vec![Rational::zero(); first.values().len()];
        for (c, w) in self.components.iter().zip(&self.weights) {
            for (slot, v) in acc.iter_mut().zip(c.values()) {
                if !v.is_zero() {
                    *slot += w * v;
                }
            }
        }
        first.rebuild(acc)
    }

    /// Checks `m ≥ a_i P_i` at every point for every component.
    pub fn dominance(&self) -> Result<DominanceCertificate> {
        let m = self.materialize()?;
        let mv = m.values();
        let mut cert = DominanceCertificate {
            holds: true,
            checked: 0,
            violation: None,
        };
        for (i, (c, w)) in self.components.iter().zip(&self.weights).enumerate() {
            for (j, (v, total)) in c.values().into_iter().zip(&mv).enumerate() {
                cert.checked += 1;
                if *total < &(w * v) {
                    cert.holds = false;
                    cert.violation.get_or_insert((i, j));
                }
            }
        }
        Ok(cert)
    }
}

/// `Σ_x P(x) lg(P(x)/m(x))` for one component against its mixture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpectationBound {
    pub divergence_log2: f64,
    /// `lg(1/a_P)`.
    pub bound_log2: f64,
    /// Whether the component is a probability measure.
    pub measure: bool,
}

impl ExpectationBound {
    pub fn lower_holds(&self, tol: f64) -> bool {
        self.divergence_log2 >= -tol
    }

    pub fn upper_holds(&self, tol: f64) -> bool {
        self.divergence_log2 <= self.bound_log2 + tol
    }
}

impl MixtureModel<Semimeasure> {
    pub fn value(&self, x: &[u8]) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (c, w) in self.components.iter().zip(&self.weights) {
            acc += w * c.leaf(x)?;
        }
        Ok(acc)
    }

    pub fn expectation_bound(&self, component: usize) -> Result<ExpectationBound> {
        let p = self
            .components
            .get(component)
            .ok_or_else(|| Error::input(format!("no component {component}")))?;
        let m = self.materialize()?;
        let mut divergence = 0.0;
        for (pv, mv) in p.leaves().iter().zip(m.leaves()) {
            if pv.is_zero() {
                continue;
            }
            divergence += rational::to_f64(pv) * rational::log2(&(pv / mv));
        }
        Ok(ExpectationBound {
            divergence_log2: divergence,
            bound_log2: -rational::log2(&self.weights[component]),
            measure: p.total().is_one(),
        })
    }
}

/// `m^S(x) · m^T(y | x)` where the conditional mixture's condition is x.
pub fn product_mixture(
    ms: &MixtureModel<Semimeasure>,
    mt: &MixtureModel<ConditionalSemimeasure>,
) -> Result<BivariateSemimeasure> {
    let s = ms.materialize()?;
    let t = mt.materialize()?;
    if s.depth() != t.depth() {
        return Err(Error::DepthMismatch {
            left: s.depth(),
            right: t.depth(),
        });
    }
    if s.alphabet() != t.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: s.alphabet(),
            right: t.alphabet(),
        });
    }
    BivariateSemimeasure::from_fn(s.depth(), s.alphabet(), |x, y| {
        &s.leaves()[word_index(x, s.alphabet())] * t.mass(y, x)
    })
}

/// `product ≥ a_i b_j P_i Q_j` at every pair, for all `i, j`.
pub fn product_dominance(
    ms: &MixtureModel<Semimeasure>,
    mt: &MixtureModel<ConditionalSemimeasure>,
    product: &BivariateSemimeasure,
) -> bool {
    let k = product.alphabet();
    let n = product.depth_x();
    let side = k.pow(n as u32);
    for (p, a) in ms.components().iter().zip(ms.weights()) {
        for (q, b) in mt.components().iter().zip(mt.weights()) {
            let ab = a * b;
            for (xi, x) in words(n, k).enumerate() {
                let px = &p.leaves()[xi];
                for (yi, y) in words(n, k).enumerate() {
                    if product.masses()[xi * side + yi] < &ab * px * q.mass(&y, &x) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// All count vectors of length `alphabet` summing to at most `grid`
/// (exactly `grid` when `proper`), in lexicographic order.
pub fn grid_rows(alphabet: usize, grid: u32, proper: bool) -> Vec<Vec<u32>> {
    fn rec(
        pos: usize,
        alphabet: usize,
        left: u32,
        proper: bool,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == alphabet {
            if !proper || left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(pos + 1, alphabet, left - c, proper, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, alphabet, grid, proper, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovConfig {
    pub order: usize,
    pub grid: u32,
    pub alphabet: usize,
    /// Restrict to rows that sum to exactly one.
    pub proper_only: bool,
    pub cap: u128,
}

impl MarkovConfig {
    pub fn new(order: usize, grid: u32) -> Self {
        MarkovConfig {
            order,
            grid,
            alphabet: 2,
            proper_only: false,
            cap: DEFAULT_FAMILY_CAP,
        }
    }

    /// Parses `markov:k=1,g=4` (optionally `,a=3`).
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("bad family descriptor {s:?}"));
        let rest = s.strip_prefix("markov:").ok_or_else(bad)?;
        let mut cfg = MarkovConfig::new(1, 4);
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            match key.trim() {
                "k" => cfg.order = value.trim().parse().map_err(|_| bad())?,
                "g" => cfg.grid = value.trim().parse().map_err(|_| bad())?,
                "a" => cfg.alphabet = value.trim().parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        Ok(cfg)
    }

    pub fn descriptor(&self) -> String {
        if self.alphabet == 2 {
            format!("markov:k={},g={}", self.order, self.grid)
        } else {
            format!("markov:k={},g={},a={}", self.order, self.grid, self.alphabet)
        }
    }

    pub fn row_count(&self) -> u128 {
        let a = self.alphabet as u128;
        let g = self.grid as u128;
        if self.proper_only {
            binomial(g + a - 1, a - 1).unwrap_or(u128::MAX)
        } else {
            binomial(g + a, a).unwrap_or(u128::MAX)
        }
    }

    /// Number of tables, saturating at `u128::MAX`.
    pub fn family_size(&self) -> u128 {
        let contexts = (self.alphabet as u128)
            .checked_pow(self.order as u32)
            .unwrap_or(u128::MAX);
        let rows = self.row_count();
        if contexts > 128 {
            return if rows <= 1 { rows } else { u128::MAX };
        }
        rows.checked_pow(contexts as u32).unwrap_or(u128::MAX)
    }
}

/// One order-k next-symbol table; `rows[context]` holds grid counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovTable {
    pub order: usize,
    pub grid: u32,
    pub alphabet: usize,
    pub rows: Vec<Vec<u32>>,
}

impl MarkovTable {
    /// Row index for the symbol at position `t`; missing history reads as 0.
    fn context(&self, history: &[u8], t: usize) -> usize {
        let mut idx = 0;
        for j in (1..=self.order).rev() {
            let s = if t >= j { history[t - j] as usize } else { 0 };
            idx = idx * self.alphabet + s;
        }
        idx
    }

    pub fn next_symbol(&self, history: &[u8], t: usize, symbol: u8) -> Rational {
        let row = &self.rows[self.context(history, t)];
        Rational::new(row[symbol as usize].into(), self.grid.into())
    }

    pub fn unroll(&self, depth: usize) -> Result<Semimeasure> {
        Semimeasure::from_fn(depth, self.alphabet, |w| {
            let mut acc = Rational::one();
            for t in 0..depth {
                acc *= self.next_symbol(w, t, w[t]);
                if acc.is_zero() {
                    break;
                }
            }
            acc
        })
    }

    /// The table as a kernel that ignores its condition.
    pub fn to_kernel(&self, depth: usize, side: Side, mode: Mode) -> Result<CausalKernel> {
        let k = self.alphabet;
        let mut steps = Vec::with_capacity(depth);
        for s in 0..depth {
            let c = match mode {
                Mode::Causal => s,
                Mode::Instantaneous => s + 1,
            };
            let ck = checked_pow(k, c)?;
            let mut contexts = Vec::with_capacity(checked_pow(k, s)? * ck);
            for target in words(s, k) {
                let row: Vec<Rational> = (0..k)
                    .map(|a| self.next_symbol(&target, s, a as u8))
                    .collect();
                contexts.extend(std::iter::repeat_n(Some(row), ck));
            }
            steps.push(contexts);
        }
        CausalKernel::new(depth, k, mode, side, steps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelFamily {
    config: MarkovConfig,
    depth: usize,
    tables: Vec<MarkovTable>,
}

impl ModelFamily {
    pub fn markov(config: MarkovConfig, depth: usize) -> Result<Self> {
        if config.grid == 0 || depth == 0 {
            return Err(Error::input("grid and depth must be at least 1"));
        }
        if !(2..=36).contains(&config.alphabet) {
            return Err(Error::input("alphabet must be in 2..=36"));
        }
        let size = config.family_size();
        if size > config.cap {
            return Err(Error::FamilyTooLarge {
                size,
                cap: config.cap,
            });
        }
        let rows = grid_rows(config.alphabet, config.grid, config.proper_only);
        let contexts = config.alphabet.pow(config.order as u32);
        let mut tables = Vec::with_capacity(size as usize);
        for mut idx in 0..size as usize {
            let mut chosen = vec![Vec::new(); contexts];
            for slot in chosen.iter_mut().rev() {
                *slot = rows[idx % rows.len()].clone();
                idx /= rows.len();
            }
            tables.push(MarkovTable {
                order: config.order,
                grid: config.grid,
                alphabet: config.alphabet,
                rows: chosen,
            });
        }
        Ok(ModelFamily {
            config,
            depth,
            tables,
        })
    }

    pub fn config(&self) -> &MarkovConfig {
        &self.config
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn tables(&self) -> &[MarkovTable] {
        &self.tables
    }

    pub fn semimeasures(&self) -> Result<Vec<Semimeasure>> {
        self.tables.iter().map(|t| t.unroll(self.depth)).collect()
    }

    pub fn mixture(&self, scheme: &WeightScheme) -> Result<MixtureModel<Semimeasure>> {
        MixtureModel::build(self.semimeasures()?, scheme)
    }
}

/// `markov_family` over the binary alphabet with the default cap.
pub fn markov_family(order: usize, grid: u32, depth: usize) -> Result<ModelFamily> {
    ModelFamily::markov(MarkovConfig::new(order, grid), depth)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixtureDoc {
    pub weight_scheme: String,
    #[serde(with = "rational::serde_vec")]
    pub weights: Vec<Rational>,
    /// `family#index` references.
    pub components: Vec<String>,
}

impl MixtureModel<Semimeasure> {
    pub fn to_doc(&self, family: &str) -> MixtureDoc {
        MixtureDoc {
            weight_scheme: self.scheme.tag().to_string(),
            weights: self.weights.clone(),
            components: (0..self.components.len())
                .map(|i| format!("{family}#{i}"))
                .collect(),
        }
    }
}

/// Raw, possibly invalid, leaf tables emitted over stages; stages beyond
/// the last repeat it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableStream {
    pub depth: usize,
    pub alphabet: usize,
    pub stages: Vec<Vec<Rational>>,
}

impl TableStream {
    pub fn stage(&self, t: usize) -> &[Rational] {
        let last = self.stages.len().saturating_sub(1);
        &self.stages[t.min(last)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagedEnumeration {
    /// `stages[t][i]` is the accepted table of stream `i` at stage `t`.
    pub stages: Vec<Vec<Semimeasure>>,
    /// First stage at which each stream was frozen.
    pub frozen_at: Vec<Option<usize>>,
}

/// Runs the staged acceptance rule. Stream `i` (0-based) is polled from
/// stage `i + 1` on; at each stage its candidate is the pointwise maximum of
/// its tables so far, accepted if its mass is at most 1 and `accept` holds
/// on every restriction to depth `0..=min(t, n)`. A rejected stream keeps
/// its last accepted table from then on.
pub fn staged_enumeration(
    streams: &[TableStream],
    accept: &dyn Fn(&Semimeasure) -> bool,
    t_max: usize,
) -> Result<StagedEnumeration> {
    let mut current = Vec::with_capacity(streams.len());
    for s in streams {
        let zero = Semimeasure::zero(s.depth, s.alphabet)?;
        for j in 0..=s.depth {
            if !accept(&zero.restriction(j)?) {
                return Err(Error::input("the predicate must accept the zero table"));
            }
        }
        if s.stages.is_empty() {
            return Err(Error::input("stream has no stages"));
        }
        current.push(zero);
    }
    let mut frozen_at = vec![None; streams.len()];
    let mut running_max: Vec<Vec<Rational>> = streams
        .iter()
        .map(|s| vec![Rational::zero(); s.stage(0).len()])
        .collect();
    let mut stages = vec![current.clone()];
    for t in 1..=t_max {
        for (i, s) in streams.iter().enumerate() {
            if i + 1 > t {
                continue;
            }
            let table = s.stage(t);
            if table.len() != running_max[i].len() {
                return Err(Error::input(format!("stream {i} changed shape at stage {t}")));
            }
            for (m, v) in running_max[i].iter_mut().zip(table) {
                if v > m {
                    *m = v.clone();
                }
            }
            if frozen_at[i].is_some() {
                continue;
            }
            let ok = running_max[i].iter().all(|v| !v.is_negative())
                && rational::sum(&running_max[i]) <= Rational::one()
                && {
                    let cand =
                        Semimeasure::from_parts(s.depth, s.alphabet, running_max[i].clone());
                    (0..=t.min(s.depth)).all(|j| {
                        cand.restriction(j).map(|r| accept(&r)).unwrap_or(false)
                    })
                };
            if ok {
                current[i] = Semimeasure::from_parts(s.depth, s.alphabet, running_max[i].clone());
            } else {
                frozen_at[i] = Some(t);
            }
        }
        stages.push(current.clone());
    }
    Ok(StagedEnumeration { stages, frozen_at })
}

/// Sequential mixture over order-k tables with a product prior over the
/// rows of each context: the prior weight of a table is the product of its
/// row weights. Equivalent to the explicit mixture over all tables with
/// those weights, but linear in the series length.
#[derive(Clone, Debug)]
pub struct ContextMixture {
    alphabet: usize,
    grid: u32,
    rows: Vec<Vec<u32>>,
    weights: Vec<BigUint>,
    weight_total: BigUint,
    /// Per visited context: `w_r Π c_{r, a}` over the symbols seen there.
    state: BTreeMap<usize, (Vec<BigUint>, usize)>,
    log2: f64,
    steps: usize,
    zero: bool,
}

impl ContextMixture {
    /// Proper grid rows over `alphabet` with prior weights from `scheme`.
    pub fn new(alphabet: usize, grid: u32, scheme: &WeightScheme) -> Result<Self> {
        if grid == 0 || alphabet < 2 {
            return Err(Error::input("grid must be positive and alphabet at least 2"));
        }
        let rows = grid_rows(alphabet, grid, true);
        let weights = scheme.weights(rows.len())?;
        let lcm = weights
            .iter()
            .fold(num_bigint::BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let weights: Vec<BigUint> = weights
            .iter()
            .map(|w| {
                (w.numer() * (&lcm / w.denom()))
                    .to_biguint()
                    .expect("positive weight")
            })
            .collect();
        let weight_total = weights.iter().sum();
        Ok(ContextMixture {
            alphabet,
            grid,
            rows,
            weights,
            weight_total,
            state: BTreeMap::new(),
            log2: 0.0,
            steps: 0,
            zero: false,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Row weights normalized to sum to one.
    pub fn row_weights(&self) -> Vec<Rational> {
        let total = num_bigint::BigInt::from(self.weight_total.clone());
        self.weights
            .iter()
            .map(|w| Rational::new(w.clone().into(), total.clone()))
            .collect()
    }

    fn scores(&self, context: usize) -> &[BigUint] {
        self.state
            .get(&context)
            .map(|(s, _)| s.as_slice())
            .unwrap_or(&self.weights)
    }

    /// Numerators of the next-symbol masses and their common denominator.
    pub fn predictive(&self, context: usize) -> (Vec<BigUint>, BigUint) {
        let scores = self.scores(context);
        let den: BigUint = scores.iter().sum::<BigUint>() * self.grid;
        let nums = (0..self.alphabet)
            .map(|a| {
                scores
                    .iter()
                    .zip(&self.rows)
                    .filter(|(_, r)| r[a] > 0)
                    .map(|(s, r)| s * r[a])
                    .sum()
            })
            .collect();
        (nums, den)
    }

    /// Next-symbol masses as floats.
    pub fn predictive_f64(&self, context: usize) -> Vec<f64> {
        let (nums, den) = self.predictive(context);
        let dl = rational::log2_big(&den);
        nums.iter()
            .map(|n| (rational::log2_big(n) - dl).exp2())
            .collect()
    }

    /// Consumes `symbol` at `context`; returns the step's `lg` mass.
    pub fn observe(&mut self, context: usize, symbol: usize) -> f64 {
        let (nums, den) = self.predictive(context);
        let step = rational::log2_big(&nums[symbol]) - rational::log2_big(&den);
        let weights = &self.weights;
        let entry = self
            .state
            .entry(context)
            .or_insert_with(|| (weights.clone(), 0));
        for (s, r) in entry.0.iter_mut().zip(&self.rows) {
            if r[symbol] == 0 {
                s.set_zero();
            } else {
                *s *= r[symbol];
            }
        }
        entry.1 += 1;
        self.steps += 1;
        if nums[symbol].is_zero() {
            self.zero = true;
        }
        self.log2 += step;
        step
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `lg` of the mass of everything observed; `-inf` once a zero-mass
    /// symbol was seen.
    pub fn log2_probability(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.log2
        }
    }

    /// Exact mass of the observed sequence.
    pub fn probability(&self) -> Rational {
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        let g = BigUint::from(self.grid);
        for (scores, count) in self.state.values() {
            num *= scores.iter().sum::<BigUint>();
            den *= &self.weight_total * g.pow(*count as u32);
        }
        Rational::new(num.into(), den.into())
    }
}

/// Runs one mixture over a sequence of `(context, symbol)` pairs.
pub fn sequential_log2(
    alphabet: usize,
    grid: u32,
    scheme: &WeightScheme,
    items: impl IntoIterator<Item = (usize, usize)>,
) -> Result<ContextMixture> {
    let mut m = ContextMixture::new(alphabet, grid, scheme)?;
    for (c, s) in items {
        m.observe(c, s);
    }
    Ok(m)
}

/// `lg` of a positive rational as `f64`, for report export.
pub fn export_log2(r: &Rational) -> Option<f64> {
    if r.is_positive() {
        Some(rational::log2(r))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::semimeasure::random_semimeasure;

    #[test]
    fn dyadic_two_components() {
        let p1 = random_semimeasure(1, 2, 2, true, &int(1)).unwrap();
        let p2 = random_semimeasure(2, 2, 2, true, &rat(1, 2)).unwrap();
        let m = MixtureModel::build(vec![p1.clone(), p2.clone()], &WeightScheme::Dyadic).unwrap();
        for x in words(2, 2) {
            let expect = p1.leaf(&x).unwrap() / int(2) + p2.leaf(&x).unwrap() / int(4);
            assert_eq!(m.value(&x).unwrap(), expect);
        }
        assert!(m.dominance().unwrap().holds);
    }

    #[test]
    fn single_component_scaled() {
        let p = random_semimeasure(3, 2, 2, true, &int(1)).unwrap();
        let w = rat(3, 7);
        let m =
            MixtureModel::new(vec![p.clone()], vec![w.clone()], WeightScheme::Explicit(vec![w.clone()]))
                .unwrap();
        assert_eq!(m.materialize().unwrap(), p.scaled(&w).unwrap());
    }

    #[test]
    fn ilog_weights_follow_formula() {
        let w = WeightScheme::InverseIlogSquared.weights(5).unwrap();
        assert!(rational::sum(&w) <= int(1));
        let raw: Vec<f64> = (1..=5)
            .map(|i: i32| {
                let j = (i + 1) as f64;
                1.0 / (j * j.log2().powi(2))
            })
            .collect();
        let c = 1.0 / raw.iter().sum::<f64>();
        for (wi, ri) in w.iter().zip(&raw) {
            assert!((rational::to_f64(wi) - c * ri).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_weights() {
        let p = Semimeasure::uniform(1, 2).unwrap();
        assert!(MixtureModel::new(vec![p.clone()], vec![int(0)], WeightScheme::Dyadic).is_err());
        assert!(MixtureModel::new(
            vec![p.clone(), p.clone()],
            vec![rat(2, 3), rat(2, 3)],
            WeightScheme::Dyadic
        )
        .is_err());
        assert!(MixtureModel::<Semimeasure>::build(vec![], &WeightScheme::Dyadic).is_err());
    }

    #[test]
    fn family_sizes() {
        assert_eq!(markov_family(0, 2, 1).unwrap().len(), 6);
        assert_eq!(markov_family(0, 1, 1).unwrap().len(), 3);
        assert_eq!(markov_family(1, 4, 2).unwrap().len(), 225);
        let big = MarkovConfig {
            cap: 100,
            ..MarkovConfig::new(1, 4)
        };
        match ModelFamily::markov(big, 2) {
            Err(Error::FamilyTooLarge { size, cap }) => assert_eq!((size, cap), (225, 100)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn family_rows_are_grid_pairs() {
        let fam = markov_family(0, 2, 1).unwrap();
        let mut brute = Vec::new();
        for a in 0..=2u32 {
            for b in 0..=2u32 {
                if a + b <= 2 {
                    brute.push(vec![vec![a, b]]);
                }
            }
        }
        let got: Vec<_> = fam.tables().iter().map(|t| t.rows.clone()).collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn unrolled_uniform() {
        let t = MarkovTable {
            order: 1,
            grid: 2,
            alphabet: 2,
            rows: vec![vec![1, 1], vec![1, 1]],
        };
        assert_eq!(t.unroll(2).unwrap(), Semimeasure::uniform(2, 2).unwrap());
    }

    #[test]
    fn product_mixture_matches_expansion() {
        let p1 = random_semimeasure(10, 2, 2, true, &int(1)).unwrap();
        let p2 = random_semimeasure(11, 2, 2, true, &rat(1, 2)).unwrap();
        let q = |seed: u64| {
            let rows = (0..4)
                .map(|i| random_semimeasure(seed + i, 2, 2, true, &rat(2, 3)).unwrap())
                .collect();
            ConditionalSemimeasure::new(2, 2, rows).unwrap()
        };
        let (q1, q2) = (q(20), q(30));
        let ms = MixtureModel::build(vec![p1.clone(), p2.clone()], &WeightScheme::Dyadic).unwrap();
        let mt = MixtureModel::build(vec![q1.clone(), q2.clone()], &WeightScheme::Dyadic).unwrap();
        let prod = product_mixture(&ms, &mt).unwrap();
        for x in words(2, 2) {
            for y in words(2, 2) {
                let mut expect = int(0);
                for (p, a) in [(&p1, rat(1, 2)), (&p2, rat(1, 4))] {
                    for (q, b) in [(&q1, rat(1, 2)), (&q2, rat(1, 4))] {
                        expect += &a * &b * p.leaf(&x).unwrap() * q.mass(&y, &x);
                    }
                }
                assert_eq!(prod.mass(&x, &y).unwrap(), &expect);
            }
        }
        assert!(product_dominance(&ms, &mt, &prod));
    }

    #[test]
    fn uniform_singletons_give_uniform_product() {
        let u = Semimeasure::uniform(2, 2).unwrap();
        let cu = ConditionalSemimeasure::from_fn(2, 2, |_, _| rat(1, 4)).unwrap();
        let one = WeightScheme::Explicit(vec![int(1)]);
        let ms = MixtureModel::build(vec![u], &one).unwrap();
        let mt = MixtureModel::build(vec![cu], &one).unwrap();
        assert_eq!(
            product_mixture(&ms, &mt).unwrap(),
            BivariateSemimeasure::uniform(2, 2).unwrap()
        );
    }

    #[test]
    fn product_mixture_depth_mismatch() {
        let ms = MixtureModel::build(
            vec![Semimeasure::uniform(2, 2).unwrap()],
            &WeightScheme::Dyadic,
        )
        .unwrap();
        let mt = MixtureModel::build(
            vec![ConditionalSemimeasure::from_fn(1, 2, |_, _| rat(1, 2)).unwrap()],
            &WeightScheme::Dyadic,
        )
        .unwrap();
        assert!(matches!(
            product_mixture(&ms, &mt),
            Err(Error::DepthMismatch { .. })
        ));
    }

    fn stream_of(stages: Vec<Vec<Rational>>) -> TableStream {
        TableStream {
            depth: 1,
            alphabet: 2,
            stages,
        }
    }

    #[test]
    fn staged_freeze_rules() {
        let q = |a: i64, b: i64| vec![rat(a, 8), rat(b, 8)];
        // stream 0 violates the predicate (mass on symbol 1 > 3/8) at t = 3
        let s0 = stream_of(vec![q(0, 0), q(1, 0), q(1, 1), q(1, 4), q(2, 4)]);
        // stream 1 exceeds mass 1 at its first polled stage
        let s1 = stream_of(vec![q(0, 0), q(8, 8)]);
        let accept = |p: &Semimeasure| p.depth() == 0 || p.leaves()[1] <= rat(3, 8);
        let out = staged_enumeration(&[s0, s1], &accept, 6).unwrap();
        assert_eq!(out.frozen_at, vec![Some(3), Some(2)]);
        for t in 3..=6 {
            assert_eq!(out.stages[t][0].leaves(), &q(1, 1)[..]);
        }
        for t in 0..=6 {
            assert!(out.stages[t][1].total().is_zero());
        }
    }

    #[test]
    fn staged_requires_zero_acceptance() {
        let s = stream_of(vec![vec![int(0), int(0)]]);
        let accept = |p: &Semimeasure| p.total().is_positive();
        assert!(staged_enumeration(&[s], &accept, 2).is_err());
    }

    #[test]
    fn context_mixture_matches_explicit_mixture() {
        // order 1, proper rows, grid 2: 3 rows per context, 9 tables
        let scheme = WeightScheme::Dyadic;
        let cfg = MarkovConfig {
            proper_only: true,
            ..MarkovConfig::new(1, 2)
        };
        let fam = ModelFamily::markov(cfg, 4).unwrap();
        let probe = ContextMixture::new(2, 2, &scheme).unwrap();
        let rw = probe.row_weights();
        let rows = probe.rows().to_vec();
        let weights: Vec<Rational> = fam
            .tables()
            .iter()
            .map(|t| {
                t.rows
                    .iter()
                    .map(|r| rw[rows.iter().position(|q| q == r).unwrap()].clone())
                    .product()
            })
            .collect();
        let explicit = MixtureModel::new(
            fam.semimeasures().unwrap(),
            weights.clone(),
            WeightScheme::Explicit(weights),
        )
        .unwrap();
        for x in words(4, 2) {
            let mut m = ContextMixture::new(2, 2, &scheme).unwrap();
            for t in 0..4 {
                let ctx = if t == 0 { 0 } else { x[t - 1] as usize };
                m.observe(ctx, x[t] as usize);
            }
            let exact = explicit.value(&x).unwrap();
            assert_eq!(m.probability(), exact);
            if exact.is_positive() {
                assert!((m.log2_probability() - rational::log2(&exact)).abs() < 1e-9);
            }
        }
    }
}
