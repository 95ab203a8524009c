//! Structural-equation models for pairs of series.
//!
//! Each step draws `X_i` then `Y_i` from update rules that see only the
//! inputs their hypothesis class allows. Views are built from truncated
//! histories, so forbidden data is never present, and every access is also
//! checked against the rule's declared reads.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sim::sampler::{cdf, draw_with};
use crate::sim::timeseries::TimeseriesPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelClass {
    /// `X_i = f(X^{i-1}, Y^{i-1}, R_X)`, `Y_i = f(X^i, Y^{i-1}, R_Y)`.
    InstantaneousCause,
    /// Both rules read only strict pasts.
    StrictCausal,
    /// `X_i = f(X^{i-1}, R_X)`, `Y_i = f(X^i, Y^{i-1}, R_Y)`.
    InfluenceFree,
    /// Both rules read only the shared randomness.
    HiddenVariables,
}

impl ModelClass {
    pub fn name(self) -> &'static str {
        match self {
            ModelClass::InstantaneousCause => "instantaneous-cause",
            ModelClass::StrictCausal => "strict-causal",
            ModelClass::InfluenceFree => "influence-free",
            ModelClass::HiddenVariables => "hidden-variables",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [
            ModelClass::InstantaneousCause,
            ModelClass::StrictCausal,
            ModelClass::InfluenceFree,
            ModelClass::HiddenVariables,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| Error::input(format!("unknown model class {s:?}")))
    }

    /// First forbidden input in `reads` for the given role, if any.
    fn forbidden(self, role: Role, reads: &Reads) -> Option<&'static str> {
        use ModelClass::*;
        if self == HiddenVariables {
            if reads.own_window > 0 {
                return Some("its own history");
            }
            if reads.other_window > 0 {
                return Some("the other series' history");
            }
            if reads.other_current {
                return Some("the other series' current symbol");
            }
            return None;
        }
        match role {
            Role::X => {
                if reads.other_current {
                    return Some("the other series' current symbol");
                }
                if self == InfluenceFree && reads.other_window > 0 {
                    return Some("the other series' history");
                }
            }
            Role::Y => {
                if self == StrictCausal && reads.other_current {
                    return Some("the other series' current symbol");
                }
            }
        }
        None
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    X,
    Y,
}

impl Role {
    fn name(self) -> &'static str {
        match self {
            Role::X => "x",
            Role::Y => "y",
        }
    }
}

/// Inputs a rule declares.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reads {
    /// Number of own past symbols.
    pub own_window: usize,
    /// Number of the other series' past symbols.
    pub other_window: usize,
    /// The other series' symbol at the current step.
    pub other_current: bool,
    /// Uniform random bits of the current step.
    pub randomness: bool,
}

/// Per-step uniform bits, extended lazily from `(seed, stream, step)`.
struct StepBits {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
    used: u64,
}

impl StepBits {
    fn new(seed: u64, stream: u64, step: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos((step as u128) << 32);
        StepBits {
            rng,
            word: 0,
            left: 0,
            used: 0,
        }
    }

    fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.word >> 63 == 1;
        self.word <<= 1;
        self.left -= 1;
        self.used += 1;
        b
    }
}

/// What an update rule sees at step `i`.
pub struct RuleView<'a> {
    reads: Reads,
    role: Role,
    class: ModelClass,
    step: usize,
    alphabet: usize,
    own: &'a [u8],
    /// Other series up to `i - 1`, or up to `i` when the current symbol is
    /// allowed.
    other: &'a [u8],
    bits: StepBits,
    bit_budget: u32,
}

impl RuleView<'_> {
    fn denied(&self, input: String) -> Error {
        Error::ForbiddenInput {
            class: self.class.name().to_string(),
            role: self.role.name(),
            input,
        }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Own symbol `lag ≥ 1` steps back; 0 before the series starts.
    pub fn own(&self, lag: usize) -> Result<u8> {
        if lag == 0 || lag > self.reads.own_window {
            return Err(self.denied(format!("own symbol at lag {lag}")));
        }
        Ok(self.step.checked_sub(lag).map_or(0, |j| self.own[j]))
    }

    /// Other series' symbol `lag ≥ 1` steps back; 0 before the start.
    pub fn other(&self, lag: usize) -> Result<u8> {
        if lag == 0 || lag > self.reads.other_window {
            return Err(self.denied(format!("other symbol at lag {lag}")));
        }
        Ok(self.step.checked_sub(lag).map_or(0, |j| self.other[j]))
    }

    pub fn other_current(&self) -> Result<u8> {
        if !self.reads.other_current || self.other.len() <= self.step {
            return Err(self.denied("other symbol at the current step".into()));
        }
        Ok(self.other[self.step])
    }

    pub fn bit(&mut self) -> Result<bool> {
        if !self.reads.randomness {
            return Err(self.denied("randomness".into()));
        }
        if self.bits.used >= self.bit_budget as u64 {
            return Err(Error::input(format!(
                "step {} exhausted its budget of {} random bits",
                self.step, self.bit_budget
            )));
        }
        Ok(self.bits.next_bit())
    }

    /// Inverse-CDF draw from `masses` (summing to one) using this step's bits.
    pub fn draw(&mut self, masses: &[Rational]) -> Result<u8> {
        if !self.reads.randomness {
            return Err(self.denied("randomness".into()));
        }
        let alpha = cdf(masses);
        let remaining = (self.bit_budget as u64).saturating_sub(self.bits.used) as u32;
        let bits = &mut self.bits;
        let d = draw_with(&alpha, || bits.next_bit(), remaining);
        d.symbol
            .map(|s| s as u8)
            .ok_or_else(|| Error::input(format!("draw at step {} is undefined", self.step)))
    }
}

pub trait UpdateRule: fmt::Debug + Send + Sync {
    fn reads(&self) -> Reads;
    fn next(&self, view: &mut RuleView<'_>) -> Result<u8>;
    fn describe(&self) -> RuleSpec;
}

/// Where a copy rule takes its symbol from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopySource {
    Own,
    Other,
}

/// What a copy rule emits when it does not copy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopyNoise {
    /// A uniformly chosen different symbol; agreement rate equals the
    /// coupling.
    #[default]
    Complement,
    /// A fresh uniform symbol; zero coupling gives an independent series.
    Resample,
}

/// Serializable built-in rules.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RuleSpec {
    /// Independent draws from `masses` (uniform when absent).
    Iid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        masses: Option<Vec<String>>,
    },
    /// Copies a symbol `lag` steps back (`lag = 0`: the other series' current
    /// symbol) with probability `coupling`.
    Copy {
        source: CopySource,
        lag: usize,
        coupling: String,
        #[serde(default)]
        noise: CopyNoise,
    },
    /// Emits bit `index` of the step's randomness.
    RandomBit { index: u32 },
    /// Next-symbol masses indexed by the declared context: own lags
    /// `1..=own_window`, then other lags `1..=other_window`, then the other
    /// current symbol, most significant first.
    Lookup { reads: Reads, rows: Vec<Vec<String>> },
}

impl RuleSpec {
    pub fn build(&self, alphabet: usize) -> Result<Box<dyn UpdateRule>> {
        let parse_row = |row: &[String]| -> Result<Vec<Rational>> {
            let masses = row
                .iter()
                .map(|s| rational::parse(s))
                .collect::<Result<Vec<_>>>()?;
            if masses.len() != alphabet {
                return Err(Error::input(format!(
                    "rule row has {} masses for alphabet {alphabet}",
                    masses.len()
                )));
            }
            if masses.iter().any(|m| m < &Rational::from_integer(0.into()))
                || rational::sum(&masses) != Rational::from_integer(1.into())
            {
                return Err(Error::input("rule row must be a probability vector"));
            }
            Ok(masses)
        };
        Ok(match self {
            RuleSpec::Iid { masses } => {
                let masses = match masses {
                    Some(m) => parse_row(m)?,
                    None => vec![Rational::new(1.into(), alphabet.into()); alphabet],
                };
                Box::new(Iid { masses })
            }
            RuleSpec::Copy {
                source,
                lag,
                coupling,
                noise,
            } => {
                let p = rational::parse(coupling)?;
                if !rational::is_unit_interval(&p) {
                    return Err(Error::input(format!("coupling {coupling} outside [0, 1]")));
                }
                if *source == CopySource::Own && *lag == 0 {
                    return Err(Error::input("a rule cannot copy its own current symbol"));
                }
                Box::new(Copy {
                    source: *source,
                    lag: *lag,
                    coupling: p,
                    noise: *noise,
                    alphabet,
                })
            }
            RuleSpec::RandomBit { index } => {
                if alphabet < 2 {
                    return Err(Error::input("random-bit rule needs a binary alphabet"));
                }
                Box::new(RandomBit { index: *index })
            }
            RuleSpec::Lookup { reads, rows } => {
                let width = alphabet.pow((reads.own_window + reads.other_window) as u32)
                    * if reads.other_current { alphabet } else { 1 };
                if rows.len() != width {
                    return Err(Error::input(format!(
                        "lookup needs {width} rows, got {}",
                        rows.len()
                    )));
                }
                let rows = rows
                    .iter()
                    .map(|r| parse_row(r))
                    .collect::<Result<Vec<_>>>()?;
                Box::new(Lookup {
                    reads: Reads {
                        randomness: true,
                        ..*reads
                    },
                    rows,
                })
            }
        })
    }
}

fn fmt_masses(m: &[Rational]) -> Vec<String> {
    m.iter().map(rational::format).collect()
}

#[derive(Debug)]
struct Iid {
    masses: Vec<Rational>,
}

impl UpdateRule for Iid {
    fn reads(&self) -> Reads {
        Reads {
            randomness: true,
            ..Reads::default()
        }
    }

    fn next(&self, view: &mut RuleView<'_>) -> Result<u8> {
        view.draw(&self.masses)
    }

    fn describe(&self) -> RuleSpec {
        RuleSpec::Iid {
            masses: Some(fmt_masses(&self.masses)),
        }
    }
}

#[derive(Debug)]
struct Copy {
    source: CopySource,
    lag: usize,
    coupling: Rational,
    noise: CopyNoise,
    alphabet: usize,
}

impl UpdateRule for Copy {
    fn reads(&self) -> Reads {
        let mut r = Reads {
            randomness: true,
            ..Reads::default()
        };
        match (self.source, self.lag) {
            (CopySource::Own, lag) => r.own_window = lag,
            (CopySource::Other, 0) => r.other_current = true,
            (CopySource::Other, lag) => r.other_window = lag,
        }
        r
    }

    fn next(&self, view: &mut RuleView<'_>) -> Result<u8> {
        let src = match (self.source, self.lag) {
            (CopySource::Own, lag) => view.own(lag)?,
            (CopySource::Other, 0) => view.other_current()?,
            (CopySource::Other, lag) => view.other(lag)?,
        } as usize;
        let k = self.alphabet;
        let one = Rational::from_integer(1.into());
        let rest = &one - &self.coupling;
        let masses: Vec<Rational> = match self.noise {
            CopyNoise::Complement => {
                let other = &rest / Rational::from_integer((k - 1).into());
                (0..k)
                    .map(|s| if s == src { self.coupling.clone() } else { other.clone() })
                    .collect()
            }
            CopyNoise::Resample => {
                let base = &rest / Rational::from_integer(k.into());
                (0..k)
                    .map(|s| if s == src { &base + &self.coupling } else { base.clone() })
                    .collect()
            }
        };
        view.draw(&masses)
    }

    fn describe(&self) -> RuleSpec {
        RuleSpec::Copy {
            source: self.source,
            lag: self.lag,
            coupling: rational::format(&self.coupling),
            noise: self.noise,
        }
    }
}

#[derive(Debug)]
struct RandomBit {
    index: u32,
}

impl UpdateRule for RandomBit {
    fn reads(&self) -> Reads {
        Reads {
            randomness: true,
            ..Reads::default()
        }
    }

    fn next(&self, view: &mut RuleView<'_>) -> Result<u8> {
        let mut b = false;
        for _ in 0..=self.index {
            b = view.bit()?;
        }
        Ok(b as u8)
    }

    fn describe(&self) -> RuleSpec {
        RuleSpec::RandomBit { index: self.index }
    }
}

#[derive(Debug)]
struct Lookup {
    reads: Reads,
    rows: Vec<Vec<Rational>>,
}

impl UpdateRule for Lookup {
    fn reads(&self) -> Reads {
        self.reads
    }

    fn next(&self, view: &mut RuleView<'_>) -> Result<u8> {
        let k = view.alphabet();
        let mut idx = 0usize;
        for lag in 1..=self.reads.own_window {
            idx = idx * k + view.own(lag)? as usize;
        }
        for lag in 1..=self.reads.other_window {
            idx = idx * k + view.other(lag)? as usize;
        }
        if self.reads.other_current {
            idx = idx * k + view.other_current()? as usize;
        }
        view.draw(&self.rows[idx])
    }

    fn describe(&self) -> RuleSpec {
        RuleSpec::Lookup {
            reads: Reads {
                randomness: false,
                ..self.reads
            },
            rows: self.rows.iter().map(|r| fmt_masses(r)).collect(),
        }
    }
}

/// Default number of uniform bits available to each rule per step.
pub const DEFAULT_BIT_BUDGET: u32 = 256;

#[derive(Debug)]
pub struct StructuralModel {
    class: ModelClass,
    alphabet: usize,
    fx: Box<dyn UpdateRule>,
    fy: Box<dyn UpdateRule>,
    bit_budget: u32,
}

impl StructuralModel {
    /// Rejects rules whose declared reads the class forbids.
    pub fn new(
        class: ModelClass,
        alphabet: usize,
        fx: Box<dyn UpdateRule>,
        fy: Box<dyn UpdateRule>,
    ) -> Result<Self> {
        if !(2..=36).contains(&alphabet) {
            return Err(Error::input(format!("alphabet size {alphabet} outside 2..=36")));
        }
        for (role, rule) in [(Role::X, &fx), (Role::Y, &fy)] {
            if let Some(input) = class.forbidden(role, &rule.reads()) {
                return Err(Error::ForbiddenInput {
                    class: class.name().to_string(),
                    role: role.name(),
                    input: input.to_string(),
                });
            }
        }
        Ok(StructuralModel {
            class,
            alphabet,
            fx,
            fy,
            bit_budget: DEFAULT_BIT_BUDGET,
        })
    }

    pub fn from_doc(doc: &ModelDoc) -> Result<Self> {
        let class = ModelClass::parse(&doc.class)?;
        let mut m = StructuralModel::new(
            class,
            doc.alphabet,
            doc.rules.x.build(doc.alphabet)?,
            doc.rules.y.build(doc.alphabet)?,
        )?;
        if let Some(b) = doc.bit_budget {
            m.bit_budget = b;
        }
        Ok(m)
    }

    pub fn with_bit_budget(mut self, bits: u32) -> Self {
        self.bit_budget = bits;
        self
    }

    pub fn class(&self) -> ModelClass {
        self.class
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn to_doc(&self, seed: u64) -> ModelDoc {
        ModelDoc {
            class: self.class.name().to_string(),
            alphabet: self.alphabet,
            rules: RulePair {
                x: self.fx.describe(),
                y: self.fy.describe(),
            },
            seed: Some(seed),
            bit_budget: Some(self.bit_budget),
        }
    }

    /// x iid uniform; y copies `x_{i-1}` with probability `coupling`.
    pub fn lag1_copy(coupling: &str) -> Result<Self> {
        Self::preset(ModelClass::StrictCausal, 1, coupling, CopyNoise::Complement)
    }

    /// x, y iid uniform and independent (strict-causal class).
    pub fn independent() -> Result<Self> {
        Self::preset(ModelClass::StrictCausal, 1, "0", CopyNoise::Resample)
    }

    /// y copies the current `x_i` with probability `coupling`.
    pub fn instantaneous_copy(coupling: &str) -> Result<Self> {
        Self::preset(ModelClass::InstantaneousCause, 0, coupling, CopyNoise::Complement)
    }

    /// Both series emit the first bit of the shared randomness.
    pub fn shared_bit() -> Result<Self> {
        let rule = RuleSpec::RandomBit { index: 0 };
        StructuralModel::new(ModelClass::HiddenVariables, 2, rule.build(2)?, rule.build(2)?)
    }

    fn preset(class: ModelClass, lag: usize, coupling: &str, noise: CopyNoise) -> Result<Self> {
        let fx = RuleSpec::Iid { masses: None }.build(2)?;
        let fy = RuleSpec::Copy {
            source: CopySource::Other,
            lag,
            coupling: coupling.to_string(),
            noise,
        }
        .build(2)?;
        StructuralModel::new(class, 2, fx, fy)
    }

    /// Draws `n` steps. Streams: x uses 1, y uses 2, and the
    /// hidden-variables class shares stream 0 between both rules.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<TimeseriesPair> {
        if n == 0 {
            return Err(Error::input("n must be at least 1"));
        }
        let (sx, sy) = match self.class {
            ModelClass::HiddenVariables => (0, 0),
            _ => (1, 2),
        };
        let mut x: Vec<u8> = Vec::with_capacity(n);
        let mut y: Vec<u8> = Vec::with_capacity(n);
        for i in 0..n {
            let rx = self.fx.reads();
            let mut vx = RuleView {
                reads: rx,
                role: Role::X,
                class: self.class,
                step: i,
                alphabet: self.alphabet,
                own: &x[..i],
                other: &y[..i],
                bits: StepBits::new(seed, sx, i),
                bit_budget: self.bit_budget,
            };
            let xi = self.check_symbol(self.fx.next(&mut vx)?)?;
            x.push(xi);

            let ry = self.fy.reads();
            let other_len = if ry.other_current { i + 1 } else { i };
            let mut vy = RuleView {
                reads: ry,
                role: Role::Y,
                class: self.class,
                step: i,
                alphabet: self.alphabet,
                own: &y[..i],
                other: &x[..other_len],
                bits: StepBits::new(seed, sy, i),
                bit_budget: self.bit_budget,
            };
            let yi = self.check_symbol(self.fy.next(&mut vy)?)?;
            y.push(yi);
        }
        TimeseriesPair::new(
            x,
            y,
            self.alphabet,
            format!("model:{}:seed={seed}", self.class.name()),
        )
    }

    fn check_symbol(&self, s: u8) -> Result<u8> {
        if (s as usize) < self.alphabet {
            Ok(s)
        } else {
            Err(Error::SymbolOutOfRange {
                symbol: s as usize,
                alphabet: self.alphabet,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulePair {
    pub x: RuleSpec,
    pub y: RuleSpec,
}

/// JSON model descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub class: String,
    pub alphabet: usize,
    pub rules: RulePair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_budget: Option<u32>,
}
