//! The `grow` constructions on binary trees of depth `N = 2n`, where
//! `z = x1 y1 x2 y2 … xn yn`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::semimeasure::{format_word, word_at, Semimeasure};

/// Largest `⌈1/ν⌉` accepted by [`grow_semimeasure`].
pub const MAX_STAGE_BUDGET: u64 = 1 << 20;

fn check_tree(p: &Semimeasure) -> Result<usize> {
    if p.alphabet() != 2 {
        return Err(Error::input("grow needs a binary alphabet"));
    }
    if !p.depth().is_multiple_of(2) {
        return Err(Error::input(format!(
            "grow needs an even depth, got {}",
            p.depth()
        )));
    }
    Ok(p.depth())
}

/// `levels[l][i]`: mass of the `i`-th prefix of length `l`.
fn prefix_levels(leaves: &[Rational], depth: usize) -> Vec<Vec<Rational>> {
    let mut levels = vec![leaves.to_vec()];
    for _ in 0..depth {
        let below = levels.last().expect("nonempty");
        let up = below.chunks(2).map(|c| &c[0] + &c[1]).collect();
        levels.push(up);
    }
    levels.reverse();
    levels
}

fn prefix_index(word: &[u8]) -> usize {
    word.iter().fold(0, |acc, &b| acc * 2 + b as usize)
}

/// Descends into the child of smaller mass, preferring 0 on ties.
pub fn local_minimal_branch(p: &Semimeasure) -> Result<Vec<u8>> {
    if p.alphabet() != 2 {
        return Err(Error::input("local minimal branch needs a binary alphabet"));
    }
    let levels = prefix_levels(p.leaves(), p.depth());
    let mut idx = 0usize;
    let mut z = Vec::with_capacity(p.depth());
    for level in levels.iter().skip(1) {
        let bit = (level[2 * idx + 1] < level[2 * idx]) as usize;
        idx = 2 * idx + bit;
        z.push(bit as u8);
    }
    Ok(z)
}

/// Whether `z` satisfies `P(z^i) ≤ P(z^{i-1} z̄_i)` at every level.
pub fn is_local_minimal_branch(p: &Semimeasure, z: &[u8]) -> Result<bool> {
    if z.len() != p.depth() {
        return Err(Error::PrefixTooLong {
            len: z.len(),
            depth: p.depth(),
        });
    }
    let levels = prefix_levels(p.leaves(), p.depth());
    let mut idx = 0usize;
    for (l, &b) in z.iter().enumerate() {
        let mine = 2 * idx + b as usize;
        let sibling = mine ^ 1;
        if levels[l + 1][mine] > levels[l + 1][sibling] {
            return Ok(false);
        }
        idx = mine;
    }
    Ok(true)
}

/// Load nodes `z^{2i+1} z̄_{2i+2}` for `i < n`.
pub fn load_nodes(z: &[u8]) -> Vec<Vec<u8>> {
    (0..z.len() / 2)
        .map(|i| {
            let mut v = z[..2 * i + 1].to_vec();
            v.push(1 - z[2 * i + 1]);
            v
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafClass {
    Load,
    Halved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafTrace {
    pub word: String,
    pub class: LeafClass,
    #[serde(with = "rational::serde_str")]
    pub before: Rational,
    #[serde(with = "rational::serde_str")]
    pub after: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowTrace {
    pub input: Semimeasure,
    pub branch: Vec<u8>,
    pub load_nodes: Vec<Vec<u8>>,
    pub output: Semimeasure,
    pub classes: Vec<LeafClass>,
}

#[derive(Serialize)]
struct GrowTraceDoc {
    depth: usize,
    branch: String,
    load_nodes: Vec<String>,
    #[serde(with = "rational::serde_str")]
    input_total: Rational,
    #[serde(with = "rational::serde_str")]
    output_total: Rational,
    leaves: Vec<LeafTrace>,
}

impl GrowTrace {
    pub fn leaf_traces(&self) -> Vec<LeafTrace> {
        let d = self.input.depth();
        (0..self.classes.len())
            .map(|i| LeafTrace {
                word: format_word(&word_at(i, d, 2)),
                class: self.classes[i],
                before: self.input.leaves()[i].clone(),
                after: self.output.leaves()[i].clone(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = GrowTraceDoc {
            depth: self.input.depth(),
            branch: format_word(&self.branch),
            load_nodes: self.load_nodes.iter().map(|w| format_word(w)).collect(),
            input_total: self.input.total(),
            output_total: self.output.total(),
            leaves: self.leaf_traces(),
        };
        serde_json::to_string_pretty(&doc).expect("trace serializes")
    }
}

/// Halves every leaf except those below a load node.
pub fn grow(p: &Semimeasure) -> Result<GrowTrace> {
    let depth = check_tree(p)?;
    let branch = local_minimal_branch(p)?;
    let loads = load_nodes(&branch);
    let half = rational::rat(1, 2);
    let mut classes = Vec::with_capacity(p.leaves().len());
    let mut out = Vec::with_capacity(p.leaves().len());
    for (i, m) in p.leaves().iter().enumerate() {
        let w = word_at(i, depth, 2);
        if loads.iter().any(|l| w.starts_with(l)) {
            classes.push(LeafClass::Load);
            out.push(m.clone());
        } else {
            classes.push(LeafClass::Halved);
            out.push(m * &half);
        }
    }
    Ok(GrowTrace {
        input: p.clone(),
        branch,
        load_nodes: loads,
        output: Semimeasure::new(depth, 2, out)?,
        classes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmplificationStep {
    pub step: usize,
    /// `P(z^{2i+1}) / P(z^{2i})`.
    #[serde(serialize_with = "opt_str")]
    pub p_ratio: Option<Rational>,
    /// `Q(z^{2i+1}) / Q(z^{2i})`.
    #[serde(serialize_with = "opt_str")]
    pub q_ratio: Option<Rational>,
    /// `None` when a ratio is undefined.
    pub holds: Option<bool>,
}

fn opt_str<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&rational::format(r)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmplificationReport {
    /// Every defined step satisfies the bound and none is undefined.
    pub holds: bool,
    pub steps: Vec<AmplificationStep>,
    /// `Q(x|y↑) / P(x|y↑)` along the branch.
    #[serde(serialize_with = "opt_str")]
    pub total_factor: Option<Rational>,
    /// `(6/5)^n`.
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
}

/// Checks `Q(z^{2i+1})/Q(z^{2i}) ≥ (6/5) P(z^{2i+1})/P(z^{2i})` along the
/// trace's branch.
pub fn amplification_check(trace: &GrowTrace) -> Result<AmplificationReport> {
    let depth = check_tree(&trace.input)?;
    let pl = prefix_levels(trace.input.leaves(), depth);
    let ql = prefix_levels(trace.output.leaves(), depth);
    let z = &trace.branch;
    let six_fifths = rational::rat(6, 5);
    let ratio = |levels: &[Vec<Rational>], l: usize| -> Option<Rational> {
        let den = &levels[l][prefix_index(&z[..l])];
        let num = &levels[l + 1][prefix_index(&z[..l + 1])];
        (!den.is_zero()).then(|| num / den)
    };
    let mut steps = Vec::new();
    let mut total = Some(Rational::one());
    for i in 0..depth / 2 {
        let p_ratio = ratio(&pl, 2 * i);
        let q_ratio = ratio(&ql, 2 * i);
        let holds = match (&p_ratio, &q_ratio) {
            (Some(p), Some(q)) => Some(q >= &(&six_fifths * p)),
            _ => None,
        };
        total = match (total, &p_ratio, &q_ratio) {
            (Some(t), Some(p), Some(q)) if p.is_positive() => Some(t * q / p),
            _ => None,
        };
        steps.push(AmplificationStep {
            step: i,
            p_ratio,
            q_ratio,
            holds,
        });
    }
    let mut bound = Rational::one();
    for _ in 0..depth / 2 {
        bound *= &six_fifths;
    }
    Ok(AmplificationReport {
        holds: steps.iter().all(|s| s.holds == Some(true)),
        steps,
        total_factor: total,
        bound,
    })
}

/// Stage-indexed nondecreasing tables on `2^N`.
#[derive(Clone, Debug)]
pub struct EnumerationStream {
    stages: Vec<Semimeasure>,
    nu: Rational,
}

impl EnumerationStream {
    pub fn new(stages: Vec<Semimeasure>) -> Result<Self> {
        let first = stages.first().ok_or(Error::EmptyInput)?;
        let depth = check_tree(first)?;
        for (t, s) in stages.iter().enumerate().skip(1) {
            if s.depth() != depth || s.alphabet() != 2 {
                return Err(Error::DepthMismatch {
                    left: depth,
                    right: s.depth(),
                });
            }
            if let Some(leaf) = s
                .leaves()
                .iter()
                .zip(stages[t - 1].leaves())
                .position(|(now, before)| now < before)
            {
                return Err(Error::NonMonotoneStream { stage: t, leaf });
            }
        }
        let nu = first.min_leaf();
        if !nu.is_positive() {
            return Err(Error::ZeroMinimumMass);
        }
        Ok(EnumerationStream { stages, nu })
    }

    pub fn stages(&self) -> &[Semimeasure] {
        &self.stages
    }

    /// `ν = min P_0(w)`.
    pub fn nu(&self) -> &Rational {
        &self.nu
    }

    pub fn depth(&self) -> usize {
        self.stages[0].depth()
    }
}

#[derive(Clone, Debug)]
pub struct GrowSemimeasureTrace {
    /// `Q_t` for every `t` in the stream.
    pub tables: Vec<Semimeasure>,
    /// Stage number `s` in force at every `t`.
    pub stage_at: Vec<usize>,
    /// Times that started a new stage.
    pub regrow_at: Vec<usize>,
    /// `⌈1/ν⌉`.
    pub budget: u64,
}

impl GrowSemimeasureTrace {
    pub fn stage_count(&self) -> usize {
        self.stage_at.last().map_or(0, |s| s + 1)
    }
}

fn ceil_inverse(nu: &Rational) -> u64 {
    let inv = nu.recip();
    let c = inv.ceil().to_integer();
    num_traits::ToPrimitive::to_u64(&c).unwrap_or(u64::MAX)
}

/// Grows every stage of `stream`, scaling by `2^{s−⌈1/ν⌉}` at stage `s`.
pub fn grow_semimeasure(stream: &EnumerationStream, t_max: usize) -> Result<GrowSemimeasureTrace> {
    let c = ceil_inverse(stream.nu());
    if c > MAX_STAGE_BUDGET {
        return Err(Error::input(format!("1/ν = {c} exceeds the stage budget")));
    }
    let c = c as i64;
    let n_steps = stream.stages().len().min(t_max.saturating_add(1));
    let p0 = &stream.stages()[0];
    let mut tables = vec![grow(&p0.scaled(&rational::pow2(-c))?)?.output];
    let mut stage_at = vec![0usize];
    let mut regrow_at = Vec::new();
    let mut anchor = p0.total();
    let mut s: i64 = 0;
    for t in 1..n_steps {
        let pt = &stream.stages()[t];
        let total = pt.total();
        let q = if &total - &anchor > *stream.nu() {
            anchor = total;
            s += 1;
            regrow_at.push(t);
            grow(&pt.scaled(&rational::pow2(s - c))?)?.output
        } else {
            let prev_p = &stream.stages()[t - 1];
            let prev_q = &tables[t - 1];
            let leaves = pt
                .leaves()
                .iter()
                .zip(prev_p.leaves())
                .zip(prev_q.leaves())
                .map(|((now, before), q)| q * now / before)
                .collect();
            Semimeasure::new(pt.depth(), 2, leaves)?
        };
        tables.push(q);
        stage_at.push(s as usize);
    }
    Ok(GrowSemimeasureTrace {
        tables,
        stage_at,
        regrow_at,
        budget: c as u64,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SandwichOutcome {
    Holds,
    Fails { x: String, y: String },
    Inapplicable { reason: String },
}

/// `Q(x|y↑)` for every pair, from interleaved prefix masses.
fn causal_values(levels: &[Vec<Rational>], depth: usize) -> Vec<Option<Rational>> {
    (0..1usize << depth)
        .map(|leaf| {
            let mut v = Rational::one();
            for i in 0..depth / 2 {
                let den = &levels[2 * i][leaf >> (depth - 2 * i)];
                if den.is_zero() {
                    return None;
                }
                v *= &levels[2 * i + 1][leaf >> (depth - 2 * i - 1)];
                v /= den;
            }
            Some(v)
        })
        .collect()
}

/// Checks `1/2 ≤ Q(x|y↑) / P(x|y↑) ≤ 2` for every pair, when
/// `P ≥ ν`, `Q ≥ P` leafwise and `Q(ε) ≤ P(ε) + ν`.
pub fn sandwich_check(p: &Semimeasure, q: &Semimeasure, nu: &Rational) -> Result<SandwichOutcome> {
    let depth = check_tree(p)?;
    if q.depth() != depth || q.alphabet() != 2 {
        return Err(Error::DepthMismatch {
            left: depth,
            right: q.depth(),
        });
    }
    let inapplicable = |reason: &str| Ok(SandwichOutcome::Inapplicable { reason: reason.into() });
    if !nu.is_positive() {
        return inapplicable("ν must be positive");
    }
    if p.leaves().iter().any(|m| m < nu) {
        return inapplicable("some leaf of P is below ν");
    }
    if q.leaves().iter().zip(p.leaves()).any(|(a, b)| a < b) {
        return inapplicable("Q is below P at some leaf");
    }
    if q.total() > p.total() + nu {
        return inapplicable("Q(ε) exceeds P(ε) + ν");
    }
    let pv = causal_values(&prefix_levels(p.leaves(), depth), depth);
    let qv = causal_values(&prefix_levels(q.leaves(), depth), depth);
    let two = rational::int(2);
    for (leaf, (a, b)) in pv.iter().zip(&qv).enumerate() {
        let (Some(a), Some(b)) = (a, b) else {
            return inapplicable("a causal value is undefined");
        };
        if b * &two < *a || *b > a * &two {
            let z = word_at(leaf, depth, 2);
            let x: Vec<u8> = z.iter().step_by(2).copied().collect();
            let y: Vec<u8> = z.iter().skip(1).step_by(2).copied().collect();
            return Ok(SandwichOutcome::Fails {
                x: format_word(&x),
                y: format_word(&y),
            });
        }
    }
    Ok(SandwichOutcome::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{causal_part, Mode};
    use crate::rational::{int, rat};
    use crate::semimeasure::{deinterleave, random_semimeasure, Side};

    #[test]
    fn branch_examples() {
        let u = Semimeasure::uniform(4, 2).unwrap();
        assert_eq!(local_minimal_branch(&u).unwrap(), vec![0; 4]);
        let p = Semimeasure::new(2, 2, vec![rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)]).unwrap();
        assert_eq!(local_minimal_branch(&p).unwrap(), vec![1, 0]);
        for seed in 0..10 {
            let p = random_semimeasure(seed, 6, 2, true, &int(1)).unwrap();
            let z = local_minimal_branch(&p).unwrap();
            assert!(is_local_minimal_branch(&p, &z).unwrap());
        }
    }

    #[test]
    fn uniform_depth2_trace() {
        let t = grow(&Semimeasure::uniform(2, 2).unwrap()).unwrap();
        assert_eq!(t.branch, vec![0, 0]);
        assert_eq!(t.load_nodes, vec![vec![0, 1]]);
        assert_eq!(t.output.leaves(), &[rat(1, 8), rat(1, 4), rat(1, 8), rat(1, 8)]);
        assert_eq!(t.output.total(), rat(5, 8));
        let a = amplification_check(&t).unwrap();
        assert!(a.holds);
        assert_eq!(a.steps[0].q_ratio, Some(rat(3, 5)));
        assert_eq!(a.steps[0].q_ratio, Some(rat(6, 5) * a.steps[0].p_ratio.clone().unwrap()));
        assert!(t.to_json().contains("\"load\""));
    }

    #[test]
    fn amplification_matches_kernel_ratio() {
        for seed in 0..10 {
            let p = random_semimeasure(seed, 6, 2, true, &rat(9, 10)).unwrap();
            let t = grow(&p).unwrap();
            let a = amplification_check(&t).unwrap();
            assert!(a.holds);
            let z = &t.branch;
            let x: Vec<u8> = z.iter().step_by(2).copied().collect();
            let y: Vec<u8> = z.iter().skip(1).step_by(2).copied().collect();
            let kp = causal_part(&deinterleave(&p).unwrap(), Side::XGivenY, Mode::Causal).unwrap();
            let kq = causal_part(&deinterleave(&t.output).unwrap(), Side::XGivenY, Mode::Causal)
                .unwrap();
            let ratio = kq.evaluate(&x, &y).unwrap().defined().unwrap()
                / kp.evaluate(&x, &y).unwrap().defined().unwrap();
            assert_eq!(Some(ratio.clone()), a.total_factor);
            assert!(ratio >= a.bound);
        }
    }

    #[test]
    fn depth_zero_is_vacuous() {
        let p = Semimeasure::new(0, 2, vec![rat(1, 2)]).unwrap();
        let t = grow(&p).unwrap();
        assert!(amplification_check(&t).unwrap().holds);
        assert_eq!(t.output.total(), rat(1, 4));
    }

    fn two_leaf_stream(jump_at: usize) -> EnumerationStream {
        let stages = (0..10)
            .map(|t| {
                let bump = if t >= jump_at { rat(3, 8) } else { int(0) };
                Semimeasure::new(2, 2, vec![rat(1, 8) + bump, rat(1, 8), rat(1, 8), rat(1, 8)])
                    .unwrap()
            })
            .collect();
        EnumerationStream::new(stages).unwrap()
    }

    #[test]
    fn constant_stream_single_stage() {
        let s = two_leaf_stream(100);
        let g = grow_semimeasure(&s, 100).unwrap();
        assert_eq!(g.stage_count(), 1);
        let expected = grow(&s.stages()[0].scaled(&rational::pow2(-8)).unwrap()).unwrap().output;
        assert!(g.tables.iter().all(|q| *q == expected));
    }

    #[test]
    fn jump_starts_stage() {
        let s = two_leaf_stream(5);
        let g = grow_semimeasure(&s, 100).unwrap();
        assert_eq!(g.regrow_at, vec![5]);
        assert_eq!(g.stage_count(), 2);
        for w in g.tables.windows(2) {
            assert!(w[0].leaves().iter().zip(w[1].leaves()).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn stream_errors() {
        let a = Semimeasure::uniform(2, 2).unwrap();
        let b = Semimeasure::new(2, 2, vec![int(0), rat(1, 4), rat(1, 4), rat(1, 4)]).unwrap();
        assert!(matches!(
            EnumerationStream::new(vec![a, b.clone()]),
            Err(Error::NonMonotoneStream { stage: 1, leaf: 0 })
        ));
        assert!(matches!(EnumerationStream::new(vec![b]), Err(Error::ZeroMinimumMass)));
    }

    #[test]
    fn sandwich_examples() {
        let nu = rat(1, 32);
        let p = Semimeasure::uniform(4, 2).unwrap().scaled(&rat(1, 2)).unwrap();
        assert_eq!(sandwich_check(&p, &p, &nu).unwrap(), SandwichOutcome::Holds);
        let mut leaves = p.leaves().to_vec();
        leaves[5] += &nu;
        let q = Semimeasure::new(4, 2, leaves).unwrap();
        assert_eq!(sandwich_check(&p, &q, &nu).unwrap(), SandwichOutcome::Holds);
        assert!(matches!(
            sandwich_check(&q, &p, &nu).unwrap(),
            SandwichOutcome::Inapplicable { .. }
        ));
    }

    #[test]
    fn grow_commutes_with_scaling() {
        let p = random_semimeasure(7, 4, 2, true, &int(1)).unwrap();
        let f = rat(3, 7);
        let a = grow(&p.scaled(&f).unwrap()).unwrap();
        let b = grow(&p).unwrap();
        assert_eq!(a.output, b.output.scaled(&f).unwrap());
        assert_eq!(a.branch, b.branch);
    }
}
