//! Likelihood ratios, significance and sensitivity, and the exhaustive
//! ROC comparison of outcome orderings.

use std::cmp::Ordering;

use itertools::Itertools;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::semimeasure::Semimeasure;

/// Largest outcome space searched exhaustively.
pub const MAX_ROC_OUTCOMES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LikelihoodRatio {
    Finite(Rational),
    /// `P0(x) = 0 < PA(x)`.
    Infinite,
    /// Both masses are zero.
    Undefined,
}

impl PartialOrd for LikelihoodRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use LikelihoodRatio::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(a.cmp(b)),
            (Finite(_), Infinite) => Some(Ordering::Less),
            (Infinite, Finite(_)) => Some(Ordering::Greater),
            (Infinite, Infinite) => Some(Ordering::Equal),
            _ => None,
        }
    }
}

impl LikelihoodRatio {
    pub fn log2(&self) -> Option<f64> {
        match self {
            LikelihoodRatio::Finite(r) => Some(rational::log2(r)),
            LikelihoodRatio::Infinite => Some(f64::INFINITY),
            LikelihoodRatio::Undefined => None,
        }
    }
}

/// `d(x) = PA(x) / P0(x)`.
pub fn likelihood_ratio(p0: &Rational, pa: &Rational) -> LikelihoodRatio {
    match (p0.is_zero(), pa.is_zero()) {
        (true, true) => LikelihoodRatio::Undefined,
        (true, false) => LikelihoodRatio::Infinite,
        _ => LikelihoodRatio::Finite(pa / p0),
    }
}

fn same_space(p0: &Semimeasure, pa: &Semimeasure) -> Result<()> {
    if p0.alphabet() != pa.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: p0.alphabet(),
            right: pa.alphabet(),
        });
    }
    if p0.depth() != pa.depth() {
        return Err(Error::DepthMismatch {
            left: p0.depth(),
            right: pa.depth(),
        });
    }
    Ok(())
}

pub fn likelihood_ratios(p0: &Semimeasure, pa: &Semimeasure) -> Result<Vec<LikelihoodRatio>> {
    same_space(p0, pa)?;
    Ok(p0
        .leaves()
        .iter()
        .zip(pa.leaves())
        .map(|(a, b)| likelihood_ratio(a, b))
        .collect())
}

/// `α(x) = Σ{P0(y) : d(y) ≥ d(x)}` and `β(x) = Σ{PA(y) : d(y) ≤ d(x)}`.
/// Outcomes whose statistic is incomparable with `d(x)` count in neither.
pub fn significance_sensitivity<D: PartialOrd>(
    d: &[D],
    p0: &[Rational],
    pa: &[Rational],
    x: usize,
) -> Result<(Rational, Rational)> {
    if d.len() != p0.len() || d.len() != pa.len() {
        return Err(Error::input("statistic and masses have different lengths"));
    }
    let dx = d
        .get(x)
        .ok_or_else(|| Error::input(format!("outcome {x} out of range")))?;
    let mut alpha = Rational::zero();
    let mut beta = Rational::zero();
    for (i, dy) in d.iter().enumerate() {
        match dy.partial_cmp(dx) {
            Some(Ordering::Greater) => alpha += &p0[i],
            Some(Ordering::Less) => beta += &pa[i],
            Some(Ordering::Equal) => {
                alpha += &p0[i];
                beta += &pa[i];
            }
            None => {}
        }
    }
    Ok((alpha, beta))
}

/// Cumulative `(α, power)` vertices of the tests that reject the first
/// `j` outcomes of `order`, `j = 0..=K`.
pub fn operating_points(
    order: &[usize],
    p0: &[Rational],
    pa: &[Rational],
) -> Vec<(Rational, Rational)> {
    let mut a = Rational::zero();
    let mut b = Rational::zero();
    let mut out = vec![(a.clone(), b.clone())];
    for &i in order {
        a += &p0[i];
        b += &pa[i];
        out.push((a.clone(), b.clone()));
    }
    out
}

/// Power of the randomized tests along a vertex chain at significance
/// `alpha`; on vertical segments the best power is taken.
pub fn curve_at(points: &[(Rational, Rational)], alpha: &Rational) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    for w in points.windows(2) {
        let ((a0, b0), (a1, b1)) = (&w[0], &w[1]);
        if alpha < a0 || alpha > a1 {
            continue;
        }
        let v = if a0 == a1 {
            b0.max(b1).clone()
        } else {
            b0 + (b1 - b0) * (alpha - a0) / (a1 - a0)
        };
        if best.as_ref().is_none_or(|b| &v > b) {
            best = Some(v);
        }
    }
    best
}

/// Outcomes by decreasing likelihood ratio; undefined ratios go last.
pub fn likelihood_ratio_order(p0: &[Rational], pa: &[Rational]) -> Vec<usize> {
    let d: Vec<LikelihoodRatio> = p0
        .iter()
        .zip(pa)
        .map(|(a, b)| likelihood_ratio(a, b))
        .collect();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| match d[j].partial_cmp(&d[i]) {
        Some(o) => o.then(i.cmp(&j)),
        None => match (&d[i], &d[j]) {
            (LikelihoodRatio::Undefined, LikelihoodRatio::Undefined) => i.cmp(&j),
            (LikelihoodRatio::Undefined, _) => Ordering::Greater,
            _ => Ordering::Less,
        },
    });
    order
}

/// Whether curve `a` lies strictly above curve `b` at some significance
/// level; both are piecewise linear, so vertices suffice.
fn strictly_above(a: &[(Rational, Rational)], b: &[(Rational, Rational)]) -> bool {
    a.iter().chain(b).any(|(alpha, _)| {
        match (curve_at(a, alpha), curve_at(b, alpha)) {
            (Some(va), Some(vb)) => va > vb,
            (Some(_), None) => true,
            _ => false,
        }
    })
}

/// Whether the likelihood-ratio ROC curve lies strictly above `order`'s at
/// some significance level.
pub fn is_strictly_dominated(order: &[usize], p0: &[Rational], pa: &[Rational]) -> bool {
    let lr = operating_points(&likelihood_ratio_order(p0, pa), p0, pa);
    let other = operating_points(order, p0, pa);
    strictly_above(&lr, &other)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RocCheck {
    /// The likelihood-ratio ordering is never beaten.
    pub holds: bool,
    pub orderings: usize,
    /// Orderings the likelihood-ratio curve strictly beats somewhere.
    pub strictly_worse: usize,
}

/// Compares the likelihood-ratio ordering against every total ordering of
/// the outcomes.
pub fn roc_dominance_check(p0: &Semimeasure, pa: &Semimeasure) -> Result<RocCheck> {
    same_space(p0, pa)?;
    roc_dominance_check_masses(p0.leaves(), pa.leaves())
}

pub fn roc_dominance_check_masses(p0: &[Rational], pa: &[Rational]) -> Result<RocCheck> {
    let k = p0.len();
    if k != pa.len() {
        return Err(Error::input("mass vectors have different lengths"));
    }
    if k > MAX_ROC_OUTCOMES {
        return Err(Error::SpaceTooLarge {
            size: k,
            max: MAX_ROC_OUTCOMES,
        });
    }
    let lr = operating_points(&likelihood_ratio_order(p0, pa), p0, pa);
    let mut check = RocCheck {
        holds: true,
        orderings: 0,
        strictly_worse: 0,
    };
    for perm in (0..k).permutations(k) {
        check.orderings += 1;
        let pts = operating_points(&perm, p0, pa);
        if strictly_above(&pts, &lr) {
            check.holds = false;
        }
        if strictly_above(&lr, &pts) {
            check.strictly_worse += 1;
        }
    }
    Ok(check)
}
