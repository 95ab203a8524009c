//! Inverse-CDF sampling from finite exact distributions using uniform bits.
//!
//! A dyadic `r` with `l` known bits stands for the interval `[r, r + 2^-l]`.
//! It selects symbol `x` when `α(x-1) ≤ r` and `r + 2^-l ≤ α(x)`, where `α`
//! is the cumulative mass; otherwise the value is undefined and more bits
//! are needed.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Bits drawn before a sample is abandoned as undefined.
pub const MAX_SAMPLE_BITS: u32 = 1024;

/// `numerator / 2^bits` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigUint,
    bits: u32,
}

impl DyadicRational {
    pub fn new(numerator: BigUint, bits: u32) -> Result<Self> {
        if numerator > BigUint::one() << bits as usize {
            return Err(Error::input("dyadic value outside [0, 1]"));
        }
        Ok(DyadicRational { numerator, bits })
    }

    /// The empty prefix: `r = 0` with no known bits.
    pub fn empty() -> Self {
        DyadicRational {
            numerator: BigUint::zero(),
            bits: 0,
        }
    }

    /// Parses a binary expansion such as `0.01`, or `1`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("bad binary fraction {s:?}"));
        let s = s.trim();
        if s == "1" || s.strip_prefix("1.").is_some_and(|f| f.bytes().all(|b| b == b'0')) {
            let bits = s.len().saturating_sub(2) as u32;
            return DyadicRational::new(BigUint::one() << bits as usize, bits);
        }
        let frac = s
            .strip_prefix("0.")
            .or_else(|| s.strip_prefix('.'))
            .or_else(|| (s == "0").then_some(""))
            .ok_or_else(bad)?;
        let mut r = DyadicRational::empty();
        for b in frac.bytes() {
            match b {
                b'0' => r.push_bit(false),
                b'1' => r.push_bit(true),
                _ => return Err(bad()),
            }
        }
        Ok(r)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.numerator <<= 1;
        if bit {
            self.numerator += 1u32;
        }
        self.bits += 1;
    }

    pub fn value(&self) -> Rational {
        Rational::new(
            BigInt::from(self.numerator.clone()),
            BigInt::one() << self.bits as usize,
        )
    }

    /// `2^-l`.
    pub fn width(&self) -> Rational {
        rational::pow2(-(self.bits as i64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sample {
    Symbol(usize),
    Undefined,
}

fn check_distribution(p: &[Rational]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::input("empty distribution"));
    }
    if let Some(i) = p.iter().position(|m| m.is_negative()) {
        return Err(Error::NegativeMass {
            index: i,
            mass: rational::format(&p[i]),
        });
    }
    let total = rational::sum(p);
    if total > Rational::one() {
        return Err(Error::MassAboveOne {
            total: rational::format(&total),
        });
    }
    Ok(())
}

/// `α(0), …, α(K-1)`: cumulative masses.
pub fn cdf(p: &[Rational]) -> Vec<Rational> {
    let mut acc = Rational::zero();
    p.iter()
        .map(|m| {
            acc += m;
            acc.clone()
        })
        .collect()
}

fn sample_with_cdf(alpha: &[Rational], r: &Rational, width: &Rational) -> Sample {
    let upper = r + width;
    let mut low = Rational::zero();
    for (x, high) in alpha.iter().enumerate() {
        if &low <= r && &upper <= high {
            return Sample::Symbol(x);
        }
        low = high.clone();
    }
    Sample::Undefined
}

pub fn inverse_cdf_sample(p: &[Rational], r: &DyadicRational) -> Result<Sample> {
    check_distribution(p)?;
    Ok(sample_with_cdf(&cdf(p), &r.value(), &r.width()))
}

/// Outcome of drawing bits until the sample is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Draw {
    pub symbol: Option<usize>,
    pub bits: u32,
}

/// Extends `r` one bit at a time from `next_bit`. Returns `None` once `r`
/// lies in the deficit region past the last cell, or after `max_bits`.
pub fn draw_with(alpha: &[Rational], mut next_bit: impl FnMut() -> bool, max_bits: u32) -> Draw {
    let total = alpha.last().cloned().unwrap_or_else(Rational::zero);
    let mut r = DyadicRational::empty();
    loop {
        let value = r.value();
        if let Sample::Symbol(x) = sample_with_cdf(alpha, &value, &r.width()) {
            return Draw {
                symbol: Some(x),
                bits: r.bits(),
            };
        }
        if value >= total || r.bits() >= max_bits {
            return Draw {
                symbol: None,
                bits: r.bits(),
            };
        }
        r.push_bit(next_bit());
    }
}

/// Buffered uniform bits from an RNG.
pub struct BitStream<R> {
    rng: R,
    word: u64,
    left: u32,
}

impl<R: RngCore> BitStream<R> {
    pub fn new(rng: R) -> Self {
        BitStream {
            rng,
            word: 0,
            left: 0,
        }
    }

    pub fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.word >> 63 == 1;
        self.word <<= 1;
        self.left -= 1;
        b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityReport {
    /// Total variation between empirical and target, with the undefined
    /// outcome carrying the target's deficit.
    pub tv: f64,
    pub mean_bits: f64,
    pub undefined: usize,
    pub counts: Vec<usize>,
}

pub fn sampler_fidelity(p: &[Rational], n_samples: usize, seed: u64) -> Result<FidelityReport> {
    check_distribution(p)?;
    if n_samples == 0 {
        return Err(Error::input("n_samples must be at least 1"));
    }
    let alpha = cdf(p);
    let mut bits = BitStream::new(ChaCha8Rng::seed_from_u64(seed));
    let mut counts = vec![0usize; p.len()];
    let mut undefined = 0usize;
    let mut total_bits = 0u64;
    for _ in 0..n_samples {
        let d = draw_with(&alpha, || bits.next_bit(), MAX_SAMPLE_BITS);
        total_bits += d.bits as u64;
        match d.symbol {
            Some(x) => counts[x] += 1,
            None => undefined += 1,
        }
    }
    let n = Rational::from_integer(n_samples.into());
    let mut tv = Rational::zero();
    for (c, m) in counts.iter().zip(p) {
        tv += (Rational::from_integer((*c).into()) / &n - m).abs();
    }
    let deficit = Rational::one() - rational::sum(p);
    tv += (Rational::from_integer(undefined.into()) / &n - deficit).abs();
    tv /= Rational::from_integer(2.into());
    Ok(FidelityReport {
        tv: rational::to_f64(&tv),
        mean_bits: total_bits as f64 / n_samples as f64,
        undefined,
        counts,
    })
}
