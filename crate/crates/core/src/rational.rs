//! Exact rational helpers shared by every module.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^exp` for any signed exponent.
pub fn pow2(exp: i64) -> Rational {
    let p = BigInt::one() << exp.unsigned_abs() as usize;
    if exp >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Renders as `numerator/denominator`, always with the slash.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `p/q`, a bare integer `p`, or a finite decimal such as `0.9`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::input(format!("cannot parse rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::input(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Exact conversion of a finite float (every finite `f64` is a dyadic rational).
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::input(format!("non-finite value {x}")))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = log2_big(&r.numer().abs().to_biguint().unwrap_or_default());
        let d = log2_big(&r.denom().abs().to_biguint().unwrap_or_default());
        let v = (n - d).exp2();
        if r.is_negative() {
            -v
        } else {
            v
        }
    })
}

/// `log2` of a big unsigned integer without overflowing `f64`.
pub fn log2_big(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map(f64::log2).unwrap_or(f64::INFINITY);
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    top.log2() + shift as f64
}

/// `log2` of a nonnegative rational; `-inf` at zero.
pub fn log2(r: &Rational) -> f64 {
    debug_assert!(!r.is_negative());
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    log2_big(n) - log2_big(d)
}

/// Value of a partial function: quotients over zero-mass contexts stay undefined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Partial {
    Defined(Rational),
    Undefined,
}

impl Partial {
    pub fn quotient(num: &Rational, den: &Rational) -> Partial {
        if den.is_zero() {
            Partial::Undefined
        } else {
            Partial::Defined(num / den)
        }
    }

    pub fn defined(&self) -> Option<&Rational> {
        match self {
            Partial::Defined(r) => Some(r),
            Partial::Undefined => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Partial::Defined(_))
    }

    pub fn into_option(self) -> Option<Rational> {
        match self {
            Partial::Defined(r) => Some(r),
            Partial::Undefined => None,
        }
    }

    pub fn mul(&self, other: &Partial) -> Partial {
        match (self, other) {
            (Partial::Defined(a), Partial::Defined(b)) => Partial::Defined(a * b),
            _ => Partial::Undefined,
        }
    }

    /// `log2` of a defined positive value; `None` when undefined or zero.
    pub fn log2(&self) -> Option<f64> {
        match self {
            Partial::Defined(r) if r.is_positive() => Some(log2(r)),
            _ => None,
        }
    }
}

impl From<Rational> for Partial {
    fn from(r: Rational) -> Self {
        Partial::Defined(r)
    }
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

pub fn is_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && r <= &Rational::one()
}

pub(crate) mod serde_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod serde_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(super::format).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| super::parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse("7").unwrap(), int(7));
        assert_eq!(parse("0.9").unwrap(), rat(9, 10));
        assert_eq!(parse("-0.25").unwrap(), rat(-1, 4));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert_eq!(format(&int(0)), "0/1");
    }

    #[test]
    fn pow2_signs() {
        assert_eq!(pow2(3), int(8));
        assert_eq!(pow2(-2), rat(1, 4));
        assert_eq!(pow2(0), int(1));
    }

    #[test]
    fn log2_of_huge_values() {
        let big = pow2(5000) * rat(3, 1);
        let l = log2(&big);
        assert!((l - (5000.0 + 3f64.log2())).abs() < 1e-9);
        assert!((log2(&pow2(-4000)) + 4000.0).abs() < 1e-9);
        assert_eq!(log2(&int(0)), f64::NEG_INFINITY);
    }

    #[test]
    fn partial_quotient() {
        assert_eq!(Partial::quotient(&int(1), &int(0)), Partial::Undefined);
        assert_eq!(Partial::quotient(&int(1), &int(2)), Partial::Defined(rat(1, 2)));
    }
}
