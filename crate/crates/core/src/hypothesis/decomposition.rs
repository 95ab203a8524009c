//! Exact information decompositions of a single bivariate semimeasure.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorization::{causal_part, CausalKernel, Mode};
use crate::rational::{self, Partial, Rational};
use crate::semimeasure::{words, BivariateSemimeasure, Side};

/// One log-ratio term, kept as its exact ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub ratio: Partial,
}

impl Term {
    fn new(num: Partial, den: Partial) -> Term {
        let ratio = match (num, den) {
            (Partial::Defined(n), Partial::Defined(d)) if !d.is_zero() => Partial::Defined(n / d),
            _ => Partial::Undefined,
        };
        Term { ratio }
    }

    /// `lg` of the ratio; `None` when undefined or zero.
    pub fn log2(&self) -> Option<f64> {
        self.ratio.log2()
    }
}

/// `I = T_xy + T_yx + T_inst` at one pair `(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// `P(x,y) / (P(x) P(y))`.
    pub i: Term,
    /// `P(x|y↑) / P(x)`.
    pub t_xy: Term,
    /// `P(y|x↑) / P(y)`.
    pub t_yx: Term,
    /// `P(x,y) / (P(x|y↑) P(y|x↑))`.
    pub t_inst: Term,
}

impl Decomposition {
    /// Exact check of `r_I = r_xy r_yx r_inst`; `None` if any term is
    /// undefined.
    pub fn identity_holds(&self) -> Option<bool> {
        let [i, a, b, c] = [&self.i, &self.t_xy, &self.t_yx, &self.t_inst]
            .map(|t| t.ratio.defined().cloned());
        Some(i? == a? * b? * c?)
    }

    pub fn log2_terms(&self) -> [Option<f64>; 4] {
        [
            self.i.log2(),
            self.t_xy.log2(),
            self.t_yx.log2(),
            self.t_inst.log2(),
        ]
    }
}

/// Kernels shared across pairs.
pub struct Decomposer<'a> {
    p: &'a BivariateSemimeasure,
    x_causal: CausalKernel,
    y_causal: CausalKernel,
}

impl<'a> Decomposer<'a> {
    pub fn new(p: &'a BivariateSemimeasure) -> Result<Self> {
        Ok(Decomposer {
            p,
            x_causal: causal_part(p, Side::XGivenY, Mode::Causal)?,
            y_causal: causal_part(p, Side::YGivenX, Mode::Causal)?,
        })
    }

    pub fn at(&self, x: &[u8], y: &[u8]) -> Result<Decomposition> {
        let joint = Partial::Defined(self.p.mass(x, y)?.clone());
        let table = self.p.prefix_table();
        let px = Partial::Defined(table.mass(x, &[]).clone());
        let py = Partial::Defined(table.mass(&[], y).clone());
        let kx = self.x_causal.evaluate(x, y)?;
        let ky = self.y_causal.evaluate(x, y)?;
        Ok(Decomposition {
            i: Term::new(joint.clone(), px.mul(&py)),
            t_xy: Term::new(kx.clone(), px),
            t_yx: Term::new(ky.clone(), py),
            t_inst: Term::new(joint, kx.mul(&ky)),
        })
    }
}

pub fn decomposition(p: &BivariateSemimeasure, x: &[u8], y: &[u8]) -> Result<Decomposition> {
    Decomposer::new(p)?.at(x, y)
}

/// Shannon counterparts: expectations of the four log-ratios under `P`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShannonDecomposition {
    pub si: f64,
    pub sit_xy: f64,
    pub sit_yx: f64,
    pub sit_inst: f64,
    /// Every pair with positive mass satisfied the ratio identity exactly.
    pub identity_exact: bool,
    /// `P(ε, ε) < 1`: expectations are over a deficient semimeasure.
    pub deficient: bool,
}

impl ShannonDecomposition {
    pub fn residual(&self) -> f64 {
        self.si - (self.sit_xy + self.sit_yx + self.sit_inst)
    }
}

pub fn shannon_sit(p: &BivariateSemimeasure) -> Result<ShannonDecomposition> {
    let n = p.depth()?;
    let k = p.alphabet();
    let d = Decomposer::new(p)?;
    let mut out = ShannonDecomposition {
        si: 0.0,
        sit_xy: 0.0,
        sit_yx: 0.0,
        sit_inst: 0.0,
        identity_exact: true,
        deficient: p.total() < Rational::one(),
    };
    for x in words(n, k) {
        for y in words(n, k) {
            let mass = p.mass(&x, &y)?;
            if mass.is_zero() {
                continue;
            }
            let dec = d.at(&x, &y)?;
            if dec.identity_holds() != Some(true) {
                out.identity_exact = false;
            }
            let w = rational::to_f64(mass);
            let logs = dec.log2_terms();
            let get = |v: Option<f64>| {
                v.ok_or_else(|| Error::input("undefined term at a pair with positive mass"))
            };
            out.si += w * get(logs[0])?;
            out.sit_xy += w * get(logs[1])?;
            out.sit_yx += w * get(logs[2])?;
            out.sit_inst += w * get(logs[3])?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::semimeasure::{product, random_bivariate, random_semimeasure};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn copy(n: usize) -> BivariateSemimeasure {
        let leaf = Rational::new(1.into(), (1u64 << n).into());
        BivariateSemimeasure::from_fn(n, 2, |x, y| if x == y { leaf.clone() } else { int(0) })
            .unwrap()
    }

    fn lag1() -> BivariateSemimeasure {
        BivariateSemimeasure::from_fn(2, 2, |x, y| {
            if y[0] == 0 && y[1] == x[0] {
                rat(1, 4)
            } else {
                int(0)
            }
        })
        .unwrap()
    }

    #[test]
    fn uniform_terms_vanish() {
        let u = BivariateSemimeasure::uniform(2, 2).unwrap();
        let d = decomposition(&u, &[0, 1], &[1, 1]).unwrap();
        assert_eq!(d.log2_terms(), [Some(0.0); 4]);
    }

    #[test]
    fn instantaneous_copy_depth3() {
        let p = copy(3);
        for x in words(3, 2) {
            let d = decomposition(&p, &x, &x).unwrap();
            let [i, a, b, c] = d.log2_terms().map(Option::unwrap);
            assert!(close(i, 3.0) && close(a, 0.0) && close(b, 0.0) && close(c, 3.0));
        }
    }

    #[test]
    fn lag1_copy_depth2() {
        let p = lag1();
        for x in words(2, 2) {
            let y = [0, x[0]];
            let d = decomposition(&p, &x, &y).unwrap();
            let [i, a, b, c] = d.log2_terms().map(Option::unwrap);
            assert!(close(i, 1.0) && close(a, 0.0) && close(b, 1.0) && close(c, 0.0));
            assert_eq!(d.identity_holds(), Some(true));
        }
    }

    #[test]
    fn shannon_examples() {
        let a = random_semimeasure(1, 2, 2, true, &int(1)).unwrap();
        let b = random_semimeasure(2, 2, 2, true, &int(1)).unwrap();
        let s = shannon_sit(&product(&a, &b).unwrap()).unwrap();
        for v in [s.si, s.sit_xy, s.sit_yx, s.sit_inst] {
            assert!(v.abs() < 1e-12);
        }

        let s = shannon_sit(&lag1()).unwrap();
        assert!(close(s.si, 1.0) && close(s.sit_yx, 1.0));
        assert!(close(s.sit_xy, 0.0) && close(s.sit_inst, 0.0));

        let s = shannon_sit(&copy(2)).unwrap();
        assert!(close(s.si, 2.0) && close(s.sit_inst, 2.0));
        assert!(close(s.sit_xy, 0.0) && close(s.sit_yx, 0.0));
        assert!(s.identity_exact && !s.deficient);
    }

    #[test]
    fn identity_on_random_inputs() {
        for seed in 0..20 {
            let p = random_bivariate(seed, 3, 2, true, &rat(5, 6)).unwrap();
            let s = shannon_sit(&p).unwrap();
            assert!(s.identity_exact && s.deficient);
            assert!(s.residual().abs() < 1e-9);
        }
    }
}
