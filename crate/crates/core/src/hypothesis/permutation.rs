//! Seeded permutation significance.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::TimeseriesPair;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "SEMICAUSAL_THREADS";

/// Relative slack under which a permuted value counts as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermutationScheme {
    /// Uniform shuffle of y.
    #[default]
    Shuffle,
    /// Rotation of y by a uniform nonzero offset.
    Shift,
}

impl PermutationScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "shuffle" => Ok(PermutationScheme::Shuffle),
            "shift" => Ok(PermutationScheme::Shift),
            _ => Err(Error::input(format!("unknown permutation scheme {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PermutationScheme::Shuffle => "shuffle",
            PermutationScheme::Shift => "shift",
        }
    }

    /// The `trial`-th resampled y, independent of every other trial.
    pub fn resample(self, y: &[u8], seed: u64, trial: usize) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        let mut out = y.to_vec();
        match self {
            PermutationScheme::Shuffle => out.shuffle(&mut rng),
            PermutationScheme::Shift => {
                if out.len() > 1 {
                    let offset = rng.random_range(1..out.len());
                    out.rotate_left(offset);
                }
            }
        }
        out
    }
}

impl fmt::Display for PermutationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationResult {
    pub observed: f64,
    pub p_value: f64,
    pub trials: usize,
    pub exceed: usize,
    /// Trials whose statistic was undefined; they never count as exceeding.
    pub undefined: usize,
    pub seed: u64,
    pub scheme: PermutationScheme,
}

/// Worker count from the environment, or rayon's default.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` on a pool sized by [`THREADS_ENV`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// `p = (1 + #{permuted ≥ observed}) / (trials + 1)`.
pub fn p_value(observed: f64, permuted: &[Option<f64>]) -> (f64, usize) {
    let slack = TIE_TOLERANCE * observed.abs().max(1.0);
    let exceed = permuted
        .iter()
        .filter(|v| v.is_some_and(|v| v >= observed - slack))
        .count();
    ((1 + exceed) as f64 / (permuted.len() + 1) as f64, exceed)
}

/// Permutation p-value of `statistic`, resampling y.
pub fn permutation_test<F>(
    pair: &TimeseriesPair,
    statistic: F,
    trials: usize,
    seed: u64,
    scheme: PermutationScheme,
) -> Result<PermutationResult>
where
    F: Fn(&TimeseriesPair) -> Result<Option<f64>> + Sync,
{
    if trials == 0 {
        return Err(Error::input("trials must be at least 1"));
    }
    let observed = statistic(pair)?
        .ok_or_else(|| Error::input("observed statistic is undefined"))?;
    let permuted: Vec<Option<f64>> = with_pool(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| statistic(&pair.with_y(scheme.resample(pair.y(), seed, t))))
            .collect::<Result<Vec<_>>>()
    })??;
    let (p_value, exceed) = p_value(observed, &permuted);
    Ok(PermutationResult {
        observed,
        p_value,
        trials,
        exceed,
        undefined: permuted.iter().filter(|v| v.is_none()).count(),
        seed,
        scheme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> TimeseriesPair {
        let x: Vec<u8> = (0..40).map(|i| (i % 3 == 0) as u8).collect();
        let y: Vec<u8> = (0..40).map(|i| (i % 5 < 2) as u8).collect();
        TimeseriesPair::new(x, y, 2, "t").unwrap()
    }

    #[test]
    fn constant_statistic_gives_one() {
        let r = permutation_test(&pair(), |_| Ok(Some(1.5)), 30, 1, PermutationScheme::Shuffle)
            .unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(permutation_test(&pair(), |_| Ok(Some(0.0)), 0, 1, PermutationScheme::Shift).is_err());
    }

    #[test]
    fn resampling_is_reproducible_and_preserves_counts() {
        let y = pair().y().to_vec();
        for scheme in [PermutationScheme::Shuffle, PermutationScheme::Shift] {
            let a = scheme.resample(&y, 9, 3);
            assert_eq!(a, scheme.resample(&y, 9, 3));
            let mut s1 = a.clone();
            let mut s2 = y.clone();
            s1.sort();
            s2.sort();
            assert_eq!(s1, s2);
        }
        assert_ne!(
            PermutationScheme::Shift.resample(&y, 9, 0),
            y,
            "shift uses a nonzero offset"
        );
    }

    #[test]
    fn undefined_never_exceeds() {
        let (p, e) = p_value(2.0, &[None, Some(3.0), Some(1.0)]);
        assert_eq!(e, 1);
        assert_eq!(p, 0.5);
    }
}
