//! Least-squares Granger baseline.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::TimeseriesPair;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrangerResult {
    /// `MSE(x_t | x past) − MSE(x_t | x past, y past)`.
    pub statistic: f64,
    pub mse_self: f64,
    pub mse_joint: f64,
    pub rank_self: usize,
    pub rank_joint: usize,
    /// The y history added no rank; the statistic is pinned to 0.
    pub rank_deficient: bool,
}

fn fit(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<(f64, usize)> {
    let svd = design.clone().svd(true, true);
    let eps = 1e-9 * svd.singular_values.max().max(1.0);
    let rank = svd.rank(eps);
    let beta = svd.solve(target, eps).map_err(Error::input)?;
    let resid = target - design * beta;
    Ok((resid.norm_squared() / target.len() as f64, rank))
}

/// Whether the past of y helps predict x, fit in-sample with an intercept.
pub fn granger_statistic(pair: &TimeseriesPair, order: usize) -> Result<GrangerResult> {
    let k = order;
    let n = pair.len();
    if k == 0 {
        return Err(Error::input("predictor order must be at least 1"));
    }
    if n <= k {
        return Err(Error::input(format!("series of length {n} is too short for order {k}")));
    }
    let (x, y) = (pair.x(), pair.y());
    let rows = n - k;
    let target = DVector::from_iterator(rows, (k..n).map(|t| x[t] as f64));
    let self_design = DMatrix::from_fn(rows, k + 1, |r, c| match c {
        0 => 1.0,
        c => x[r + k - c] as f64,
    });
    let joint_design = DMatrix::from_fn(rows, 2 * k + 1, |r, c| match c {
        0 => 1.0,
        c if c <= k => x[r + k - c] as f64,
        c => y[r + k - (c - k)] as f64,
    });
    let (mse_self, rank_self) = fit(&self_design, &target)?;
    let (mse_joint, rank_joint) = fit(&joint_design, &target)?;
    let rank_deficient = rank_joint == rank_self;
    let statistic = if rank_deficient {
        0.0
    } else {
        (mse_self - mse_joint).max(0.0)
    };
    Ok(GrangerResult {
        statistic,
        mse_self,
        mse_joint,
        rank_self,
        rank_joint,
        rank_deficient,
    })
}
