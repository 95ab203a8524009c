//! Semimeasure-based influence testing for discrete timeseries.

pub mod cli;
pub mod error;
pub mod factorization;
pub mod grow;
pub mod hypothesis;
pub mod mixture;
pub mod rational;
pub mod semimeasure;
pub mod sim;

pub use error::{Error, Result};
pub use rational::{Partial, Rational};
