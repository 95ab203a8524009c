//! Structural simulation, inverse-CDF sampling and timeseries I/O.

pub mod sampler;
pub mod structural;
pub mod timeseries;

pub use sampler::{inverse_cdf_sample, sampler_fidelity, DyadicRational, Sample};
pub use structural::{ModelClass, ModelDoc, Reads, RuleSpec, StructuralModel, UpdateRule};
pub use timeseries::{ingest_timeseries, TimeseriesPair};
