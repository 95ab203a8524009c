//! Influence statistics and their significance.

pub mod decomposition;
pub mod granger;
pub mod influence;
pub mod permutation;
pub mod report;
pub mod roc;

pub use decomposition::{decomposition, shannon_sit, Decomposer, Decomposition, ShannonDecomposition, Term};
pub use granger::{granger_statistic, GrangerResult};
pub use influence::{
    influence_test, plugin_decomposition, run_mixture, sit_statistic, DecompositionLabel, Direction,
    InfluenceConfig, InfluenceTest, MixtureKind, MixtureSuite, SeriesDecomposition, TestValue,
};
pub use permutation::{permutation_test, PermutationResult, PermutationScheme};
pub use report::{TestReport, Terms};
pub use roc::{
    likelihood_ratio, likelihood_ratios, roc_dominance_check, significance_sensitivity, LikelihoodRatio,
    RocCheck,
};
