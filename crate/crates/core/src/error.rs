use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("prefix of length {len} exceeds depth {depth}")]
    PrefixTooLong { len: usize, depth: usize },

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },

    #[error("total mass {total} exceeds 1")]
    MassAboveOne { total: String },

    #[error("negative mass {mass} at index {index}")]
    NegativeMass { index: usize, mass: String },

    #[error("family size {size} exceeds the cap of {cap}")]
    FamilyTooLarge { size: u128, cap: u128 },

    #[error("outcome space of {size} outcomes is too large for exhaustive search (max {max})")]
    SpaceTooLarge { size: usize, max: usize },

    #[error("stream is not monotone at stage {stage}, leaf {leaf}")]
    NonMonotoneStream { stage: usize, leaf: usize },

    #[error("minimum initial leaf mass is zero")]
    ZeroMinimumMass,

    #[error("{role} rule reads {input}, which the {class} class forbids")]
    ForbiddenInput {
        class: String,
        role: &'static str,
        input: String,
    },

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("check failed: {0}")]
    Violation(String),

    #[error("input is empty")]
    EmptyInput,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Short machine-readable tag for the CLI error document.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::PrefixTooLong { .. } => "prefix_too_long",
            Error::SymbolOutOfRange { .. } => "symbol_out_of_range",
            Error::AlphabetMismatch { .. } => "alphabet_mismatch",
            Error::DepthMismatch { .. } => "depth_mismatch",
            Error::MassAboveOne { .. } => "mass_above_one",
            Error::NegativeMass { .. } => "negative_mass",
            Error::FamilyTooLarge { .. } => "family_too_large",
            Error::SpaceTooLarge { .. } => "space_too_large",
            Error::NonMonotoneStream { .. } => "non_monotone_stream",
            Error::ZeroMinimumMass => "zero_minimum_mass",
            Error::ForbiddenInput { .. } => "forbidden_input",
            Error::Row { .. } => "row",
            Error::Violation(_) => "violation",
            Error::EmptyInput => "empty_input",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
