//! Error types shared by every layer of the library.

use num_complex::Complex64;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while evaluating q-calculus primitives,
/// series, weights, or verification checks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid q parameter: {0}")]
    InvalidQ(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("degenerate lattice step on x_{level} at s = {s}{stage}")]
    DegenerateStep {
        level: f64,
        s: Complex64,
        /// Chain stage annotation, empty for single differences.
        stage: String,
    },

    #[error("q-Pochhammer pole: factor (1 - a q^-{j}) vanishes")]
    PochhammerPole { j: u32 },

    #[error("series pole: lower parameter factor vanishes at term k = {k}")]
    SeriesPole { k: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations ({what})")]
    Convergence { what: String, iterations: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("support error: {0}")]
    Support(String),

    #[error("singular weight rho_{level} at s = {s}")]
    SingularWeight { level: i64, s: Complex64 },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("inconclusive check: {0}")]
    Inconclusive(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
