//! # kmixup
//!
//! Data augmentation by matching pairs of `k`-point batches with exact
//! optimal transport and training on their displacement interpolations.
//!
//! Two batches of `k` labeled points are viewed as uniform discrete measures.
//! The squared-Euclidean assignment problem between them is solved exactly,
//! and each matched pair is blended with a single weight `λ ~ Beta(α, α)`.
//! For `k = 1` this reduces to standard mixup; for larger `k` the matching
//! respects cluster and manifold structure, so the blended points stay close
//! to the data instead of cutting across it.
//!
//! The crate is organized around that pipeline:
//!
//! - [`transport`]: cost matrices, an exact `O(k³)` assignment solver, and
//!   the squared 2-Wasserstein distance between equal-size batches.
//! - [`mixup`]: `Beta(α, α)` sampling, displacement interpolation, vicinal
//!   batch generation, and the matched-point distribution of a single anchor.
//! - [`synthetic`]: seeded generators for toy 2-D datasets (ring, bars,
//!   spirals), ball clusters, low-dimensional manifolds, and CSV I/O.
//! - [`analysis`]: Monte Carlo checks of the structural behavior of the
//!   matching (cross-cluster counts and rates, endpoint localization,
//!   Wasserstein scaling in `k`, vicinal deviation).
//! - [`nn`]: a small fully-connected ReLU classifier with exact
//!   backpropagation, SGD training on vicinal batches, and FGSM probing.
//!
//! All randomness flows through seeded [`rand_chacha::ChaCha8Rng`] streams;
//! every public entry point is reproducible from a 64-bit seed.

pub mod analysis;
pub mod mixup;
pub mod nn;
pub mod rng;
pub mod synthetic;
pub mod transport;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs whose shapes do not line up (batch sizes, dimensions, layers).
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Dataset has too few points for the requested operation.
    #[error("dataset too small: need at least {needed} points, have {have}")]
    DatasetTooSmall { needed: usize, have: usize },

    /// A NaN or infinity where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A statistical precondition (e.g. cluster separation) does not hold,
    /// so the guarantee being tested simply does not apply.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Data that admits no meaningful answer (e.g. a log-log fit on zeros).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}, step {step}: loss {loss}")]
    Diverged { epoch: usize, step: usize, loss: f64 },

    /// CSV file does not exist.
    #[error("csv: no such file: {0}")]
    CsvMissingFile(String),

    /// CSV row with the wrong number of fields.
    #[error("csv: line {line}: expected {expected} fields, found {found}")]
    CsvRaggedRow { line: usize, expected: usize, found: usize },

    /// CSV feature cell that does not parse as a finite number.
    #[error("csv: line {line}: non-numeric feature {value:?}")]
    CsvNonNumeric { line: usize, value: String },

    /// CSV file with a header but no data rows.
    #[error("csv: no data rows")]
    CsvEmpty,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
