// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown site `{0}` for this layout")]
    UnknownSite(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("integration failed at t = {t}: step size {step:e} underflowed")]
    IntegrationFailure { t: f64, step: f64 },

    #[error("no matched-pulse solution: {0}")]
    NoSolution(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    /// `Tr(T†G)` vanished, so no global phase can be recovered. The
    /// unaligned max-entry distance is still reported.
    #[error("global phase undefined (Tr(T†G) = 0); unaligned distance {unaligned_distance:e}")]
    UndefinedAlignment { unaligned_distance: f64 },

    #[error("scope error: {0}")]
    Scope(String),

    #[error("capacity exceeded: {spins} spins requested, at most {max} supported")]
    Capacity { spins: usize, max: usize },
}
