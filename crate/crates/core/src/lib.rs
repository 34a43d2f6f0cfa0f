//! Concatenated binary linear codes over GF(2^k0): construction, exact
//! weight and bias statistics, certificates for the inner and outer codes,
//! moment identities, rate-distance bounds, and reproducible sweeps.
//!
//! Heavy loops take an [`exec::Exec`]; the `parallel` feature (default)
//! enables the rayon-backed variant.

pub mod binlin;
pub mod bounds;
pub mod certify;
pub mod codes;
pub mod error;
pub mod exec;
pub mod field;
pub mod io;
pub mod moments;
pub mod report;
pub mod rng;
pub mod sweep;

pub use error::{Error, Result};
