//! Verification toolkit for the class number one problem of the real
//! quadratic fields `Q(sqrt(d))`, `d = (an)^2 + 4a` with odd `a, n`.
//!
//! The crate provides exact cyclotomic arithmetic for Dirichlet character
//! sums, a search for "arrows" `q -> r` with serializable certificates, the
//! residue sieves driven by those arrows, and an independent class-number
//! oracle based on cycles of reduced indefinite forms.

pub mod arith;
pub mod arrows;
pub mod characters;
pub mod classnum;
pub mod sieve;
pub mod cyclotomic;
pub mod zetaforms;
pub mod error;
mod serde_util;

pub use error::{Error, Result};

/// Version tag written into certificates and reports.
pub const TOOLKIT_VERSION: &str = concat!("rdq-", env!("CARGO_PKG_VERSION"));
