//! Convertibility ordering of bipartite pure states.
//!
//! States are described by their Schmidt spectra, or equivalently by the
//! tail function `g(n) = Σ_{i≥n} λ_i`. The crate provides
//!
//! - [`spectra`]: spectra, log-domain tail sequences and their validity checks,
//! - [`order`]: finite preorders, chains and the extremal monotone pair,
//! - [`slocc`]: LOCC/SLOCC convertibility criteria and tail-ratio trend evidence,
//! - [`family`]: parameterized tail families and monotone estimates,
//! - [`log_oscillation`]: the log-oscillating modifier family that yields
//!   SLOCC-incomparable infinite-dimensional states,
//! - [`formats`]: the JSON/CSV input formats.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`exec`].

pub mod error;
pub mod exec;
pub mod family;
pub mod formats;
pub mod log_oscillation;
pub mod numeric;
pub mod order;
pub mod slocc;
pub mod spectra;

pub use error::{Error, Result};
pub use exec::Exec;
