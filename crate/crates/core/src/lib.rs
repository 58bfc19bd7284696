//! Diagnostics for strong renewal behavior of heavy-tailed random walks.
//!
//! The crate computes renewal measures of walks whose step distribution has a
//! regularly varying right tail with index in (0,1) (infinite mean), checks
//! the tail-side conditions under which x·F̄(x)·U(x+(0,h]) converges, and
//! provides the stable-limit constants the limit is compared against.
//!
//! Modules:
//! - [`regvar`]: regularly varying functions in representation form, their
//!   inverses, norming sequences, truncated moments.
//! - [`distributions`]: step-law catalogue (lattice and continuous families
//!   with known tail behavior), lattice classification, walk sampling.
//! - [`stable`]: the limiting stable law's density, positivity parameter and
//!   the renewal limit constant.
//! - [`conditions`]: interval-probability diagnostics (omega, overflow sigma)
//!   and grid-based checkers for the tail-side conditions.
//! - [`renewal`]: exact lattice renewal computation by FFT convolution
//!   powers, Monte Carlo renewal estimates, diagnostic curves.
//! - [`ladder`]: ascending ladder-height simulation and tail-index fits.
//! - [`infdiv`]: infinitely divisible laws given by a Lévy triple, their
//!   decomposition and the analogous tail diagnostics.
//! - [`concentration`]: exponential tilting and the truncated-maximum
//!   concentration bound harness.

#![forbid(unsafe_code)]

pub mod concentration;
pub mod conditions;
pub mod distributions;
pub mod error;
pub mod infdiv;
pub mod ladder;
pub mod numeric;
pub mod regvar;
pub mod renewal;
pub mod stable;

pub use error::{Error, Result};
