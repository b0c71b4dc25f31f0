//! Hecke eigenvalues at prime powers.
//!
//! Exact three-term Hecke recurrences and vanishing-pattern classification,
//! the Sato-Tate measure and its sign densities, empirical sign statistics
//! over primes and exponents, q-expansions of level-one eigenforms, and the
//! sieve / Rankin-Selberg machinery behind simultaneous sign changes.
//!
//! Modules, bottom-up:
//!
//! * [`hecke`]: `C(p^r)` by recurrence, normalization, Satake roots, angles,
//!   zero patterns.
//! * [`satotate`]: closed-form measure of intervals, inverse-CDF sampling,
//!   sign regions of `sin((m+1)θ)` and their densities.
//! * [`sign_analysis`]: sign changes, non-vanishing sets, prime densities,
//!   simultaneous sign densities and grid discrepancy.
//! * [`forms`]: exact power series, `Δ` and the weight-16 newform, multiplicative
//!   expansion and CSV ingestion.
//! * [`oscillation`]: coefficient shift operators, the sieve construction,
//!   Rankin-Selberg coefficients and simultaneous sign search.

pub mod error;
pub mod forms;
pub mod primes;
pub mod hecke;
pub mod oscillation;
pub mod satotate;
pub mod sign_analysis;

pub use error::{Error, Result};
