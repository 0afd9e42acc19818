//! Toolkit for the longest-run-of-equal-divisor-count statistic.
//!
//! For each integer `n` let `d(n)` be its number of divisors. Consecutive
//! integers sharing one `d` value form *runs*; the length of the longest run
//! inside `[1, N]` is written `ell(N)`. This crate computes `ell(N)` exactly
//! with a segmented, checkpointable sieve ([`sieve`]), evaluates three
//! analytic upper-bound shapes for it ([`bounds`]), machine-checks the
//! supporting inequalities at desk scale ([`lemmas`]), and computes the
//! Jacobsthal function — the worst gap between integers coprime to a given
//! prime support — exactly ([`jacobsthal`]).
//!
//! ```
//! use divrun::sieve::ell;
//!
//! // 33, 34, 35 all have four divisors; nothing longer appears below 100.
//! assert_eq!(ell(100).unwrap(), 3);
//! ```
//!
//! The [`guide`] module embeds the book chapters from `book/` so their code
//! samples are compiled and executed by `cargo test --doc`.

pub mod arith;
pub mod bounds;
mod error;
pub mod guide;
pub mod jacobsthal;
pub mod lemmas;
pub mod report;
pub mod sieve;
pub(crate) mod util;

pub use error::{Error, Result};
