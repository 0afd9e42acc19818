//! The user guide, embedded from `book/`.
//!
//! Each submodule carries one chapter of the mdbook under `book/src` as its
//! documentation, so every Rust snippet in the book is compiled and executed
//! by `cargo test --doc`. The rendered book and the tested examples are the
//! same bytes by construction.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}

#[doc = include_str!("../../../book/src/runs.md")]
pub mod runs {}

#[doc = include_str!("../../../book/src/scanning.md")]
pub mod scanning {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/lemmas.md")]
pub mod lemmas {}

#[doc = include_str!("../../../book/src/jacobsthal.md")]
pub mod jacobsthal {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
