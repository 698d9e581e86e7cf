//! Runs every code block of the guide in `book/` as a doctest, so the book
//! cannot drift out of sync with the library. `cargo test --doc -p
//! crn-planar-book` (or a plain workspace `cargo test`) executes them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/networks.md")]
pub mod networks {}

#[doc = include_str!("../../../book/src/equilibria.md")]
pub mod equilibria {}

#[doc = include_str!("../../../book/src/local-stability.md")]
pub mod local_stability {}

#[doc = include_str!("../../../book/src/global-tests.md")]
pub mod global_tests {}

#[doc = include_str!("../../../book/src/limit-cycles.md")]
pub mod limit_cycles {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
