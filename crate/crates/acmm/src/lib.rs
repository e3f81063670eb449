//! Approximate coded distributed matrix multiplication.
//!
//! A master node multiplies `C = A * B` on `P` unreliable workers, each
//! storing an `m`-th fraction of both inputs through linear encoding. Exact
//! recovery needs `2m - 1` worker outputs; allowing every decoded entry to
//! miss by at most `epsilon` drops the threshold to `m`, nearly halving the
//! redundancy. This crate implements the codes that achieve that, a search
//! procedure that discovers new ones, a deterministic straggler simulator,
//! and a coded logistic-regression trainer built on top.
//!
//! The narrative guide lives in `book/`; every code snippet there compiles
//! and runs as a doc-test of this crate (see the `book` module below).

pub mod error;
pub mod mat;
pub mod rng;

pub mod poly_algebra;

pub mod partition;

pub mod matdot;

pub mod polydot;

pub mod code_search;

pub mod straggler_sim;

pub mod coded_logreg;

pub(crate) mod ratmat;

pub use error::{Error, Result};
pub use mat::Mat;
pub use partition::CodeParams;

// The book's code fences double as doc-tests so the guide can never drift
// from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/block-codes.md")]
    mod block_codes {}
    #[doc = include_str!("../../../book/src/matdot.md")]
    mod matdot_chapter {}
    #[doc = include_str!("../../../book/src/polydot.md")]
    mod polydot_chapter {}
    #[doc = include_str!("../../../book/src/code-search.md")]
    mod code_search_chapter {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
}
