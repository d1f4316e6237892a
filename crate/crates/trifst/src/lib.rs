//! Weighted finite-state transducer library built around 3-way composition.
//!
//! The crate provides:
//!
//! - a transducer data model over pluggable commutative semirings
//!   ([`semiring`], [`fst`]);
//! - standard pairwise composition with the epsilon filter that keeps
//!   redundant epsilon-paths from being counted more than once
//!   ([`compose`]);
//! - 3-way composition `T1 ∘ T2 ∘ T3` computed in a single pass, with
//!   lateral/central/combined match strategies, eager and lazy modes, and
//!   two interchangeable epsilon-handling schemes: a pair of left-to-right
//!   filters or a single symmetric filter over move triplets ([`compose3`],
//!   [`filters`]);
//! - supporting graph algorithms: shortest distance, path sums, trimming,
//!   evaluation-based equivalence ([`algorithms`]);
//! - two applications exercising the composition stack end to end:
//!   edit-distance between automata and n-gram string kernels ([`apps`]);
//! - a text serialization format, DOT export, and a benchmark harness
//!   comparing cascaded 2-way composition against 3-way composition
//!   ([`text`], [`bench`]).

pub mod algorithms;
pub mod apps;
pub mod bench;
pub mod compose;
pub mod compose3;
pub mod filters;
pub mod fst;
pub mod semiring;
pub mod text;

mod error;

pub use error::{Error, Result};
pub use fst::{Label, StateId, Transducer, Transition, EPSILON};
pub use semiring::{LogWeight, ProbabilityWeight, Semiring, TropicalWeight};
