//! Order-separating homomorphisms for free products of two groups.
//!
//! Given a free product `A * B` of finite or infinite cyclic factors and a
//! list of pairwise non-conjugate (up to inversion) elements, the engine
//! builds a finite permutation representation in which the images have
//! pairwise distinct orders, and checks the result independently.

pub mod arith;
pub mod cli;
pub mod error;
pub mod graph;
pub mod group;
pub mod lemmas;
pub mod pipeline;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
