//! Harmonic system calculus: characteristic comparison, harmonic value and
//! state, helix arithmetic, transformations, exchange search and sensory
//! priming. `no_std` with `alloc`.

#![no_std]

extern crate alloc;

pub mod calculus;
pub mod error;
pub mod exchange;
pub mod helix;
pub mod model;
pub mod sensory;
pub mod transform;

pub use error::{Error, Result};
