//! Lattice Green's functions of the d-dimensional face-centered cubic lattice.
//!
//! The crate counts excursions exactly, guesses recurrences and differential
//! equations from the counts, manipulates the resulting operators in an Ore
//! algebra, checks creative-telescoping certificates against the explicit
//! integrand, and evaluates return probabilities to many digits.

pub mod error;
pub mod golden;
pub mod guess;
pub mod lattice;
pub mod modp;
pub mod numerics;
pub mod operator;
pub mod pipeline;
pub mod ore;
pub mod series;
pub mod util;
pub mod walkcount;
pub mod wallis;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/counting.md")]
    struct Counting;
    #[doc = include_str!("../../../book/src/guessing.md")]
    struct Guessing;
    #[doc = include_str!("../../../book/src/operators.md")]
    struct Operators;
    #[doc = include_str!("../../../book/src/numerics.md")]
    struct Numerics;
}
