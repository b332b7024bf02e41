//! Trace weights over prime fields: construction and bulk evaluation of
//! weight tables (hyper-Kloosterman sums, character sums, value-set
//! weights), correlation scans, type I/II bilinear forms, sums over
//! primes and Möbius, the Heath-Brown decomposition with its exponent
//! optimization, and vertical Sato-Tate experiments.

pub mod bilinear;
pub mod cache;
pub mod correl;
pub mod error;
pub mod ffield;
pub mod hbdecomp;
pub mod primesums;
pub mod satotate;
pub mod util;
pub mod weights;

pub use error::{Error, Result};
pub use ffield::PrimeFieldContext;
pub use weights::{WeightSpec, WeightTable};
