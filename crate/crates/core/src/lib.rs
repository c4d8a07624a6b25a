//! Local-to-global computations for pretentious multiplicative functions:
//! Euler-product predictions for mean values and correlations, checked
//! against direct summation.

pub mod applications;
pub mod arith;
pub mod correlation;
pub mod error;
pub mod meanvalue;
pub mod multfun;
pub mod padic;
pub mod par;
pub mod poly;
pub mod selftest;

pub use error::{Error, Result};
pub use num_complex::Complex64;
