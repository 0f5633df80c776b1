//! Exact analysis on (p, q, r) Cantor sets.
//!
//! Interval endpoints, staircase values and measure sums are exact
//! rationals. Logarithms and fractional powers are carried as [`numeric::Real`]
//! values that stay exact when the result is rational.
//!
//! ```
//! use cantor_analysis::cantor_set::IfsSpec;
//! use cantor_analysis::numeric::rat;
//! use cantor_analysis::staircase::cantor_function;
//!
//! let v = cantor_function(&IfsSpec::triadic(), &rat(1, 4), 64).unwrap();
//! assert_eq!(v.y, rat(1, 3));
//! ```

pub mod calculus;
pub mod cantor_set;
pub mod error;
pub mod measure;
pub mod numeric;
pub mod staircase;
pub mod valuation;

pub use error::{Error, Result};
