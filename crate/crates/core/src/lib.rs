//! Exact convex-analytic toolkit for toric heights.
//!
//! Everything geometric runs over arbitrary-precision rationals with no
//! rounding; heights and Mahler values over Q live in a formal
//! `c0 + sum c_p log p` arithmetic with decidable sign.

pub mod concave;
pub mod dynamical;
pub mod equidist;
pub mod error;
pub mod exactgeom;
pub mod heights;
pub mod scalar;
pub mod schema;
pub mod toric;

pub use error::{Error, Result};
pub use scalar::{LogLinear, Rational};
