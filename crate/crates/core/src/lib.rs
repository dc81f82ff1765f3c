//! Complete elliptic integral of the first kind `K(r)`, a family of sharp
//! elementary bounds for it, and a verification harness that checks the
//! coefficient positivity, limits, shape and bound-ordering claims behind
//! those bounds in extended precision.
//!
//! Numerical kernels are generic over [`precision::Arithmetic`], so the same
//! code runs in hardware `f64` and in big-float arithmetic with any number of
//! decimal digits.

pub mod bounds;
pub mod compare;
pub mod error;
pub mod exec;
pub mod grid;
pub mod oracle;
pub mod precision;
pub mod special_fn;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::GridSpec;
pub use precision::{Arithmetic, Extended, Hardware, PrecisionContext, Real};
pub use special_fn::{Method, Modulus};
