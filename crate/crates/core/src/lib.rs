//! Logarithms of flat line bundles on complex tori.
//!
//! The crate computes, at genus one, the naive and intersection logarithms
//! on Deligne pairings of flat line bundles, complex-valued holomorphic
//! analytic torsion and the Quillen logarithm, and the arithmetic degree of
//! conjugate pairs over ℤ and imaginary quadratic rings. Every identity
//! relating these objects is exposed as a defect functional that should
//! vanish, so the library doubles as a verification harness.

pub mod arith_degree;
pub mod characters;
pub mod circle_values;
pub mod cli_reports;
pub mod deligne_pairing;
pub mod elliptic_kernel;
pub mod error;
pub mod flat_bundles;
pub mod torsion_quillen;

pub use circle_values::{CircleValue, Modulus};
pub use error::{Error, Result};
