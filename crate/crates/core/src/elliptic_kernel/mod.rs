//! Genus-one geometry: the torus ℂ/(ℤ + τℤ), theta and eta, Weierstrass
//! σ/ζ, Abel–Jacobi sums, the flat Green function and fiber quadrature.

mod green;
mod quadrature;
mod theta;
mod torus;
mod weierstrass;

pub use green::{green_log, green_pairing};
pub use quadrature::{fiber_integral, gauss_legendre, pairwise_sum};
pub use theta::{dedekind_eta, theta1, theta1_prime};
pub use torus::{abel_jacobi, Divisor, Torus, MIN_SEPARATION};
pub use weierstrass::{log_sigma, periodic_kernel, sigma, weierstrass_suite, zeta, WeierstrassSuite};

pub(crate) use theta::log_theta1;
