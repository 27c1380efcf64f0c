//! Weierstrass σ and ζ for the lattice ℤ + τℤ, built on θ1:
//! σ(z) = exp(η1 z²/2)·θ1(z)/θ1'(0) and ζ = σ'/σ.

use num_complex::Complex64;

use super::theta;
use super::torus::Torus;
use crate::error::Result;

/// σ, ζ and the quasi-periods of one lattice.
#[derive(Debug, Clone, Copy)]
pub struct WeierstrassSuite {
    torus: Torus,
}

/// Builds the suite for τ; fails only when Im τ ≤ 0.
pub fn weierstrass_suite(tau: Complex64) -> Result<WeierstrassSuite> {
    Ok(WeierstrassSuite {
        torus: Torus::new(tau)?,
    })
}

impl WeierstrassSuite {
    pub fn from_torus(torus: Torus) -> Self {
        WeierstrassSuite { torus }
    }

    pub fn eta1(&self) -> Complex64 {
        self.torus.eta1()
    }

    pub fn eta2(&self) -> Complex64 {
        self.torus.eta2()
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        sigma(&self.torus, z)
    }

    pub fn zeta(&self, z: Complex64) -> Complex64 {
        zeta(&self.torus, z)
    }
}

pub fn sigma(t: &Torus, z: Complex64) -> Complex64 {
    (t.eta1() * z * z * 0.5).exp() * theta::theta1_unchecked(z, t.tau()) / t.theta1_prime0()
}

/// A logarithm of σ(z), exact up to 2πiℤ.
pub fn log_sigma(t: &Torus, z: Complex64) -> Complex64 {
    t.eta1() * z * z * 0.5 + theta::log_theta1(z, t.tau()) - t.theta1_prime0().ln()
}

pub fn zeta(t: &Torus, z: Complex64) -> Complex64 {
    t.eta1() * z + theta::theta1_dlog(z, t.tau())
}

/// ζ(z) − η1·z + 2πi·Im z/Im τ: the lattice-periodic kernel with residue 1
/// at the origin, equal to ∂_z of the flat Green function. Its principal
/// value integral over a fundamental domain is zero.
pub fn periodic_kernel(t: &Torus, z: Complex64) -> Complex64 {
    theta::theta1_dlog(z, t.tau()) + Complex64::new(0.0, 2.0 * std::f64::consts::PI * z.im / t.im_tau())
}
