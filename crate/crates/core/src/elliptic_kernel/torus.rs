use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::theta;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Minimum separation of distinct divisor points, measured modulo the lattice.
pub const MIN_SEPARATION: f64 = 1e-6;

/// The complex torus ℂ/(ℤ + τℤ) with its flat area-one metric.
///
/// Construction precomputes the constants every σ-product needs, so a
/// `Torus` is cheap to copy into closures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TorusRepr", into = "TorusRepr")]
pub struct Torus {
    tau: Complex64,
    /// h in the normalized Kähler form (i/2π)·h·dz∧dz̄; area one forces h = π/Im τ.
    metric_scale: f64,
    eta1: Complex64,
    eta2: Complex64,
    log_theta1_prime0: Complex64,
    eta: Complex64,
}

#[derive(Serialize, Deserialize)]
struct TorusRepr {
    tau: Complex64,
}

impl TryFrom<TorusRepr> for Torus {
    type Error = Error;
    fn try_from(r: TorusRepr) -> Result<Self> {
        Torus::new(r.tau)
    }
}

impl From<Torus> for TorusRepr {
    fn from(t: Torus) -> Self {
        TorusRepr { tau: t.tau }
    }
}

impl Torus {
    pub fn new(tau: Complex64) -> Result<Self> {
        theta::check_tau(tau)?;
        let (d1, d3) = theta::theta1_odd_derivatives_at_zero(tau);
        // θ1(z) = θ1'(0)·z·exp(−η1 z²/2 + O(z⁴)) pins η1 = −θ1'''(0)/(3θ1'(0)).
        let eta1 = -d3 / (3.0 * d1);
        let eta2 = tau * eta1 - 2.0 * PI * I;
        Ok(Torus {
            tau,
            metric_scale: PI / tau.im,
            eta1,
            eta2,
            log_theta1_prime0: d1.ln(),
            eta: theta::eta_product(tau),
        })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn im_tau(&self) -> f64 {
        self.tau.im
    }

    pub fn metric_scale(&self) -> f64 {
        self.metric_scale
    }

    /// Quasi-period 2ζ(1/2).
    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    /// Quasi-period 2ζ(τ/2).
    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }

    pub fn dedekind_eta(&self) -> Complex64 {
        self.eta
    }

    pub fn theta1_prime0(&self) -> Complex64 {
        self.log_theta1_prime0.exp()
    }

    /// The conjugate surface X̄ modelled as the torus with parameter −τ̄ in
    /// the coordinate w = z̄; its B-cycle is the image of B⁻¹.
    pub fn conjugate(&self) -> Torus {
        Torus::new(-self.tau.conj()).expect("−τ̄ lies in the upper half plane")
    }

    /// Real coordinates (s, t) with z = s + t·τ.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let t = z.im / self.tau.im;
        (z.re - t * self.tau.re, t)
    }

    pub fn from_coords(&self, s: f64, t: f64) -> Complex64 {
        Complex64::new(s, 0.0) + self.tau * t
    }

    /// Lattice vector m + nτ.
    pub fn lattice(&self, m: i64, n: i64) -> Complex64 {
        Complex64::new(m as f64, 0.0) + self.tau * n as f64
    }

    /// Splits z = z0 + m + nτ with z0 in the half-open tile [0,1)².
    pub fn reduce_to_tile(&self, z: Complex64) -> (Complex64, i64, i64) {
        let (s, t) = self.coords(z);
        let (mut m, mut n) = (s.floor(), t.floor());
        let (mut s0, mut t0) = (s - m, t - n);
        // Rounding can land exactly on 1; fold it back into the tile.
        if s0 >= 1.0 {
            s0 -= 1.0;
            m += 1.0;
        }
        if t0 >= 1.0 {
            t0 -= 1.0;
            n += 1.0;
        }
        (self.from_coords(s0, t0), m as i64, n as i64)
    }

    /// Splits z = z0 + m + nτ with z0 in the centred tile [−½,½)².
    pub fn reduce_centered(&self, z: Complex64) -> (Complex64, i64, i64) {
        let (s, t) = self.coords(z);
        let n = t.round();
        let m = s.round();
        (self.from_coords(s - m, t - n), m as i64, n as i64)
    }

    /// Distance from z to the nearest lattice point.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        let (z0, _, _) = self.reduce_centered(z);
        let mut best = f64::INFINITY;
        for m in -1..=1 {
            for n in -1..=1 {
                best = best.min((z0 - self.lattice(m, n)).norm());
            }
        }
        best
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        let mut best = f64::INFINITY;
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                if (m, n) != (0, 0) {
                    best = best.min(self.lattice(m, n).norm());
                }
            }
        }
        best
    }
}

/// A finite formal sum of points on a torus.
///
/// Points are stored as chosen lifts to ℂ; [`Divisor::reduced`] moves them
/// into the fundamental tile. Distinct entries never coincide modulo the
/// lattice and no entry has multiplicity zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Divisor {
    points: Vec<(Complex64, i64)>,
}

impl Divisor {
    pub fn empty() -> Self {
        Divisor { points: Vec::new() }
    }

    /// Builds a divisor from lifted points, merging nothing: points that
    /// coincide modulo the lattice are a collision.
    pub fn new(points: Vec<(Complex64, i64)>, t: &Torus) -> Result<Self> {
        let points: Vec<_> = points.into_iter().filter(|p| p.1 != 0).collect();
        for (i, (z, _)) in points.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Domain(format!("non-finite divisor point {z}")));
            }
            for (w, _) in &points[..i] {
                if t.lattice_distance(z - w) < MIN_SEPARATION {
                    return Err(Error::Collision(format!(
                        "points {z} and {w} coincide modulo the lattice"
                    )));
                }
            }
        }
        Ok(Divisor { points })
    }

    pub fn points(&self) -> &[(Complex64, i64)] {
        &self.points
    }

    pub fn degree(&self) -> i64 {
        self.points.iter().map(|p| p.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Σ nᵢ·zᵢ over the stored lifts, not reduced.
    pub fn lifted_sum(&self) -> Complex64 {
        self.points
            .iter()
            .map(|(z, n)| z * *n as f64)
            .sum()
    }

    /// The same divisor with every point moved into the fundamental tile.
    pub fn reduced(&self, t: &Torus) -> Divisor {
        Divisor {
            points: self
                .points
                .iter()
                .map(|(z, n)| (t.reduce_to_tile(*z).0, *n))
                .collect(),
        }
    }

    pub fn negated(&self) -> Divisor {
        Divisor {
            points: self.points.iter().map(|(z, n)| (*z, -n)).collect(),
        }
    }

    /// Image under z ↦ z̄, the divisor seen on the conjugate surface.
    pub fn conjugated(&self) -> Divisor {
        Divisor {
            points: self.points.iter().map(|(z, n)| (z.conj(), *n)).collect(),
        }
    }

    /// Translates every point by `w`.
    pub fn translated(&self, w: Complex64) -> Divisor {
        Divisor {
            points: self.points.iter().map(|(z, n)| (z + w, *n)).collect(),
        }
    }

    /// Smallest distance modulo the lattice between a point of `self` and one of `other`.
    pub fn separation(&self, other: &Divisor, t: &Torus) -> f64 {
        let mut best = f64::INFINITY;
        for (z, _) in &self.points {
            for (w, _) in &other.points {
                best = best.min(t.lattice_distance(z - w));
            }
        }
        best
    }

    /// Error unless the supports are at least [`MIN_SEPARATION`] apart.
    pub fn check_disjoint(&self, other: &Divisor, t: &Torus) -> Result<()> {
        if self.separation(other, t) < MIN_SEPARATION {
            return Err(Error::Collision("divisors share support".into()));
        }
        Ok(())
    }
}

/// Σ nᵢ·zᵢ reduced into the fundamental tile.
pub fn abel_jacobi(d: &Divisor, t: &Torus) -> Complex64 {
    t.reduce_to_tile(d.lifted_sum()).0
}
