//! Characters of π₁ of a torus, their branch lifts and harmonic representatives.
//!
//! A character is the pair of multipliers on the A-cycle (z ↦ z+1) and the
//! B-cycle (z ↦ z+τ). Logarithms α, β of the multipliers are fixed by
//! explicit branch integers because the naive logarithm depends on the lift.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic_kernel::Torus;
use crate::error::{Error, Result};

const TWO_PI_I: Complex64 = Complex64 { re: 0.0, im: 2.0 * PI };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Character {
    pub mult_a: Complex64,
    pub mult_b: Complex64,
    pub branch_a: i64,
    pub branch_b: i64,
}

fn check_mult(m: Complex64) -> Result<()> {
    if !(m.re.is_finite() && m.im.is_finite()) || m.norm() == 0.0 {
        return Err(Error::Domain(format!("multiplier must be finite and nonzero, got {m}")));
    }
    Ok(())
}

impl Character {
    pub fn new(mult_a: Complex64, mult_b: Complex64, branch_a: i64, branch_b: i64) -> Result<Self> {
        check_mult(mult_a)?;
        check_mult(mult_b)?;
        Ok(Character {
            mult_a,
            mult_b,
            branch_a,
            branch_b,
        })
    }

    /// Character with principal branches.
    pub fn from_multipliers(mult_a: Complex64, mult_b: Complex64) -> Result<Self> {
        Character::new(mult_a, mult_b, 0, 0)
    }

    pub fn trivial() -> Self {
        Character {
            mult_a: Complex64::new(1.0, 0.0),
            mult_b: Complex64::new(1.0, 0.0),
            branch_a: 0,
            branch_b: 0,
        }
    }

    /// The character exp(α), exp(β) with branches chosen so that its lifts
    /// reproduce α and β.
    pub fn from_lifts(alpha: Complex64, beta: Complex64) -> Self {
        let (mult_a, branch_a) = split_lift(alpha);
        let (mult_b, branch_b) = split_lift(beta);
        Character {
            mult_a,
            mult_b,
            branch_a,
            branch_b,
        }
    }

    /// α = Log(mult_a) + 2πi·branch_a.
    pub fn alpha(&self) -> Complex64 {
        self.mult_a.ln() + TWO_PI_I * self.branch_a as f64
    }

    /// β = Log(mult_b) + 2πi·branch_b.
    pub fn beta(&self) -> Complex64 {
        self.mult_b.ln() + TWO_PI_I * self.branch_b as f64
    }

    pub fn lifts(&self) -> (Complex64, Complex64) {
        (self.alpha(), self.beta())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.mult_a.norm() - 1.0).abs() <= tol && (self.mult_b.norm() - 1.0).abs() <= tol
    }

    /// Both multipliers real (of either sign).
    pub fn is_real(&self, tol: f64) -> bool {
        self.mult_a.im.abs() <= tol * self.mult_a.norm() && self.mult_b.im.abs() <= tol * self.mult_b.norm()
    }

    /// Distance to the trivial character in multiplier space.
    pub fn distance_to_trivial(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        (self.mult_a - one).norm().max((self.mult_b - one).norm())
    }

    /// Pointwise product of multipliers; lifts add.
    pub fn product(&self, other: &Character) -> Character {
        Character::from_lifts(self.alpha() + other.alpha(), self.beta() + other.beta())
    }
}

/// exp(w) and the branch k with Log(exp w) + 2πik = w.
fn split_lift(w: Complex64) -> (Complex64, i64) {
    let m = w.exp();
    let k = ((w - m.ln()).im / (2.0 * PI)).round() as i64;
    (m, k)
}

/// The harmonic form ν = a·dz + b·dz̄ on the torus with parameter `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicForm {
    pub a: Complex64,
    pub b: Complex64,
    pub tau: Complex64,
}

impl HarmonicForm {
    pub fn new(a: Complex64, b: Complex64, tau: Complex64) -> Self {
        HarmonicForm { a, b, tau }
    }

    pub fn zero(tau: Complex64) -> Self {
        HarmonicForm::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), tau)
    }

    /// The harmonic form whose A- and B-periods are `pa`, `pb`.
    pub fn with_periods(pa: Complex64, pb: Complex64, tau: Complex64) -> Self {
        let d = tau - tau.conj();
        HarmonicForm::new((pb - pa * tau.conj()) / d, (pa * tau - pb) / d, tau)
    }

    /// (∫_A ν, ∫_B ν) = (a + b, aτ + bτ̄).
    pub fn periods(&self) -> (Complex64, Complex64) {
        (self.a + self.b, self.a * self.tau + self.b * self.tau.conj())
    }

    /// ∫ from 0 to z along any path in ℂ.
    pub fn integral(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b * z.conj()
    }

    pub fn add(&self, o: &HarmonicForm) -> HarmonicForm {
        HarmonicForm::new(self.a + o.a, self.b + o.b, self.tau)
    }

    pub fn sub(&self, o: &HarmonicForm) -> HarmonicForm {
        HarmonicForm::new(self.a - o.a, self.b - o.b, self.tau)
    }

    pub fn scale(&self, s: Complex64) -> HarmonicForm {
        HarmonicForm::new(self.a * s, self.b * s, self.tau)
    }

    /// The (1,0) part a·dz.
    pub fn holomorphic_part(&self) -> HarmonicForm {
        HarmonicForm::new(self.a, Complex64::new(0.0, 0.0), self.tau)
    }

    /// The (0,1) part b·dz̄.
    pub fn antiholomorphic_part(&self) -> HarmonicForm {
        HarmonicForm::new(Complex64::new(0.0, 0.0), self.b, self.tau)
    }

    /// −ν̃ transported to the conjugate surface (parameter −τ̄, coordinate
    /// w = z̄, basis A and B⁻¹): −(a dz + b dz̄) = −b dw − a dw̄.
    pub fn on_conjugate_surface(&self) -> HarmonicForm {
        HarmonicForm::new(-self.b, -self.a, -self.tau.conj())
    }

    /// The character exp(periods), with branches matching the periods.
    pub fn character(&self) -> Character {
        let (pa, pb) = self.periods();
        Character::from_lifts(pa, pb)
    }
}

/// The harmonic ν̃ with ∫_A ν̃ = α and ∫_B ν̃ = β for the branch-lifted χ.
pub fn harmonic_representative(chi: &Character, t: &Torus) -> HarmonicForm {
    let (alpha, beta) = chi.lifts();
    HarmonicForm::with_periods(alpha, beta, t.tau())
}

/// Same multipliers with branches incremented; ν̃ changes by the form with
/// periods (2πi·da, 2πi·db).
pub fn shift_branch(chi: &Character, da: i64, db: i64) -> Character {
    Character {
        branch_a: chi.branch_a + da,
        branch_b: chi.branch_b + db,
        ..*chi
    }
}

/// Splits χ = |χ|·(χ/|χ|) componentwise; the real part gets branches 0.
pub fn polar_decompose(chi: &Character) -> (Character, Character) {
    let real = Character {
        mult_a: Complex64::new(chi.mult_a.norm(), 0.0),
        mult_b: Complex64::new(chi.mult_b.norm(), 0.0),
        branch_a: 0,
        branch_b: 0,
    };
    let unitary = Character::from_lifts(
        chi.alpha() - chi.mult_a.norm().ln(),
        chi.beta() - chi.mult_b.norm().ln(),
    );
    (real, unitary)
}

/// χ⁻¹: multipliers inverted and lifts negated. On the negative real axis
/// the principal Log does not commute with inversion, so the branch is
/// recomputed from −α rather than negated blindly.
pub fn conjugate_character(chi: &Character) -> Character {
    Character::from_lifts(-chi.alpha(), -chi.beta())
}

/// χ⁻¹ expressed on the conjugate surface's basis (A, B⁻¹): lifts (−α, β).
pub fn conjugate_surface_character(chi: &Character) -> Character {
    Character::from_lifts(-chi.alpha(), chi.beta())
}

/// The point P with L_χ ≅ O((P) − (0)) as holomorphic bundles, before
/// reduction: P = (β − τα)/(2πi) = −b·Im τ/π. Shifting a branch moves P by
/// a lattice vector.
pub fn class_point(chi: &Character, t: &Torus) -> Complex64 {
    let (alpha, beta) = chi.lifts();
    (beta - t.tau() * alpha) / TWO_PI_I
}
