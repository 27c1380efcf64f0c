//! Logarithms on Deligne pairings ⟨L, M⟩ of flat line bundles on a torus.
//!
//! The naive logarithm of a symbol ⟨ℓ, m⟩ is
//!
//! LOG_na = Σⱼ mⱼ·log ℓ̃(Qⱼ) − ∫_{p̃}^{Div m~} ν̃ − (i/2π)∫_X (∇m/m) ∧ ν̃,
//!
//! which depends on the lift ν̃ of the character of L. Adding the same
//! expression for the conjugate pair on X̄ gives the intersection logarithm,
//! which does not.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::{
    class_point, conjugate_surface_character, harmonic_representative, polar_decompose, shift_branch, Character,
    HarmonicForm,
};
use crate::circle_values::{reduce, CircleValue, Modulus};
use crate::elliptic_kernel::{fiber_integral, green_pairing, Divisor, Torus};
use crate::error::{Error, Result};
use crate::flat_bundles::{build_section, conjugate_section, ConnectionKind, EquivariantSection, Recipe};

/// ⟨ℓ, m⟩ ⊗ ⟨ℓ^c, m^c⟩: sections on X and their partners on X̄.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingSymbol {
    pub left: EquivariantSection,
    pub right: EquivariantSection,
    pub conjugate_left: EquivariantSection,
    pub conjugate_right: EquivariantSection,
}

impl PairingSymbol {
    /// Checks that divisors are disjoint on both surfaces.
    pub fn new(
        left: EquivariantSection,
        right: EquivariantSection,
        conjugate_left: EquivariantSection,
        conjugate_right: EquivariantSection,
    ) -> Result<Self> {
        left.divisor().check_disjoint(right.divisor(), &left.torus)?;
        conjugate_left
            .divisor()
            .check_disjoint(conjugate_right.divisor(), &conjugate_left.torus)?;
        Ok(PairingSymbol {
            left,
            right,
            conjugate_left,
            conjugate_right,
        })
    }

    /// Completes ℓ and m to a symbol by producing conjugate sections.
    pub fn from_recipes(
        left: EquivariantSection,
        right: EquivariantSection,
        left_recipe: Recipe,
        right_recipe: Recipe,
    ) -> Result<Self> {
        let cl = conjugate_section(&left, left_recipe)?;
        let cr = conjugate_section(&right, right_recipe)?;
        PairingSymbol::new(left, right, cl, cr)
    }

    /// ⟨m, ℓ⟩ ⊗ ⟨m^c, ℓ^c⟩.
    pub fn swapped(&self) -> PairingSymbol {
        PairingSymbol {
            left: self.right.clone(),
            right: self.left.clone(),
            conjugate_left: self.conjugate_right.clone(),
            conjugate_right: self.conjugate_left.clone(),
        }
    }
}

/// The three terms of the naive logarithm before reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveTerms {
    /// Σⱼ mⱼ·log ℓ̃(Qⱼ).
    pub evaluation: Complex64,
    /// ∫_{p̃}^{Div m~} ν̃.
    pub path: Complex64,
    /// (i/2π)∫_X (∇m/m) ∧ ν̃.
    pub fiber: Complex64,
}

impl NaiveTerms {
    pub fn total(&self) -> Complex64 {
        self.evaluation - self.path - self.fiber
    }
}

/// (i/2π)∫_X (m̃'/m̃)dz ∧ g dz̄ for constant g, by quadrature.
fn dlog_fiber(m: &EquivariantSection, g: Complex64) -> Result<Complex64> {
    if g == Complex64::new(0.0, 0.0) || m.divisor().is_empty() && m.exp_coeff == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let f = |z: Complex64| m.dlog(z);
    let gg = |_: Complex64| g;
    fiber_integral(&f, &gg, &m.torus, m.divisor())
}

/// Unreduced terms of LOG_na(⟨ℓ, m⟩) with base point `base`.
pub fn naive_terms(
    l: &EquivariantSection,
    m: &EquivariantSection,
    nu_tilde: &HarmonicForm,
    base: Complex64,
) -> Result<NaiveTerms> {
    let t = &l.torus;
    l.divisor().check_disjoint(m.divisor(), t)?;
    let mut evaluation = Complex64::new(0.0, 0.0);
    let mut path = Complex64::new(0.0, 0.0);
    for &(q, k) in m.divisor().points() {
        evaluation += l.log_eval(q)? * k as f64;
        path += (nu_tilde.integral(q) - nu_tilde.integral(base)) * k as f64;
    }
    // ∇m/m ∧ ν̃ only sees the dz̄ part of ν̃; a Chern lift makes it vanish.
    let fiber = match m.kind {
        ConnectionKind::Chern => Complex64::new(0.0, 0.0),
        ConnectionKind::Flat => dlog_fiber(m, nu_tilde.b)?,
    };
    Ok(NaiveTerms {
        evaluation,
        path,
        fiber,
    })
}

/// LOG_na(⟨ℓ, m⟩) modulo 2πi, base point 0.
pub fn naive_log(
    l: &EquivariantSection,
    m: &EquivariantSection,
    nu_tilde: &HarmonicForm,
) -> Result<CircleValue> {
    reduce(naive_terms(l, m, nu_tilde, Complex64::new(0.0, 0.0))?.total(), Modulus::TwoPiI)
}

fn check_character(section: &EquivariantSection, chi: &Character) -> Result<()> {
    let ok = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-9 * y.norm();
    if !ok(section.character.mult_a, chi.mult_a) || !ok(section.character.mult_b, chi.mult_b) {
        return Err(Error::Usage("character does not match the section's multipliers".into()));
    }
    Ok(())
}

/// LOG_na on X with ν̃ from `chi_l` plus LOG_na on X̄ with −ν̃, unreduced.
pub fn intersection_log_unreduced(sym: &PairingSymbol, chi_l: &Character) -> Result<Complex64> {
    check_character(&sym.left, chi_l)?;
    let t = &sym.left.torus;
    let nu = harmonic_representative(chi_l, t);
    let nu_c = nu.on_conjugate_surface();
    debug_assert!({
        let via = harmonic_representative(&conjugate_surface_character(chi_l), &t.conjugate());
        (via.a - nu_c.a).norm() + (via.b - nu_c.b).norm() < 1e-9 * (1.0 + nu.a.norm() + nu.b.norm())
    });
    let zero = Complex64::new(0.0, 0.0);
    let x = naive_terms(&sym.left, &sym.right, &nu, zero)?;
    let xc = naive_terms(&sym.conjugate_left, &sym.conjugate_right, &nu_c, zero)?;
    Ok(x.total() + xc.total())
}

/// LOG_int = LOG_na + LOG_na^c modulo 2πi.
pub fn intersection_log(sym: &PairingSymbol, chi_l: &Character) -> Result<CircleValue> {
    reduce(intersection_log_unreduced(sym, chi_l)?, Modulus::TwoPiI)
}

/// Which case formula applies to a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairRecipe {
    /// Both bundles unitary.
    Unitary,
    /// Both bundles with real holonomy.
    Real,
    /// L with real holonomy, M unitary.
    Mixed,
}

const RECIPE_TOLERANCE: f64 = 1e-10;

/// The case formula for LOG_int, with no quadrature:
/// unitary: Σ nᵢmⱼ g(pᵢ, qⱼ);
/// mixed: 2i·arg ℓ̃(Div m~);
/// real: Σ nᵢmⱼ g(pᵢ, qⱼ) + (2/π)·Im ∫_X ϑ′ ∧ ν̄′ with ∫dz∧dz̄ = −2i·Im τ.
pub fn closed_form_log(sym: &PairingSymbol, recipe: PairRecipe) -> Result<CircleValue> {
    let (l, m) = (&sym.left, &sym.right);
    let t = &l.torus;
    let (cl, cm) = (&l.character, &m.character);
    let mismatch = || Error::Usage(format!("characters do not fit the {recipe:?} formula"));
    let value = match recipe {
        PairRecipe::Unitary => {
            if !(cl.is_unitary(RECIPE_TOLERANCE) && cm.is_unitary(RECIPE_TOLERANCE)) {
                return Err(mismatch());
            }
            Complex64::new(green_pairing(l.divisor(), m.divisor(), t)?, 0.0)
        }
        PairRecipe::Mixed => {
            if !(cl.is_real(RECIPE_TOLERANCE) && cm.is_unitary(RECIPE_TOLERANCE)) {
                return Err(mismatch());
            }
            let mut arg = 0.0;
            for &(q, k) in m.divisor().points() {
                arg += l.log_eval(q)?.im * k as f64;
            }
            Complex64::new(0.0, 2.0 * arg)
        }
        PairRecipe::Real => {
            if !(cl.is_real(RECIPE_TOLERANCE) && cm.is_real(RECIPE_TOLERANCE)) {
                return Err(mismatch());
            }
            // Signs of negative multipliers form a unitary character of
            // order two; only the positive parts |χ| enter the wedge term.
            let nu1 = harmonic_representative(&polar_decompose(cl).0, t).a;
            let th1 = harmonic_representative(&polar_decompose(cm).0, t).a;
            let wedge = th1 * nu1.conj() * Complex64::new(0.0, -2.0 * t.im_tau());
            Complex64::new(green_pairing(l.divisor(), m.divisor(), t)? + 2.0 / PI * wedge.im, 0.0)
        }
    };
    reduce(value, Modulus::TwoPiI)
}

/// log N_{Div f}(g) − log N_{Div g}(f) for elliptic f, g; Weil reciprocity
/// makes it 0 modulo 2πi.
pub fn weil_defect(f: &EquivariantSection, g: &EquivariantSection) -> Result<CircleValue> {
    for s in [f, g] {
        if s.character.distance_to_trivial() > 1e-9 {
            return Err(Error::Usage("weil_defect needs elliptic functions".into()));
        }
    }
    f.divisor().check_disjoint(g.divisor(), &f.torus)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(p, n) in f.divisor().points() {
        acc += g.log_eval(p)? * n as f64;
    }
    for &(q, k) in g.divisor().points() {
        acc -= f.log_eval(q)? * k as f64;
    }
    reduce(acc, Modulus::TwoPiI)
}

/// ∫_{p̃}^{Div m~} θ + (i/2π)∫_X (∇m/m) ∧ θ − (i/2π)∫_X ϑ ∧ θ for θ with
/// periods (2πi·da, 2πi·db); 0 modulo 2πi.
pub fn refined_pl_defect(
    m: &EquivariantSection,
    theta_shift: (i64, i64),
    vartheta: &HarmonicForm,
) -> Result<CircleValue> {
    let t = &m.torus;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let theta = HarmonicForm::with_periods(two_pi_i * theta_shift.0 as f64, two_pi_i * theta_shift.1 as f64, t.tau());
    let mut path = Complex64::new(0.0, 0.0);
    for &(q, k) in m.divisor().points() {
        path += theta.integral(q) * k as f64;
    }
    let fiber = dlog_fiber(m, theta.b)?;
    // ϑ∧θ = (ϑ_a θ_b − ϑ_b θ_a) dz∧dz̄ and ∫_X dz∧dz̄ = −2i·Im τ.
    let wedge = (vartheta.a * theta.b - vartheta.b * theta.a) * Complex64::new(0.0, -2.0 * t.im_tau());
    let i_over_2pi = Complex64::new(0.0, 0.5 / PI);
    reduce(path + fiber - i_over_2pi * wedge, Modulus::TwoPiI)
}

/// LOG_int(⟨ℓ, m⟩) − LOG_int(⟨m, ℓ⟩); 0 modulo 2πi.
pub fn symmetry_defect(sym: &PairingSymbol) -> Result<CircleValue> {
    let forward = intersection_log(sym, &sym.left.character)?;
    let backward = intersection_log(&sym.swapped(), &sym.right.character)?;
    forward.sub(&backward)
}

/// LOG_int at the branches of `chi` minus LOG_int after shifting them.
pub fn branch_shift_defect(sym: &PairingSymbol, chi: &Character, shift: (i64, i64)) -> Result<CircleValue> {
    let a = intersection_log(sym, chi)?;
    let b = intersection_log(sym, &shift_branch(chi, shift.0, shift.1))?;
    a.sub(&b)
}

/// One-sided version of [`branch_shift_defect`]; not 0 in general.
pub fn one_sided_branch_shift(
    l: &EquivariantSection,
    m: &EquivariantSection,
    chi: &Character,
    shift: (i64, i64),
) -> Result<CircleValue> {
    let t = &l.torus;
    let a = naive_log(l, m, &harmonic_representative(chi, t))?;
    let b = naive_log(l, m, &harmonic_representative(&shift_branch(chi, shift.0, shift.1), t))?;
    a.sub(&b)
}

/// A symbol that depends holomorphically on the lifts (α, β) of χ_L while
/// M stays fixed: ℓ has divisor (P_χ + r) − (r) with P_χ unreduced, and
/// ℓ^c has divisor (P^c_χ + r̄) − (r̄) on X̄. Here P_χ = (β − τα)/2πi and
/// P^c_χ = (β − τ̄α)/2πi are both holomorphic in (α, β).
#[derive(Debug, Clone)]
pub struct HolomorphicFamily {
    pub torus: Torus,
    pub anchor: Complex64,
    pub right: EquivariantSection,
    pub conjugate_right: EquivariantSection,
}

impl HolomorphicFamily {
    pub fn new(torus: Torus, anchor: Complex64, right: EquivariantSection, right_recipe: Recipe) -> Result<Self> {
        let conjugate_right = conjugate_section(&right, right_recipe)?;
        Ok(HolomorphicFamily {
            torus,
            anchor,
            right,
            conjugate_right,
        })
    }

    pub fn symbol(&self, chi: &Character) -> Result<PairingSymbol> {
        let t = &self.torus;
        let tc = t.conjugate();
        let r = self.anchor;
        let p = class_point(chi, t);
        let d = Divisor::new(vec![(p + r, 1), (r, -1)], t)?;
        let chi_c = conjugate_surface_character(chi);
        let pc = class_point(&chi_c, &tc);
        let dc = Divisor::new(vec![(pc + r.conj(), 1), (r.conj(), -1)], &tc)?;
        PairingSymbol::new(
            build_section(chi, &d, t)?,
            self.right.clone(),
            build_section(&chi_c, &dc, &tc)?,
            self.conjugate_right.clone(),
        )
    }

    /// Unreduced LOG_int along the family.
    pub fn log_int(&self, chi: &Character) -> Result<Complex64> {
        intersection_log_unreduced(&self.symbol(chi)?, chi)
    }
}
