//! Flat line bundles L_χ on a torus through their equivariant sections.
//!
//! A rational section of L_χ lifts to a meromorphic function ℓ̃ on ℂ with
//! ℓ̃(z+1) = χ(A)·ℓ̃(z) and ℓ̃(z+τ) = χ(B)·ℓ̃(z). At genus one every such
//! function is N·e^{cz}·Π σ(z−qᵢ)^{nᵢ}, so a section is four numbers and a
//! divisor.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::{
    class_point, conjugate_character, conjugate_surface_character, harmonic_representative,
    polar_decompose, Character,
};
use crate::elliptic_kernel::{log_sigma, sigma, zeta, Divisor, Torus, MIN_SEPARATION};
use crate::error::{Error, Result};

const TWO_PI_I: Complex64 = Complex64 { re: 0.0, im: 2.0 * PI };

/// Largest distance of Σnᵢqᵢ from the class of L_χ still accepted as equal.
const CLASS_TOLERANCE: f64 = 1e-8;

/// Tolerance for recipe membership tests on multipliers.
const RECIPE_TOLERANCE: f64 = 1e-10;

/// Which connection the lift ℓ̃ is flat for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionKind {
    Flat,
    Chern,
}

/// ℓ̃(z) = normalization · e^{exp_coeff·z} · Π σ(z−qᵢ)^{nᵢ}.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivariantSection {
    pub torus: Torus,
    pub exp_coeff: Complex64,
    pub factors: Divisor,
    pub character: Character,
    pub normalization: Complex64,
    pub kind: ConnectionKind,
}

/// σ(z+ω) = ε(ω)·e^{η(ω)(z+ω/2)}·σ(z) with ω = m + nτ, ε = (−1)^{m+n+mn}
/// and η(ω) = m·η1 + n·η2.
fn sigma_shift(t: &Torus, m: i64, n: i64) -> (f64, Complex64) {
    let eps = if (m + n + m * n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (eps, t.eta1() * m as f64 + t.eta2() * n as f64)
}

/// Nearest lattice vector to z, as integer coordinates, and the distance.
fn nearest_lattice(t: &Torus, z: Complex64) -> (i64, i64, f64) {
    let (s, u) = t.coords(z);
    let (m, n) = (s.round() as i64, u.round() as i64);
    (m, n, (z - t.lattice(m, n)).norm())
}

impl EquivariantSection {
    pub fn divisor(&self) -> &Divisor {
        &self.factors
    }

    /// Σ nᵢqᵢ over the stored lifts.
    pub fn lifted_sum(&self) -> Complex64 {
        self.factors.lifted_sum()
    }

    /// A logarithm of ℓ̃(z), correct modulo 2πiℤ.
    pub fn log_eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_off_divisor(z)?;
        let mut acc = self.normalization.ln() + self.exp_coeff * z;
        for (q, n) in self.factors.points() {
            acc += log_sigma(&self.torus, z - q) * *n as f64;
        }
        Ok(acc)
    }

    /// ℓ̃(z); zero on zeros, an error on poles.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = self.normalization * (self.exp_coeff * z).exp();
        for (q, n) in self.factors.points() {
            let s = sigma(&self.torus, z - q);
            if *n < 0 && self.torus.lattice_distance(z - q) < MIN_SEPARATION {
                return Err(Error::Pole {
                    point: z,
                    context: "section evaluated at a pole".into(),
                });
            }
            acc *= s.powi(*n as i32);
        }
        Ok(acc)
    }

    /// ℓ̃'/ℓ̃ = c + Σ nᵢ·ζ(z−qᵢ), an elliptic function.
    pub fn dlog(&self, z: Complex64) -> Complex64 {
        let mut acc = self.exp_coeff;
        for (q, n) in self.factors.points() {
            acc += zeta(&self.torus, z - q) * *n as f64;
        }
        acc
    }

    fn check_off_divisor(&self, z: Complex64) -> Result<()> {
        for (q, _) in self.factors.points() {
            if self.torus.lattice_distance(z - q) < MIN_SEPARATION {
                return Err(Error::Pole {
                    point: z,
                    context: "logarithm of a section on its divisor".into(),
                });
            }
        }
        Ok(())
    }

    /// Largest relative error of the multiplier law over the given points.
    pub fn multiplier_error(&self, points: &[Complex64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &z in points {
            let v = self.eval(z)?;
            let va = self.eval(z + 1.0)?;
            let vb = self.eval(z + self.torus.tau())?;
            let ea = (va - self.character.mult_a * v).norm() / va.norm().max(f64::MIN_POSITIVE);
            let eb = (vb - self.character.mult_b * v).norm() / vb.norm().max(f64::MIN_POSITIVE);
            worst = worst.max(ea).max(eb);
        }
        Ok(worst)
    }

    /// w ↦ conj(ℓ̃(w̄)) on the conjugate surface: a section whose character
    /// has lifts (ᾱ, −β̄) on the basis (A, B⁻¹).
    pub fn conjugate(&self) -> EquivariantSection {
        let (alpha, beta) = self.character.lifts();
        EquivariantSection {
            torus: self.torus.conjugate(),
            exp_coeff: self.exp_coeff.conj(),
            factors: self.factors.conjugated(),
            character: Character::from_lifts(alpha.conj(), -beta.conj()),
            normalization: self.normalization.conj(),
            kind: self.kind,
        }
    }

    /// 1/ℓ̃, a section of the dual bundle.
    pub fn dual(&self) -> EquivariantSection {
        let (alpha, beta) = self.character.lifts();
        EquivariantSection {
            torus: self.torus,
            exp_coeff: -self.exp_coeff,
            factors: self.factors.negated(),
            character: Character::from_lifts(-alpha, -beta),
            normalization: 1.0 / self.normalization,
            kind: self.kind,
        }
    }

    /// ℓ̃₁·ℓ̃₂. Points that agree modulo the lattice are merged onto the
    /// first lift through the σ translation law.
    pub fn product(&self, other: &EquivariantSection) -> Result<EquivariantSection> {
        if (self.torus.tau() - other.torus.tau()).norm() > 1e-14 {
            return Err(Error::Usage("product of sections on different tori".into()));
        }
        let t = &self.torus;
        let mut c = self.exp_coeff + other.exp_coeff;
        let mut log_n = self.normalization.ln() + other.normalization.ln();
        let mut pts: Vec<(Complex64, i64)> = self.factors.points().to_vec();
        for &(q, n) in other.factors.points() {
            let hit = pts.iter().position(|(p, _)| t.lattice_distance(q - p) < MIN_SEPARATION);
            match hit {
                None => pts.push((q, n)),
                Some(k) => {
                    let p = pts[k].0;
                    let (m1, n1, err) = nearest_lattice(t, q - p);
                    if err > 1e-12 {
                        return Err(Error::Collision(format!("factors at {p} and {q} nearly coincide")));
                    }
                    // σ(z−p−ω) = ε·e^{−η(ω)(z−p−ω/2)}·σ(z−p) with ω = q − p.
                    let w = t.lattice(m1, n1);
                    let (eps, eta_w) = sigma_shift(t, m1, n1);
                    c -= eta_w * n as f64;
                    log_n += (eta_w * (p + w * 0.5) + if eps < 0.0 { Complex64::new(0.0, PI) } else { 0.0.into() }) * n as f64;
                    pts[k].1 += n;
                }
            }
        }
        Ok(EquivariantSection {
            torus: self.torus,
            exp_coeff: c,
            factors: Divisor::new(pts, t)?,
            character: self.character.product(&other.character),
            normalization: log_n.exp(),
            kind: ConnectionKind::Flat,
        })
    }
}

/// The divisor (P_χ) − (0) with L_χ ≅ O((P_χ) − (0)), P_χ in the fundamental
/// tile; empty when P_χ is a lattice point.
pub fn canonical_divisor_of(chi: &Character, t: &Torus) -> Divisor {
    let p = t.reduce_to_tile(class_point(chi, t)).0;
    if t.lattice_distance(p) < MIN_SEPARATION {
        return Divisor::empty();
    }
    Divisor::new(vec![(p, 1), (Complex64::new(0.0, 0.0), -1)], t).expect("two separated points")
}

/// log of the leading coefficient at z = 0 of e^{cz}·Π σ(z−qᵢ)^{nᵢ}.
fn log_leading_at_origin(d: &Divisor, t: &Torus) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(q, n) in d.points() {
        let (m1, n1, err) = nearest_lattice(t, q);
        if err < MIN_SEPARATION {
            // σ(z−ω) = ε·e^{−η(ω)(z−ω/2)}·σ(z) and σ(z) ~ z.
            let w = t.lattice(m1, n1);
            let (eps, eta_w) = sigma_shift(t, m1, n1);
            let sign = if eps < 0.0 { Complex64::new(0.0, PI) } else { 0.0.into() };
            acc += (eta_w * w * 0.5 + sign) * n as f64;
        } else {
            acc += log_sigma(t, -q) * n as f64;
        }
    }
    acc
}

/// The section of L_χ with divisor `d`, rigidified to value 1 at the base
/// point 0, or leading coefficient 1 there when 0 lies in the support.
pub fn build_section(chi: &Character, d: &Divisor, t: &Torus) -> Result<EquivariantSection> {
    if d.degree() != 0 {
        return Err(Error::Domain(format!("divisor has degree {}, expected 0", d.degree())));
    }
    let s = d.lifted_sum();
    // Multipliers of e^{cz}Πσ^{nᵢ} are e^{c−η1 S} and e^{cτ−η2 S}; matching
    // both with (α, β) forces S + k1·τ − k2 = (β − τα)/2πi.
    let diff = class_point(chi, t) - s;
    let (sa, sb) = t.coords(diff);
    let (k2, k1) = (-sa.round() as i64, sb.round() as i64);
    let residual = diff - t.lattice(-k2, k1);
    if residual.norm() > CLASS_TOLERANCE {
        return Err(Error::NoSection { residual });
    }
    let c = chi.alpha() + t.eta1() * s + TWO_PI_I * k1 as f64;
    Ok(EquivariantSection {
        torus: *t,
        exp_coeff: c,
        factors: d.clone(),
        character: *chi,
        normalization: (-log_leading_at_origin(d, t)).exp(),
        kind: ConnectionKind::Flat,
    })
}

/// ℓ̃_ch = ℓ̃·exp(−(a + b̄)z): the lift flat for the Chern connection of the
/// same holomorphic bundle. Its character is unitary with the same (0,1)
/// part b, and ℓ̃ = ℓ̃_ch·exp(2a_r z) with a_r the (1,0) coefficient of the
/// real-holonomy part of ν.
pub fn chern_lift(section: &EquivariantSection, t: &Torus) -> EquivariantSection {
    let h = harmonic_representative(&section.character, t);
    let shift = h.a + h.b.conj();
    let (alpha, beta) = section.character.lifts();
    EquivariantSection {
        exp_coeff: section.exp_coeff - shift,
        character: Character::from_lifts(alpha - shift, beta - shift * t.tau()),
        kind: ConnectionKind::Chern,
        ..section.clone()
    }
}

/// How the conjugate-side bundle of a pair is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    /// Real multipliers: the conjugate dual with the conjugate connection.
    Real,
    /// Unit multipliers: the complex conjugate bundle.
    Unitary,
    /// Product of a real-holonomy and a unitary bundle, each by its recipe.
    Mixed,
    /// Any character: a fresh section of the holomorphic bundle on X̄.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePairBundle {
    pub chi: Character,
    pub recipe: Recipe,
    pub rigidified: bool,
    /// χ⁻¹, the holonomy of the conjugate side.
    pub conjugate_chi: Character,
    pub real_part: Character,
    pub unitary_part: Character,
}

pub fn make_conjugate_pair(chi: &Character, recipe: Recipe) -> Result<ConjugatePairBundle> {
    match recipe {
        Recipe::Real if !chi.is_real(RECIPE_TOLERANCE) => {
            return Err(Error::Usage("real recipe needs real multipliers".into()))
        }
        Recipe::Unitary if !chi.is_unitary(RECIPE_TOLERANCE) => {
            return Err(Error::Usage("unitary recipe needs unit-modulus multipliers".into()))
        }
        _ => {}
    }
    let (real_part, unitary_part) = polar_decompose(chi);
    Ok(ConjugatePairBundle {
        chi: *chi,
        recipe,
        rigidified: true,
        conjugate_chi: conjugate_character(chi),
        real_part,
        unitary_part,
    })
}

/// The section ℓ^c on the conjugate surface paired with ℓ under `recipe`.
/// Its character is χ⁻¹ written on the basis (A, B⁻¹) of X̄.
pub fn conjugate_section(section: &EquivariantSection, recipe: Recipe) -> Result<EquivariantSection> {
    let chi = &section.character;
    match recipe {
        Recipe::Unitary => {
            make_conjugate_pair(chi, recipe)?;
            Ok(section.conjugate())
        }
        Recipe::Real => {
            make_conjugate_pair(chi, recipe)?;
            Ok(section.conjugate().dual())
        }
        Recipe::Mixed => {
            // p = ℓ_r·m_u gives p^c = conj(ℓ_r)⁻¹·conj(m_u) = conj(p)·conj(ℓ_r)⁻².
            let t = &section.torus;
            let (real, _) = polar_decompose(chi);
            let lr = build_section(&real, &canonical_divisor_of(&real, t), t)?;
            let inv = lr.conjugate().dual();
            section.conjugate().product(&inv)?.product(&inv)
        }
        Recipe::General => {
            let tc = section.torus.conjugate();
            let chi_c = conjugate_surface_character(chi);
            build_section(&chi_c, &conjugate_shape(section.divisor(), &chi_c, &tc)?, &tc)
        }
    }
}

/// The mirror image of `d` on X̄ with one simple point moved so the class
/// matches χ^c; keeps the conjugate side in general position whenever the
/// original side is.
fn conjugate_shape(d: &Divisor, chi_c: &Character, tc: &Torus) -> Result<Divisor> {
    let mut pts = d.conjugated().points().to_vec();
    let Some(k) = pts.iter().position(|p| p.1.abs() == 1) else {
        return Ok(canonical_divisor_of(chi_c, tc));
    };
    let target = class_point(chi_c, tc);
    let sum: Complex64 = pts.iter().map(|(z, n)| z * *n as f64).sum();
    let n = pts[k].1 as f64;
    pts[k].0 += (target - sum) * n;
    Divisor::new(pts, tc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::shift_branch;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_points(seed: u64, t: &Torus, k: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k)
            .map(|_| t.from_coords(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn trivial_character_has_empty_canonical_divisor() {
        let t = Torus::new(I).unwrap();
        assert!(canonical_divisor_of(&Character::trivial(), &t).is_empty());
    }

    #[test]
    fn order_two_character_gives_two_torsion_point() {
        let t = Torus::new(I).unwrap();
        // χ(A) = −1, χ(B) = 1 corresponds to the 2-torsion point τ/2.
        let chi = Character::from_multipliers(c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        let d = canonical_divisor_of(&chi, &t);
        assert!((abel_point(&d) - c(0.0, 0.5)).norm() < 1e-14);
        let s = build_section(&chi, &d, &t).unwrap();
        assert!(s.multiplier_error(&random_points(1, &t, 20)).unwrap() < 1e-9);
        let chi2 = Character::from_multipliers(c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!((abel_point(&canonical_divisor_of(&chi2, &t)) - c(0.5, 0.0)).norm() < 1e-14);
    }

    fn abel_point(d: &Divisor) -> Complex64 {
        d.points().iter().find(|p| p.1 == 1).unwrap().0
    }

    #[test]
    fn elliptic_section_is_a_multiple_of_wp_difference() {
        let t = Torus::new(c(0.2, 1.1)).unwrap();
        let w = c(0.3, 0.2);
        let d = Divisor::new(vec![(w, 1), (-w, 1), (c(0.0, 0.0), -2)], &t).unwrap();
        let s = build_section(&Character::trivial(), &d, &t).unwrap();
        // ℘(z) − ℘(w) = −σ(z+w)σ(z−w)/(σ(z)²σ(w)²) has leading coefficient 1 at 0.
        let wp = |z: Complex64| {
            let h = 1e-4;
            -(zeta(&t, z + h) - zeta(&t, z - h)) / (2.0 * h)
        };
        for z in random_points(3, &t, 5) {
            let expected = wp(z) - wp(w);
            let got = s.eval(z).unwrap();
            assert!((got - expected).norm() < 1e-6 * expected.norm(), "{got} vs {expected}");
        }
        assert!(s.multiplier_error(&random_points(4, &t, 20)).unwrap() < 1e-9);
    }

    #[test]
    fn exponential_character_multiplier_law() {
        let t = Torus::new(c(-0.1, 0.95)).unwrap();
        let chi = Character::from_multipliers(c(std::f64::consts::E, 0.0), c(1.0, 0.0)).unwrap();
        let d = canonical_divisor_of(&chi, &t);
        let s = build_section(&chi, &d, &t).unwrap();
        for z in random_points(5, &t, 20) {
            let r = s.eval(z + 1.0).unwrap() / s.eval(z).unwrap();
            assert!((r - c(std::f64::consts::E, 0.0)).norm() < 1e-9 * std::f64::consts::E);
        }
    }

    #[test]
    fn normalized_to_one_at_base_point() {
        let t = Torus::new(c(0.1, 1.3)).unwrap();
        let chi = Character::from_multipliers(c(0.5, 0.7), c(1.2, -0.4)).unwrap();
        let p = t.reduce_to_tile(class_point(&chi, &t)).0;
        let (q1, q2) = (c(0.3, 0.4), c(0.7, 0.9));
        let d = Divisor::new(vec![(q1, 1), (q2, 1), (q1 + q2 - p - 0.5 * t.tau(), -1), (0.5 * t.tau(), -1)], &t);
        let d = d.unwrap();
        let s = build_section(&chi, &d, &t).unwrap();
        assert!((s.eval(c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        assert!(s.multiplier_error(&random_points(6, &t, 20)).unwrap() < 1e-9);
    }

    #[test]
    fn leading_coefficient_at_base_point() {
        let t = Torus::new(c(0.25, 1.05)).unwrap();
        let chi = Character::from_multipliers(c(0.8, 0.3), c(-0.2, 1.1)).unwrap();
        // Put the zero at the origin on a non-trivial lattice lift.
        let p = t.reduce_to_tile(class_point(&chi, &t)).0;
        let d = Divisor::new(vec![(p, 1), (t.lattice(1, -1), -1)], &t).unwrap();
        let s = build_section(&chi, &d, &t).unwrap();
        let h = 1e-5;
        let lead = s.eval(c(h, 0.0)).unwrap() * h;
        assert!((lead - c(1.0, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn class_mismatch_is_no_section() {
        let t = Torus::new(I).unwrap();
        let d = Divisor::new(vec![(c(0.3, 0.3), 1), (c(0.6, 0.1), -1)], &t).unwrap();
        assert!(matches!(
            build_section(&Character::trivial(), &d, &t),
            Err(Error::NoSection { .. })
        ));
        let d1 = Divisor::new(vec![(c(0.3, 0.3), 1)], &t).unwrap();
        assert!(matches!(build_section(&Character::trivial(), &d1, &t), Err(Error::Domain(_))));
    }

    #[test]
    fn relifting_a_point_changes_section_by_a_constant() {
        let t = Torus::new(c(0.15, 1.2)).unwrap();
        let chi = Character::from_multipliers(c(1.1, 0.2), c(0.6, -0.6)).unwrap();
        let d = canonical_divisor_of(&chi, &t);
        let mut pts = d.points().to_vec();
        pts[0].0 += t.lattice(2, -1);
        let d2 = Divisor::new(pts, &t).unwrap();
        let (s1, s2) = (build_section(&chi, &d, &t).unwrap(), build_section(&chi, &d2, &t).unwrap());
        let zs = random_points(8, &t, 6);
        let r0 = s2.eval(zs[0]).unwrap() / s1.eval(zs[0]).unwrap();
        for z in &zs[1..] {
            let r = s2.eval(*z).unwrap() / s1.eval(*z).unwrap();
            assert!((r - r0).norm() < 1e-10 * r0.norm());
        }
    }

    #[test]
    fn unitary_section_unchanged_by_chern_lift() {
        let t = Torus::new(c(0.3, 0.9)).unwrap();
        let chi = Character::from_multipliers(Complex64::from_polar(1.0, 0.8), Complex64::from_polar(1.0, -2.1)).unwrap();
        let s = build_section(&chi, &canonical_divisor_of(&chi, &t), &t).unwrap();
        let ch = chern_lift(&s, &t);
        assert!((ch.exp_coeff - s.exp_coeff).norm() < 1e-12);
    }

    #[test]
    fn chern_lift_of_real_section_has_unit_multipliers_and_is_idempotent() {
        let t = Torus::new(c(-0.2, 1.15)).unwrap();
        let chi = Character::from_multipliers(c(1.7, 0.0), c(0.4, 0.0)).unwrap();
        let s = build_section(&chi, &canonical_divisor_of(&chi, &t), &t).unwrap();
        let ch = chern_lift(&s, &t);
        assert!(ch.character.is_unitary(1e-12));
        assert!(ch.multiplier_error(&random_points(9, &t, 20)).unwrap() < 1e-9);
        let twice = chern_lift(&ch, &t);
        assert!((twice.exp_coeff - ch.exp_coeff).norm() < 1e-12);
        // |ℓ̃_ch| descends to X.
        for z in random_points(10, &t, 5) {
            let (a, b) = (ch.eval(z).unwrap().norm(), ch.eval(z + t.tau()).unwrap().norm());
            assert!((a - b).abs() < 1e-9 * a);
        }
    }

    #[test]
    fn recipes_check_characters() {
        let mixed = Character::from_multipliers(c(0.0, 2.0), c(1.0, 0.0)).unwrap();
        let pair = make_conjugate_pair(&mixed, Recipe::Mixed).unwrap();
        assert!((pair.real_part.mult_a - c(2.0, 0.0)).norm() < 1e-15);
        assert!((pair.unitary_part.mult_a - I).norm() < 1e-15);
        assert!(make_conjugate_pair(&mixed, Recipe::Real).is_err());
        assert!(make_conjugate_pair(&mixed, Recipe::Unitary).is_err());
        let u = Character::from_multipliers(Complex64::from_polar(1.0, 0.4), c(-1.0, 0.0)).unwrap();
        let pu = make_conjugate_pair(&u, Recipe::Unitary).unwrap();
        assert!((pu.conjugate_chi.mult_a - u.mult_a.conj()).norm() < 1e-15);
        let r = Character::from_multipliers(c(3.0, 0.0), c(-0.5, 0.0)).unwrap();
        let pr = make_conjugate_pair(&r, Recipe::Real).unwrap();
        assert!(pr.conjugate_chi.is_real(1e-15));
        assert!((pr.conjugate_chi.mult_a - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn conjugate_section_evaluates_as_conjugate() {
        let t = Torus::new(c(0.2, 1.0)).unwrap();
        let chi = Character::from_multipliers(c(0.7, 0.5), c(1.3, 0.2)).unwrap();
        let s = build_section(&chi, &canonical_divisor_of(&chi, &t), &t).unwrap();
        let sc = s.conjugate();
        for z in random_points(11, &t, 5) {
            assert!((sc.eval(z.conj()).unwrap() - s.eval(z).unwrap().conj()).norm() < 1e-12 * s.eval(z).unwrap().norm());
        }
    }

    #[test]
    fn product_merges_lattice_translates() {
        let t = Torus::new(c(0.35, 0.95)).unwrap();
        let chi = Character::from_multipliers(c(0.6, 0.9), c(1.4, -0.3)).unwrap();
        let d = canonical_divisor_of(&chi, &t);
        let s1 = build_section(&chi, &d, &t).unwrap();
        let d2 = d.translated(t.lattice(1, 2)).negated();
        let s2 = build_section(&conjugate_character(&chi), &d2, &t).unwrap();
        let p = s1.product(&s2).unwrap();
        assert!(p.divisor().is_empty());
        for z in random_points(12, &t, 5) {
            let direct = s1.eval(z).unwrap() * s2.eval(z).unwrap();
            assert!((p.eval(z).unwrap() - direct).norm() < 1e-10 * direct.norm());
        }
    }

    fn arb_character() -> impl Strategy<Value = Character> {
        (-1.0..1.0f64, -PI..PI, -1.0..1.0f64, -PI..PI, -2i64..=2, -2i64..=2).prop_map(|(ra, pa, rb, pb, ka, kb)| {
            Character::new(Complex64::from_polar(ra.exp(), pa), Complex64::from_polar(rb.exp(), pb), ka, kb).unwrap()
        })
    }

    fn arb_tau() -> impl Strategy<Value = Complex64> {
        (-0.5..0.5f64, 0.8..1.5f64).prop_map(|(x, y)| c(x, y))
    }

    fn pick_recipe(chi: &Character, k: u8) -> (Character, Recipe) {
        let (r, u) = polar_decompose(chi);
        match k % 4 {
            0 => (r, Recipe::Real),
            1 => (u, Recipe::Unitary),
            2 => (*chi, Recipe::Mixed),
            _ => (*chi, Recipe::General),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn built_sections_obey_multiplier_law(chi in arb_character(), tau in arb_tau(), seed in 0u64..1000) {
            let t = Torus::new(tau).unwrap();
            let s = build_section(&chi, &canonical_divisor_of(&chi, &t), &t).unwrap();
            prop_assert!(s.multiplier_error(&random_points(seed, &t, 20)).unwrap() < 1e-9);
        }

        #[test]
        fn section_times_inverse_section_is_elliptic(chi in arb_character(), tau in arb_tau(), seed in 0u64..1000) {
            let t = Torus::new(tau).unwrap();
            let d = canonical_divisor_of(&chi, &t);
            let inv = conjugate_character(&chi);
            let s1 = build_section(&chi, &d, &t).unwrap();
            // −d is a divisor of χ⁻¹ once its point is moved by the lattice shift
            // between −P_χ and P_{χ⁻¹}; build_section absorbs that shift.
            let s2 = build_section(&inv, &d.negated(), &t).unwrap();
            for z in random_points(seed, &t, 10) {
                let f = |w: Complex64| s1.eval(w).unwrap() * s2.eval(w).unwrap();
                let (v, va, vb) = (f(z), f(z + 1.0), f(z + t.tau()));
                prop_assert!((va - v).norm() < 1e-9 * v.norm());
                prop_assert!((vb - v).norm() < 1e-9 * v.norm());
            }
        }

        #[test]
        fn chern_correction_is_pluriharmonic(chi in arb_character(), tau in arb_tau(), seed in 0u64..1000) {
            let t = Torus::new(tau).unwrap();
            let s = build_section(&chi, &canonical_divisor_of(&chi, &t), &t).unwrap();
            let ch = chern_lift(&s, &t);
            let (r, _) = polar_decompose(&chi);
            let a_r = harmonic_representative(&r, &t).a;
            for z in random_points(seed, &t, 5) {
                let lhs = (s.eval(z).unwrap() / ch.eval(z).unwrap()).norm().ln();
                prop_assert!((lhs - (2.0 * a_r * z).re).abs() < 1e-9 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn conjugate_sections_carry_inverse_holonomy(chi in arb_character(), tau in arb_tau(), k in 0u8..4, seed in 0u64..1000) {
            let t = Torus::new(tau).unwrap();
            let (chi, recipe) = pick_recipe(&chi, k);
            let s = build_section(&chi, &canonical_divisor_of(&chi, &t), &t).unwrap();
            let sc = conjugate_section(&s, recipe).unwrap();
            let expected = conjugate_surface_character(&chi);
            prop_assert!((sc.character.mult_a - expected.mult_a).norm() < 1e-10 * expected.mult_a.norm());
            prop_assert!((sc.character.mult_b - expected.mult_b).norm() < 1e-10 * expected.mult_b.norm());
            prop_assert!(sc.multiplier_error(&random_points(seed, &sc.torus, 10)).unwrap() < 1e-9);
        }

        #[test]
        fn branch_choice_does_not_change_the_function(chi in arb_character(), tau in arb_tau(), da in -2i64..=2, db in -2i64..=2) {
            let t = Torus::new(tau).unwrap();
            let d = canonical_divisor_of(&chi, &t);
            let s1 = build_section(&chi, &d, &t).unwrap();
            let s2 = build_section(&shift_branch(&chi, da, db), &d, &t).unwrap();
            prop_assert!((s1.exp_coeff - s2.exp_coeff).norm() < 1e-9);
        }
    }
}
