//! Seeded random instances for the check suites. Every generator retries
//! until its divisors are well separated, so a given RNG state always
//! yields the same instance.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith_degree::{Generator, IdealData, NumberRingSpec, Prime, SharpLine};
use crate::characters::{class_point, harmonic_representative, Character, HarmonicForm};
use crate::circle_values::{CircleValue, Modulus};
use crate::deligne_pairing::PairingSymbol;
use crate::elliptic_kernel::{Divisor, Torus};
use crate::error::Result;
use crate::flat_bundles::{build_section, EquivariantSection, Recipe};

/// Smallest distance between distinct points of generated divisors.
const SEPARATION: f64 = 0.05;
const ATTEMPTS: usize = 1000;

/// The RNG of instance `index` under `seed`: one ChaCha8 stream per index.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// τ with |Re τ| ≤ ½ and Im τ ∈ [0.8, 1.6].
pub fn random_torus(rng: &mut ChaCha8Rng) -> Torus {
    let tau = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.8..1.6));
    Torus::new(tau).expect("upper half plane")
}

/// Which part of (ℂ×)² to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharacterKind {
    Real,
    Unitary,
    General,
}

/// A character at distance ≥ 0.1 from the trivial one whose class point
/// stays clear of the lattice, so its sections have separable divisors.
/// Real characters have positive multipliers.
pub fn random_character(rng: &mut ChaCha8Rng, kind: CharacterKind, t: &Torus) -> Character {
    loop {
        let (ra, rb) = (rng.gen_range(-0.8..0.8f64), rng.gen_range(-0.8..0.8f64));
        let (pa, pb) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let (alpha, beta) = match kind {
            CharacterKind::Real => (Complex64::new(ra, 0.0), Complex64::new(rb, 0.0)),
            CharacterKind::Unitary => (Complex64::new(0.0, pa), Complex64::new(0.0, pb)),
            CharacterKind::General => (Complex64::new(ra, pa), Complex64::new(rb, pb)),
        };
        let chi = Character::from_lifts(alpha, beta);
        if chi.distance_to_trivial() > 0.1 && t.lattice_distance(class_point(&chi, t)) > 2.0 * SEPARATION {
            return chi;
        }
    }
}

fn separated(points: &[Complex64], t: &Torus) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, p)| points[..i].iter().all(|q| t.lattice_distance(p - q) > SEPARATION))
}

fn random_point(rng: &mut ChaCha8Rng, t: &Torus) -> Complex64 {
    t.from_coords(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))
}

/// A section of L_χ with divisor (P_χ + r) − (r), avoiding `avoid`.
pub fn random_section(
    rng: &mut ChaCha8Rng,
    chi: &Character,
    t: &Torus,
    avoid: &[Complex64],
) -> Result<EquivariantSection> {
    let p = t.reduce_to_tile(class_point(chi, t)).0;
    let mut last = None;
    for _ in 0..ATTEMPTS {
        let r = random_point(rng, t);
        let mut pts = vec![p + r, r];
        pts.extend_from_slice(avoid);
        if !separated(&pts, t) {
            continue;
        }
        let d = Divisor::new(vec![(p + r, 1), (r, -1)], t)?;
        match build_section(chi, &d, t) {
            Ok(s) => return Ok(s),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| crate::error::Error::Collision("no separated divisor found".into())))
}

/// An elliptic function with `k` simple zeros and `k` simple poles.
pub fn random_elliptic(
    rng: &mut ChaCha8Rng,
    t: &Torus,
    k: usize,
    avoid: &[Complex64],
) -> Result<EquivariantSection> {
    for _ in 0..ATTEMPTS {
        let zeros: Vec<Complex64> = (0..k).map(|_| random_point(rng, t)).collect();
        let mut poles: Vec<Complex64> = (0..k - 1).map(|_| random_point(rng, t)).collect();
        let last = zeros.iter().sum::<Complex64>() - poles.iter().sum::<Complex64>();
        poles.push(last);
        let mut pts: Vec<Complex64> = zeros.iter().chain(&poles).copied().collect();
        pts.extend_from_slice(avoid);
        if !separated(&pts, t) {
            continue;
        }
        let d = Divisor::new(
            zeros.iter().map(|&z| (z, 1)).chain(poles.iter().map(|&p| (p, -1))).collect(),
            t,
        )?;
        return build_section(&Character::trivial(), &d, t);
    }
    Err(crate::error::Error::Collision("no separated elliptic divisor found".into()))
}

fn support(s: &EquivariantSection) -> Vec<Complex64> {
    s.divisor().points().iter().map(|&(p, _)| p).collect()
}

/// Two elliptic functions with disjoint divisors.
pub fn weil_instance(rng: &mut ChaCha8Rng) -> Result<(EquivariantSection, EquivariantSection)> {
    let t = random_torus(rng);
    let kf = rng.gen_range(2..=3);
    let kg = rng.gen_range(2..=3);
    let f = random_elliptic(rng, &t, kf, &[])?;
    let g = random_elliptic(rng, &t, kg, &support(&f))?;
    Ok((f, g))
}

/// A section m, a shift (da, db) ∈ [−2, 2]² and ϑ̃ = harmonic lift of χ_M.
pub fn refined_pl_instance(
    rng: &mut ChaCha8Rng,
    chi: &Character,
    t: &Torus,
) -> Result<(EquivariantSection, (i64, i64), HarmonicForm)> {
    let m = random_section(rng, chi, t, &[])?;
    let shift = (rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2));
    Ok((m, shift, harmonic_representative(chi, t)))
}

/// ⟨ℓ, m⟩ with ℓ of character `chi_l` and m of a random character of the
/// given kind, completed by the given recipes.
pub fn pair_instance(
    rng: &mut ChaCha8Rng,
    chi_l: &Character,
    t: &Torus,
    right_kind: CharacterKind,
    recipes: (Recipe, Recipe),
) -> Result<PairingSymbol> {
    let chi_m = random_character(rng, right_kind, t);
    let l = random_section(rng, chi_l, t, &[])?;
    let m = random_section(rng, &chi_m, t, &support(&l))?;
    PairingSymbol::from_recipes(l, m, recipes.0, recipes.1)
}

/// A branch shift in [−2, 2]² other than (0, 0).
pub fn random_shift(rng: &mut ChaCha8Rng) -> (i64, i64) {
    loop {
        let s = (rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2));
        if s != (0, 0) {
            return s;
        }
    }
}

/// ±Π pᵉ over ℚ for p ∈ {2, 3, 5, 7}, e ∈ [−2, 2], with its orders.
pub fn random_rational_generator(rng: &mut ChaCha8Rng) -> Generator {
    let mut g = Generator::one();
    for p in [2u64, 3, 5, 7] {
        let e = rng.gen_range(-2i64..=2);
        g.value.a *= (p as f64).powi(e as i32);
        g.ords.0.push((Prime { p, f: 1, index: 0 }, e));
    }
    if rng.gen_bool(0.5) {
        g.value.a = -g.value.a;
    }
    g
}

/// A line over ℤ with random ideals and logarithm.
pub fn random_rational_line(rng: &mut ChaCha8Rng) -> SharpLine {
    let mut ideal = || IdealData([2u64, 3, 5, 7].iter().map(|&p| (Prime { p, f: 1, index: 0 }, rng.gen_range(-2i64..=2))).collect());
    let (l, lc) = (ideal(), ideal());
    let log = CircleValue::new(
        Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-3.0..3.0)),
        Modulus::TwoPiI,
    );
    SharpLine::new(NumberRingSpec::Rationals, l, lc, vec![log]).expect("one embedding")
}
