//! Analytic torsion of flat line bundles on a torus, the Quillen logarithm
//! and the defects of Deligne's isomorphism and of its argument identity.
//!
//! Write P = (β − τα)/2πi and P^c = (β − τ̄α)/2πi for the lifts (α, β) of χ.
//! The Laplacian of the flat bundle has eigenvalues
//!
//! λ_{m,n} = π(mτ − n − P)(mτ̄ − n − P^c)/Im τ,
//!
//! and T(χ) = exp(−ζ′(0)). Branch shifts move (P, P^c) by (jτ − k, jτ̄ − k),
//! which only relabels the spectrum. The closed form is the holomorphic
//! extension of the second Kronecker limit formula:
//!
//! T(χ) = κ·θ1(P|τ)·θ1(P^c|−τ̄)·exp(π(P − P^c)²/2Im τ) / (η(τ)·conj η(τ)),
//!
//! which at unitary χ (P^c = P̄) is e^{g(P)} with g the flat Green function.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith_degree::arg_sharp_period;
use crate::characters::{class_point, conjugate_surface_character, Character, HarmonicForm};
use crate::circle_values::{reduce, wrap, CircleValue, Modulus};
use crate::deligne_pairing::{intersection_log, intersection_log_unreduced, PairingSymbol};
use crate::elliptic_kernel::{log_theta1, pairwise_sum, Divisor, Torus};
use crate::error::{Error, Result};
use crate::flat_bundles::{build_section, chern_lift, EquivariantSection};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Computations closer than this to the trivial character are refused.
pub const TRIVIAL_RADIUS: f64 = 1e-3;

/// Eigenvalues smaller than this are reported as near-zero modes.
pub const NEAR_ZERO_MODE: f64 = 1e-6;

/// Successive ζ′(0) estimates must agree to this before truncation stops.
const SPECTRAL_TOL: f64 = 1e-10;
const MAX_TRUNCATION: i64 = 60;

/// Overall constant of the closed form. Calibrated once against the spectral
/// route at τ = i, χ = (−1, 1); the calibration test recomputes it.
pub const THETA_NORMALIZATION: f64 = 1.0;

/// E1(z) = ∫_z^∞ e^{−t}/t dt on the principal branch (cut along ℝ≤0).
pub fn exp_integral_e1(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() == 0.0 {
        return Err(Error::Domain(format!("E1 undefined at {z}")));
    }
    if z.norm() <= 4.0 || (z.re < 0.0 && z.im.abs() < 1.0) {
        return Ok(e1_series(z));
    }
    e1_continued_fraction(z)
}

/// −γ − log z − Σ_{k≥1} (−z)^k/(k·k!).
fn e1_series(z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..400 {
        term *= -z / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// e^{−z}/(z + 1 − 1²/(z + 3 − 2²/(z + 5 − …))) by the modified Lentz method.
fn e1_continued_fraction(z: Complex64) -> Result<Complex64> {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut f = z + 1.0;
    let (mut c, mut d) = (f, Complex64::new(0.0, 0.0));
    for k in 1..20_000 {
        let a = -((k * k) as f64);
        let b = z + (2 * k + 1) as f64;
        d = b + d * a;
        if d.norm() == 0.0 {
            d = tiny;
        }
        d = d.inv();
        c = b + c.inv() * a;
        if c.norm() == 0.0 {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok((-z).exp() / f);
        }
    }
    Err(Error::Quadrature {
        last: (-z).exp() / f,
        previous: Complex64::new(f64::NAN, f64::NAN),
    })
}

/// Which construction produced a torsion value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TorsionRoute {
    SpectralZeta,
    ThetaClosedForm,
}

/// T(χ) together with a logarithm of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionValue {
    pub value: Complex64,
    /// log T = −ζ′(0), defined modulo 2πi.
    pub log_value: Complex64,
    pub route: TorsionRoute,
    /// Smallest |λ_{m,n}| when it is below [`NEAR_ZERO_MODE`].
    pub near_zero_mode: Option<f64>,
    /// Final truncation |m|, |n| ≤ N of the spectral route.
    pub truncation: Option<i64>,
}

fn torsion_value(log_value: Complex64, route: TorsionRoute) -> TorsionValue {
    TorsionValue {
        value: log_value.exp(),
        log_value,
        route,
        near_zero_mode: None,
        truncation: None,
    }
}

/// The shifts (P, P^c), moved jointly by one lattice vector so that P lies
/// in the centred tile.
fn shifts(chi: &Character, t: &Torus) -> (Complex64, Complex64) {
    let (alpha, beta) = chi.lifts();
    let pc = (beta - t.tau().conj() * alpha) / Complex64::new(0.0, 2.0 * PI);
    let (p0, m, n) = t.reduce_centered(class_point(chi, t));
    (p0, pc - m as f64 - t.tau().conj() * n as f64)
}

fn check_nontrivial(chi: &Character) -> Result<()> {
    let d = chi.distance_to_trivial();
    if d < TRIVIAL_RADIUS {
        return Err(Error::TrivialCharacter { distance: d });
    }
    Ok(())
}

struct ZetaPrime {
    value: Complex64,
    truncation: i64,
    min_eigenvalue: f64,
}

/// ζ′(0) for the shifted spectrum, Mellin-split at t = 1. The small-t part
/// uses the Poisson dual of the heat trace,
/// Σ e^{−tλ} = t⁻¹ Σ_{p,q} ph_{p,q}·e^{−c_{p,q}/t}, c = π|p + qτ|²/Im τ,
/// and integrates in closed form: ∫₀¹ t⁻² e^{−c/t} dt = e^{−c}/c.
/// With `zero_mode` the (0,0) eigenvalue 0 is removed, contributing −γ.
fn zeta_prime(p: Complex64, pc: Complex64, t: &Torus, zero_mode: bool) -> Result<ZetaPrime> {
    let tau = t.tau();
    let y = t.im_tau();
    let mut previous: Option<Complex64> = None;
    let mut n_trunc = 4;
    loop {
        let mut large = Vec::new();
        let mut small = Vec::new();
        let mut min_eigenvalue = f64::INFINITY;
        for m in -n_trunc..=n_trunc {
            for n in -n_trunc..=n_trunc {
                let (mf, nf) = (m as f64, n as f64);
                if !(zero_mode && m == 0 && n == 0) {
                    let lambda = (tau * mf - nf - p) * (tau.conj() * mf - nf - pc) * (PI / y);
                    min_eigenvalue = min_eigenvalue.min(lambda.norm());
                    if lambda.norm() == 0.0 {
                        return Err(Error::TrivialCharacter { distance: 0.0 });
                    }
                    large.push(exp_integral_e1(lambda)?);
                }
                if m == 0 && n == 0 {
                    continue;
                }
                // Dual lattice vector p + qτ with (p, q) = (m, n).
                let w = tau * nf + mf;
                let c = PI * w.norm_sqr() / y;
                let phase = (-(w.conj() * p - w * pc) * (PI / y)).exp();
                small.push(phase * ((-c).exp() / c));
            }
        }
        let constant = if zero_mode { -1.0 - EULER_GAMMA } else { -1.0 };
        let value = pairwise_sum(&large) + pairwise_sum(&small) + constant;
        if let Some(prev) = previous {
            if (value - prev).norm() < SPECTRAL_TOL {
                return Ok(ZetaPrime {
                    value,
                    truncation: n_trunc,
                    min_eigenvalue,
                });
            }
        }
        if n_trunc >= MAX_TRUNCATION {
            return Err(Error::Quadrature {
                last: value,
                previous: previous.unwrap_or(value),
            });
        }
        previous = Some(value);
        n_trunc += 2;
    }
}

/// T(χ) = exp(−ζ′(0)) of the flat-bundle Laplacian.
pub fn torsion_spectral(chi: &Character, t: &Torus) -> Result<TorsionValue> {
    check_nontrivial(chi)?;
    let (p, pc) = shifts(chi, t);
    let z = zeta_prime(p, pc, t, false)?;
    let mut out = torsion_value(-z.value, TorsionRoute::SpectralZeta);
    out.truncation = Some(z.truncation);
    if z.min_eigenvalue < NEAR_ZERO_MODE {
        out.near_zero_mode = Some(z.min_eigenvalue);
    }
    Ok(out)
}

/// The closed form without the constant κ, as a logarithm.
fn theta_log_uncalibrated(p: Complex64, pc: Complex64, t: &Torus) -> Complex64 {
    let tau = t.tau();
    let eta = t.dedekind_eta();
    log_theta1(p, tau) + log_theta1(pc, -tau.conj()) - 2.0 * eta.norm().ln()
        + (p - pc) * (p - pc) * (PI / (2.0 * t.im_tau()))
}

/// T(χ) from theta functions.
pub fn torsion_theta(chi: &Character, t: &Torus) -> Result<TorsionValue> {
    check_nontrivial(chi)?;
    let (p, pc) = shifts(chi, t);
    Ok(torsion_value(
        THETA_NORMALIZATION.ln() + theta_log_uncalibrated(p, pc, t),
        TorsionRoute::ThetaClosedForm,
    ))
}

/// Spectral value over uncalibrated closed form at τ = i, χ = (−1, 1).
pub fn calibrate_theta_normalization() -> Result<f64> {
    let t = Torus::new(Complex64::new(0.0, 1.0))?;
    let chi = Character::from_multipliers(Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0))?;
    let (p, pc) = shifts(&chi, &t);
    let spectral = torsion_spectral(&chi, &t)?;
    Ok((spectral.log_value - theta_log_uncalibrated(p, pc, &t)).exp().re)
}

/// det′ of the scalar Laplacian: the zero-shift spectrum with the zero mode
/// removed.
pub fn torsion_trivial(t: &Torus) -> Result<TorsionValue> {
    let zero = Complex64::new(0.0, 0.0);
    let z = zeta_prime(zero, zero, t, true)?;
    let mut out = torsion_value(-z.value, TorsionRoute::SpectralZeta);
    out.truncation = Some(z.truncation);
    Ok(out)
}

/// det′Δ = 4π·Im τ·|η(τ)|⁴ from the first Kronecker limit formula.
pub fn torsion_trivial_closed(t: &Torus) -> f64 {
    4.0 * PI * t.im_tau() * t.dedekind_eta().norm().powi(4)
}

/// log det((i/2π)∫β∧α) for α = dz̄, β = dz, i.e. log(Im τ/π).
pub fn h1_gram_log(t: &Torus) -> f64 {
    (t.im_tau() / PI).ln()
}

/// 2·LOG_Q(1) on λ(L_χ − O) ⊗ λ(L^c − O): the L² part of L_χ is empty,
/// O contributes its H¹ metric and det′Δ, and L_χ contributes −log T(χ).
pub fn quillen_log_virtual(chi: &Character, t: &Torus) -> Result<CircleValue> {
    quillen_log_virtual_with(chi, t, TorsionRoute::ThetaClosedForm)
}

pub fn quillen_log_virtual_with(chi: &Character, t: &Torus, route: TorsionRoute) -> Result<CircleValue> {
    let log_t = match route {
        TorsionRoute::SpectralZeta => torsion_spectral(chi, t)?.log_value,
        TorsionRoute::ThetaClosedForm => torsion_theta(chi, t)?.log_value,
    };
    let trivial = torsion_trivial_closed(t).ln();
    reduce((-log_t - h1_gram_log(t) + trivial) * 2.0, Modulus::TwoPiI)
}

/// The symbols ⟨ℓ, m_r⟩ ⊗ ⟨ℓ^c, m^c_r⟩ for ⟨L, L ⊗ ω⁻¹⟩ with ω trivialized
/// by dz: ℓ has divisor (P) − (0) and m_r has (P + r) − (r); on X̄ the
/// divisors are (P^c) − (0) and (P^c + r̄) − (r̄). As r → 0,
/// LOG_int − 2·log r − 2·log r̄ converges to the image of the canonical
/// section of λ(L − O)^{⊗2}.
#[derive(Debug, Clone)]
pub struct DeligneFamily {
    pub torus: Torus,
    pub character: Character,
    /// Unit direction along which r → 0.
    pub direction: Complex64,
    /// Largest |r| used by the extrapolation.
    pub radius: f64,
}

impl DeligneFamily {
    pub fn new(chi: &Character, t: &Torus) -> Result<Self> {
        check_nontrivial(chi)?;
        let gap = t.lattice_distance(class_point(chi, t));
        if gap < TRIVIAL_RADIUS {
            return Err(Error::TrivialCharacter { distance: gap });
        }
        Ok(DeligneFamily {
            torus: *t,
            character: *chi,
            direction: Complex64::from_polar(1.0, 0.3),
            radius: (gap / 8.0).min(1e-2),
        })
    }

    pub fn symbol(&self, r: Complex64) -> Result<PairingSymbol> {
        let t = &self.torus;
        let tc = t.conjugate();
        let chi = &self.character;
        let chi_c = conjugate_surface_character(chi);
        let p = class_point(chi, t);
        let pc = class_point(&chi_c, &tc);
        let zero = Complex64::new(0.0, 0.0);
        let section = |c: &Character, d: Vec<(Complex64, i64)>, s: &Torus| -> Result<EquivariantSection> {
            build_section(c, &Divisor::new(d, s)?, s)
        };
        PairingSymbol::new(
            section(chi, vec![(p, 1), (zero, -1)], t)?,
            section(chi, vec![(p + r, 1), (r, -1)], t)?,
            section(&chi_c, vec![(pc, 1), (zero, -1)], &tc)?,
            section(&chi_c, vec![(pc + r.conj(), 1), (r.conj(), -1)], &tc)?,
        )
    }

    /// LOG_int(r) − 2·log r − 2·log r̄, unreduced.
    pub fn regularized(&self, r: Complex64) -> Result<Complex64> {
        Ok(intersection_log_unreduced(&self.symbol(r)?, &self.character)? - 4.0 * r.norm().ln())
    }

    /// r → 0 by symmetrizing over ±r and two Richardson steps in r².
    pub fn limit(&self) -> Result<Complex64> {
        let mut level = Vec::with_capacity(3);
        let mut anchor: Option<Complex64> = None;
        for k in 0..3 {
            let r = self.direction * (self.radius / f64::from(1 << k));
            let mut v = Complex64::new(0.0, 0.0);
            for s in [r, -r] {
                let raw = self.regularized(s)?;
                let lifted = match anchor {
                    Some(a) => CircleValue::new(raw, Modulus::TwoPiI).lift_near(a),
                    None => raw,
                };
                anchor.get_or_insert(lifted);
                v += lifted * 0.5;
            }
            level.push(v);
        }
        let r1: Vec<Complex64> = level.windows(2).map(|w| (w[1] * 4.0 - w[0]) / 3.0).collect();
        Ok((r1[1] * 16.0 - r1[0]) / 15.0)
    }
}

/// quillen_log_virtual − LOG_int of the regularized symbol, modulo πi.
pub fn deligne_defect(family: &DeligneFamily) -> Result<CircleValue> {
    let q = quillen_log_virtual(&family.character, &family.torus)?;
    reduce(q.rep() - family.limit()?, Modulus::PiI)
}

/// deligne_defect for the default family of χ.
pub fn deligne_defect_at(chi: &Character, t: &Torus) -> Result<CircleValue> {
    deligne_defect(&DeligneFamily::new(chi, t)?)
}

/// The character of L̄ on X̄ (basis A, B⁻¹) for the connection
/// ∇_{L̄} = conj(∇_L) + θ̄′, where θ = θ′ − θ̄′ has periods 2πi·twist.
pub fn conjugate_embedding_character(chi: &Character, twist: (i64, i64), t: &Torus) -> Character {
    let (alpha, beta) = chi.lifts();
    let theta = HarmonicForm::with_periods(
        Complex64::new(0.0, 2.0 * PI * twist.0 as f64),
        Complex64::new(0.0, 2.0 * PI * twist.1 as f64),
        t.tau(),
    );
    let ta = theta.a.conj();
    Character::from_lifts(alpha.conj() + ta, -beta.conj() - ta * t.tau().conj())
}

/// The three sides of 12·arg♯λ_Q = 6·arg♯⟨L♯, L♯⟩ − 6·arg♯⟨L♯, ω̄⟩ over
/// the two complex embeddings, each in ℝ/2πℤ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgumentReport {
    pub lambda_term: f64,
    pub self_term: f64,
    pub omega_term: f64,
    pub defect: f64,
}

fn omega_symbol_log(left: &PairingSymbol, chi: &Character) -> Result<CircleValue> {
    let dz = |s: &Torus| -> Result<EquivariantSection> {
        Ok(chern_lift(&build_section(&Character::trivial(), &Divisor::empty(), s)?, s))
    };
    let sym = PairingSymbol::new(
        left.left.clone(),
        dz(&left.left.torus)?,
        left.conjugate_left.clone(),
        dz(&left.conjugate_left.torus)?,
    )?;
    intersection_log(&sym, chi)
}

/// Left minus right side of the argument identity for the rigidified pair
/// whose conjugate-embedding connection is twisted by θ with periods
/// 2πi·twist.
pub fn arg_arr_defect(chi: &Character, twist: (i64, i64), t: &Torus) -> Result<ArgumentReport> {
    let tc = t.conjugate();
    let embeddings = [(*chi, *t), (conjugate_embedding_character(chi, twist, t), tc)];
    let (mut lambda, mut pairing, mut omega) = (0.0, 0.0, 0.0);
    for (psi, s) in &embeddings {
        let family = DeligneFamily::new(psi, s)?;
        lambda += quillen_log_virtual(psi, s)?.rep().im;
        let w = omega_symbol_log(&family.symbol(family.direction * family.radius)?, psi)?;
        omega += w.rep().im;
        // ⟨L, L⟩ = ⟨L, L ⊗ ω⁻¹⟩ ⊗ ⟨L, ω⟩.
        pairing += family.limit()?.im + w.rep().im;
    }
    let two_pi = 2.0 * PI;
    let lambda_term = wrap(-6.0 * lambda, two_pi);
    let self_term = wrap(-6.0 * pairing, two_pi);
    let omega_term = wrap(-6.0 * omega, two_pi);
    Ok(ArgumentReport {
        lambda_term,
        self_term,
        omega_term,
        defect: wrap(lambda_term - self_term + omega_term, two_pi),
    })
}

/// For real χ: 12·arg♯λ_Q + 6·Im∫_{p̃}^{K}θ with K = div(dz) = 0, in ℝ/2πℤ.
pub fn anomaly_defect(chi: &Character, twist: (i64, i64), t: &Torus) -> Result<f64> {
    if !chi.is_real(1e-10) {
        return Err(Error::Usage("the anomaly form needs real holonomy".into()));
    }
    let theta = HarmonicForm::with_periods(
        Complex64::new(0.0, 2.0 * PI * twist.0 as f64),
        Complex64::new(0.0, 2.0 * PI * twist.1 as f64),
        t.tau(),
    );
    let canonical = Divisor::empty();
    let period = arg_sharp_period(&theta, &canonical, t)?;
    let mut lambda = 0.0;
    for (psi, s) in [(*chi, *t), (conjugate_embedding_character(chi, twist, t), t.conjugate())] {
        lambda += quillen_log_virtual(&psi, &s)?.rep().im;
    }
    Ok(wrap(-6.0 * lambda + 6.0 * period, 2.0 * PI))
}

/// ∫₁^∞ e^{−zt}/t dt by Gauss–Legendre after t = 1/s, for tests.
#[cfg(test)]
fn e1_quadrature(z: Complex64) -> Complex64 {
    use crate::elliptic_kernel::gauss_legendre;
    let (x, w) = gauss_legendre(40);
    let pieces = 400;
    let mut acc = Vec::new();
    for j in 0..pieces {
        let (lo, hi) = (j as f64 / pieces as f64, (j + 1) as f64 / pieces as f64);
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (hi - lo) * xi + 0.5 * (hi + lo);
            acc.push((-z / s).exp() / s * (0.5 * (hi - lo) * wi));
        }
    }
    pairwise_sum(&acc)
}
