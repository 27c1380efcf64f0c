//! Jacobi θ1 and the Dedekind η by q-series.
//!
//! Convention: q = e^{iπτ} and θ1(z|τ) = 2 Σ_{n≥0} (−1)ⁿ q^{(n+½)²} sin((2n+1)πz),
//! so θ1(z+1) = −θ1(z) and θ1(z+τ) = −q⁻¹e^{−2πiz}θ1(z).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Terms are summed until the next one is below this fraction of the sum.
const TAIL: f64 = 1e-17;
const MAX_TERMS: usize = 4000;

pub(crate) fn check_tau(tau: Complex64) -> Result<()> {
    if !(tau.re.is_finite() && tau.im.is_finite()) || tau.im <= 0.0 {
        return Err(Error::Domain(format!("Im(tau) must be positive, got {tau}")));
    }
    Ok(())
}

/// θ1 and θ1' at a point of moderate imaginary part, straight from the series.
///
/// Caller keeps |Im z| ≲ Im τ; the terms then decay like q^{n²} and the
/// dropped tail, bounded by twice the first omitted term, stays below
/// 10⁻¹⁶ of the partial sum.
pub(crate) fn theta1_series(z: Complex64, tau: Complex64) -> (Complex64, Complex64) {
    let u = (I * PI * z).exp();
    let u2 = u * u;
    let (mut up, mut um) = (u, u.inv());
    let (u2i, mut sum, mut dsum) = (u2.inv(), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for n in 0..MAX_TERMS {
        let k = n as f64 + 0.5;
        let qn = (I * PI * tau * (k * k)).exp();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        // sin w = (e^{iw} − e^{−iw})/2i and cos w = (e^{iw} + e^{−iw})/2.
        let s = (up - um) / (2.0 * I);
        let c = (up + um) * 0.5;
        let term = qn * s * sign;
        let dterm = qn * c * (sign * (2 * n + 1) as f64 * PI);
        sum += term;
        dsum += dterm;
        if n >= 1 && term.norm() <= TAIL * (sum.norm() + 1.0) && dterm.norm() <= TAIL * (dsum.norm() + 1.0) {
            break;
        }
        up *= u2;
        um *= u2i;
    }
    (sum * 2.0, dsum * 2.0)
}

/// θ1'(0) and θ1'''(0).
pub(crate) fn theta1_odd_derivatives_at_zero(tau: Complex64) -> (Complex64, Complex64) {
    let (mut d1, mut d3) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for n in 0..MAX_TERMS {
        let k = n as f64 + 0.5;
        let qn = (I * PI * tau * (k * k)).exp();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let w = (2 * n + 1) as f64 * PI;
        let t1 = qn * (sign * w);
        let t3 = qn * (-sign * w * w * w);
        d1 += t1;
        d3 += t3;
        if n >= 1 && t3.norm() <= TAIL * d3.norm() && t1.norm() <= TAIL * d1.norm() {
            break;
        }
    }
    (d1 * 2.0, d3 * 2.0)
}

/// η(τ) = q^{1/24} Π (1 − qⁿ) with q = e^{2πiτ}.
pub(crate) fn eta_product(tau: Complex64) -> Complex64 {
    let q = (2.0 * PI * I * tau).exp();
    let mut prod = Complex64::new(1.0, 0.0);
    let mut qn = q;
    for _ in 0..MAX_TERMS {
        prod *= Complex64::new(1.0, 0.0) - qn;
        if qn.norm() < TAIL {
            break;
        }
        qn *= q;
    }
    (2.0 * PI * I * tau / 24.0).exp() * prod
}

/// Splits z = z0 + m + nτ with z0 in the centred tile.
fn centre(z: Complex64, tau: Complex64) -> (Complex64, f64, f64) {
    let n = (z.im / tau.im).round();
    let w = z - tau * n;
    let m = w.re.round();
    (w - m, m, n)
}

/// θ1(z|τ), using quasi-periodicity to keep the series well conditioned.
pub fn theta1(z: Complex64, tau: Complex64) -> Result<Complex64> {
    check_tau(tau)?;
    Ok(theta1_unchecked(z, tau))
}

pub(crate) fn theta1_unchecked(z: Complex64, tau: Complex64) -> Complex64 {
    let (z0, m, n) = centre(z, tau);
    let (v, _) = theta1_series(z0, tau);
    v * quasi_factor(z0, m, n, tau).exp()
}

/// log of the factor θ1(z0 + m + nτ)/θ1(z0) = (−1)^{m+n} q^{−n²} e^{−2πinz0}.
fn quasi_factor(z0: Complex64, m: f64, n: f64, tau: Complex64) -> Complex64 {
    I * PI * (m + n) - I * PI * tau * (n * n) - 2.0 * PI * I * n * z0
}

/// A logarithm of θ1(z|τ): principal log on the centred tile plus the
/// exact quasi-periodicity exponent. Defined up to 2πiℤ only.
pub(crate) fn log_theta1(z: Complex64, tau: Complex64) -> Complex64 {
    let (z0, m, n) = centre(z, tau);
    let (v, _) = theta1_series(z0, tau);
    v.ln() + quasi_factor(z0, m, n, tau)
}

/// θ1'/θ1 at z.
pub(crate) fn theta1_dlog(z: Complex64, tau: Complex64) -> Complex64 {
    let (z0, _, n) = centre(z, tau);
    let (v, d) = theta1_series(z0, tau);
    d / v - 2.0 * PI * I * n
}

/// θ1'(z|τ).
pub fn theta1_prime(z: Complex64, tau: Complex64) -> Result<Complex64> {
    check_tau(tau)?;
    let (z0, m, n) = centre(z, tau);
    let (v, d) = theta1_series(z0, tau);
    let f = quasi_factor(z0, m, n, tau).exp();
    Ok((d - 2.0 * PI * I * n * v) * f)
}

/// Dedekind η(τ).
pub fn dedekind_eta(tau: Complex64) -> Result<Complex64> {
    check_tau(tau)?;
    Ok(eta_product(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Γ(1/4), and Γ(3/4) = π√2/Γ(1/4) by reflection.
    const GAMMA_1_4: f64 = 3.625_609_908_221_908;
    const GAMMA_3_4: f64 = std::f64::consts::PI * std::f64::consts::SQRT_2 / GAMMA_1_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent oracle: the Jacobi triple product
    /// θ1(z) = 2q^{1/4} sin(πz) Π (1−q^{2n})(1 − 2q^{2n}cos 2πz + q^{4n}).
    fn theta1_product(z: Complex64, tau: Complex64) -> Complex64 {
        let q = (I * PI * tau).exp();
        let cos2 = (2.0 * PI * z).cos();
        let mut p = (I * PI * tau / 4.0).exp() * 2.0 * (PI * z).sin();
        for n in 1..200 {
            let q2n = q.powi(2 * n);
            p *= (c(1.0, 0.0) - q2n) * (c(1.0, 0.0) - q2n * cos2 * 2.0 + q2n * q2n);
        }
        p
    }

    #[test]
    fn vanishes_at_origin() {
        assert_eq!(theta1(c(0.0, 0.0), I).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(matches!(theta1(c(0.1, 0.0), c(0.0, -1.0)), Err(Error::Domain(_))));
        assert!(dedekind_eta(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn anti_periodic_under_one() {
        let z = c(0.3, 0.2);
        let a = theta1(z + 1.0, I).unwrap();
        let b = theta1(z, I).unwrap();
        // Both sides by the raw series, with no centring.
        let (ra, _) = theta1_series(z + 1.0, I);
        assert!((a + b).norm() < 1e-14);
        assert!((ra + b).norm() < 1e-14);
    }

    #[test]
    fn half_period_value_at_square_lattice() {
        // Series and product agree; the value also equals π^{1/4}/(2^{1/4}Γ(3/4)),
        // i.e. θ2(0|i), not θ3(0|i)² ≈ 1.1803.
        let v = theta1(c(0.5, 0.0), I).unwrap();
        let p = theta1_product(c(0.5, 0.0), I);
        assert!((v - p).norm() < 1e-14);
        let closed = PI.powf(0.25) / (2f64.powf(0.25) * GAMMA_3_4);
        assert!(v.im.abs() < 1e-15);
        assert!((v.re - closed).abs() < 1e-13);
        assert!((v.re - 0.913_579_138_156_117).abs() < 1e-12);
    }

    #[test]
    fn eta_at_i() {
        let e = dedekind_eta(I).unwrap();
        let closed = GAMMA_1_4 / (2.0 * PI.powf(0.75));
        assert!(e.im.abs() < 1e-15);
        assert!((e.re - closed).abs() < 1e-14);
        assert!((e.re - 0.768_225_4).abs() < 1e-7);
    }

    #[test]
    fn eta_translation() {
        let a = dedekind_eta(I + 1.0).unwrap();
        let b = dedekind_eta(I).unwrap() * (I * PI / 12.0).exp();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn eta_decreases_up_the_imaginary_axis() {
        assert!(dedekind_eta(c(0.0, 2.0)).unwrap().norm() < dedekind_eta(I).unwrap().norm());
    }

    #[test]
    fn derivative_at_zero_is_two_pi_eta_cubed() {
        let tau = c(0.2, 1.1);
        let d = theta1_prime(c(0.0, 0.0), tau).unwrap();
        let e = dedekind_eta(tau).unwrap();
        assert!((d - 2.0 * PI * e * e * e).norm() < 1e-13);
    }

    proptest! {
        #[test]
        fn series_matches_product(x in -1.0..1.0f64, y in -0.6..0.6f64, tr in -0.5..0.5f64, ti in 0.8..1.6f64) {
            let tau = c(tr, ti);
            let z = c(x, y * ti);
            let a = theta1(z, tau).unwrap();
            let b = theta1_product(z, tau);
            prop_assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }

        #[test]
        fn theta1_is_odd(x in -2.0..2.0f64, y in -2.0..2.0f64) {
            let tau = c(0.1, 1.2);
            let z = c(x, y);
            let a = theta1(z, tau).unwrap();
            let b = theta1(-z, tau).unwrap();
            prop_assert!((a + b).norm() < 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn quasi_periodic_in_tau(x in -0.5..0.5f64, y in -0.5..0.5f64) {
            let tau = c(-0.3, 0.9);
            let z = c(x, y);
            let q = (I * PI * tau).exp();
            let lhs = theta1(z + tau, tau).unwrap();
            let rhs = -theta1(z, tau).unwrap() / q * (-2.0 * PI * I * z).exp();
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
        }

        #[test]
        fn log_and_dlog_are_consistent(x in -1.5..1.5f64, y in -1.5..1.5f64) {
            let tau = c(0.25, 1.05);
            let z = c(x, y);
            prop_assume!((z - c(z.re.round(), 0.0)).norm() > 0.05);
            let v = theta1(z, tau).unwrap();
            let l = log_theta1(z, tau);
            prop_assert!((l.exp() - v).norm() < 1e-11 * v.norm());
            let h = 1e-5;
            let fd = (log_theta1(z + h, tau) - log_theta1(z - h, tau)) / (2.0 * h);
            let unwrapped = c(fd.re, fd.im - (2.0 * PI / (2.0 * h)) * (fd.im * 2.0 * h / (2.0 * PI)).round());
            prop_assert!((unwrapped - theta1_dlog(z, tau)).norm() < 1e-5 * (1.0 + unwrapped.norm()));
        }
    }
}
