use std::f64::consts::PI;

use num_complex::Complex64;

use super::theta;
use super::torus::{Torus, MIN_SEPARATION};
use crate::error::{Error, Result};

/// Flat-metric Green function
/// log|θ1(z−w)|² − 2π(Im(z−w))²/Im τ − 2·log|η(τ)|.
///
/// The additive constant cancels in every degree-zero double sum.
pub fn green_log(z: Complex64, w: Complex64, t: &Torus) -> Result<f64> {
    if t.lattice_distance(z - w) < MIN_SEPARATION {
        return Err(Error::Pole {
            point: z,
            context: "green_log at coincident points".into(),
        });
    }
    Ok(green_unchecked(z - w, t))
}

pub(crate) fn green_unchecked(d: Complex64, t: &Torus) -> f64 {
    let (d0, _, _) = t.reduce_centered(d);
    let th = theta::theta1_unchecked(d0, t.tau());
    th.norm_sqr().ln() - 2.0 * PI * d0.im * d0.im / t.im_tau() - 2.0 * t.dedekind_eta().norm().ln()
}

/// Σᵢⱼ nᵢ·mⱼ·g(pᵢ, qⱼ) for two divisors with disjoint supports.
pub fn green_pairing(
    d: &super::torus::Divisor,
    e: &super::torus::Divisor,
    t: &Torus,
) -> Result<f64> {
    let mut acc = 0.0;
    for (p, n) in d.points() {
        for (q, m) in e.points() {
            acc += (*n * *m) as f64 * green_log(*p, *q, t)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic_kernel::torus::Divisor;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetric() {
        let t = Torus::new(c(0.1, 1.2)).unwrap();
        let (z, w) = (c(0.3, 0.4), c(-0.2, 0.9));
        let d = green_log(z, w, &t).unwrap() - green_log(w, z, &t).unwrap();
        assert!(d.abs() < 1e-13);
    }

    #[test]
    fn coincident_points_are_a_pole() {
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        assert!(matches!(
            green_log(c(0.2, 0.2), c(1.2, 1.2), &t),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn constant_drops_out_of_degree_zero_sums() {
        let t = Torus::new(c(-0.3, 1.1)).unwrap();
        let d = Divisor::new(vec![(c(0.1, 0.2), 1), (c(0.6, 0.3), -1)], &t).unwrap();
        let e = Divisor::new(vec![(c(0.4, 0.8), 2), (c(0.8, 0.1), -1), (c(0.3, 0.5), -1)], &t).unwrap();
        let with = green_pairing(&d, &e, &t).unwrap();
        let shift = 2.0 * t.dedekind_eta().norm().ln();
        let mut without = 0.0;
        for (p, n) in d.points() {
            for (q, m) in e.points() {
                without += (*n * *m) as f64 * (green_log(*p, *q, &t).unwrap() + shift);
            }
        }
        assert!((with - without).abs() < 1e-12);
    }

    #[test]
    fn logarithmic_singularity_has_slope_two() {
        let t = Torus::new(c(0.2, 0.9)).unwrap();
        let w = c(0.4, 0.3);
        let (r1, r2) = (1e-3, 1e-4);
        let mut slope = 0.0;
        for k in 0..8 {
            let e = Complex64::from_polar(1.0, k as f64 * PI / 4.0);
            let g1 = green_log(w + e * r1, w, &t).unwrap();
            let g2 = green_log(w + e * r2, w, &t).unwrap();
            slope += (g1 - g2) / (r1 / r2).ln() / 8.0;
        }
        assert!((slope - 2.0).abs() < 0.04);
    }

    proptest! {
        #[test]
        fn lattice_periodic(x in -0.5..0.5f64, y in -0.5..0.5f64, m in -2i64..=2, n in -2i64..=2) {
            let t = Torus::new(c(0.3, 1.05)).unwrap();
            let z = c(x, y);
            let w = c(0.1, 0.35);
            prop_assume!(t.lattice_distance(z - w) > 1e-3);
            // Raw evaluation without centring, as the independent side.
            let raw = |d: Complex64| {
                let th = theta::theta1_series(d, t.tau()).0;
                th.norm_sqr().ln() - 2.0 * PI * d.im * d.im / t.im_tau() - 2.0 * t.dedekind_eta().norm().ln()
            };
            let shifted = green_log(z + t.lattice(m, n), w, &t).unwrap();
            prop_assert!((shifted - raw(z - w)).abs() < 1e-9);
        }
    }
}
