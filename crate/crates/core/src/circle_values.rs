//! Values in ℂ/2πiℤ and ℂ/πiℤ.
//!
//! Every logarithm in this crate lands in one of these two quotients. A
//! [`CircleValue`] stores a canonical representative whose imaginary part
//! lies in the half-open strip (−π, π] (resp. (−π/2, π/2]).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which subgroup of iℝ the value is taken modulo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulus {
    #[serde(rename = "2pii")]
    TwoPiI,
    #[serde(rename = "pii")]
    PiI,
}

impl Modulus {
    /// Length of the period on the imaginary axis.
    pub fn period(self) -> f64 {
        match self {
            Modulus::TwoPiI => 2.0 * PI,
            Modulus::PiI => PI,
        }
    }
}

/// A complex number modulo `modulus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleValue {
    rep: Complex64,
    modulus: Modulus,
}

/// Reduces `y` into the half-open interval (−p/2, p/2].
pub(crate) fn wrap(y: f64, p: f64) -> f64 {
    let half = 0.5 * p;
    let mut r = y - p * (y / p).round();
    // `round` leaves r in [−p/2, p/2]; close the strip at the top.
    if r <= -half {
        r += p;
    }
    if r > half {
        r -= p;
    }
    r
}

/// Canonical representative of `w` modulo the given period.
pub fn reduce(w: Complex64, modulus: Modulus) -> Result<CircleValue> {
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!("cannot reduce non-finite value {w}")));
    }
    Ok(CircleValue {
        rep: Complex64::new(w.re, wrap(w.im, modulus.period())),
        modulus,
    })
}

/// Wraparound distance between canonical representatives.
pub fn circle_distance(x: &CircleValue, y: &CircleValue) -> Result<f64> {
    if x.modulus != y.modulus {
        return Err(Error::Usage(format!(
            "modulus mismatch: {:?} vs {:?}",
            x.modulus, y.modulus
        )));
    }
    let d = x.rep - y.rep;
    Ok(d.re.hypot(wrap(d.im, x.modulus.period())))
}

/// Equality up to `tol`, measured with wraparound on the imaginary axis.
pub fn circle_eq(x: &CircleValue, y: &CircleValue, tol: f64) -> Result<bool> {
    Ok(circle_distance(x, y)? <= tol)
}

impl CircleValue {
    /// Reduces a finite value; panics on NaN or infinity.
    pub fn new(w: Complex64, modulus: Modulus) -> Self {
        reduce(w, modulus).expect("CircleValue::new requires a finite value")
    }

    pub fn zero(modulus: Modulus) -> Self {
        CircleValue {
            rep: Complex64::new(0.0, 0.0),
            modulus,
        }
    }

    pub fn rep(&self) -> Complex64 {
        self.rep
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Image under ℂ/2πiℤ → ℂ/πiℤ. Identity on values already mod πi.
    pub fn to_pi(&self) -> CircleValue {
        CircleValue::new(self.rep, Modulus::PiI)
    }

    /// Distance of the value to zero in the quotient.
    pub fn abs(&self) -> f64 {
        self.rep.norm()
    }

    /// Lift, add, reduce.
    pub fn add(&self, other: &CircleValue) -> Result<CircleValue> {
        if self.modulus != other.modulus {
            return Err(Error::Usage("cannot add values with different moduli".into()));
        }
        reduce(self.rep + other.rep, self.modulus)
    }

    pub fn sub(&self, other: &CircleValue) -> Result<CircleValue> {
        if self.modulus != other.modulus {
            return Err(Error::Usage(
                "cannot subtract values with different moduli".into(),
            ));
        }
        reduce(self.rep - other.rep, self.modulus)
    }

    pub fn neg(&self) -> CircleValue {
        CircleValue::new(-self.rep, self.modulus)
    }

    /// Integer multiple; well defined on the quotient.
    pub fn scale(&self, k: i64) -> CircleValue {
        CircleValue::new(self.rep * k as f64, self.modulus)
    }

    /// Representative of `self` closest to `reference` (branch unwrapping).
    pub fn lift_near(&self, reference: Complex64) -> Complex64 {
        let p = self.modulus.period();
        let k = ((reference.im - self.rep.im) / p).round();
        Complex64::new(self.rep.re, self.rep.im + k * p)
    }
}

impl fmt::Display for CircleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.modulus {
            Modulus::TwoPiI => "2πi",
            Modulus::PiI => "πi",
        };
        write!(f, "{} mod {}", self.rep, m)
    }
}

#[derive(Serialize, Deserialize)]
struct CircleValueRepr {
    re: f64,
    im: f64,
    #[serde(rename = "mod")]
    modulus: Modulus,
}

impl Serialize for CircleValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircleValueRepr {
            re: self.rep.re,
            im: self.rep.im,
            modulus: self.modulus,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CircleValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CircleValueRepr::deserialize(d)?;
        reduce(Complex64::new(r.re, r.im), r.modulus).map_err(serde::de::Error::custom)
    }
}
