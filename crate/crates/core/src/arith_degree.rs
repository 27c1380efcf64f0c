//! Conjugate pairs of rank-one modules with logarithms over ℤ and over the
//! ring of integers of an imaginary quadratic field, and their degree deg♯.
//!
//! A line L ⊂ K is a fractional ideal given by its prime exponents, and
//! L_K = K. The logarithm at an embedding τ on L_τ ⊗ L^c_τ̄ = ℂ is fixed by
//! its value on 1 ⊗ 1, so LOG_τ(x ⊗ y) = log(xy) + LOG_τ(1 ⊗ 1). Nothing here
//! factors numbers: every order and splitting is supplied by the caller and
//! checked against the product formula.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::HarmonicForm;
use crate::circle_values::{reduce, wrap, CircleValue, Modulus};
use crate::elliptic_kernel::{Divisor, Torus};
use crate::error::{Error, Result};

/// Product-formula residual allowed for caller-supplied orders.
const ORD_TOLERANCE: f64 = 1e-9;

/// ℚ or ℚ(√−d) with d squarefree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumberRingSpec {
    Rationals,
    ImaginaryQuadratic(u64),
}

impl NumberRingSpec {
    pub fn new_imaginary_quadratic(d: u64) -> Result<Self> {
        let squarefree = d > 0 && (2..).take_while(|k| k * k <= d).all(|k| !d.is_multiple_of(k * k));
        if !squarefree {
            return Err(Error::Domain(format!("{d} is not a positive squarefree integer")));
        }
        Ok(NumberRingSpec::ImaginaryQuadratic(d))
    }

    /// [K : ℚ].
    pub fn degree(self) -> usize {
        match self {
            NumberRingSpec::Rationals => 1,
            NumberRingSpec::ImaginaryQuadratic(_) => 2,
        }
    }

    /// Number of embeddings K → ℂ: one real, or a conjugate pair.
    pub fn embedding_count(self) -> usize {
        self.degree()
    }

    /// Target of deg♯: ℂ/πiℤ with a real place, ℂ/2πiℤ without.
    pub fn modulus(self) -> Modulus {
        match self {
            NumberRingSpec::Rationals => Modulus::PiI,
            NumberRingSpec::ImaginaryQuadratic(_) => Modulus::TwoPiI,
        }
    }

    /// τ_k(a + b√−d): τ_0 sends √−d to i√d, τ_1 is its conjugate.
    pub fn embed(self, x: &FieldElement, k: usize) -> Complex64 {
        match self {
            NumberRingSpec::Rationals => Complex64::new(x.a, 0.0),
            NumberRingSpec::ImaginaryQuadratic(d) => {
                let s = if k == 0 { 1.0 } else { -1.0 };
                Complex64::new(x.a, s * x.b * (d as f64).sqrt())
            }
        }
    }

    /// The embedding conjugate to τ_k.
    pub fn conjugate_embedding(self, k: usize) -> usize {
        match self {
            NumberRingSpec::Rationals => k,
            NumberRingSpec::ImaginaryQuadratic(_) => 1 - k,
        }
    }

    /// |N_{K/ℚ}(x)|.
    pub fn abs_norm(self, x: &FieldElement) -> f64 {
        match self {
            NumberRingSpec::Rationals => x.a.abs(),
            NumberRingSpec::ImaginaryQuadratic(d) => x.a * x.a + (d as f64) * x.b * x.b,
        }
    }
}

/// a + b√−d (b = 0 over ℚ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldElement {
    pub a: f64,
    pub b: f64,
}

impl FieldElement {
    pub fn rational(a: f64) -> Self {
        FieldElement { a, b: 0.0 }
    }

    pub fn one() -> Self {
        Self::rational(1.0)
    }

    pub fn mul(&self, o: &FieldElement, field: NumberRingSpec) -> FieldElement {
        let d = match field {
            NumberRingSpec::Rationals => 0.0,
            NumberRingSpec::ImaginaryQuadratic(d) => d as f64,
        };
        FieldElement {
            a: self.a * o.a - d * self.b * o.b,
            b: self.a * o.b + self.b * o.a,
        }
    }
}

/// A nonzero prime of O_K over p with residue degree f, so N𝔭 = p^f.
/// `index` separates distinct primes over the same p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Prime {
    pub p: u64,
    pub f: u32,
    #[serde(default)]
    pub index: u32,
}

impl Prime {
    pub fn log_norm(&self) -> f64 {
        self.f as f64 * (self.p as f64).ln()
    }
}

/// Prime exponents of a fractional ideal or of an element.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IdealData(pub Vec<(Prime, i64)>);

impl IdealData {
    pub fn unit() -> Self {
        IdealData(Vec::new())
    }

    fn to_map(&self) -> BTreeMap<Prime, i64> {
        let mut m = BTreeMap::new();
        for &(p, e) in &self.0 {
            *m.entry(p).or_insert(0) += e;
        }
        m.retain(|_, e| *e != 0);
        m
    }

    fn from_map(m: BTreeMap<Prime, i64>) -> Self {
        IdealData(m.into_iter().filter(|(_, e)| *e != 0).collect())
    }

    pub fn add(&self, o: &IdealData) -> IdealData {
        let mut m = self.to_map();
        for (p, e) in o.to_map() {
            *m.entry(p).or_insert(0) += e;
        }
        Self::from_map(m)
    }

    pub fn neg(&self) -> IdealData {
        IdealData(self.0.iter().map(|&(p, e)| (p, -e)).collect())
    }

    pub fn scale(&self, k: i64) -> IdealData {
        Self::from_map(self.to_map().into_iter().map(|(p, e)| (p, k * e)).collect())
    }

    /// Σ e·log N𝔭.
    pub fn log_norm(&self) -> f64 {
        self.0.iter().map(|(p, e)| *e as f64 * p.log_norm()).sum()
    }
}

/// A nonzero element of K with its prime factorization supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub value: FieldElement,
    pub ords: IdealData,
}

impl Generator {
    pub fn one() -> Self {
        Generator {
            value: FieldElement::one(),
            ords: IdealData::unit(),
        }
    }

    pub fn mul(&self, o: &Generator, field: NumberRingSpec) -> Generator {
        Generator {
            value: self.value.mul(&o.value, field),
            ords: self.ords.add(&o.ords),
        }
    }

    /// The product formula Σ ord_𝔭(x)·log N𝔭 = log|N(x)|.
    pub fn check(&self, field: NumberRingSpec) -> Result<()> {
        let norm = field.abs_norm(&self.value);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Integrity("generator must be a nonzero finite element".into()));
        }
        let residual = self.ords.log_norm() - norm.ln();
        if residual.abs() > ORD_TOLERANCE * (1.0 + norm.ln().abs()) {
            return Err(Error::Integrity(format!(
                "orders of {:?} miss log|N| by {residual:e}",
                self.value
            )));
        }
        Ok(())
    }
}

/// (L, L^c, {LOG_τ}) with LOG_τ recorded on 1 ⊗ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpLine {
    pub field: NumberRingSpec,
    pub ideal_l: IdealData,
    pub ideal_lc: IdealData,
    pub logs: Vec<CircleValue>,
}

impl SharpLine {
    pub fn new(field: NumberRingSpec, ideal_l: IdealData, ideal_lc: IdealData, logs: Vec<CircleValue>) -> Result<Self> {
        if logs.len() != field.embedding_count() {
            return Err(Error::EmbeddingMismatch {
                expected: field.embedding_count(),
                got: logs.len(),
            });
        }
        Ok(SharpLine {
            field,
            ideal_l,
            ideal_lc,
            logs,
        })
    }

    /// O_K ⊗ O_K with the logarithm log(xy).
    pub fn trivial(field: NumberRingSpec) -> Self {
        SharpLine {
            field,
            ideal_l: IdealData::unit(),
            ideal_lc: IdealData::unit(),
            logs: vec![CircleValue::zero(Modulus::TwoPiI); field.embedding_count()],
        }
    }

    pub fn tensor(&self, o: &SharpLine) -> Result<SharpLine> {
        if self.field != o.field {
            return Err(Error::Usage("tensor product of lines over different rings".into()));
        }
        let logs = self.logs.iter().zip(&o.logs).map(|(x, y)| x.add(y)).collect::<Result<_>>()?;
        SharpLine::new(self.field, self.ideal_l.add(&o.ideal_l), self.ideal_lc.add(&o.ideal_lc), logs)
    }

    pub fn dual(&self) -> SharpLine {
        SharpLine {
            field: self.field,
            ideal_l: self.ideal_l.neg(),
            ideal_lc: self.ideal_lc.neg(),
            logs: self.logs.iter().map(CircleValue::neg).collect(),
        }
    }

    /// LOG_τ(ℓ_τ ⊗ ℓ^c_τ̄) as a representative in ℂ.
    pub fn log_at(&self, k: usize, l: &FieldElement, lc: &FieldElement) -> Complex64 {
        let f = self.field;
        let x = f.embed(l, k) * f.embed(lc, f.conjugate_embedding(k));
        x.ln() + self.logs[k].rep()
    }
}

/// Σ_𝔭 ord_𝔭(ℓ ⊗ ℓ^c)·log N𝔭 − Σ_τ LOG_τ(ℓ_τ ⊗ ℓ^c_τ̄), where orders are
/// taken relative to the ideal L·L^c.
pub fn deg_sharp(line: &SharpLine, generators: (&Generator, &Generator)) -> Result<CircleValue> {
    let (l, lc) = generators;
    l.check(line.field)?;
    lc.check(line.field)?;
    let finite = l.ords.add(&lc.ords).add(&line.ideal_l.neg()).add(&line.ideal_lc.neg());
    let mut acc = Complex64::new(finite.log_norm(), 0.0);
    for k in 0..line.field.embedding_count() {
        acc -= line.log_at(k, &l.value, &lc.value);
    }
    reduce(acc, line.field.modulus())
}

/// deg♯ computed with the generators (1, 1).
pub fn deg_sharp_default(line: &SharpLine) -> Result<CircleValue> {
    deg_sharp(line, (&Generator::one(), &Generator::one()))
}

/// How the primes over each rational prime p decompose in F: a list of
/// (prime of F, ramification index).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplittingData(pub BTreeMap<u64, Vec<(Prime, u32)>>);

impl SplittingData {
    /// Splitting in ℤ[i] for the rational primes in `primes`.
    pub fn gaussian(primes: &[u64]) -> Self {
        let mut m = BTreeMap::new();
        for &p in primes {
            let over = if p == 2 {
                vec![(Prime { p: 2, f: 1, index: 0 }, 2)]
            } else if p % 4 == 1 {
                vec![(Prime { p, f: 1, index: 0 }, 1), (Prime { p, f: 1, index: 1 }, 1)]
            } else {
                vec![(Prime { p, f: 2, index: 0 }, 1)]
            };
            m.insert(p, over);
        }
        SplittingData(m)
    }
}

fn check_extension(base: NumberRingSpec, top: NumberRingSpec) -> Result<()> {
    match (base, top) {
        (NumberRingSpec::Rationals, NumberRingSpec::ImaginaryQuadratic(_)) => Ok(()),
        _ => Err(Error::Usage(format!("unsupported extension {top:?} over {base:?}"))),
    }
}

/// Extension of ideals along O_K → O_F; each LOG on F is the one on K at
/// the restricted embedding.
pub fn pullback(line: &SharpLine, top: NumberRingSpec, splitting: &SplittingData) -> Result<SharpLine> {
    check_extension(line.field, top)?;
    let extend = |ideal: &IdealData| -> Result<IdealData> {
        let mut out = IdealData::unit();
        for &(q, e) in &ideal.0 {
            let over = splitting.0.get(&q.p).ok_or(Error::MissingSplitting(q.p))?;
            let parts = IdealData(over.iter().map(|&(big, ram)| (big, e * i64::from(ram))).collect());
            out = out.add(&parts);
        }
        Ok(out)
    };
    let logs = (0..top.embedding_count()).map(|_| line.logs[0]).collect();
    SharpLine::new(top, extend(&line.ideal_l)?, extend(&line.ideal_lc)?, logs)
}

/// Norm of ideals down to ℤ; the logarithm at the real place is the sum
/// over the embeddings of F.
pub fn pushforward(line: &SharpLine, base: NumberRingSpec) -> Result<SharpLine> {
    check_extension(base, line.field)?;
    let norm = |ideal: &IdealData| -> IdealData {
        let rational = IdealData(
            ideal
                .0
                .iter()
                .map(|&(q, e)| (Prime { p: q.p, f: 1, index: 0 }, e * i64::from(q.f)))
                .collect(),
        );
        rational.add(&IdealData::unit())
    };
    let mut log = CircleValue::zero(Modulus::TwoPiI);
    for v in &line.logs {
        log = log.add(v)?;
    }
    SharpLine::new(base, norm(&line.ideal_l), norm(&line.ideal_lc), vec![log])
}

/// ⟨L♯, M♯⟩ from one intersection logarithm per embedding, each taken on
/// the symbol that plays the role of 1 ⊗ 1, and the finite ideals of the
/// Deligne pairing relative to that symbol.
pub fn pair_to_sharp(
    field: NumberRingSpec,
    intersection_logs: Vec<CircleValue>,
    ideal: IdealData,
    ideal_c: IdealData,
) -> Result<SharpLine> {
    SharpLine::new(field, ideal, ideal_c, intersection_logs)
}

/// arg♯⟨L♯, O(D)⟩ = Im ∫_{p̃}^{D} θ modulo 2π with base point 0. For
/// deg D = 0 the base point drops out; θ with periods in 2πiℤ makes the
/// value independent of the lifts of D.
pub fn arg_sharp_period(theta: &HarmonicForm, d: &Divisor, _t: &Torus) -> Result<f64> {
    let mut acc = 0.0;
    for &(q, n) in d.points() {
        acc += theta.integral(q).im * n as f64;
    }
    Ok(wrap(acc, 2.0 * PI))
}

/// ζ′(−1)/ζ(−1) + 1/2, from ζ(−1) = −1/12 and ζ′(−1) = 1/12 − log A.
pub fn gillet_soule_term() -> f64 {
    const LOG_GLAISHER: f64 = 0.248_754_477_033_784_26;
    let zeta_prime = 1.0 / 12.0 - LOG_GLAISHER;
    zeta_prime / (-1.0 / 12.0) + 0.5
}

/// Every term of the arithmetic Riemann–Roch identity for a conjugate pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrIngredients {
    pub field: NumberRingSpec,
    pub genus: u32,
    pub deg_lambda: Complex64,
    pub delta: f64,
    pub omega_omega: Complex64,
    pub l_l: Complex64,
    pub l_omega: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrIdentity {
    pub lhs: CircleValue,
    pub rhs: CircleValue,
    pub defect: CircleValue,
}

/// 12·deg♯λ_Q − 2δ against 2(ω̄,ω̄) + 6(L♯,L♯) − 6(L♯,ω̄) − (4g−4)[K:ℚ]·c.
pub fn arr_report(x: &ArrIngredients) -> Result<ArrIdentity> {
    let m = x.field.modulus();
    let lhs = x.deg_lambda * 12.0 - 2.0 * x.delta;
    let constant = (4.0 * x.genus as f64 - 4.0) * x.field.degree() as f64 * gillet_soule_term();
    let rhs = x.omega_omega * 2.0 + x.l_l * 6.0 - x.l_omega * 6.0 - constant;
    Ok(ArrIdentity {
        lhs: reduce(lhs, m)?,
        rhs: reduce(rhs, m)?,
        defect: reduce(lhs - rhs, m)?,
    })
}

/// Serialized input of a single deg♯ evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeInput {
    pub field: NumberRingSpec,
    pub ideal_l: IdealData,
    pub ideal_lc: IdealData,
    /// LOG_τ(1 ⊗ 1) per embedding as [re, im].
    pub logs: Vec<[f64; 2]>,
    #[serde(default)]
    pub generators: Option<(Generator, Generator)>,
}

impl DegreeInput {
    pub fn evaluate(&self) -> Result<CircleValue> {
        let logs = self
            .logs
            .iter()
            .map(|&[re, im]| reduce(Complex64::new(re, im), Modulus::TwoPiI))
            .collect::<Result<_>>()?;
        let line = SharpLine::new(self.field, self.ideal_l.clone(), self.ideal_lc.clone(), logs)?;
        match &self.generators {
            Some((l, lc)) => deg_sharp(&line, (l, lc)),
            None => deg_sharp_default(&line),
        }
    }
}
