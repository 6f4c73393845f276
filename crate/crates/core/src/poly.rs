//! Exact univariate polynomials over the rationals.
//!
//! Edge functions are truncated power series: a polynomial stores the
//! coefficients `a_0, a_1, ...` of `sum a_n x^n` with trailing zeros trimmed,
//! so two polynomials are equal exactly when their coefficient vectors are.
//! On top of the arithmetic this module carries the function-class predicates
//! (zero-at-zero, genuinely nonlinear) and the argument-shift machinery that
//! the identification engine is built on: recovering `c` from the pair
//! `(p, p(. + c))` needs degree >= 2 and is immune to additive constants,
//! which is exactly why linear edge functions are excluded from the
//! nonlinear identification class.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rat::{format_rat, rat, Rat};

/// Univariate polynomial with exact rational coefficients.
///
/// Invariant: the last stored coefficient is nonzero; the zero polynomial
/// stores an empty vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

/// Function classes ordered by containment: `FZNL ⊂ FZ ⊂ General`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FunctionClass {
    /// Any nonzero function; constant terms allowed.
    General,
    /// Zero-at-zero functions: no constant term.
    FZ,
    /// Zero-at-zero functions with some coefficient of order > 1 nonzero.
    FZNL,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionClass::General => write!(f, "general"),
            FunctionClass::FZ => write!(f, "fz"),
            FunctionClass::FZNL => write!(f, "fznl"),
        }
    }
}

/// Class membership report for a single edge function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// `f(0) = 0`.
    pub in_fz: bool,
    /// `f(0) = 0` and some coefficient of order > 1 is nonzero.
    pub in_fznl: bool,
    /// `f(0) = 0` and degree <= 1: a pure gain.
    pub is_linear: bool,
}

impl Classification {
    /// Most specific class the function belongs to.
    pub fn narrowest(&self) -> FunctionClass {
        if self.in_fznl {
            FunctionClass::FZNL
        } else if self.in_fz {
            FunctionClass::FZ
        } else {
            FunctionClass::General
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("the zero polynomial is not a valid edge function")]
    ZeroPolynomial,
    #[error("period must be nonzero")]
    ZeroPeriod,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error("shift recovery needs degree >= 2, got {degree:?}")]
    DegreeTooLow { degree: Option<usize> },
    #[error("candidate is not an argument shift of the base polynomial")]
    NotAShift,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("duplicate abscissa {0}")]
    DuplicateAbscissa(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("samples are not consistent with any polynomial of degree <= {bound}")]
    InconsistentSamples { bound: usize },
}

impl Poly {
    /// Builds a polynomial from `a_0, a_1, ...`, trimming trailing zeros.
    pub fn new(coeffs: Vec<Rat>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// The identity `x`.
    pub fn x() -> Self {
        Poly::from_i64(&[0, 1])
    }

    /// Convenience constructor from integer coefficients `a_0, a_1, ...`.
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    /// Single term `c x^n`.
    pub fn monomial(c: Rat, n: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rat::zero(); n + 1];
        coeffs[n] = c;
        Poly { coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest index with nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient `a_n` (zero beyond the stored length).
    pub fn coeff(&self, n: usize) -> Rat {
        self.coeffs.get(n).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Horner evaluation, exact.
    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Class membership. The zero polynomial is rejected: an edge present in
    /// the topology must carry a nonzero function.
    pub fn classify(&self) -> Result<Classification, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let in_fz = self.coeff(0).is_zero();
        let in_fznl = in_fz && self.coeffs.iter().skip(2).any(|c| !c.is_zero());
        let is_linear = in_fz && self.degree() == Some(1);
        Ok(Classification {
            in_fz,
            in_fznl,
            is_linear,
        })
    }

    /// Most specific class, for whole-network classification.
    pub fn narrowest_class(&self) -> Result<FunctionClass, PolyError> {
        Ok(self.classify()?.narrowest())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Poly::new(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// `p + c` as a polynomial.
    pub fn add_constant(&self, c: &Rat) -> Poly {
        self.add(&Poly::constant(c.clone()))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    /// `p(q(x))` by Horner over polynomials.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// `q(x) = p(x + c)` via composition with `x + c`; degree preserved.
    pub fn shift_argument(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return self.clone();
        }
        self.compose(&Poly::new(vec![c.clone(), Rat::one()]))
    }

    /// True iff `p` is non-constant and `p(. + period) != p`. For polynomials
    /// this holds for every non-constant `p` and every nonzero period:
    /// non-constant polynomials are never periodic.
    pub fn periodicity_impossible(&self, period: &Rat) -> Result<bool, PolyError> {
        if period.is_zero() {
            return Err(PolyError::ZeroPeriod);
        }
        let non_constant = self.degree().map_or(false, |d| d >= 1);
        Ok(non_constant && self.shift_argument(period) != *self)
    }
}

/// Recovers `c` from `q = p(. + c)` and verifies the claim exactly.
///
/// The top two coefficients give `c = (q_{d-1} - p_{d-1}) / (d p_d)`, which
/// needs `d >= 2`: at degree 1 an argument shift and an additive constant
/// are indistinguishable, the very ambiguity that makes linear edges
/// unidentifiable on general DAGs.
pub fn recover_shift(p: &Poly, q: &Poly) -> Result<Rat, ShiftError> {
    let c = shift_candidate(p, q)?;
    if p.shift_argument(&c) == *q {
        Ok(c)
    } else {
        Err(ShiftError::NotAShift)
    }
}

/// Recovers `(c, k)` from `q = p(. + c) + k`. The additive constant `k` does
/// not touch the top two coefficients, so the same formula applies; the
/// remainder must be constant.
pub fn recover_shift_up_to_constant(p: &Poly, q: &Poly) -> Result<(Rat, Rat), ShiftError> {
    let c = shift_candidate(p, q)?;
    let rem = q.sub(&p.shift_argument(&c));
    match rem.degree() {
        None => Ok((c, Rat::zero())),
        Some(0) => Ok((c, rem.coeff(0))),
        Some(_) => Err(ShiftError::NotAShift),
    }
}

fn shift_candidate(p: &Poly, q: &Poly) -> Result<Rat, ShiftError> {
    let d = match p.degree() {
        Some(d) if d >= 2 => d,
        other => return Err(ShiftError::DegreeTooLow { degree: other }),
    };
    if q.degree() != Some(d) || q.coeff(d) != p.coeff(d) {
        return Err(ShiftError::NotAShift);
    }
    Ok((q.coeff(d - 1) - p.coeff(d - 1)) / (rat(d as i64) * p.coeff(d)))
}

/// Exact Newton interpolation through `points`, constrained to degree
/// <= `degree_bound`. With more than `degree_bound + 1` points the extra
/// samples act as consistency checks.
pub fn interpolate(points: &[(Rat, Rat)], degree_bound: usize) -> Result<Poly, InterpError> {
    if points.len() < degree_bound + 1 {
        return Err(InterpError::InsufficientSamples {
            needed: degree_bound + 1,
            got: points.len(),
        });
    }
    for (i, (xi, _)) in points.iter().enumerate() {
        for (xj, _) in &points[..i] {
            if xi == xj {
                return Err(InterpError::DuplicateAbscissa(format_rat(xi)));
            }
        }
    }

    // Divided-difference table; row k holds the order-k Newton coefficient.
    let n = points.len();
    let mut table: Vec<Rat> = points.iter().map(|(_, y)| y.clone()).collect();
    let mut newton: Vec<Rat> = Vec::with_capacity(n);
    newton.push(table[0].clone());
    for order in 1..n {
        for i in 0..n - order {
            let dx = &points[i + order].0 - &points[i].0;
            table[i] = (&table[i + 1] - &table[i]) / dx;
        }
        table.truncate(n - order);
        newton.push(table[0].clone());
    }

    // Orders beyond the bound must vanish, otherwise no polynomial of the
    // bounded degree passes through all samples.
    if newton.iter().skip(degree_bound + 1).any(|c| !c.is_zero()) {
        return Err(InterpError::InconsistentSamples {
            bound: degree_bound,
        });
    }

    let mut result = Poly::zero();
    let mut basis = Poly::constant(Rat::one());
    for (k, c) in newton.iter().enumerate().take(degree_bound + 1) {
        result = result.add(&basis.scale(c));
        if k + 1 < n {
            basis = basis.mul(&Poly::new(vec![-points[k].0.clone(), Rat::one()]));
        }
    }
    Ok(result)
}

impl fmt::Display for Poly {
    /// Ascending-degree form, e.g. `x + 2*x^2 - 1/2*x^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_part = if mag.is_one() && n > 0 {
                None
            } else {
                Some(format_rat(&mag))
            };
            match (coeff_part, n) {
                (Some(cs), 0) => write!(f, "{cs}")?,
                (Some(cs), 1) => write!(f, "{cs}*x")?,
                (Some(cs), _) => write!(f, "{cs}*x^{n}")?,
                (None, 1) => write!(f, "x")?,
                (None, _) => write!(f, "x^{n}")?,
            }
        }
        Ok(())
    }
}

/// Sample abscissae `0, 1, -1, 2, -2, ...` — small integers keep rational
/// growth bounded in nested interpolation.
pub fn sample_points(count: usize) -> Vec<Rat> {
    let mut pts = Vec::with_capacity(count);
    let mut k = 0i64;
    while pts.len() < count {
        if k == 0 {
            pts.push(rat(0));
        } else {
            pts.push(rat(k));
            if pts.len() < count {
                pts.push(rat(-k));
            }
        }
        k += 1;
    }
    pts
}
