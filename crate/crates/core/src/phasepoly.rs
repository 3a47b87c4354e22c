//! Classical observables: polynomials in the momenta (p1, p2) whose
//! coefficients are exact expressions in x, y, alpha, hbar. Provides the
//! Poisson bracket (convention {x, p1} = +1), exact Jacobian ranks at
//! rational phase-space points, and numeric evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::linalg::RatMatrix;
use crate::rational::{pow_rational, rat, Rational};
use crate::symexpr::{parse_phase_polynomial_str, Expression, Var};

/// Polynomial in (p1, p2) with [`Expression`] coefficients: the classical
/// observable type. Canonical form stores no zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhasePolynomial {
    terms: BTreeMap<(u32, u32), Expression>,
}

/// Numeric phase-space point; alpha and hbar are supplied per evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Rational phase-space point for exact evaluation and rank computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPhasePoint {
    pub x: Rational,
    pub y: Rational,
    pub p1: Rational,
    pub p2: Rational,
}

impl PhasePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(e: Expression) -> Self {
        let mut out = Self::zero();
        out.insert((0, 0), e);
        out
    }

    pub fn one() -> Self {
        Self::scalar(Expression::one())
    }

    /// p1^k * p2^l with unit coefficient.
    pub fn momentum(k: u32, l: u32) -> Self {
        let mut out = Self::zero();
        out.insert((k, l), Expression::one());
        out
    }

    pub fn p1() -> Self {
        Self::momentum(1, 0)
    }

    pub fn p2() -> Self {
        Self::momentum(0, 1)
    }

    pub fn term(coeff: Expression, k: u32, l: u32) -> Self {
        let mut out = Self::zero();
        out.insert((k, l), coeff);
        out
    }

    pub fn from_momentum_map(map: BTreeMap<(u32, u32), Expression>) -> Self {
        let mut out = Self::zero();
        for (k, e) in map {
            out.insert(k, e);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::from_momentum_map(parse_phase_polynomial_str(text)?))
    }

    fn insert(&mut self, key: (u32, u32), e: Expression) {
        if e.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Expression::zero);
        *entry = &*entry + &e;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Expression)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: u32, l: u32) -> Expression {
        self.terms.get(&(k, l)).cloned().unwrap_or_default()
    }

    /// Highest total momentum degree (None for the zero polynomial).
    pub fn momentum_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(k, l)| k + l).max()
    }

    /// Classical observables: every coefficient hbar-free and real.
    pub fn is_classical_real(&self) -> bool {
        self.terms.values().all(|e| e.is_classical_real())
    }

    pub fn substitute_hbar_zero(&self) -> Self {
        let mut out = Self::zero();
        for (k, e) in &self.terms {
            out.insert(*k, e.substitute_hbar_zero());
        }
        out
    }

    pub fn substitute_alpha(&self, value: &Rational) -> Self {
        let mut out = Self::zero();
        for (k, e) in &self.terms {
            out.insert(*k, e.substitute_alpha(value));
        }
        out
    }

    pub fn substitute_hbar(&self, value: &Rational) -> Self {
        let mut out = Self::zero();
        for (k, e) in &self.terms {
            out.insert(*k, e.substitute_hbar(value));
        }
        out
    }

    pub fn scale(&self, e: &Expression) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.insert(*k, c * e);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to a position variable.
    pub fn diff_pos(&self, var: Var) -> Self {
        let mut out = Self::zero();
        for (k, e) in &self.terms {
            out.insert(*k, e.diff(var));
        }
        out
    }

    /// Partial derivative with respect to p1 or p2.
    pub fn diff_momentum(&self, which: usize) -> Self {
        let mut out = Self::zero();
        for (&(k, l), e) in &self.terms {
            match which {
                1 if k > 0 => {
                    out.insert((k - 1, l), e.scale(&GaussianRational::from_int(k as i64)))
                }
                2 if l > 0 => {
                    out.insert((k, l - 1), e.scale(&GaussianRational::from_int(l as i64)))
                }
                _ => {}
            }
        }
        out
    }

    /// Poisson bracket with the convention {x, p1} = +1:
    /// {a,b} = a_x b_p1 - a_p1 b_x + a_y b_p2 - a_p2 b_y.
    pub fn poisson_bracket(&self, other: &Self) -> Self {
        let ax = self.diff_pos(Var::X);
        let ay = self.diff_pos(Var::Y);
        let ap1 = self.diff_momentum(1);
        let ap2 = self.diff_momentum(2);
        let bx = other.diff_pos(Var::X);
        let by = other.diff_pos(Var::Y);
        let bp1 = other.diff_momentum(1);
        let bp2 = other.diff_momentum(2);
        &(&(&ax * &bp1) - &(&ap1 * &bx)) + &(&(&ay * &bp2) - &(&ap2 * &by))
    }

    /// Numeric evaluation (complex); classical-real inputs give a real
    /// result with imaginary part exactly zero.
    pub fn eval_complex(&self, at: &PhasePoint, alpha: f64, hbar: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(k, l), e) in &self.terms {
            let c = e.eval_numeric(at.x, at.y, alpha, hbar)?;
            acc += c * at.p1.powi(k as i32) * at.p2.powi(l as i32);
        }
        Ok(acc)
    }

    /// Numeric evaluation of a classical-real observable.
    pub fn eval_at(&self, at: &PhasePoint, alpha: f64, hbar: f64) -> Result<f64> {
        Ok(self.eval_complex(at, alpha, hbar)?.re)
    }

    /// Exact evaluation at a rational phase-space point.
    pub fn eval_exact(
        &self,
        at: &RationalPhasePoint,
        alpha: &Rational,
        hbar: &Rational,
    ) -> Result<GaussianRational> {
        let mut acc = GaussianRational::zero();
        for (&(k, l), e) in &self.terms {
            let c = e.eval_exact(&at.x, &at.y, alpha, hbar)?;
            let pk = pow_rational(&at.p1, &rat(k as i64, 1))?;
            let pl = pow_rational(&at.p2, &rat(l as i64, 1))?;
            acc += c.scale(&(pk * pl));
        }
        Ok(acc)
    }

    /// Max term magnitude at a probe point (residual summary).
    pub fn probe_magnitude(&self, at: &PhasePoint, alpha: f64, hbar: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(k, l), e)| {
                e.probe_magnitude(at.x, at.y, alpha, hbar)
                    * at.p1.powi(k as i32).abs()
                    * at.p2.powi(l as i32).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Exact rank of the |fns| x 4 Jacobian d(fns)/d(x, y, p1, p2) at a
/// rational point. Fractional powers of x must have exact rational values
/// at the point (choose x a perfect cube for cube-root potentials).
pub fn jacobian_rank(
    fns: &[&PhasePolynomial],
    at: &RationalPhasePoint,
    alpha: &Rational,
    hbar: &Rational,
) -> Result<usize> {
    if at.x.is_zero() || at.x.is_negative() {
        return Err(Error::Domain("Jacobian probe point needs x > 0".into()));
    }
    let mut rows = Vec::with_capacity(fns.len());
    for f in fns {
        let partials = [
            f.diff_pos(Var::X),
            f.diff_pos(Var::Y),
            f.diff_momentum(1),
            f.diff_momentum(2),
        ];
        let mut row = Vec::with_capacity(4);
        for p in &partials {
            let v = p.eval_exact(at, alpha, hbar)?;
            if !v.is_real() {
                return Err(Error::Invalid(
                    "Jacobian rank needs real-valued observables".into(),
                ));
            }
            row.push(v.re);
        }
        rows.push(row);
    }
    Ok(RatMatrix::from_rows(rows).rank())
}

impl Add for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn add(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        let mut out = self.clone();
        for (k, e) in &rhs.terms {
            out.insert(*k, e.clone());
        }
        out
    }
}

impl Sub for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn sub(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        let mut out = self.clone();
        for (k, e) in &rhs.terms {
            out.insert(*k, -e.clone());
        }
        out
    }
}

impl Neg for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn neg(self) -> PhasePolynomial {
        PhasePolynomial {
            terms: self.terms.iter().map(|(k, e)| (*k, -e.clone())).collect(),
        }
    }
}

impl Mul for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn mul(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        let mut out = PhasePolynomial::zero();
        for (&(k1, l1), e1) in &self.terms {
            for (&(k2, l2), e2) in &rhs.terms {
                out.insert((k1 + k2, l1 + l2), e1 * e2);
            }
        }
        out
    }
}

impl Add for PhasePolynomial {
    type Output = PhasePolynomial;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Sub for PhasePolynomial {
    type Output = PhasePolynomial;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl Mul for PhasePolynomial {
    type Output = PhasePolynomial;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Neg for PhasePolynomial {
    type Output = PhasePolynomial;
    fn neg(self) -> Self {
        -&self
    }
}

impl FromStr for PhasePolynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn momentum_factors(k: u32, l: u32) -> Vec<String> {
    let mut parts = Vec::new();
    for (name, pow) in [("p1", k), ("p2", l)] {
        match pow {
            0 => {}
            1 => parts.push(name.to_string()),
            p => parts.push(format!("{name}^{p}")),
        }
    }
    parts
}

impl fmt::Display for PhasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(k, l), e) in &self.terms {
            let momenta = momentum_factors(k, l);
            if momenta.is_empty() {
                // Scalar part: print its terms inline.
                let body = e.to_string();
                if first {
                    write!(f, "{body}")?;
                } else if let Some(stripped) = body.strip_prefix('-') {
                    write!(f, " - {stripped}")?;
                } else {
                    write!(f, " + {body}")?;
                }
            } else {
                let (negative, factor) = e.factor_form();
                let mut pieces = Vec::new();
                if factor != "1" {
                    pieces.push(factor);
                }
                pieces.extend(momenta);
                let body = pieces.join("*");
                if first {
                    if negative {
                        write!(f, "-")?;
                    }
                    write!(f, "{body}")?;
                } else if negative {
                    write!(f, " - {body}")?;
                } else {
                    write!(f, " + {body}")?;
                }
            }
            first = false;
        }
        Ok(())
    }
}
